import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxenc.encode import (
    DEFAULT_LAMBDA_GRID,
    brain_score,
    detrend_blocks,
    loo_residuals,
    make_split_plan,
    pearson,
    ridge_closed_form,
    ridge_solve,
    standardize,
)
from voxenc.synthbench import SynthConfig, default_plan, even_blocks, gen_linear_dataset
from voxenc.types import ResponseMatrix


def test_lambda_grid_definition():
    assert len(DEFAULT_LAMBDA_GRID) == 20
    assert DEFAULT_LAMBDA_GRID[0] == pytest.approx(10.0)
    assert DEFAULT_LAMBDA_GRID[-1] == pytest.approx(1e8)
    ratios = DEFAULT_LAMBDA_GRID[1:] / DEFAULT_LAMBDA_GRID[:-1]
    assert np.allclose(ratios, ratios[0])


class TestDetrend:
    def test_exact_linear_trend_removed(self):
        t = np.arange(10.0)
        y = ResponseMatrix((3 * t + 1)[:, None])
        out = detrend_blocks(y, [(0, 10)])
        assert np.allclose(out.data, 0, atol=1e-10)

    def test_residual_orthogonal_to_line(self):
        rng = np.random.default_rng(0)
        y = ResponseMatrix(rng.normal(size=(20, 3)))
        out = detrend_blocks(y, [(0, 10), (10, 20)])
        for a, b in [(0, 10), (10, 20)]:
            seg = out.data[a:b]
            t = np.arange(b - a)
            assert np.allclose(seg.mean(axis=0), 0, atol=1e-12)
            assert np.allclose(t @ seg, 0, atol=1e-9)

    def test_blocks_independent(self):
        t = np.arange(5.0)
        col = np.concatenate([2 * t, -7 * t + 3])
        out = detrend_blocks(ResponseMatrix(col[:, None]), [(0, 5), (5, 10)])
        assert np.allclose(out.data, 0, atol=1e-10)

    def test_short_block_errors(self):
        with pytest.raises(ValueError, match=">= 3"):
            detrend_blocks(ResponseMatrix(np.zeros((5, 1))), [(0, 2), (2, 5)])

    def test_partial_coverage_errors(self):
        with pytest.raises(ValueError, match="cover"):
            detrend_blocks(ResponseMatrix(np.zeros((10, 1))), [(0, 5)])


class TestSplitPlan:
    def test_12_blocks_12_folds(self):
        blocks = [(5 * i, 5 * (i + 1)) for i in range(12)]
        plan = make_split_plan(blocks)
        assert plan.n_folds == 12
        for train_ids, test_ids in plan.folds:
            assert len(test_ids) == 1
            assert set(train_ids) | set(test_ids) == set(range(12))
            assert set(train_ids) & set(test_ids) == set()
        tested = [t for _, te in plan.folds for t in te]
        assert sorted(tested) == list(range(12))

    def test_minimum_three_blocks(self):
        assert make_split_plan([(0, 3), (3, 6), (6, 9)]).n_folds == 3
        with pytest.raises(ValueError):
            make_split_plan([(0, 3), (3, 6)])


class TestStandardize:
    def test_two_point(self):
        out, _, mean, std = standardize(np.array([[1.0], [3.0]]))
        assert np.allclose(out[:, 0], [-1, 1])
        assert mean[0] == 2.0 and std[0] == 1.0

    def test_apply_at_train_mean(self):
        train = np.array([[1.0], [3.0], [5.0]])
        _, applied, _, _ = standardize(train, np.array([[3.0]]))
        assert applied[0, 0] == 0.0

    def test_zero_variance_guard(self):
        out, applied, _, _ = standardize(np.full((4, 1), 7.0), np.array([[9.0]]))
        assert np.all(out == 0)
        assert np.all(applied == 0)


class TestRidgeSolve:
    def test_matches_dense_oracle_single_lambda(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(40, 6))
        w_true = rng.normal(size=(6, 3))
        Y = X @ w_true
        fit = ridge_solve(X, Y, np.array([10.0]))
        oracle = ridge_closed_form(X, Y, 10.0)
        assert np.abs(fit.weights - oracle).max() < 1e-10

    def test_chosen_lambda_in_grid(self):
        rng = np.random.default_rng(2)
        fit = ridge_solve(rng.normal(size=(30, 5)), rng.normal(size=(30, 8)))
        assert np.all(np.isin(fit.chosen_lambda, DEFAULT_LAMBDA_GRID))

    def test_noise_targets_prefer_large_lambda(self):
        # pure-noise targets: LOO should prefer the strongest shrinkage far
        # more often than the 1/20 chance rate
        rng = np.random.default_rng(3)
        hits = 0
        n_draws = 50
        for _ in range(n_draws):
            X = rng.normal(size=(24, 6))
            y = rng.normal(size=(24, 1))
            fit = ridge_solve(X, y)
            if fit.chosen_lambda[0] == DEFAULT_LAMBDA_GRID[-1]:
                hits += 1
        assert hits / n_draws > 0.5

    def test_non_finite_rejected(self):
        X = np.ones((5, 2))
        X[0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            ridge_solve(X, np.ones((5, 1)))

    def test_loo_identity_closed_form(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(15, 4))
        Y = rng.normal(size=(15, 2))
        for lam in (10.0, 1e4):
            loo = loo_residuals(X, Y, lam)
            explicit = np.empty_like(loo)
            for i in range(15):
                mask = np.arange(15) != i
                w = ridge_closed_form(X[mask], Y[mask], lam)
                explicit[i] = Y[i] - X[i] @ w
            assert np.abs(loo - explicit).max() < 1e-6

    def test_scale_equivariant_selection(self):
        # standardization absorbs target scale, so the selected lambda is
        # unchanged when Y is multiplied by a positive constant
        rng = np.random.default_rng(5)
        X = rng.normal(size=(30, 6))
        Y = rng.normal(size=(30, 4)) + X @ rng.normal(size=(6, 4))
        Ys, _, _, _ = standardize(Y)
        l1 = ridge_solve(X, Ys).chosen_lambda
        Ys2, _, _, _ = standardize(7.5 * Y)
        l2 = ridge_solve(X, Ys2).chosen_lambda
        assert np.allclose(l1, l2)

    def test_threaded_selection_identical(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(50, 8))
        Y = rng.normal(size=(50, 3000))
        f1 = ridge_solve(X, Y, n_threads=1)
        f4 = ridge_solve(X, Y, n_threads=4)
        assert np.array_equal(f1.weights, f4.weights)
        assert np.array_equal(f1.chosen_lambda, f4.chosen_lambda)


class TestPearson:
    def test_self_correlation(self):
        r, flagged = pearson(np.array([1.0, 2, 3]), np.array([1.0, 2, 3]))
        assert r == pytest.approx(1.0) and not flagged

    def test_sign_flip(self):
        y = np.array([1.0, 2, 3, 4])
        r, _ = pearson(y, -y)
        assert r == pytest.approx(-1.0)

    def test_hand_computed_value(self):
        y_true = np.array([1.0, 2, 3, 4])
        y_pred = np.array([1.0, 2, 2, 5])
        # oracle: explicit covariance ratio
        a = y_true - y_true.mean()
        b = y_pred - y_pred.mean()
        expected = (a @ b) / np.sqrt((a @ a) * (b @ b))
        r, _ = pearson(y_true, y_pred)
        assert r == pytest.approx(expected, abs=1e-12)
        assert r == pytest.approx(6.0 / np.sqrt(45.0), abs=1e-12)  # = 0.894427...

    def test_constant_flagged(self):
        r, flagged = pearson(np.array([1.0, 1, 1]), np.array([1.0, 2, 3]))
        assert r == 0.0 and flagged

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            pearson(np.zeros(4), np.zeros(5))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=30),
           st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=30))
    def test_bounded(self, a, b):
        n = min(len(a), len(b))
        r, flagged = pearson(np.array(a[:n]), np.array(b[:n]))
        assert -1.0 <= r <= 1.0


class TestBrainScore:
    def test_noiseless_linear_recovery(self):
        cfg = SynthConfig(n_time_activation=30200, n_scans=300, n_features=8,
                          n_targets=12, snr=None, seed=3)
        ds = gen_linear_dataset(cfg)
        sm = brain_score(ds.features_at_tr.data, ds.response.data, default_plan(cfg))
        assert np.all(sm.r_mean >= 0.999)

    def test_null_scores_near_zero(self):
        cfg = SynthConfig(n_time_activation=12200, n_scans=120, n_features=8,
                          n_targets=500, snr=0.0, seed=9)
        ds = gen_linear_dataset(cfg)
        sm = brain_score(ds.features_at_tr.data, ds.response.data, default_plan(cfg))
        assert abs(sm.r_mean.mean()) < 0.05

    def test_row_mismatch(self):
        plan = make_split_plan(even_blocks(30, 3))
        with pytest.raises(ValueError, match="align"):
            brain_score(np.zeros((30, 2)), np.zeros((29, 2)), plan)

    def test_scores_bounded(self):
        rng = np.random.default_rng(10)
        plan = make_split_plan(even_blocks(40, 4))
        sm = brain_score(rng.normal(size=(40, 3)), rng.normal(size=(40, 6)), plan)
        assert np.all(sm.r_per_fold <= 1.0) and np.all(sm.r_per_fold >= -1.0)

    def test_no_leakage_from_test_rows(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(40, 4))
        Y = rng.normal(size=(40, 3))
        plan = make_split_plan(even_blocks(40, 4))
        tr, te = plan.fold_rows(0)
        Y_perm = Y.copy()
        Y_perm[te] = Y_perm[te][::-1]
        from voxenc.encode import standardize as stdz

        Xtr, _, _, _ = stdz(X[tr])
        Ytr_a, _, _, _ = stdz(Y[tr])
        Ytr_b, _, _, _ = stdz(Y_perm[tr])
        fa = ridge_solve(Xtr, Ytr_a)
        fb = ridge_solve(Xtr, Ytr_b)
        assert np.array_equal(fa.weights, fb.weights)

    def test_concatenate_scoring_option(self):
        cfg = SynthConfig(n_time_activation=12200, n_scans=120, n_features=6,
                          n_targets=8, snr=None, seed=5)
        ds = gen_linear_dataset(cfg)
        sm = brain_score(ds.features_at_tr.data, ds.response.data, default_plan(cfg),
                         scoring="concatenate")
        assert np.all(sm.r_mean >= 0.99)
