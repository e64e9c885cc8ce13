"""Brain-score core: block detrending, leave-one-block-out splits, ridge with
exact leave-one-out lambda selection on an SVD path, and Pearson scoring.

Per outer fold the training design is standardized, decomposed once with a
thin SVD, and every lambda on the grid is evaluated through the closed-form
LOO residual identity e_i = (y_i - yhat_i) / (1 - h_ii). Each target picks
its own lambda (ties break toward stronger regularization), then full-train
weights for the winning lambda are assembled per lambda-group.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .types import FeatureMatrix, ResponseMatrix, ScoreMap

#: 20 log-spaced penalties from 10 to 1e8 inclusive.
DEFAULT_LAMBDA_GRID = np.logspace(1.0, 8.0, 20)

#: Targets are processed in fixed-size chunks so results do not depend on the
#: worker count.
_CHUNK = 1024


@dataclass
class SplitPlan:
    """Leave-one-block-out folds: (train_block_ids, test_block_ids) pairs."""

    folds: list[tuple[list[int], list[int]]]
    blocks: list[tuple[int, int]]

    @property
    def n_folds(self) -> int:
        return len(self.folds)

    def fold_rows(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        train_ids, test_ids = self.folds[fold]
        train = np.concatenate([np.arange(*self.blocks[b]) for b in train_ids])
        test = np.concatenate([np.arange(*self.blocks[b]) for b in test_ids])
        return train, test


@dataclass
class RidgeFit:
    weights: np.ndarray  # d_x x d_y
    chosen_lambda: np.ndarray  # per target
    x_mean: np.ndarray = field(default=None)  # type: ignore[assignment]
    x_std: np.ndarray = field(default=None)  # type: ignore[assignment]
    y_mean: np.ndarray = field(default=None)  # type: ignore[assignment]
    y_std: np.ndarray = field(default=None)  # type: ignore[assignment]


def detrend_blocks(y: ResponseMatrix, blocks: list[tuple[int, int]]) -> ResponseMatrix:
    """Remove a least-squares line (intercept + slope) per column, per block."""
    covered = sorted(blocks)
    if not covered or covered[0][0] != 0 or covered[-1][1] != y.n_scans or any(
        covered[i][0] != covered[i - 1][1] for i in range(1, len(covered))
    ):
        raise ValueError("blocks must cover all response rows without gaps or overlap")
    out = y.data.copy()
    for a, b in blocks:
        n = b - a
        if n < 3:
            raise ValueError(f"block ({a}, {b}) has {n} rows; need >= 3 to detrend")
        t = np.arange(n, dtype=np.float64)
        basis = np.column_stack([np.ones(n), t])
        coef, *_ = np.linalg.lstsq(basis, out[a:b], rcond=None)
        out[a:b] -= basis @ coef
    return ResponseMatrix(out, y.tr_seconds, y.target_labels)


def make_split_plan(blocks: list[tuple[int, int]]) -> SplitPlan:
    """One fold per block: test on it, train on all others."""
    if len(blocks) < 3:
        raise ValueError(f"need >= 3 blocks for leave-one-block-out, got {len(blocks)}")
    n = len(blocks)
    folds = [([j for j in range(n) if j != i], [i]) for i in range(n)]
    return SplitPlan(folds, list(blocks))


def standardize(
    train: np.ndarray, apply_to: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray, np.ndarray]:
    """Column-wise (v - mean)/std using train statistics only.

    Zero-variance columns are mapped to zeros. Returns (train_std,
    applied_std, mean, std).
    """
    if train.shape[0] < 2:
        raise ValueError("need >= 2 training rows to standardize")
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    safe = np.where(std > 0, std, 1.0)
    out_train = (train - mean) / safe
    out_train[:, std == 0] = 0.0
    out_apply = None
    if apply_to is not None:
        out_apply = (apply_to - mean) / safe
        out_apply[:, std == 0] = 0.0
    return out_train, out_apply, mean, std


def ridge_solve(
    X: np.ndarray,
    Y: np.ndarray,
    grid: np.ndarray | None = None,
    n_threads: int = 1,
) -> RidgeFit:
    """Per-target ridge with exact-LOO lambda selection over the grid.

    X and Y are assumed already standardized (no intercept is fit). A single
    thin SVD of X serves every lambda; LOO mean squared error is evaluated in
    closed form and the minimizing lambda is refit on the full training set.
    """
    grid = DEFAULT_LAMBDA_GRID if grid is None else np.asarray(grid, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if Y.ndim == 1:
        Y = Y[:, None]
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ValueError("non-finite inputs to ridge_solve")
    if X.shape[0] < 2:
        raise ValueError("need >= 2 training rows")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    UtY = U.T @ Y
    U2 = U**2
    s2 = s**2

    n_targets = Y.shape[1]
    chosen_idx = np.empty(n_targets, dtype=np.intp)
    chunks = [slice(a, min(a + _CHUNK, n_targets)) for a in range(0, n_targets, _CHUNK)]

    def _select(chunk: slice) -> None:
        loo_mse = np.empty((len(grid), chunk.stop - chunk.start))
        Yc = Y[:, chunk]
        UtYc = UtY[:, chunk]
        for gi, lam in enumerate(grid):
            d = s2 / (s2 + lam)
            resid = Yc - U @ (d[:, None] * UtYc)
            one_minus_h = 1.0 - U2 @ d
            loo_mse[gi] = np.mean((resid / one_minus_h[:, None]) ** 2, axis=0)
        # ties break toward the larger lambda: scan from the top of the grid
        rev_best = np.argmin(loo_mse[::-1], axis=0)
        chosen_idx[chunk] = len(grid) - 1 - rev_best

    _run_chunks(_select, chunks, n_threads)

    weights = np.empty((X.shape[1], n_targets))
    for gi in range(len(grid)):
        cols = np.flatnonzero(chosen_idx == gi)
        if cols.size == 0:
            continue
        shrink = s / (s2 + grid[gi])
        weights[:, cols] = Vt.T @ (shrink[:, None] * UtY[:, cols])
    return RidgeFit(weights=weights, chosen_lambda=grid[chosen_idx])


def ridge_closed_form(X: np.ndarray, Y: np.ndarray, lam: float) -> np.ndarray:
    """Dense normal-equations solve (X'X + lam I)^-1 X'Y."""
    p = X.shape[1]
    return np.linalg.solve(X.T @ X + lam * np.eye(p), X.T @ Y)


def loo_residuals(X: np.ndarray, Y: np.ndarray, lam: float) -> np.ndarray:
    """Closed-form leave-one-out residuals for a single penalty."""
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    d = s**2 / (s**2 + lam)
    Y2 = Y[:, None] if Y.ndim == 1 else Y
    resid = Y2 - U @ (d[:, None] * (U.T @ Y2))
    h = (U**2) @ d
    out = resid / (1.0 - h)[:, None]
    return out[:, 0] if Y.ndim == 1 else out


def pearson(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[float, bool]:
    """Sample Pearson correlation; (0.0, True) when either side is constant."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.shape[0] < 3:
        raise ValueError("need >= 3 samples")
    a = y_true - y_true.mean()
    b = y_pred - y_pred.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0, True
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0)), False


def _pearson_columns(Yt: np.ndarray, Yp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = Yt - Yt.mean(axis=0)
    b = Yp - Yp.mean(axis=0)
    na = np.linalg.norm(a, axis=0)
    nb = np.linalg.norm(b, axis=0)
    flagged = (na == 0) | (nb == 0)
    denom = np.where(flagged, 1.0, na * nb)
    r = np.clip(np.einsum("ij,ij->j", a, b) / denom, -1.0, 1.0)
    r[flagged] = 0.0
    return r, flagged


def _run_chunks(fn, chunks, n_threads: int) -> None:
    if n_threads <= 1 or len(chunks) <= 1:
        for c in chunks:
            fn(c)
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(fn, chunks))


def brain_score(
    X: FeatureMatrix | np.ndarray,
    Y: ResponseMatrix | np.ndarray,
    plan: SplitPlan,
    grid: np.ndarray | None = None,
    n_threads: int = 1,
    scoring: str = "mean_folds",
) -> ScoreMap:
    """Cross-validated encoding score per target.

    Per fold: standardize on train rows, fit ridge with per-target LOO lambda
    selection, predict the held-out block, correlate per target. ``scoring``
    is "mean_folds" (default) or "concatenate" (one correlation over pooled
    held-out predictions).
    """
    Xd = X.data if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)
    Yd = Y.data if isinstance(Y, ResponseMatrix) else np.asarray(Y, dtype=np.float64)
    if Xd.shape[0] != Yd.shape[0]:
        raise ValueError(f"X has {Xd.shape[0]} rows, Y has {Yd.shape[0]}; must align at TR")
    n_targets = Yd.shape[1]
    n_folds = plan.n_folds
    r_per_fold = np.zeros((n_folds, n_targets))
    flagged = np.zeros(n_targets, dtype=bool)
    pooled_pred = np.zeros_like(Yd) if scoring == "concatenate" else None

    for k in range(n_folds):
        tr, te = plan.fold_rows(k)
        Xtr, Xte, _, _ = standardize(Xd[tr], Xd[te])
        Ytr, Yte, _, _ = standardize(Yd[tr], Yd[te])
        fit = ridge_solve(Xtr, Ytr, grid, n_threads=n_threads)
        pred = Xte @ fit.weights
        if pooled_pred is not None:
            pooled_pred[te] = pred
        else:
            r, fl = _pearson_columns(Yte, pred)
            r_per_fold[k] = r
            flagged |= fl

    if pooled_pred is not None:
        r_mean, flagged = _pearson_columns(Yd - Yd.mean(axis=0), pooled_pred)
        r_per_fold = np.tile(r_mean, (n_folds, 1))
    else:
        r_mean = r_per_fold.mean(axis=0)
    return ScoreMap(r_mean=r_mean, r_per_fold=r_per_fold, undefined=flagged)
