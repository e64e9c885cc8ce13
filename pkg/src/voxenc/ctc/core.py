"""CTC alignment likelihood, brute-force oracle, greedy decoding and WER/CER.

Class index 0 is the blank. The forward recursion runs in log-space over the
blank-extended target sequence; the brute-force oracle enumerates every frame
path and is usable only at tiny sizes (it exists to cross-check the DP).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import backend

BLANK = 0


@dataclass
class CtcInstance:
    """Per-frame class log-probabilities plus the target label sequence."""

    log_probs: np.ndarray  # T x n_classes
    targets: list[int]

    def __post_init__(self) -> None:
        self.log_probs = np.asarray(self.log_probs, dtype=np.float64)
        if self.log_probs.ndim != 2:
            raise ValueError("log_probs must be T x n_classes")
        row_mass = np.exp(self.log_probs).sum(axis=1)
        if np.any(np.abs(row_mass - 1.0) > 1e-9):
            bad = int(np.argmax(np.abs(row_mass - 1.0)))
            raise ValueError(f"frame {bad}: probabilities sum to {row_mass[bad]}, not 1")
        n_classes = self.log_probs.shape[1]
        for v in self.targets:
            if not 1 <= v < n_classes:
                raise ValueError(f"target label {v} outside [1, {n_classes})")


def _extend_with_blanks(targets: list[int]) -> np.ndarray:
    ext = np.full(2 * len(targets) + 1, BLANK, dtype=np.int64)
    ext[1::2] = targets
    return ext


def min_frames(targets: list[int]) -> int:
    """Shortest path length: every label plus a blank between repeats."""
    repeats = sum(1 for a, b in zip(targets, targets[1:]) if a == b)
    return len(targets) + repeats


def ctc_log_likelihood(inst: CtcInstance) -> float:
    """Log of the summed probability over all valid alignments.

    Returns -inf when the target cannot fit in the available frames.
    """
    if min_frames(inst.targets) > inst.log_probs.shape[0]:
        return -np.inf
    ext = _extend_with_blanks(inst.targets)
    return backend.forward_log_likelihood(np.ascontiguousarray(inst.log_probs), ext)


def collapse(path: list[int] | np.ndarray) -> list[int]:
    """CTC collapse: merge repeats, then drop blanks."""
    out: list[int] = []
    prev = None
    for c in path:
        if c != prev and c != BLANK:
            out.append(int(c))
        prev = c
    return out


def ctc_brute_force(inst: CtcInstance) -> float:
    """Enumeration oracle: sum probability of every path collapsing to targets.

    Cost is n_classes**T; keep T <= ~8.
    """
    T, n_classes = inst.log_probs.shape
    target = list(inst.targets)
    terms = []
    for path in itertools.product(range(n_classes), repeat=T):
        if collapse(path) == target:
            terms.append(sum(inst.log_probs[t, c] for t, c in enumerate(path)))
    if not terms:
        return -np.inf
    terms = np.asarray(terms)
    m = terms.max()
    return float(m + np.log(np.exp(terms - m).sum()))


def count_alignments(T: int, targets: list[int], n_classes: int) -> int:
    """Number of length-T paths that collapse to ``targets``."""
    count = 0
    for path in itertools.product(range(n_classes), repeat=T):
        if collapse(path) == list(targets):
            count += 1
    return count


def ctc_greedy_decode(log_probs: np.ndarray) -> list[int]:
    """Best-per-frame path, collapsed."""
    return collapse(np.argmax(np.asarray(log_probs), axis=1))


def _edit_distance(ref: list, hyp: list) -> int:
    prev = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, start=1):
        cur = [i] + [0] * len(hyp)
        for j, h in enumerate(hyp, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (r != h))
        prev = cur
    return prev[-1]


def word_error_rate(reference: list[str], hypothesis: list[str]) -> float:
    """Word-level Levenshtein distance divided by reference length."""
    if len(reference) == 0:
        raise ValueError("reference must be non-empty")
    return _edit_distance(list(reference), list(hypothesis)) / len(reference)


def char_error_rate(reference: str, hypothesis: str) -> float:
    if len(reference) == 0:
        raise ValueError("reference must be non-empty")
    return _edit_distance(list(reference), list(hypothesis)) / len(reference)
