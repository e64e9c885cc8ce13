"""Pure-numpy CTC forward recursion (fallback when the compiled kernel is
unavailable). Same contract as the Cython version: blank-extended targets,
log-space alpha recursion, returns total log-likelihood.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -np.inf


def forward_log_likelihood(log_probs: np.ndarray, extended: np.ndarray) -> float:
    T = log_probs.shape[0]
    S = extended.shape[0]
    alpha = np.full(S, NEG_INF)
    alpha[0] = log_probs[0, extended[0]]
    if S > 1:
        alpha[1] = log_probs[0, extended[1]]
    # skip transition s-2 -> s is legal only onto a label differing from l'[s-2]
    can_skip = np.zeros(S, dtype=bool)
    can_skip[2:] = (extended[2:] != 0) & (extended[2:] != extended[:-2])
    for t in range(1, T):
        stay = alpha
        prev = np.concatenate(([NEG_INF], alpha[:-1]))
        skip = np.concatenate(([NEG_INF, NEG_INF], alpha[:-2]))
        skip = np.where(can_skip, skip, NEG_INF)
        alpha = np.logaddexp(np.logaddexp(stay, prev), skip) + log_probs[t, extended]
    if S == 1:
        return float(alpha[0])
    return float(np.logaddexp(alpha[-1], alpha[-2]))
