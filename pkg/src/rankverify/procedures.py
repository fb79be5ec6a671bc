"""Top-K procedures built on the winner test.

``rank_top`` verifies a prefix of the observed ordering one rank at a time,
stopping at the first failure. ``rank_bottom`` does the same from the
smallest value upward. ``topk_set_test`` verifies membership of the top-K
set without ordering it. None of them applies a multiplicity correction;
validity comes from the nested structure of the nulls (ranking) and from
taking a maximum over a union null (set).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError
from .winner import (
    LOWER,
    UPPER,
    Observations,
    _check_alpha,
    _oriented,
    _pairwise_sorted,
    _upper_kernel,
)

__all__ = [
    "RankStep",
    "RankingResult",
    "SetTestResult",
    "rank_top",
    "rank_bottom",
    "topk_set_test",
]


@dataclass(frozen=True)
class RankStep:
    """Outcome of the k-th test of the ranking procedure.

    ``argmax_competitor`` is a rank in the full ordering (not the suffix).
    """

    rank: int
    label: str
    p_star: float
    argmax_competitor: int


@dataclass(frozen=True)
class RankingResult:
    verified_count: int
    per_rank: list
    alpha: float
    direction: str
    labels: list

    @property
    def verified_labels(self) -> list:
        """Labels of the verified ranks, best first."""
        return self.labels[: self.verified_count]


@dataclass(frozen=True)
class SetTestResult:
    k_set: int
    p_star: float
    worst_pair: tuple
    per_element: list
    alpha: float
    verified: bool
    labels: list


def _rank(obs, alpha, direction):
    alpha = _check_alpha(alpha)
    x, s, labels = _oriented(obs, direction)
    d = x.size
    if d < 2:
        raise InsufficientDataError(f"ranking needs at least 2 observations, got {d}")
    steps = []
    for k in range(d - 1):
        tests = _pairwise_sorted(x[k:], s[k:], labels[k:], direction)
        ps = np.array([t.p_value for t in tests])
        a = int(np.argmax(ps))
        steps.append(RankStep(k + 1, labels[k], float(ps[a]), tests[a].competitor_rank + k))
        if ps[a] > alpha:
            break
    n_reject = sum(step.p_star <= alpha for step in steps)
    # every one of the d - 1 tests rejecting orders all d elements
    count = d if n_reject == d - 1 else n_reject
    return RankingResult(count, steps, alpha, "top" if direction == UPPER else "bottom", labels)


def rank_top(obs: Observations, alpha: float = 0.05) -> RankingResult:
    """Number of leading ranks whose order is verified at level ``alpha``.

    The k-th test is the winner test on ranks ``k..d``. Testing stops at the
    first non-rejection; ``per_rank`` holds every test that was run.
    """
    return _rank(obs, alpha, UPPER)


def rank_bottom(obs: Observations, alpha: float = 0.05) -> RankingResult:
    """Mirror of :func:`rank_top` counting up from the smallest value."""
    return _rank(obs, alpha, LOWER)


def _set_pvalues(x, s, k_set):
    """p_{jc} for j < k_set (rows) against c >= k_set (columns).

    ``x`` is sorted descending. Each row is the winner test of element j
    inside the subvector ``{x_j} + x[k_set:]``.
    """
    tail = x[..., k_set:]
    m = tail.shape[-1]
    others = np.empty(x.shape[:-1] + (1, m))
    others[..., :] = tail[..., None, :1]
    others[..., 0] = tail[..., None, 1] if m > 1 else -np.inf
    return _upper_kernel(
        x[..., :k_set, None], s[..., :k_set, None], tail[..., None, :], s[..., None, k_set:], others
    )[0]


def topk_set_test(obs: Observations, k_set: int, alpha: float = 0.05) -> SetTestResult:
    """Test that the observed top-``k_set`` set holds the ``k_set`` largest means.

    Raises:
        ValueError: if ``k_set`` is not in ``1..d-1``.
    """
    alpha = _check_alpha(alpha)
    x, s, labels = _oriented(obs, UPPER)
    d = x.size
    if d < 2:
        raise InsufficientDataError(f"set test needs at least 2 observations, got {d}")
    if not 1 <= k_set <= d - 1:
        raise ValueError(f"k_set must be in 1..{d - 1}, got {k_set}")
    if np.count_nonzero(s == 0) > 1:
        raise ValueError("at most one standard deviation may be zero")
    p = _set_pvalues(x, s, k_set)
    per_element = [float(v) for v in p.max(axis=1)]
    j, c = np.unravel_index(int(np.argmax(p)), p.shape)
    p_star = float(p[j, c])
    return SetTestResult(
        k_set=k_set,
        p_star=p_star,
        worst_pair=(int(j) + 1, int(c) + k_set + 1),
        per_element=per_element,
        alpha=alpha,
        verified=p_star <= alpha,
        labels=labels,
    )
