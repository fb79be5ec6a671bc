"""Selective test that the observed winner has the largest mean.

For independent ``X_j ~ N(mu_j, sd_j**2)`` with known ``sd_j``, the winner
(rank 1) is compared with each competitor ``j`` through a truncated-normal
p-value that conditions on the winner having won. The union null "the
winner is not the best" is tested by the maximum of those pairwise
p-values. A mirror-image test on the lower tail verifies the loser.

Ranks are 1-based throughout: rank 1 is the winner (largest value) for
upper-tail tests and the loser (smallest value) for lower-tail tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, SelectionEventError
from .normal import TINY_P, _log_cdf, _log_sf

__all__ = [
    "Observations",
    "PairwiseTest",
    "VerificationResult",
    "z_statistic",
    "pairwise_pvalue",
    "verify_winner",
    "verify_loser",
]

UPPER = "upper"
LOWER = "lower"


@dataclass(frozen=True, eq=False)
class Observations:
    """Labelled observations with known standard deviations.

    ``values`` and ``sds`` are kept in input order; ``order`` is the
    permutation that sorts them in descending value order, ties broken by
    input position. At most one standard deviation may be exactly zero
    (a known constant); tests between two constants are undefined.
    """

    values: np.ndarray
    sds: np.ndarray
    labels: tuple = ()
    ns: Optional[tuple] = None
    order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        sds = np.array(self.sds, dtype=float).reshape(-1)
        if values.shape != sds.shape:
            raise ValueError("values and sds must have the same length")
        if values.size == 0:
            raise InsufficientDataError("no observations")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if not np.all(np.isfinite(sds)) or np.any(sds < 0):
            raise ValueError("standard deviations must be finite and non-negative")
        if np.count_nonzero(sds == 0) > 1 or (values.size == 1 and sds[0] == 0):
            raise ValueError("at most one standard deviation may be zero")
        labels = tuple(str(lab) for lab in self.labels) if self.labels else tuple(
            str(i + 1) for i in range(values.size))
        if len(labels) != values.size:
            raise ValueError("labels must match the number of values")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be unique")
        ns = None if self.ns is None else tuple(self.ns)
        if ns is not None and len(ns) != values.size:
            raise ValueError("ns must match the number of values")
        values.setflags(write=False)
        sds.setflags(write=False)
        order = np.argsort(-values, kind="stable")
        order.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sds", sds)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "order", order)

    def __len__(self):
        return self.values.size

    @property
    def d(self) -> int:
        return self.values.size

    @property
    def sorted_values(self) -> np.ndarray:
        return self.values[self.order]

    @property
    def sorted_sds(self) -> np.ndarray:
        return self.sds[self.order]

    @property
    def sorted_labels(self) -> list:
        return [self.labels[i] for i in self.order]

    @property
    def ascending_order(self) -> np.ndarray:
        """Permutation sorting values ascending, ties by input position."""
        return np.argsort(self.values, kind="stable")

    def subset(self, ranks: Sequence[int]) -> "Observations":
        """Sub-vector holding the given 1-based descending ranks."""
        ranks = list(ranks)
        if any(r < 1 or r > self.d for r in ranks) or len(set(ranks)) != len(ranks):
            raise IndexError(f"invalid ranks {ranks} for d={self.d}")
        idx = np.sort(self.order[np.asarray(ranks, dtype=int) - 1])
        return Observations(
            self.values[idx],
            self.sds[idx],
            tuple(self.labels[i] for i in idx),
            None if self.ns is None else tuple(self.ns[i] for i in idx),
        )

    def reflect(self) -> "Observations":
        """Negated values, same sds and labels."""
        return Observations(-self.values, self.sds, self.labels, self.ns)


@dataclass(frozen=True)
class PairwiseTest:
    """One truncated-normal comparison of rank 1 against ``competitor_rank``.

    ``trunc_threshold`` is the lower truncation point of the conditional law
    of the tested value for upper tests, and the upper truncation point for
    lower tests.
    """

    competitor_rank: int
    competitor_label: str
    mu_bar: float
    sigma_bar: float
    trunc_threshold: float
    z: float
    p_value: float
    direction: str


@dataclass(frozen=True)
class VerificationResult:
    p_star: float
    argmax_competitor: int
    pairwise: list
    alpha: float
    verified: bool
    tested_label: str = ""
    direction: str = UPPER


def z_statistic(x1, xj, sd1, sdj):
    """One-sided Z statistic ``(x1 - xj) / sqrt(sd1**2 + sdj**2)``.

    Raises:
        ValueError: if a standard deviation is not positive.
    """
    if not (sd1 > 0 and sdj > 0):
        raise ValueError("standard deviations must be positive")
    return (x1 - xj) / np.hypot(sd1, sdj)


# ---------------------------------------------------------------------------
# vectorised kernels
#
# Inputs broadcast against each other. ``others`` is the max (upper) or min
# (lower) of the tested subvector with rank 1 and the competitor removed;
# use -inf / +inf when that set is empty.


def _upper_kernel(x1, s1, xj, sj, others):
    var = s1 * s1 + sj * sj
    root = np.sqrt(var)
    z_num = (x1 - xj) / root
    mu_bar = (sj * sj * x1 + s1 * s1 * xj) / var
    sigma_bar = s1 * s1 / root
    excess = others - mu_bar
    with np.errstate(divide="ignore", invalid="ignore"):
        z_den = np.where(excess > 0, excess / sigma_bar, 0.0)
    # x1 >= eta holds exactly; any excess of z_den is round-off at ties
    z_den = np.minimum(z_den, z_num)
    log_p = np.minimum(_log_sf(z_num) - _log_sf(z_den), 0.0)
    with np.errstate(under="ignore"):
        p = np.maximum(np.exp(log_p), TINY_P)
    eta = np.maximum(mu_bar, others)
    return p, mu_bar, sigma_bar, eta, z_num


def _lower_kernel(x1, s1, xj, sj, others):
    var = s1 * s1 + sj * sj
    root = np.sqrt(var)
    z_num = (x1 - xj) / root
    mu_bar = (sj * sj * x1 + s1 * s1 * xj) / var
    sigma_bar = s1 * s1 / root
    deficit = mu_bar - others
    with np.errstate(divide="ignore", invalid="ignore"):
        z_den = np.where(deficit > 0, -deficit / sigma_bar, 0.0)
    z_den = np.maximum(z_den, z_num)
    log_p = np.minimum(_log_cdf(z_num) - _log_cdf(z_den), 0.0)
    with np.errstate(under="ignore"):
        p = np.maximum(np.exp(log_p), TINY_P)
    gamma = np.minimum(mu_bar, others)
    return p, mu_bar, sigma_bar, gamma, z_num


def _winner_pvalues(x, s):
    """Pairwise upper p-values of column 0 against columns 1.. of ``x``.

    ``x`` (shape ``(..., m)``) must be sorted descending along the last
    axis. Returns an array of shape ``(..., m - 1)``.
    """
    m = x.shape[-1]
    others = np.empty(x.shape[:-1] + (m - 1,))
    others[..., :] = x[..., 1:2]
    others[..., 0] = x[..., 2] if m > 2 else -np.inf
    return _upper_kernel(x[..., :1], s[..., :1], x[..., 1:], s[..., 1:], others)[0]


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


def _oriented(obs, direction):
    if direction == UPPER:
        idx = obs.order
    elif direction == LOWER:
        idx = obs.ascending_order
    else:
        raise ValueError(f"direction must be 'upper' or 'lower', got {direction!r}")
    return obs.values[idx], obs.sds[idx], [obs.labels[i] for i in idx]


def _pairwise_sorted(x, s, labels, direction):
    """All pairwise tests of position 0 against positions 1.. of oriented data."""
    d = x.size
    if d < 2:
        raise InsufficientDataError(f"a test needs at least 2 observations, got {d}")
    upper = direction == UPPER
    if (upper and np.any(x[1:] > x[0])) or (not upper and np.any(x[1:] < x[0])):
        raise SelectionEventError("tested value is not the extreme of its subvector")
    if np.count_nonzero(s == 0) > 1:
        raise ValueError("at most one standard deviation may be zero")
    sentinel = -np.inf if upper else np.inf
    others = np.full(d - 1, x[1])
    others[0] = x[2] if d > 2 else sentinel
    kernel = _upper_kernel if upper else _lower_kernel
    p, mu_bar, sigma_bar, thresh, z = kernel(x[0], s[0], x[1:], s[1:], others)
    return [
        PairwiseTest(
            competitor_rank=j + 2,
            competitor_label=labels[j + 1],
            mu_bar=float(mu_bar[j]),
            sigma_bar=float(sigma_bar[j]),
            trunc_threshold=float(thresh[j]),
            z=float(z[j]),
            p_value=float(p[j]),
            direction=direction,
        )
        for j in range(d - 1)
    ]


def pairwise_pvalue(obs: Observations, j: int, direction: str = UPPER) -> PairwiseTest:
    """Truncated-normal p-value of rank 1 against rank ``j``.

    For ``direction="upper"`` ranks count down from the largest value; for
    ``"lower"`` they count up from the smallest.

    Raises:
        IndexError: if ``j`` is not in ``2..d``.
    """
    x, s, labels = _oriented(obs, direction)
    if not 2 <= j <= x.size:
        raise IndexError(f"competitor rank must be in 2..{x.size}, got {j}")
    return _pairwise_sorted(x, s, labels, direction)[j - 2]


def _aggregate(tests, alpha, label, direction):
    ps = np.array([t.p_value for t in tests])
    k = int(np.argmax(ps))
    p_star = float(ps[k])
    return VerificationResult(
        p_star=p_star,
        argmax_competitor=tests[k].competitor_rank,
        pairwise=tests,
        alpha=alpha,
        verified=p_star <= alpha,
        tested_label=label,
        direction=direction,
    )


def verify_winner(obs: Observations, alpha: float = 0.05,
                  ranks: Optional[Sequence[int]] = None) -> VerificationResult:
    """Test whether the observed winner has the largest mean.

    Args:
        obs: the observations.
        alpha: significance level for the verdict.
        ranks: optional 1-based descending ranks selecting the subvector to
            test; the largest of them plays the winner.

    Returns:
        VerificationResult whose ``p_star`` is the maximum pairwise p-value.
    """
    alpha = _check_alpha(alpha)
    if ranks is not None:
        obs = obs.subset(ranks)
    x, s, labels = _oriented(obs, UPPER)
    return _aggregate(_pairwise_sorted(x, s, labels, UPPER), alpha, labels[0], UPPER)


def verify_loser(obs: Observations, alpha: float = 0.05,
                 ranks: Optional[Sequence[int]] = None) -> VerificationResult:
    """Test whether the observed loser has the smallest mean.

    Mirror image of :func:`verify_winner` built on lower-tail p-values.
    ``ranks`` still index the descending order.
    """
    alpha = _check_alpha(alpha)
    if ranks is not None:
        obs = obs.subset(ranks)
    x, s, labels = _oriented(obs, LOWER)
    return _aggregate(_pairwise_sorted(x, s, labels, LOWER), alpha, labels[0], LOWER)
