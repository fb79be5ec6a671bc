"""How badly the naive winner-versus-runner-up test fails with unequal variances.

With equal variances, a one-sided level ``alpha/2`` Z-test between winner
and runner-up verifies the winner. With unequal variances it does not:
when the true best A has a wide distribution and falls below two tightly
distributed competitors B and C, the naive test still rejects whenever B
clears C by a wide margin. :func:`naive_error_lower_bound` integrates the
probability of that event numerically; :func:`naive_error_mc` estimates it
by simulation as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .errors import InsufficientDataError
from .normal import std_normal_quantile
from .simulation import RandomStream, Scenario, SimReport
from .winner import Observations

__all__ = [
    "REFERENCE_SCENARIO",
    "SPEC_LITERAL_SCENARIO",
    "NaiveBoundConfig",
    "naive_pvalue",
    "naive_error_lower_bound",
    "naive_error_mc",
]

#: Five variables: a wide true best at 2, three tight competitors just
#: below it and a tight straggler at -2.
REFERENCE_SCENARIO = Scenario(
    means=[2.0, 1.9, 1.8, 1.7, -2.0],
    sds=[2.0, 0.01, 0.01, 0.01, 0.01],
)

#: Same means with the wide distribution on the straggler instead. The
#: true best is then tight and the naive test is almost never fooled.
SPEC_LITERAL_SCENARIO = Scenario(
    means=[2.0, 1.9, 1.8, 1.7, -2.0],
    sds=[0.05, 0.05, 0.05, 0.05, 2.0],
)


@dataclass(frozen=True)
class NaiveBoundConfig:
    """Inputs of the naive-test error bound.

    ``ranks`` holds 1-based indices into ``scenario`` of A (the true best),
    B and C. ``n_grid`` is the number of subintervals per axis and each axis
    is truncated ``span_sds`` standard deviations either side of its mean.
    With ``exact_inner`` the innermost integral over A is the normal CDF;
    otherwise it is integrated on a grid like the other two axes.
    ``independent_q`` reproduces the textbook integrand that treats
    ``Q = X_B - X_C`` as independent of ``X_C``; by default the exact joint
    density ``f_C(c) f_B(c + q)`` is used.
    """

    scenario: Scenario = REFERENCE_SCENARIO
    alpha: float = 0.05
    ranks: tuple = (1, 2, 3)
    n_grid: int = 100
    span_sds: float = 4.0
    exact_inner: bool = True
    rule: str = "simpson"
    independent_q: bool = False

    def __post_init__(self):
        d = self.scenario.d
        if d < 3:
            raise ValueError("the naive bound needs at least 3 variables")
        a, b, c = self.ranks
        if len({a, b, c}) != 3 or not all(1 <= r <= d for r in (a, b, c)):
            raise ValueError(f"ranks must be 3 distinct indices in 1..{d}")
        if np.any(self.scenario.sds[[a - 1, b - 1, c - 1]] <= 0):
            raise ValueError("A, B and C need positive standard deviations")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.n_grid < 2:
            raise ValueError("n_grid must be at least 2")
        if self.rule == "simpson" and self.n_grid % 2:
            raise ValueError("Simpson's rule needs an even n_grid")
        if self.rule not in ("simpson", "trapezoid"):
            raise ValueError("rule must be 'simpson' or 'trapezoid'")
        if not self.span_sds > 0:
            raise ValueError("span_sds must be positive")

    def params(self):
        idx = [r - 1 for r in self.ranks]
        return [(self.scenario.means[i], self.scenario.sds[i]) for i in idx]


def naive_pvalue(obs: Observations) -> float:
    """Two-sided-scale p-value of the winner versus runner-up Z-test.

    Returns ``2 * sf(z)`` so that rejecting at ``alpha`` is the one-sided
    level ``alpha/2`` test.
    """
    if obs.d < 2:
        raise InsufficientDataError("naive test needs at least 2 observations")
    x, s = obs.sorted_values, obs.sorted_sds
    z = (x[0] - x[1]) / np.hypot(s[0], s[1])
    return float(min(2.0 * special.ndtr(-z), 1.0))


def _norm_pdf(x, mu, sd):
    return np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * np.sqrt(2 * np.pi))


def _integrate(y, x, rule, axis=-1):
    if rule == "simpson":
        return integrate.simpson(y, x=x, axis=axis)
    return integrate.trapezoid(y, x=x, axis=axis)


def naive_error_lower_bound(config: NaiveBoundConfig) -> float:
    """P(X_B > X_A, X_C > X_A, (X_B - X_C)/sd_BC > z_{1-alpha}) by quadrature.

    The three axes follow the order x_A (inner), q = x_B - x_C (middle) and
    x_C (outer). Each is truncated at ``span_sds`` standard deviations and
    split into ``n_grid`` subintervals.
    """
    (mu_a, sd_a), (mu_b, sd_b), (mu_c, sd_c) = config.params()
    n, span, rule = config.n_grid, config.span_sds, config.rule
    sd_q = float(np.hypot(sd_b, sd_c))
    mu_q = mu_b - mu_c
    threshold = std_normal_quantile(1.0 - config.alpha) * sd_q

    c = np.linspace(mu_c - span * sd_c, mu_c + span * sd_c, n + 1)
    q_lo, q_hi = max(threshold, mu_q - span * sd_q), mu_q + span * sd_q
    if q_lo >= q_hi:
        return 0.0
    q = np.linspace(q_lo, q_hi, n + 1)
    cc, qq = np.meshgrid(c, q, indexing="ij")

    # A must fall below both B = c + q and C = c
    upper = np.minimum(cc, cc + qq)
    if config.exact_inner:
        inner = special.ndtr((upper - mu_a) / sd_a)
    else:
        a_lo = mu_a - span * sd_a
        a_hi = np.minimum(upper, mu_a + span * sd_a)
        width = np.maximum(a_hi - a_lo, 0.0)
        s = np.linspace(0.0, 1.0, n + 1)
        xa = a_lo + width[..., None] * s
        inner = width * _integrate(_norm_pdf(xa, mu_a, sd_a), s, rule)

    if config.independent_q:
        dens = _norm_pdf(qq, mu_q, sd_q)
    else:
        dens = _norm_pdf(cc + qq, mu_b, sd_b)
    middle = _integrate(inner * dens, q, rule)
    outer = _integrate(middle * _norm_pdf(c, mu_c, sd_c), c, rule)
    return float(np.clip(outer, 0.0, 1.0))


def naive_error_mc(config: NaiveBoundConfig, n_draws: int, seed: int = 0,
                   chunk: Optional[int] = None) -> SimReport:
    """Monte-Carlo estimate of the event integrated by :func:`naive_error_lower_bound`."""
    if int(n_draws) < 1:
        raise ValueError("n_draws must be at least 1")
    (mu_a, sd_a), (mu_b, sd_b), (mu_c, sd_c) = config.params()
    sd_q = np.hypot(sd_b, sd_c)
    z_crit = std_normal_quantile(1.0 - config.alpha)
    stream = RandomStream(seed)
    chunk = chunk or 1 << 16
    hits = 0
    for start in range(0, int(n_draws), chunk):
        z = stream.normals(start, min(chunk, n_draws - start), 3)
        xa = mu_a + sd_a * z[:, 0]
        xb = mu_b + sd_b * z[:, 1]
        xc = mu_c + sd_c * z[:, 2]
        hits += int(np.count_nonzero((xb > xa) & (xc > xa) & ((xb - xc) / sd_q > z_crit)))
    return SimReport.from_counts(hits, int(n_draws), int(n_draws))
