"""Monte-Carlo harness for error rates of the ranking and set procedures.

Randomness is counter based: the standard-normal row used by draw ``i`` is
a pure function of ``(seed, i)``. Draws are grouped in fixed blocks of
:data:`BLOCK_SIZE` rows, each block seeded from ``SeedSequence(seed,
spawn_key=(block,))``, so results do not depend on how blocks are spread
over workers. Every estimate is a ratio of integer counts, which makes the
aggregation order irrelevant.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .procedures import _set_pvalues
from .winner import Observations, _winner_pvalues

__all__ = [
    "BLOCK_SIZE",
    "PROCEDURES",
    "ERROR_KINDS",
    "RandomStream",
    "Scenario",
    "SimConfig",
    "SimReport",
    "GridCell",
    "CalibrationResult",
    "spaced_means",
    "tied_means",
    "draw",
    "estimate_error",
    "calibrate_sigma",
    "run_inflation_grid",
    "winner_pvalues",
    "default_configs",
]

log = logging.getLogger(__name__)

BLOCK_SIZE = 4096
PROCEDURES = ("ranking", "set")
ERROR_KINDS = ("type1_tied", "type1_spaced", "type2")


class RandomStream:
    """Reproducible source of standard-normal rows indexed by draw number."""

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed

    def block_generator(self, block: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(int(block),))
        return np.random.Generator(np.random.Philox(ss))

    def normals(self, start: int, count: int, d: int) -> np.ndarray:
        """Rows ``start .. start+count-1`` of the stream, shape ``(count, d)``."""
        if count <= 0:
            return np.empty((0, d))
        out = []
        stop = start + count
        for b in range(start // BLOCK_SIZE, (stop - 1) // BLOCK_SIZE + 1):
            lo = b * BLOCK_SIZE
            need = min(stop, lo + BLOCK_SIZE) - lo
            rows = self.block_generator(b).standard_normal((need, d))
            out.append(rows[max(start - lo, 0):])
        return np.concatenate(out)


@dataclass(frozen=True, eq=False)
class Scenario:
    """True means and standard deviations of the simulated variables.

    A single zero standard deviation is allowed and makes that variable a
    constant, as used at the start of the type II inflation grid.
    """

    means: np.ndarray
    sds: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=float).reshape(-1)
        sds = np.array(self.sds, dtype=float).reshape(-1)
        if means.shape != sds.shape or means.size == 0:
            raise ValueError("means and sds must be non-empty and of equal length")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(sds))):
            raise ValueError("means and sds must be finite")
        if np.any(sds < 0):
            raise ValueError("standard deviations must be non-negative")
        if np.count_nonzero(sds == 0) > 1 or np.all(sds == 0):
            raise ValueError("at most one standard deviation may be zero")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)

    @property
    def d(self) -> int:
        return self.means.size


@dataclass(frozen=True)
class SimConfig:
    n_draws: int = 10_000
    alpha: float = 0.05
    seed: int = 0
    procedure: str = "ranking"
    k: int = 1
    error_kind: str = "type1_tied"

    def __post_init__(self):
        if int(self.n_draws) < 1:
            raise ValueError("n_draws must be at least 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.procedure not in PROCEDURES:
            raise ValueError(f"procedure must be one of {PROCEDURES}")
        if self.error_kind not in ERROR_KINDS:
            raise ValueError(f"error_kind must be one of {ERROR_KINDS}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        RandomStream(self.seed)

    def check_dimension(self, d: int):
        if d < 2:
            raise ValueError(f"procedures need d >= 2, scenario has d={d}")
        if self.k > d - 1:
            raise ValueError(f"k must be in 1..{d - 1} for d={d}, got {self.k}")


@dataclass(frozen=True)
class SimReport:
    """Estimated rate with its binomial Monte-Carlo standard error.

    ``estimate`` and ``mc_standard_error`` are None when no draw fell in the
    conditioning set (``n_effective == 0``).
    """

    estimate: Optional[float]
    mc_standard_error: Optional[float]
    n_effective: int
    n_events: int
    n_draws: int

    @classmethod
    def from_counts(cls, n_events: int, n_effective: int, n_draws: int) -> "SimReport":
        if n_effective == 0:
            return cls(None, None, 0, 0, n_draws)
        p = n_events / n_effective
        return cls(p, math.sqrt(p * (1.0 - p) / n_effective), n_effective, n_events, n_draws)


@dataclass(frozen=True)
class GridCell:
    procedure: str
    k: int
    error_kind: str
    rank_j: int
    multiplier: float
    sd_j: float
    sigma_bar: float
    report: SimReport


@dataclass(frozen=True)
class CalibrationResult:
    sigma: float
    power: float
    n_effective: int
    evaluations: int
    history: list = field(default_factory=list, repr=False)


def spaced_means(d: int = 5) -> np.ndarray:
    """Evenly spaced means ``d-1, d-2, ..., 0`` (unit gaps)."""
    return np.arange(d - 1, -1, -1, dtype=float)


def tied_means(d: int = 5, k: int = 1) -> np.ndarray:
    """Unit-spaced means with the k-th and (k+1)-th tied.

    Ranks after ``k`` are shifted up by one, e.g. ``d=5, k=1`` gives
    ``(4, 4, 3, 2, 1)``.
    """
    if not 1 <= k <= d - 1:
        raise ValueError(f"k must be in 1..{d - 1}")
    mu = spaced_means(d)
    mu[k:] += 1.0
    return mu


def default_configs() -> list:
    """(procedure, k) pairs exercised by the default study."""
    return [("ranking", 1), ("ranking", 3), ("set", 1), ("set", 3)]


def draw(scenario: Scenario, stream: RandomStream, index: int = 0) -> Observations:
    """Observation ``index`` of the stream, labelled by 1-based true index."""
    z = stream.normals(index, 1, scenario.d)[0]
    return Observations(
        scenario.means + scenario.sds * z,
        scenario.sds,
        tuple(str(i + 1) for i in range(scenario.d)),
    )


# ---------------------------------------------------------------------------
# batch machinery


def _sorted_batch(scenario, z):
    x = scenario.means + scenario.sds * z
    perm = np.argsort(-x, axis=1, kind="stable")
    return (np.take_along_axis(x, perm, axis=1),
            scenario.sds[perm],
            perm)


def _verified(xs, ss, procedure, k, alpha):
    if procedure == "ranking":
        ok = np.ones(xs.shape[0], dtype=bool)
        for t in range(k):
            ok &= _winner_pvalues(xs[:, t:], ss[:, t:]).max(axis=1) <= alpha
        return ok
    return _set_pvalues(xs, ss, k).max(axis=(1, 2)) <= alpha


def _claim_true(means, perm, procedure, k):
    """Whether the empirical top-k claim holds for the true means."""
    mu = means[perm]
    rest = mu[:, k:].max(axis=1)
    if procedure == "set":
        return mu[:, :k].min(axis=1) > rest
    chain = np.all(mu[:, : k - 1] > mu[:, 1:k], axis=1) if k > 1 else True
    return chain & (mu[:, k - 1] > rest)


def _block_counts(scenario, config, stream, start, count):
    z = stream.normals(start, count, scenario.d)
    xs, ss, perm = _sorted_batch(scenario, z)
    verified = _verified(xs, ss, config.procedure, config.k, config.alpha)
    claim = _claim_true(scenario.means, perm, config.procedure, config.k)
    if config.error_kind == "type1_tied":
        den = np.ones_like(claim)
        num = verified & ~claim
    elif config.error_kind == "type1_spaced":
        den = ~claim
        num = verified & den
    else:
        den = claim
        num = ~verified & claim
    return int(np.count_nonzero(num)), int(np.count_nonzero(den))


def _blocks(n_draws):
    return [(s, min(BLOCK_SIZE, n_draws - s)) for s in range(0, n_draws, BLOCK_SIZE)]


def estimate_error(scenario: Scenario, config: SimConfig, n_jobs: int = 1) -> SimReport:
    """Estimate an error rate of a procedure by simulation.

    ``config.error_kind`` selects the scoring:

    * ``type1_tied``: fraction of all draws in which the procedure verifies
      a claim that is false for the true means.
    * ``type1_spaced``: among draws whose empirical top-k claim is false,
      the fraction in which the procedure verifies it.
    * ``type2``: among draws whose empirical top-k claim is true, the
      fraction in which the procedure fails to verify it.

    The ranking claim for level k is the strict chain of the first k
    empirical ranks above all the rest; the set claim only requires each of
    the first k means to exceed every mean outside the set. Ties make both
    claims false. The ranking procedure "verifies" at level k when its
    first k sequential tests all reject.
    """
    config.check_dimension(scenario.d)
    stream = RandomStream(config.seed)
    jobs = _blocks(int(config.n_draws))

    def work(job):
        return _block_counts(scenario, config, stream, *job)

    if n_jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            counts = list(pool.map(work, jobs))
    else:
        counts = [work(job) for job in jobs]
    n_events = sum(c[0] for c in counts)
    n_eff = sum(c[1] for c in counts)
    return SimReport.from_counts(n_events, n_eff, int(config.n_draws))


def winner_pvalues(scenario: Scenario, n_draws: int, seed: int) -> np.ndarray:
    """Winner-test p-value of the realised winner for each of ``n_draws`` draws."""
    if scenario.d < 2:
        raise ValueError("need d >= 2")
    stream = RandomStream(seed)
    out = []
    for start, count in _blocks(int(n_draws)):
        xs, ss, _ = _sorted_batch(scenario, stream.normals(start, count, scenario.d))
        out.append(_winner_pvalues(xs, ss).max(axis=1))
    return np.concatenate(out)


def calibrate_sigma(base_means: Sequence[float], target_power: float = 0.9,
                    config: Optional[SimConfig] = None, tol: float = 0.01,
                    max_doublings: int = 60, max_evaluations: int = 200,
                    n_jobs: int = 1) -> CalibrationResult:
    """Common standard deviation at which a procedure has the target power.

    Power is ``1 - type2`` estimated with ``config`` (its ``error_kind`` is
    ignored). The same seed is reused for every evaluation, so power is a
    deterministic step function of sigma. The bracket starts at the smallest
    gap between means and widens by doubling or halving; bisection in log
    sigma then runs until ``|power - target_power| <= tol``.

    Raises:
        ValueError: if the means are not strictly decreasing.
        RuntimeError: if no bracket is found within ``max_doublings`` or the
            bisection exhausts ``max_evaluations``.
    """
    means = np.asarray(base_means, dtype=float)
    if means.size < 2 or np.any(np.diff(means) >= 0):
        raise ValueError("base_means must be strictly decreasing")
    if not 0.0 < target_power < 1.0:
        raise ValueError("target_power must lie in (0, 1)")
    config = config or SimConfig()
    cfg = SimConfig(config.n_draws, config.alpha, config.seed, config.procedure,
                    config.k, "type2")
    history = []

    def power(sigma):
        rep = estimate_error(Scenario(means, np.full(means.size, sigma)), cfg, n_jobs)
        pw = 0.0 if rep.estimate is None else 1.0 - rep.estimate
        history.append((sigma, pw, rep.n_effective))
        return pw, rep.n_effective

    def done(sigma, pw, n_eff):
        return CalibrationResult(sigma, pw, n_eff, len(history), history)

    sigma = float(np.min(-np.diff(means)))
    pw, n_eff = power(sigma)
    if abs(pw - target_power) <= tol:
        return done(sigma, pw, n_eff)
    growing = pw > target_power
    lo = hi = sigma
    for _ in range(max_doublings):
        prev = pw
        if growing:
            lo, hi = hi, hi * 2.0
            pw, n_eff = power(hi)
        else:
            hi, lo = lo, lo / 2.0
            pw, n_eff = power(lo)
        if abs(pw - target_power) <= tol:
            return done(hi if growing else lo, pw, n_eff)
        if growing and pw > prev + tol or not growing and pw < prev - tol:
            log.warning("power is not decreasing in sigma near %g", hi if growing else lo)
        if (pw < target_power) == growing:
            break
    else:
        raise RuntimeError("could not bracket the target power")
    while len(history) < max_evaluations:
        mid = math.sqrt(lo * hi)
        pw, n_eff = power(mid)
        if abs(pw - target_power) <= tol:
            return done(mid, pw, n_eff)
        if pw > target_power:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("calibration did not converge")


def run_inflation_grid(config: SimConfig, sigma_bar: float, d: int = 5,
                       ranks: Sequence[int] = (2, 4),
                       multipliers: Optional[Sequence[float]] = None,
                       n_jobs: int = 1) -> list:
    """Error rates as one variable's standard deviation is scaled.

    All variables get ``sigma_bar`` except the one with population rank j
    (for each j in ``ranks``), which gets ``multiplier * sigma_bar``. The
    means are :func:`tied_means` for ``type1_tied`` and :func:`spaced_means`
    otherwise. Default multipliers are ``2**0 .. 2**6`` for the type I kinds
    and 7 evenly spaced values on ``[0, 3]`` for type II.
    """
    if not sigma_bar > 0:
        raise ValueError("sigma_bar must be positive")
    if multipliers is None:
        multipliers = (np.linspace(0.0, 3.0, 7) if config.error_kind == "type2"
                       else 2.0 ** np.arange(7))
    means = (tied_means(d, config.k) if config.error_kind == "type1_tied"
             else spaced_means(d))
    cells = []
    for j in ranks:
        if not 1 <= j <= d:
            raise ValueError(f"rank {j} out of range for d={d}")
        for mult in multipliers:
            sds = np.full(d, float(sigma_bar))
            sds[j - 1] = float(mult) * sigma_bar
            rep = estimate_error(Scenario(means, sds), config, n_jobs)
            cells.append(GridCell(config.procedure, config.k, config.error_kind, int(j),
                                  float(mult), float(sds[j - 1]), float(sigma_bar), rep))
    return cells
