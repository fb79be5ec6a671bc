"""Standard-normal primitives and the truncated-normal tail ratio.

Every public function accepts a scalar or an array and returns the same
shape (a Python ``float`` for scalar input). Tail probabilities are computed
directly from the complementary error function and never as ``1 - cdf``, so
relative accuracy is kept far into the tails. The ``_``-prefixed variants
skip input validation and are used by the vectorised test kernels.
"""

import numpy as np
from scipy import special

__all__ = [
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_sf",
    "log_std_normal_sf",
    "log_std_normal_cdf",
    "std_normal_quantile",
    "truncated_sf_ratio",
    "log_truncated_sf_ratio",
    "clamp_probability",
    "TINY_P",
]

_INV_SQRT_2PI = 0.3989422804014327

#: Floor applied to p-values whose true value underflows double precision.
TINY_P = float(np.finfo(float).tiny)


def _as_finite(z, name="z"):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {z!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def clamp_probability(p, slack=1e-12):
    """Clip round-off excursions outside [0, 1].

    Values further than ``slack`` outside the unit interval are rejected,
    since they signal a real error rather than floating point noise.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < -slack) or np.any(arr > 1 + slack):
        raise ValueError(f"not a probability: {p!r}")
    return _out(np.clip(arr, 0.0, 1.0))


def _log_sf(z):
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore"):
        # log1p(-cdf) keeps relative accuracy on the left where sf -> 1
        return np.where(z < 0, np.log1p(-special.ndtr(np.minimum(z, 0.0))),
                        special.log_ndtr(-z))


def _log_cdf(z):
    return _log_sf(-np.asarray(z, dtype=float))


def std_normal_pdf(z):
    """Standard normal density ``exp(-z**2 / 2) / sqrt(2 pi)``."""
    z = _as_finite(z)
    return _out(_INV_SQRT_2PI * np.exp(-0.5 * z * z))


def std_normal_cdf(z):
    """Standard normal CDF, accurate in relative terms on the left tail."""
    z = _as_finite(z)
    return _out(special.ndtr(z))


def std_normal_sf(z):
    """Survival function ``P(Z > z)`` evaluated without cancellation."""
    z = _as_finite(z)
    return _out(special.ndtr(-z))


def log_std_normal_sf(z):
    """Natural log of the survival function, usable far past underflow of sf."""
    z = _as_finite(z)
    return _out(_log_sf(z))


def log_std_normal_cdf(z):
    """Natural log of the CDF (mirror image of :func:`log_std_normal_sf`)."""
    z = _as_finite(z)
    return _out(_log_cdf(z))


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open interval (0, 1).

    The rational approximation in ``scipy.special.ndtri`` supplies the
    starting point. Two Newton steps against this module's own cdf (or sf
    in the upper half, to avoid cancellation) make the pair self-consistent.

    Raises:
        ValueError: if any ``p`` is outside (0, 1).
    """
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0.0)) or np.any(~(p < 1.0)):
        raise ValueError(f"quantile requires 0 < p < 1, got {p!r}")
    x = special.ndtri(p)
    upper = p > 0.5
    q = 1.0 - p
    for _ in range(2):
        dens = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
        resid = np.where(upper, q - special.ndtr(-x), special.ndtr(x) - p)
        step = resid / dens
        x = x - np.where(np.isfinite(step), step, 0.0)
    return _out(x)


def _log_ratio_upper(z_num, z_den):
    return _log_sf(z_num) - _log_sf(z_den)


def _ratio_from_log(log_ratio):
    with np.errstate(under="ignore"):
        p = np.exp(np.minimum(log_ratio, 0.0))
    return np.maximum(p, TINY_P)


def log_truncated_sf_ratio(z_num, z_den):
    """Log of ``sf(z_num) / sf(z_den)``; see :func:`truncated_sf_ratio`."""
    z_num = _as_finite(z_num, "z_num")
    z_den = _as_finite(z_den, "z_den")
    if np.any(z_num < z_den):
        raise ValueError(
            "z_num < z_den: the observed value lies outside its truncation "
            "region (selection-event bookkeeping error)"
        )
    return _out(np.minimum(_log_ratio_upper(z_num, z_den), 0.0))


def truncated_sf_ratio(z_num, z_den):
    """Tail mass of a normal truncated below at ``z_den``, beyond ``z_num``.

    Computes ``sf(z_num) / sf(z_den)`` through log space so that both
    factors may underflow individually. When even the ratio is below the
    smallest normal double the result is floored at :data:`TINY_P`, which
    keeps it a strictly positive (and conservative) p-value.

    Raises:
        ValueError: if ``z_num < z_den`` or either input is not finite.
    """
    return _out(_ratio_from_log(np.asarray(log_truncated_sf_ratio(z_num, z_den))))
