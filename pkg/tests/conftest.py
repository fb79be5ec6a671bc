import mpmath as mp
import numpy as np
import pytest

mp.mp.dps = 400


def mp_sf(z):
    return mp.ncdf(-mp.mpf(z))


def mp_log_sf(z):
    return mp.log(mp.ncdf(-mp.mpf(z)))


def mp_pairwise_upper(x, s, j):
    """Pairwise winner-test p-value straight from the formula, in mpmath.

    ``x``/``s`` sorted descending; ``j`` 1-based competitor rank.
    """
    x = [mp.mpf(float(v)) for v in x]
    s = [mp.mpf(float(v)) for v in s]
    x1, s1, xj, sj = x[0], s[0], x[j - 1], s[j - 1]
    mu = (sj**2 * x1 + s1**2 * xj) / (s1**2 + sj**2)
    sb = s1**2 / mp.sqrt(s1**2 + sj**2)
    others = [x[k] for k in range(len(x)) if k not in (0, j - 1)]
    eta = max([mu] + others)
    return mp.ncdf(-(x1 - mu) / sb) / mp.ncdf(-(eta - mu) / sb)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
