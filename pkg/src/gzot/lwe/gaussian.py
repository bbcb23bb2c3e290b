"""Centered discrete Gaussian sampling over the integers.

The density is proportional to exp(-pi x^2 / param^2), so the variance comes
out near param^2 / (2 pi). Small parameters go through an exact inverse-CDF
table; large ones fall back to rounding a continuous Gaussian, which is
indistinguishable at the widths involved. Samples are clipped to a 12*param
tail by construction.
"""

from __future__ import annotations

import math

import numpy as np

from ..util import Rng

__all__ = ["sample_gauss", "sample_gauss_f64", "TAIL_FACTOR", "CDT_MAX_PARAM"]

TAIL_FACTOR = 12
CDT_MAX_PARAM = 4096
# beyond this, rounding a float64 continuous Gaussian could hit integer
# precision limits (12 * param must stay well below 2^53)
_ROUNDED_MAX_PARAM = 2**48

_cdt_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _cdt_table(param: int):
    tab = _cdt_cache.get(param)
    if tab is None:
        z = TAIL_FACTOR * param
        xs = np.arange(-z, z + 1, dtype=np.int64)
        w = np.exp(-math.pi * (xs.astype(np.float64) ** 2) / float(param * param))
        cdf = np.cumsum(w)
        cdf /= cdf[-1]
        tab = _cdt_cache[param] = (xs, cdf)
    return tab


def _sample_flat(param: int, n: int, rng: Rng) -> np.ndarray:
    """Flat float64 array of integer-valued draws."""
    if param <= CDT_MAX_PARAM:
        xs, cdf = _cdt_table(int(param))
        u = rng.np.random(n)
        return xs[np.searchsorted(cdf, u, side="right")].astype(np.float64)
    sigma_c = param / math.sqrt(2 * math.pi)
    z = float(TAIL_FACTOR * param)
    x = rng.np.standard_normal(n)
    x *= sigma_c
    np.rint(x, out=x)
    bad = np.abs(x) > z
    while bad.any():  # pragma: no cover - ~2^-100 per draw
        k = int(bad.sum())
        redo = np.rint(rng.np.standard_normal(k) * sigma_c)
        x[bad] = redo
        bad = np.abs(x) > z
    return x


def sample_gauss(param: int, size, rng: Rng) -> np.ndarray:
    """Centered discrete Gaussian draws with the given parameter, as int64."""
    return sample_gauss_f64(param, size, rng).astype(np.int64)


def sample_gauss_f64(param: int, size, rng: Rng) -> np.ndarray:
    """Same distribution, returned as integer-valued float64.

    The float form feeds BLAS products directly; every value is an exact
    integer well inside float64 range.
    """
    if param < 1:
        raise ValueError("Gaussian parameter must be >= 1")
    if param > _ROUNDED_MAX_PARAM:
        raise ValueError("Gaussian parameter too large for exact rounding")
    n = int(np.prod(size)) if not isinstance(size, int) else size
    out = _sample_flat(int(param), n, rng)
    return out if isinstance(size, int) else out.reshape(size)
