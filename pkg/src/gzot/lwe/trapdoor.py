"""Tagged public matrices with a short kernel trapdoor, and gadget inversion.

The public matrix is A = A0 + [0 ; G] where A0 = [Abar ; R Abar] for a small
random R, so T = [-R | I] satisfies T A0 = 0 and T A = G. Recovering (s, e)
from A s + e works blockwise on w = T x = G s + T e: each gadget block is
decoded by iterative most-significant-bit recovery with centered rounding,
which is exact whenever every coordinate of T e stays below q/6. The trapdoor
generator resamples until the operator norm of T guarantees that margin for
noise within the inversion bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..util import Rng, center_mod, matmul_mod, normsq
from .params import LweParams

__all__ = ["Trapdoor", "gadget_vec", "gadget_matrix", "gadget_apply", "trapgen", "gadget_invert"]


def gadget_vec(params: LweParams) -> np.ndarray:
    """Powers of two [1, 2, ..., 2^(width-1)]."""
    return np.int64(1) << np.arange(params.width, dtype=np.int64)


def gadget_matrix(params: LweParams) -> np.ndarray:
    """Block matrix G of shape (n*width, n): block i holds the powers of two in column i."""
    g = gadget_vec(params)
    G = np.zeros((params.nw, params.n), dtype=np.int64)
    for i in range(params.n):
        G[i * params.width : (i + 1) * params.width, i] = g
    return G


def gadget_apply(params: LweParams, s: np.ndarray) -> np.ndarray:
    """G @ s mod q without materializing G."""
    out = np.multiply.outer(np.asarray(s, dtype=object), gadget_vec(params).astype(object))
    out = (out % params.q).reshape(params.nw)
    if params.q < (1 << 62):
        return out.astype(np.int64)
    return out


@dataclass(frozen=True, eq=False)
class Trapdoor:
    """Short matrix T = [-R | I] with T A0 = 0 and T A = G.

    Carries the public matrix A so the holder can decrypt and run word tests
    without extra context. `s1_est` is the estimated operator norm of T, kept
    below the margin that makes gadget inversion exact at the B' bound.
    """

    params: LweParams
    R: np.ndarray        # {-1, 0, 1} entries, shape (nw, mbar), int8
    A0: np.ndarray       # shape (m, n)
    A: np.ndarray        # A0 + [0 ; G]
    s1_est: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def T(self) -> np.ndarray:
        t = self._cache.get("T")
        if t is None:
            p = self.params
            t = np.concatenate([-self.R, np.eye(p.nw, dtype=np.int8)], axis=1)
            self._cache["T"] = t
        return t


def _operator_norm(T: np.ndarray, rng: Rng, iters: int = 40) -> float:
    """Power-iteration estimate of the largest singular value."""
    M = T.astype(np.float64)
    v = rng.np.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        u = M @ v
        sigma = float(np.linalg.norm(u))
        if sigma == 0.0:
            return 0.0
        w = M.T @ (u / sigma)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
    return sigma


def trapgen(params: LweParams, rng: Rng) -> Trapdoor:
    """Sample (T, A0) with T A0 = 0; restarts if T's operator norm is too large.

    R entries take value 0 with probability 1/2 and +-1 with probability 1/4
    each. The accepted norm bound (4/3) sqrt(m) keeps every coordinate of T e
    within q/6 for noise at the inversion bound B' = q/(8 sqrt(m)).
    """
    p = params
    limit = (4.0 / 3.0) * math.sqrt(p.m) * 0.999
    for attempt in range(32):
        u = rng.np.integers(0, 4, size=(p.nw, p.mbar), dtype=np.int8)
        R = np.where(u < 2, 0, np.where(u == 2, 1, -1)).astype(np.int8)
        Abar = rng.np.integers(0, p.q, size=(p.mbar, p.n), dtype=np.int64)
        RA = matmul_mod(R, Abar, p.q)
        A0 = np.concatenate([Abar, RA], axis=0)
        A = A0.copy()
        g = gadget_vec(p)
        for i in range(p.n):
            rows = slice(p.mbar + i * p.width, p.mbar + (i + 1) * p.width)
            A[rows, i] = (A[rows, i] + g) % p.q
        T = np.concatenate([-R, np.eye(p.nw, dtype=np.int8)], axis=1)
        s1 = _operator_norm(T, rng.derive("s1", attempt))
        if s1 * 1.02 <= limit:
            td = Trapdoor(params=p, R=R, A0=A0, A=A, s1_est=s1)
            td._cache["T"] = T
            return td
    raise RuntimeError("trapdoor operator norm check kept failing")  # pragma: no cover


def _decode_blocks_i64(w: np.ndarray, params: LweParams) -> np.ndarray:
    """Vectorized per-block MSB-first decoding (q < 2^31 so int64 never overflows)."""
    q = params.q
    b = w.reshape(params.n, params.width)
    V = b[:, 0].astype(np.int64)
    half = q // 2
    for j in range(1, params.width):
        num = 2 * V - b[:, j]
        quot = (num + half) // q  # nearest multiple; exact since q is odd
        V = b[:, j] + q * quot
    k = params.width - 1
    u = (V + (np.int64(1) << (k - 1))) >> k
    return u % q


def _decode_blocks_obj(w: np.ndarray, params: LweParams) -> np.ndarray:
    q = params.q
    half = q // 2
    out = np.empty(params.n, dtype=object)
    for i in range(params.n):
        blk = [int(v) for v in w[i * params.width : (i + 1) * params.width]]
        V = blk[0]
        for j in range(1, params.width):
            num = 2 * V - blk[j]
            V = blk[j] + q * ((num + half) // q)
        k = params.width - 1
        out[i] = ((V + (1 << (k - 1))) >> k) % q
    return out


def gadget_invert(td: Trapdoor, x: np.ndarray, bound2) -> tuple[np.ndarray, np.ndarray] | None:
    """Recover (s, e) with x = A s + e and |e|^2 <= bound2, or None.

    None signals "not a bounded-noise word"; it is a value, not an error.
    bound2 may be an int or Fraction and is compared exactly against the
    squared norm of the recovered noise.
    """
    p = td.params
    x = np.asarray(x)
    w = matmul_mod(td.T, x, p.q, a_max=1)
    if p.q < (1 << 31):
        s = _decode_blocks_i64(w, p)
    else:
        s = _decode_blocks_obj(w, p)
    e = center_mod(x - matmul_mod(td.A, s, p.q, a_max=p.q - 1, b_max=p.q - 1), p.q)
    # cheap per-coordinate prefilter before the exact norm
    emax = int(max(abs(int(v)) for v in e.ravel())) if e.dtype == object else int(np.abs(e).max())
    if emax * emax > bound2:
        return None
    if normsq(e) > bound2:
        return None
    return s, e
