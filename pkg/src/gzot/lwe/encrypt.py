"""Bit encryption under the trapdoored matrix, with a halved decryption radius.

A bit goes into the last coordinate as mu * ceil(q/2); since q is odd,
doubling a ciphertext turns the encoding into a plain 0/1 offset, so
decryption inverts the gadget on 2c and reads the bit off the parity of the
recovered noise. Decryption deliberately rejects noise beyond B'' = B'/2 even
when inversion itself succeeded: the halved radius is what makes sums of two
decryptable ciphertexts land back inside the decryptable set.
"""

from __future__ import annotations

import numpy as np

from ..util import Rng, center_mod, matmul_mod, normsq
from .gaussian import sample_gauss
from .params import LweParams
from .trapdoor import Trapdoor, gadget_invert

__all__ = ["encode_bit", "lwe_encrypt", "lwe_decrypt", "witness_check"]


def encode_bit(params: LweParams, mu: int) -> np.ndarray:
    """mu * (0, ..., 0, ceil(q/2)); doubling gives (0, ..., 0, mu) mod q."""
    if mu not in (0, 1):
        raise ValueError("bit expected")
    out = np.zeros(params.m, dtype=np.int64)
    out[-1] = mu * ((params.q + 1) // 2)
    return out


def lwe_encrypt(params: LweParams, A: np.ndarray, mu: int, rng: Rng):
    """Return (c, (s, e)) with c = A s + e + encode(mu), |e| <= B."""
    s = rng.np.integers(0, params.q, size=params.n, dtype=np.int64)
    while True:
        e = sample_gauss(params.t, params.m, rng)
        if normsq(e) <= params.B2:
            break
    c = (matmul_mod(A, s, params.q) + e + encode_bit(params, mu)) % params.q
    return c, (s, e)


def lwe_decrypt(td: Trapdoor, c: np.ndarray):
    """Decrypt to 0, 1, or None (reject). None is a value, not an error.

    Inverts the gadget on 2c, demands the recovered noise be 2e + mu at the
    last coordinate (every other coordinate even), and rejects when |e| > B''.
    """
    p = td.params
    x2 = (2 * np.asarray(c)) % p.q if c.dtype != object else (2 * c) % p.q
    inv = gadget_invert(td, x2, p.Bp2)
    if inv is None:
        return None
    _, e2 = inv
    if e2.dtype == object:
        e2 = np.array([int(v) for v in e2], dtype=object)
    mu = int(e2[-1]) % 2
    rest = e2[:-1]
    if np.any(np.mod(rest, 2) != 0):
        return None
    e = e2.copy()
    e[-1] = e[-1] - mu
    e = e // 2
    if normsq(e) > p.Bpp2:
        return None
    return mu


def witness_check(params: LweParams, A: np.ndarray, c: np.ndarray, s: np.ndarray) -> bool:
    """Does s open c as an encryption of 0 with in-bound noise?

    The noise is recomputed from s rather than trusted from the witness
    holder.
    """
    e = center_mod(np.asarray(c) - matmul_mod(A, np.asarray(s), params.q), params.q)
    return normsq(e) <= params.B2
