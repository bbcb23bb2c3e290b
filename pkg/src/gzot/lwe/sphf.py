"""Bit-level and full-width projective hashing over lattice ciphertexts.

The bit hash rounds an inner product probabilistically: R(x) = 1 with
probability (1 + cos(2 pi x / q)) / 2. Two independent roundings of nearby
inputs agree with probability 1/2 + cos(2 pi delta / q) / 4, i.e. about 3/4
on honest words and exactly 1/2 on unrelated ones. Three layers sit on top:

  * repetition: each key bit is hashed `rep` times and majority-decoded,
    which turns 3/4 agreement into near-certain agreement per bit;
  * masking: the projection key publishes T = ECC(K) xor S, so a witness
    holder can strip S and decode K, while for a word outside the language
    the bits of S statistically hide K;
  * parallel words: k_amp independent copies run on a k_amp-tuple of
    ciphertexts and the per-copy keys XOR into the final key, so one
    unrecognizable component already hides everything, while correctness
    only needs every component to decode.

Words are k_amp-tuples of ciphertext vectors (a 2-d array); witnesses are the
matching (secrets, noises) pair of arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ProtocolAbort, RhoMode, RhoTrapdoor, SigmaMode, SphfScheme
from ..util import Rng, matmul_mod
from .encrypt import lwe_encrypt, lwe_decrypt, witness_check
from .gaussian import sample_gauss, sample_gauss_f64
from .params import LweParams, get_params
from .trapdoor import Trapdoor, gadget_matrix, trapgen

__all__ = [
    "prob_round",
    "bit_hash_kg",
    "bit_proj_kg",
    "bit_hash",
    "bit_proj_hash",
    "ecc_encode",
    "ecc_decode",
    "FullHashKey",
    "FullProjKey",
    "full_hash_kg",
    "full_proj_kg",
    "full_hash",
    "full_proj_hash",
    "LweScheme",
]


def prob_round(params: LweParams, x, rng: Rng):
    """Probabilistic rounding of values mod q to bits.

    Accepts a scalar or array; consumes one uniform coin per value.
    """
    arr = np.asarray(x)
    vals = arr.astype(np.float64) if arr.dtype != object else np.array(
        [float(int(v) % params.q) for v in arr.ravel()]
    ).reshape(arr.shape)
    p = 0.5 * (1.0 + np.cos(2.0 * np.pi * vals / params.q))
    bits = (rng.np.random(arr.shape if arr.shape else None) < p).astype(np.uint8)
    return bits if arr.shape else int(bits)


def bit_hash_kg(params: LweParams, rng: Rng, count: int = 1) -> np.ndarray:
    """`count` hashing keys, one Gaussian vector of length m per row."""
    return sample_gauss(params.s_hk, (count, params.m), rng)


def _key_bound(params: LweParams) -> int:
    return 12 * params.s_hk


def bit_proj_kg(params: LweParams, A: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Projection keys A^t h, batched over rows of `keys`."""
    return matmul_mod(keys, A, params.q, a_max=_key_bound(params), b_max=params.q - 1)


def bit_hash(params: LweParams, keys: np.ndarray, c: np.ndarray, rng: Rng) -> np.ndarray:
    """Rounded <h, c> per key row; fresh coins every call."""
    vals = matmul_mod(keys, c, params.q, a_max=_key_bound(params), b_max=params.q - 1)
    return prob_round(params, vals, rng)


def bit_proj_hash(params: LweParams, proj_keys: np.ndarray, s: np.ndarray, rng: Rng) -> np.ndarray:
    """Rounded <A^t h, s> per projection-key row; fresh coins every call."""
    vals = matmul_mod(proj_keys, s, params.q, a_max=params.q - 1, b_max=params.q - 1)
    return prob_round(params, vals, rng)


def ecc_encode(bits: np.ndarray, rep: int) -> np.ndarray:
    """Repetition code: each bit rep times."""
    return np.repeat(np.asarray(bits, dtype=np.uint8), rep)


def ecc_decode(bits: np.ndarray, rep: int) -> np.ndarray:
    """Blockwise majority; rep is odd so there are no ties."""
    b = np.asarray(bits, dtype=np.uint8)
    if b.size % rep:
        raise ValueError("length must be a multiple of the repetition factor")
    return (b.reshape(-1, rep).sum(axis=1) > rep // 2).astype(np.uint8)


def bits_to_bytes(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def bytes_to_bits(data: bytes, nbits: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=nbits)


@dataclass(frozen=True, eq=False)
class FullHashKey:
    """Hashing key: per-slot bit keys plus per-slot key shares.

    The output key is the XOR of the slot shares; `hash` simply returns it,
    independently of the word.
    """

    bit_keys: np.ndarray   # (k_amp, ell, m) Gaussian vectors (integer-valued float64)
    slot_bits: np.ndarray  # (k_amp, kappa) uint8 key shares

    @property
    def key_bits(self) -> np.ndarray:
        return np.bitwise_xor.reduce(self.slot_bits, axis=0)

    @property
    def key(self) -> bytes:
        return bits_to_bytes(self.key_bits)


@dataclass(frozen=True, eq=False)
class FullProjKey:
    """Projection key: per-slot projected vectors and per-slot masked codewords."""

    proj: np.ndarray   # (k_amp, ell, n)
    masks: np.ndarray  # (k_amp, ell) uint8, ECC(share) xor hash-bits


def full_hash_kg(params: LweParams, rng: Rng) -> FullHashKey:
    # float64 keys feed BLAS products directly; values are exact integers
    bit_keys = sample_gauss_f64(params.s_hk, (params.k_amp, params.ell, params.m), rng)
    slot_bits = rng.np.integers(0, 2, size=(params.k_amp, params.kappa), dtype=np.uint8)
    return FullHashKey(bit_keys, slot_bits)


def full_proj_kg(params: LweParams, A: np.ndarray, hk: FullHashKey, word: np.ndarray,
                 rng: Rng) -> FullProjKey:
    p = params
    flat = hk.bit_keys.reshape(p.k_amp * p.ell, p.m)
    proj = bit_proj_kg(p, A, flat).reshape(p.k_amp, p.ell, p.n)
    masks = np.empty((p.k_amp, p.ell), dtype=np.uint8)
    for j in range(p.k_amp):
        s_bits = bit_hash(p, hk.bit_keys[j], word[j], rng)
        masks[j] = ecc_encode(hk.slot_bits[j], p.rep) ^ s_bits
    return FullProjKey(proj, masks)


def full_hash(hk: FullHashKey, word=None) -> bytes:
    """The stored key; the word argument is accepted and ignored."""
    return hk.key


def full_proj_hash(params: LweParams, hp: FullProjKey, word: np.ndarray, witness,
                   rng: Rng) -> bytes:
    """Decode every slot with the witness secrets and XOR the shares back together."""
    p = params
    secrets = witness[0]
    out = np.zeros(p.kappa, dtype=np.uint8)
    for j in range(p.k_amp):
        s_bits = bit_proj_hash(p, hp.proj[j], secrets[j], rng)
        out ^= ecc_decode(hp.masks[j] ^ s_bits, p.rep)
    return bits_to_bytes(out)


_DTYPE_BY_WIDTH = {1: "<u1", 2: "<u2", 4: "<u4", 8: "<u8"}


class LweScheme(SphfScheme):
    """Lattice instantiation over k_amp-tuples of ciphertext vectors.

    sigma is the trapdoored public matrix A (the trapdoor is the membership
    tester); rho is a tuple of uniform vectors combined with words by
    componentwise addition. Honest words encrypt 0 in every slot; the
    recognizable set is "some slot does not decrypt to 0".
    """

    tag = 2

    def __init__(self, preset: str = "test"):
        self.name = f"lwe-{preset}"
        self.preset = preset
        self.params = get_params(preset)
        self.kappa_bits = self.params.kappa

    # -- CRS ---------------------------------------------------------------
    def sample_sigma(self, mode: SigmaMode, rng: Rng):
        td = trapgen(self.params, rng)
        return td.A, (td if mode is SigmaMode.S1 else None)

    def sample_rho(self, mode: RhoMode, sigma, rng: Rng):
        p = self.params
        if mode is RhoMode.R0:
            return rng.np.integers(0, p.q, size=(p.k_amp, p.m), dtype=np.int64), None
        mu = 0 if mode is RhoMode.R1 else 1
        cs, cs2, wits, wits2 = [], [], [], []
        for _ in range(p.k_amp):
            c, w = lwe_encrypt(p, sigma, mu, rng)
            c2, w2 = lwe_encrypt(p, sigma, mu, rng)
            cs.append(c); cs2.append(c2); wits.append(w); wits2.append(w2)
        x = np.stack(cs)
        x2 = np.stack(cs2)
        rho = (x + x2) % p.q
        if mode is RhoMode.R1:
            td = RhoTrapdoor(
                x, x2,
                (np.stack([w[0] for w in wits]), np.stack([w[1] for w in wits])),
                (np.stack([w[0] for w in wits2]), np.stack([w[1] for w in wits2])),
            )
        else:
            td = RhoTrapdoor(x, x2)
        return rho, td

    # -- words ---------------------------------------------------------------
    def wordgen_l(self, sigma, rng: Rng):
        p = self.params
        cs, ss, es = [], [], []
        for _ in range(p.k_amp):
            c, (s, e) = lwe_encrypt(p, sigma, 0, rng)
            cs.append(c); ss.append(s); es.append(e)
        return np.stack(cs), (np.stack(ss), np.stack(es))

    def wordgen_x(self, sigma, rng: Rng):
        p = self.params
        return rng.np.integers(0, p.q, size=(p.k_amp, p.m), dtype=np.int64)

    def wordtest(self, td_sigma: Trapdoor, word) -> bool:
        return any(lwe_decrypt(td_sigma, c) != 0 for c in word)

    def complement(self, rho, word):
        return (rho - word) % self.params.q

    def witness_check(self, sigma, word, witness) -> bool:
        secrets = witness[0]
        return all(
            witness_check(self.params, sigma, word[j], secrets[j])
            for j in range(self.params.k_amp)
        )

    def words_equal(self, a, b) -> bool:
        return np.array_equal(a, b)

    def sigma_trapdoor_check(self, sigma, td_sigma: Trapdoor) -> bool:
        p = self.params
        if not np.array_equal(sigma, td_sigma.A):
            return False
        if np.any(matmul_mod(td_sigma.T, td_sigma.A0, p.q)):
            return False
        return np.array_equal(matmul_mod(td_sigma.T, sigma, p.q), gadget_matrix(p) % p.q)

    # -- hashing -------------------------------------------------------------
    def hash_kg(self, rng: Rng):
        return full_hash_kg(self.params, rng)

    def proj_kg(self, sigma, hk, word, rng: Rng):
        return full_proj_kg(self.params, sigma, hk, word, rng)

    def hash_value(self, hk, word):
        return full_hash(hk, word)

    def proj_hash(self, hp, word, witness, rng: Rng):
        return full_proj_hash(self.params, hp, word, witness, rng)

    def to_mask(self, hash_value: bytes, nbits: int) -> bytes:
        if nbits != self.params.kappa:
            raise ProtocolAbort(
                f"mask width {nbits} does not match the {self.params.kappa}-bit key"
            )
        return hash_value

    # -- serialization -------------------------------------------------------
    def _arr_bytes(self, arr: np.ndarray) -> bytes:
        dt = _DTYPE_BY_WIDTH[self.params.limb_bytes]
        return np.ascontiguousarray(arr).astype(dt).tobytes()

    def _arr_from_bytes(self, data: bytes, shape) -> np.ndarray:
        p = self.params
        expect = int(np.prod(shape)) * p.limb_bytes
        if len(data) != expect:
            raise ProtocolAbort(f"encoding must be {expect} bytes, got {len(data)}")
        dt = _DTYPE_BY_WIDTH[p.limb_bytes]
        arr = np.frombuffer(data, dtype=dt).astype(np.int64).reshape(shape)
        if arr.size and int(arr.max()) >= p.q:  # limbs are unsigned, so >= 0 already
            raise ProtocolAbort("vector entries out of range")
        return arr

    def _check_digest(self, data: bytes) -> bytes:
        if len(data) < 16 or data[:16] != self.params.digest:
            raise ProtocolAbort("parameter-set digest mismatch")
        return data[16:]

    def word_bytes(self, word) -> bytes:
        return self.params.digest + self._arr_bytes(word)

    def word_from_bytes(self, data: bytes):
        p = self.params
        return self._arr_from_bytes(self._check_digest(data), (p.k_amp, p.m))

    def projkey_bytes(self, hp: FullProjKey) -> bytes:
        p = self.params
        masks = np.packbits(hp.masks, axis=1).tobytes()
        return p.digest + self._arr_bytes(hp.proj) + masks

    def projkey_from_bytes(self, data: bytes) -> FullProjKey:
        p = self.params
        body = self._check_digest(data)
        nproj = p.k_amp * p.ell * p.n * p.limb_bytes
        mask_row = -(-p.ell // 8)
        if len(body) != nproj + p.k_amp * mask_row:
            raise ProtocolAbort("bad projection key length")
        proj = self._arr_from_bytes(body[:nproj], (p.k_amp, p.ell, p.n))
        rows = np.frombuffer(body[nproj:], dtype=np.uint8).reshape(p.k_amp, mask_row)
        masks = np.unpackbits(rows, axis=1, count=p.ell)
        return FullProjKey(proj, masks)

    def sigma_bytes(self, sigma) -> bytes:
        return self.params.digest + self._arr_bytes(sigma)

    def rho_bytes(self, rho) -> bytes:
        return self.params.digest + self._arr_bytes(rho)
