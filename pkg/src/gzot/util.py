"""Shared plumbing: deterministic randomness, byte codecs, exact modular linear algebra."""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = [
    "Rng",
    "tagged_sha256",
    "kdf_bits",
    "int_to_bytes",
    "int_from_bytes",
    "center_mod",
    "matmul_mod",
    "normsq",
]


def tagged_sha256(*parts: bytes) -> bytes:
    """SHA-256 over length-prefixed parts (unambiguous concatenation)."""
    h = hashlib.sha256()
    for p in parts:
        h.update(len(p).to_bytes(4, "big"))
        h.update(p)
    return h.digest()


def kdf_bits(data: bytes, nbits: int) -> bytes:
    """Expand `data` into an nbits mask via counter-mode SHA-256.

    nbits must be a multiple of 8; masks are byte strings throughout.
    """
    if nbits <= 0 or nbits % 8:
        raise ValueError("mask length must be a positive multiple of 8 bits")
    nbytes = nbits // 8
    out = bytearray()
    ctr = 0
    while len(out) < nbytes:
        out += hashlib.sha256(b"gzot-mask" + ctr.to_bytes(4, "big") + data).digest()
        ctr += 1
    return bytes(out[:nbytes])


def int_to_bytes(x: int, width: int) -> bytes:
    return int(x).to_bytes(width, "big")


def int_from_bytes(b: bytes) -> int:
    return int.from_bytes(b, "big")


class Rng:
    """Deterministic randomness source (PCG64 underneath).

    A seed plus a path of derivation labels fixes every draw, so concurrent
    trials can run on independent child streams and still reproduce exactly.
    `self.np` exposes the underlying numpy Generator for vectorized sampling.
    """

    def __init__(self, seed, _path: tuple = ()):
        if isinstance(seed, Rng):
            raise TypeError("seed with an int/bytes/str, or use derive()")
        if isinstance(seed, (bytes, bytearray)):
            entropy = int.from_bytes(hashlib.sha256(bytes(seed)).digest(), "big")
        elif isinstance(seed, str):
            entropy = int.from_bytes(hashlib.sha256(seed.encode()).digest(), "big")
        elif isinstance(seed, (int, np.integer)):
            entropy = int(seed)
        else:
            raise TypeError(f"unsupported seed type: {type(seed).__name__}")
        if entropy < 0:
            raise ValueError("seed must be non-negative")
        self.entropy = entropy
        self.path = tuple(_path)
        ss = np.random.SeedSequence(entropy=entropy, spawn_key=self.path)
        self.np = np.random.Generator(np.random.PCG64(ss))

    def derive(self, *labels) -> "Rng":
        """Independent child stream addressed by the given labels."""
        key = []
        for lab in labels:
            if isinstance(lab, (int, np.integer)) and 0 <= int(lab) < 2**32:
                key.append(int(lab))
            else:
                raw = lab if isinstance(lab, bytes) else str(lab).encode()
                key.append(int.from_bytes(hashlib.sha256(raw).digest()[:4], "big"))
        return Rng(self.entropy, self.path + tuple(key))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection; exact for any size."""
        if n <= 0:
            raise ValueError("n must be positive")
        k = (n - 1).bit_length()
        if k == 0:
            return 0
        nbytes = (k + 7) // 8
        shift = 8 * nbytes - k
        while True:
            v = int.from_bytes(self.np.bytes(nbytes), "big") >> shift
            if v < n:
                return v

    def randbytes(self, k: int) -> bytes:
        return self.np.bytes(k)

    def randbit(self) -> int:
        return int(self.np.integers(0, 2))

    def __repr__(self):
        return f"Rng(entropy=<{self.entropy.bit_length()}b>, path={self.path})"


def center_mod(x, q):
    """Reduce mod q to the centered representative in (-q/2, q/2]."""
    if isinstance(x, np.ndarray) and x.dtype != object:
        r = np.mod(x, q)
        return np.where(r > q // 2, r - q, r)
    if isinstance(x, np.ndarray):
        r = np.mod(x, q)
        return np.where(r > q // 2, r - q, r)
    r = int(x) % q
    return r - q if r > q // 2 else r


def _bits(x: int) -> int:
    return int(x).bit_length()


def _abs_max(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max(abs(int(v)) for v in a.ravel())
    return int(np.abs(a).max())


def _limbs_signed(a: np.ndarray, w: int, nlimbs: int) -> list[np.ndarray]:
    # low limbs in [0, 2^w); the top limb keeps the sign
    limbs = []
    x = a.astype(np.int64, copy=True)
    mask = (1 << w) - 1
    for _ in range(nlimbs - 1):
        limbs.append((x & mask).astype(np.float64))
        x >>= w
    limbs.append(x.astype(np.float64))
    return limbs


def matmul_mod(A, B, q: int, a_max: int | None = None, b_max: int | None = None) -> np.ndarray:
    """Exact (A @ B) mod q with an overflow-safe strategy.

    Accepts int arrays or integer-valued float64 arrays (entries may be
    negative, any magnitude below 2^62 on the fast paths). Picks between
    direct int64 matmul, exact float64 limb products (BLAS-backed, the fast
    path for large operands), and arbitrary-precision objects as a last
    resort. `a_max` / `b_max` are optional magnitude bounds that skip the
    scan over the inputs. Result entries lie in [0, q); dtype is int64 when
    q < 2^62, object otherwise.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    b_was_1d = B.ndim == 1
    if b_was_1d:
        B = B[:, None]
    inner = A.shape[-1]
    if inner != B.shape[0]:
        raise ValueError("shape mismatch")
    lb = max(1, inner).bit_length()
    amax = _abs_max(A) if a_max is None else int(a_max)
    bmax = _abs_max(B) if b_max is None else int(b_max)

    out = None
    if A.dtype != object and B.dtype != object:
        # side with more bits gets limb-decomposed for the float path
        split_a = _bits(amax) >= _bits(bmax)
        keep_bits = _bits(bmax if split_a else amax)
        w = 52 - keep_bits - lb
        split_bits = _bits(amax if split_a else bmax)
        if w >= 8 and q < (1 << 62):
            nlimbs = max(1, -(-split_bits // w))
            if split_a:
                limbs = _limbs_signed(A, w, nlimbs)
                other = np.asarray(B, dtype=np.float64)
                sums = [lim @ other for lim in limbs]
            else:
                limbs = _limbs_signed(B, w, nlimbs)
                other = np.asarray(A, dtype=np.float64)
                sums = [other @ lim for lim in limbs]
            if q < (1 << 31):
                acc = np.zeros(sums[0].shape, dtype=np.int64)
                for i, s in enumerate(sums):
                    acc = (acc + (s.astype(np.int64) % q) * (pow(2, w * i, q))) % q
                out = acc
            else:
                # recombination would overflow int64; do it in objects
                acc = np.zeros(sums[0].shape, dtype=object)
                for i, s in enumerate(sums):
                    acc = acc + s.astype(np.int64).astype(object) * pow(2, w * i)
                out = acc % q
        elif _bits(amax) + _bits(bmax) + lb <= 62:
            out = (A.astype(np.int64) @ B.astype(np.int64)) % q
    if out is None:
        out = np.dot(A.astype(object), B.astype(object)) % q
    if out.dtype == object and q < (1 << 62):
        out = out.astype(np.int64)
    return out[:, 0] if b_was_1d else out


def normsq(x) -> int:
    """Exact squared Euclidean norm as a Python int."""
    x = np.asarray(x)
    if x.size == 0:
        return 0
    if x.dtype != object:
        m = _abs_max(x)
        if 2 * _bits(m) + x.size.bit_length() <= 62:
            flat = x.astype(np.int64).ravel()
            return int(flat @ flat)
    return sum(int(v) * int(v) for v in x.ravel())
