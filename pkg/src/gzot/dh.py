"""Prime-order-subgroup ElGamal and the word-independent projective hash on it.

The group is the order-Q subgroup of Z_P^* for a safe prime P = 2Q + 1. Words
are ElGamal ciphertexts; honest words encrypt the group identity, and the
membership trapdoor is simply the decryption key. Arithmetic is plain modular
exponentiation: NOT constant time, research code only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import sympy

from .core import (
    ProtocolAbort,
    RhoMode,
    RhoTrapdoor,
    SigmaMode,
    SphfScheme,
    mask_from_kdf,
)
from .util import Rng, int_from_bytes, int_to_bytes, tagged_sha256

__all__ = [
    "GroupParams",
    "get_group",
    "group_exp",
    "ElGamalKeys",
    "eg_keygen",
    "eg_encrypt",
    "eg_decrypt",
    "DhScheme",
    "GROUP_PRESETS",
]


@dataclass(frozen=True)
class GroupParams:
    """Subgroup description (modulus p, subgroup order q, generator g)."""

    p: int
    q: int
    g: int

    def __post_init__(self):
        if not sympy.isprime(self.p) or not sympy.isprime(self.q):
            raise ValueError("p and q must be prime")
        if (self.p - 1) % self.q:
            raise ValueError("q must divide p - 1")
        if not (1 < self.g < self.p) or self.g == 1:
            raise ValueError("generator out of range")
        if pow(self.g, self.q, self.p) != 1:
            raise ValueError("generator does not have order q")
        object.__setattr__(self, "elem_width", (self.p.bit_length() + 7) // 8)
        object.__setattr__(
            self,
            "digest",
            tagged_sha256(b"gzot-dh-group", self.params_bytes())[:16],
        )

    def params_bytes(self) -> bytes:
        out = b""
        for v in (self.p, self.q, self.g):
            enc = int_to_bytes(v, (v.bit_length() + 7) // 8 or 1)
            out += len(enc).to_bytes(4, "big") + enc
        return out

    def elem_bytes(self, x: int) -> bytes:
        return int_to_bytes(x, self.elem_width)

    def in_subgroup(self, x: int) -> bool:
        return 1 <= x < self.p and pow(x, self.q, self.p) == 1

    def rand_exp(self, rng: Rng) -> int:
        return rng.randbelow(self.q)

    def rand_elem(self, rng: Rng) -> int:
        return pow(self.g, self.rand_exp(rng), self.p)


# Safe-prime pairs found by deterministic upward search from a power of two;
# primality is re-checked at construction time.
_Q_TEST = 2**127 + 6225
_Q_DEMO = 2**255 + 115095

GROUP_PRESETS = {
    "toy": (23, 11, 2),
    "test": (2 * _Q_TEST + 1, _Q_TEST, 4),
    "demo": (2 * _Q_DEMO + 1, _Q_DEMO, 4),
}

_group_cache: dict[str, GroupParams] = {}


def get_group(name: str) -> GroupParams:
    if name not in GROUP_PRESETS:
        raise KeyError(f"unknown group preset {name!r}")
    if name not in _group_cache:
        _group_cache[name] = GroupParams(*GROUP_PRESETS[name])
    return _group_cache[name]


def group_exp(group: GroupParams, base: int, e: int) -> int:
    """base^e mod p (e taken mod q)."""
    return pow(base, e % group.q, group.p)


@dataclass(frozen=True)
class ElGamalKeys:
    """Key pair h = g^beta. beta = 0 (h = 1) is legal but degenerate."""

    beta: int
    h: int

    def __post_init__(self):
        if self.h == 1:
            warnings.warn("degenerate key: beta = 0 gives h = 1", stacklevel=3)


def eg_keygen(group: GroupParams, rng: Rng) -> ElGamalKeys:
    beta = group.rand_exp(rng)
    return ElGamalKeys(beta, pow(group.g, beta, group.p))


def eg_encrypt(group: GroupParams, h: int, msg: int, r: int) -> tuple[int, int]:
    """Ciphertext (g^r, h^r * msg) for a subgroup element msg."""
    return pow(group.g, r, group.p), pow(h, r, group.p) * msg % group.p


def eg_decrypt(group: GroupParams, beta: int, ct: tuple[int, int]) -> int:
    c0, c1 = ct
    return c1 * pow(pow(c0, beta, group.p), -1, group.p) % group.p


class DhScheme(SphfScheme):
    """Discrete-log instantiation.

    sigma is an ElGamal public key h (its discrete log is the membership
    trapdoor); rho is a pair of group elements combined into ciphertexts
    multiplicatively. Words are ciphertext pairs; the honest language is the
    encryptions of 1. Hashing keys are exponent pairs, projection keys a
    single group element independent of the word, and hash values group
    elements rendered into masks through a KDF.
    """

    tag = 1
    kappa_bits = None  # any mask width; the KDF expands

    def __init__(self, preset: str = "test"):
        self.name = f"dh-{preset}"
        self.preset = preset
        self.group = get_group(preset)

    # -- CRS ---------------------------------------------------------------
    def sample_sigma(self, mode: SigmaMode, rng: Rng):
        keys = eg_keygen(self.group, rng)
        return keys.h, (keys.beta if mode is SigmaMode.S1 else None)

    def sample_rho(self, mode: RhoMode, sigma, rng: Rng):
        g, p = self.group.g, self.group.p
        if mode is RhoMode.R0:
            return (self.group.rand_elem(rng), self.group.rand_elem(rng)), None
        if mode is RhoMode.R1:
            # rho is a product of two honest encryptions of 1; equivalently
            # (g^t, h^t) with the pair split at a uniform exponent r.
            t = self.group.rand_exp(rng)
            rho = (pow(g, t, p), pow(sigma, t, p))
            r = self.group.rand_exp(rng)
            x = eg_encrypt(self.group, sigma, 1, r)
            x_prime = self.complement(rho, x)
            return rho, RhoTrapdoor(x, x_prime, r, (t - r) % self.group.q)
        if mode is RhoMode.R1PRIME:
            # product of two encryptions of random non-identity plaintexts
            def enc_nonident():
                a = 1 + rng.randbelow(self.group.q - 1)
                return eg_encrypt(self.group, sigma, pow(g, a, p), self.group.rand_exp(rng))

            x = enc_nonident()
            x_prime = enc_nonident()
            rho = (x[0] * x_prime[0] % p, x[1] * x_prime[1] % p)
            return rho, RhoTrapdoor(x, x_prime)
        raise ValueError(f"unknown rho mode {mode!r}")

    # -- words ---------------------------------------------------------------
    def wordgen_l(self, sigma, rng: Rng):
        r = self.group.rand_exp(rng)
        return eg_encrypt(self.group, sigma, 1, r), r

    def wordgen_x(self, sigma, rng: Rng):
        return (self.group.rand_elem(rng), self.group.rand_elem(rng))

    def wordtest(self, td_sigma, word) -> bool:
        return eg_decrypt(self.group, td_sigma, word) != 1

    def complement(self, rho, word):
        p = self.group.p
        return (
            rho[0] * pow(word[0], -1, p) % p,
            rho[1] * pow(word[1], -1, p) % p,
        )

    def witness_check(self, sigma, word, witness) -> bool:
        return word == eg_encrypt(self.group, sigma, 1, witness)

    def words_equal(self, a, b) -> bool:
        return tuple(a) == tuple(b)

    def sigma_trapdoor_check(self, sigma, td_sigma) -> bool:
        return pow(self.group.g, td_sigma, self.group.p) == sigma

    # -- hashing -------------------------------------------------------------
    def hash_kg(self, rng: Rng):
        return (self.group.rand_exp(rng), self.group.rand_exp(rng))

    def proj_kg(self, sigma, hk, word, rng: Rng = None):
        # word-independent: the word argument is accepted and ignored
        alpha, beta = hk
        g, p = self.group.g, self.group.p
        return pow(g, alpha, p) * pow(sigma, beta, p) % p

    def hash_value(self, hk, word):
        alpha, beta = hk
        u, v = word
        p = self.group.p
        return pow(u, alpha, p) * pow(v, beta, p) % p

    def proj_hash(self, hp, word, witness, rng: Rng = None):
        return pow(hp, witness, self.group.p)

    def to_mask(self, hash_value, nbits: int) -> bytes:
        return mask_from_kdf(self.group.digest + self.group.elem_bytes(hash_value), nbits)

    # -- serialization -------------------------------------------------------
    def word_bytes(self, word) -> bytes:
        return self.group.elem_bytes(word[0]) + self.group.elem_bytes(word[1])

    def word_from_bytes(self, data: bytes):
        w = self.group.elem_width
        if len(data) != 2 * w:
            raise ProtocolAbort(f"word encoding must be {2 * w} bytes, got {len(data)}")
        c0, c1 = int_from_bytes(data[:w]), int_from_bytes(data[w:])
        if not (self.group.in_subgroup(c0) and self.group.in_subgroup(c1)):
            raise ProtocolAbort("word components outside the subgroup")
        return (c0, c1)

    def projkey_bytes(self, hp) -> bytes:
        return self.group.elem_bytes(hp)

    def projkey_from_bytes(self, data: bytes):
        if len(data) != self.group.elem_width:
            raise ProtocolAbort("bad projection key length")
        hp = int_from_bytes(data)
        if not self.group.in_subgroup(hp):
            raise ProtocolAbort("projection key outside the subgroup")
        return hp

    def sigma_bytes(self, sigma) -> bytes:
        return self.group.digest + self.group.elem_bytes(sigma)

    def rho_bytes(self, rho) -> bytes:
        return self.group.digest + self.group.elem_bytes(rho[0]) + self.group.elem_bytes(rho[1])
