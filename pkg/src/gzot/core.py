"""Instantiation-independent contract for projective hashing with a grey zone.

Words live in an ambient space X containing two disjoint languages: L (honest
words, carrying witnesses) and L' (words a membership trapdoor can recognize).
Whatever sits in between is the grey zone: neither correctness nor hiding is
promised there. The common reference string is a pair (sigma, rho); each half
can be sampled in a plain mode or in a trapdoored mode, and the trapdoors ride
inside the Crs container so protocol code stays mode-oblivious.
"""

from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from dataclasses import dataclass

from .util import kdf_bits


class GzotError(Exception):
    """Base class for library errors."""


class ProtocolAbort(GzotError):
    """A party refuses to continue (bad word, bad phase, bad peer input)."""


class DecodeError(GzotError):
    """Wire bytes do not parse (framing, magic, version, truncation)."""


class ConfigError(GzotError):
    """Invalid run configuration."""


class SigmaMode(enum.Enum):
    S0 = "S0"  # plain sampling, no trapdoor
    S1 = "S1"  # carries a membership-test trapdoor for L'


class RhoMode(enum.Enum):
    R0 = "R0"            # plain sampling, no trapdoor
    R1 = "R1"            # trapdoor = complementary pair of L-words plus witnesses
    R1PRIME = "R1prime"  # trapdoor = complementary pair of L'-words


@dataclass(frozen=True)
class RhoTrapdoor:
    """Complementary word pair hidden in a trapdoored rho.

    `word_prime` is always the complement of `word` under rho. Witnesses are
    present exactly in R1 mode.
    """

    word: object
    word_prime: object
    witness: object = None
    witness_prime: object = None


@dataclass(frozen=True, eq=False)
class Crs:
    """Common reference string (sigma, rho) plus optional trapdoors.

    The public part is just (sigma, rho); serialization never touches the
    trapdoors. Immutable after construction, safe to share across threads.
    """

    scheme: "SphfScheme"
    sigma: object
    rho: object
    sigma_mode: SigmaMode
    rho_mode: RhoMode
    td_sigma: object = None
    td_rho: RhoTrapdoor = None

    def public_bytes(self) -> bytes:
        sb = self.scheme.sigma_bytes(self.sigma)
        rb = self.scheme.rho_bytes(self.rho)
        return len(sb).to_bytes(4, "big") + sb + len(rb).to_bytes(4, "big") + rb


def xor_mask(a: bytes, b: bytes) -> bytes:
    """Bitwise XOR of two equal-length masks."""
    if len(a) != len(b):
        raise ValueError(f"mask length mismatch: {len(a)} != {len(b)}")
    return bytes(x ^ y for x, y in zip(a, b))


def check_crs_consistency(crs: Crs) -> bool:
    """True iff mode tags, trapdoor presence and trapdoor contents all agree.

    Structural rules: td_sigma present iff sigma is in S1 mode; td_rho present
    iff rho is in a trapdoored mode, with witnesses exactly in R1. Semantic
    rules: td_sigma must match sigma, the trapdoor pair must be complementary
    under rho, R1 witnesses must verify, and R1' words must pass the
    membership test whenever an S1 trapdoor is around to run it.
    """
    if (crs.td_sigma is not None) != (crs.sigma_mode is SigmaMode.S1):
        return False
    if (crs.td_rho is not None) != (crs.rho_mode in (RhoMode.R1, RhoMode.R1PRIME)):
        return False
    s = crs.scheme
    try:
        if crs.td_sigma is not None and not s.sigma_trapdoor_check(crs.sigma, crs.td_sigma):
            return False
        td = crs.td_rho
        if td is not None:
            if not s.words_equal(s.complement(crs.rho, td.word), td.word_prime):
                return False
            if crs.rho_mode is RhoMode.R1:
                if td.witness is None or td.witness_prime is None:
                    return False
                if not s.witness_check(crs.sigma, td.word, td.witness):
                    return False
                if not s.witness_check(crs.sigma, td.word_prime, td.witness_prime):
                    return False
            else:
                if td.witness is not None or td.witness_prime is not None:
                    return False
                if crs.td_sigma is not None:
                    if not s.wordtest(crs.td_sigma, td.word):
                        return False
                    if not s.wordtest(crs.td_sigma, td.word_prime):
                        return False
    except Exception:
        return False
    return True


class SphfScheme(ABC):
    """One instantiation of the keyed-hash-over-a-language primitive.

    Contract, for every scheme:
      * correctness: for (x, w) from wordgen_l, hash_value(hk, x) and
        proj_hash(proj_kg(hk, x, .), x, w, .) produce the same mask (exactly,
        or except with negligible probability for the noisy backend);
      * complement is an involution: complement(rho, complement(rho, x)) == x;
      * proj_kg may look at the word (keys are generated after the word is
        fixed), hash_value never sees a witness, proj_hash never sees hk.

    Operations that consume randomness take an explicit Rng so runs are
    reproducible and trials can use independent streams. Schemes are
    stateless value factories; everything they return is immutable.
    """

    name: str
    tag: int  # wire instantiation tag
    kappa_bits: int | None  # fixed mask width, or None if any width works

    # -- CRS sampling ------------------------------------------------------
    @abstractmethod
    def sample_sigma(self, mode: SigmaMode, rng):
        """Return (sigma, td_sigma-or-None). S0 and S1 sample identically."""

    @abstractmethod
    def sample_rho(self, mode: RhoMode, sigma, rng):
        """Return (rho, td_rho-or-None). sigma must be fixed first."""

    def make_crs(self, rng, sigma_mode=SigmaMode.S0, rho_mode=RhoMode.R0) -> Crs:
        sigma, td_s = self.sample_sigma(sigma_mode, rng)
        rho, td_r = self.sample_rho(rho_mode, sigma, rng)
        return Crs(self, sigma, rho, sigma_mode, rho_mode, td_s, td_r)

    # -- words -------------------------------------------------------------
    @abstractmethod
    def wordgen_l(self, sigma, rng):
        """Sample an honest word together with its witness."""

    @abstractmethod
    def wordgen_x(self, sigma, rng):
        """Sample a word uniformly from the ambient space."""

    @abstractmethod
    def wordtest(self, td_sigma, word) -> bool:
        """Membership test for L', available only with an S1 trapdoor."""

    @abstractmethod
    def complement(self, rho, word):
        """The word pairing with `word` so their combination equals rho."""

    @abstractmethod
    def witness_check(self, sigma, word, witness) -> bool:
        """Does (word, witness) satisfy the language relation?"""

    @abstractmethod
    def words_equal(self, a, b) -> bool: ...

    @abstractmethod
    def sigma_trapdoor_check(self, sigma, td_sigma) -> bool: ...

    # -- hashing -----------------------------------------------------------
    @abstractmethod
    def hash_kg(self, rng):
        """Fresh hashing key."""

    @abstractmethod
    def proj_kg(self, sigma, hk, word, rng):
        """Projection key for a fixed word (may consume rounding randomness)."""

    @abstractmethod
    def hash_value(self, hk, word):
        """Hash of a word under the full key; never uses a witness."""

    @abstractmethod
    def proj_hash(self, hp, word, witness, rng):
        """Hash recomputed from the projection key and a witness."""

    @abstractmethod
    def to_mask(self, hash_value, nbits: int) -> bytes:
        """Render a hash value as an nbits XOR mask."""

    # -- serialization (public values only; trapdoors never serialize) ------
    @abstractmethod
    def word_bytes(self, word) -> bytes: ...

    @abstractmethod
    def word_from_bytes(self, data: bytes):
        """Parse and validate a word; raises ProtocolAbort on malformed input."""

    @abstractmethod
    def projkey_bytes(self, hp) -> bytes: ...

    @abstractmethod
    def projkey_from_bytes(self, data: bytes): ...

    @abstractmethod
    def sigma_bytes(self, sigma) -> bytes: ...

    @abstractmethod
    def rho_bytes(self, rho) -> bytes: ...


def mask_from_kdf(data: bytes, nbits: int) -> bytes:
    """Fixed-width mask from a hash-value encoding (group-element backends)."""
    return kdf_bits(data, nbits)
