"""Parameter sets for the lattice backend.

Dimensions follow the usual trapdoor layout: a public matrix of m = mbar + n*w
rows over Z_q, where w is the gadget width (the bit length of q). Noise bounds
are kept as exact integers/rationals and all comparisons go through squared
norms, so no floating point enters a correctness decision:

  B   = 2 t sqrt(m)      honest encryption noise bound (B2 = 4 t^2 m)
  B'  = q / (8 sqrt(m))  inversion bound   (Bp2  = q^2 / (64 m))
  B'' = B' / 2           decryption bound  (Bpp2 = q^2 / (256 m))

Presets deliberately run far below cryptographic sizes; they are chosen so the
operational inequalities below hold, which is what the tests exercise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import sympy

from ..util import tagged_sha256

__all__ = ["LweParams", "get_params", "PRESETS"]


@dataclass(frozen=True)
class LweParams:
    name: str
    n: int          # secret dimension
    q: int          # odd prime modulus
    mbar: int       # rows of the uniform block
    t: int          # encryption noise Gaussian parameter
    kappa: int      # output key bits
    rep: int        # repetition factor (odd); ell = kappa * rep
    k_amp: int      # parallel-word amplification arity
    s_hk: int = 0   # hash-key Gaussian parameter; 0 = derived default
    sigma_lwe: float = 0.0  # informational base noise parameter
    checked: bool = True    # False skips the noise-bound inequalities (gadget-only uses)

    def __post_init__(self):
        if not sympy.isprime(self.q) or self.q % 2 == 0:
            raise ValueError("q must be an odd prime")
        if self.rep % 2 == 0:
            raise ValueError("repetition factor must be odd")
        if self.kappa % 8:
            raise ValueError("kappa must be a multiple of 8")
        if self.t < 1:
            raise ValueError("noise parameter t must be >= 1")
        width = self.q.bit_length()          # gadget width; 2^(width-1) < q < 2^width
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "k_g", width - 1)
        object.__setattr__(self, "nw", self.n * width)
        object.__setattr__(self, "m", self.mbar + self.n * width)
        object.__setattr__(self, "ell", self.kappa * self.rep)
        if self.s_hk == 0:
            # keeps the per-bit hash agreement at ~3/4 (see estimators oracle)
            object.__setattr__(
                self, "s_hk", max(1, round(self.q * math.sqrt(0.02 / self.m) / self.t))
            )
        if self.sigma_lwe == 0.0:
            object.__setattr__(self, "sigma_lwe", self.t / math.sqrt(self.m))
        object.__setattr__(self, "B2", 4 * self.t * self.t * self.m)
        object.__setattr__(self, "Bp2", Fraction(self.q * self.q, 64 * self.m))
        object.__setattr__(self, "Bpp2", Fraction(self.q * self.q, 256 * self.m))
        if self.checked:
            # correctness: honest noise decrypts (B <= B'')
            if self.B2 > self.Bpp2:
                raise ValueError("parameters violate B <= B''")
            # sums of two honest ciphertexts must still decrypt (B <= B''/2)
            if 4 * self.B2 > self.Bpp2:
                raise ValueError("parameters violate 2B <= B''")
            # room for gadget inversion of doubled ciphertexts: (2B+1)^2 <= B'^2
            b_up = math.isqrt(self.B2) + 1
            if 4 * self.B2 + 4 * b_up + 1 > self.Bp2:
                raise ValueError("parameters violate 2B + 1 <= B'")
        object.__setattr__(self, "limb_bytes", (self.q.bit_length() + 7) // 8)
        object.__setattr__(
            self,
            "digest",
            tagged_sha256(
                b"gzot-lwe-params",
                repr((self.n, self.q, self.mbar, self.t, self.kappa,
                      self.rep, self.k_amp, self.s_hk)).encode(),
            )[:16],
        )

    def describe(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "q": self.q,
            "m": self.m,
            "mbar": self.mbar,
            "gadget_width": self.width,
            "t": self.t,
            "s_hk": self.s_hk,
            "kappa": self.kappa,
            "rep": self.rep,
            "ell": self.ell,
            "k_amp": self.k_amp,
            "B2": self.B2,
            "Bp2": str(self.Bp2),
            "Bpp2": str(self.Bpp2),
            "limb_bytes": self.limb_bytes,
        }


# q values: smallest primes at or above 2^13 / 2^30 / 2^61 (re-verified at
# construction). toy keeps t = 1: with q pinned this small, the noise bounds
# leave no room for larger parameters.
PRESETS = {
    "toy": dict(n=8, q=8209, mbar=16, t=1, kappa=8, rep=63, k_amp=2),
    "test": dict(n=64, q=1073741827, mbar=128, t=735, kappa=16, rep=63, k_amp=8),
    "demo": dict(n=128, q=2305843009213693967, mbar=256, t=2048, kappa=128, rep=127, k_amp=40),
}

_cache: dict[str, LweParams] = {}


def get_params(name: str) -> LweParams:
    if name not in PRESETS:
        raise KeyError(f"unknown parameter preset {name!r}")
    if name not in _cache:
        _cache[name] = LweParams(name=name, **PRESETS[name])
    return _cache[name]
