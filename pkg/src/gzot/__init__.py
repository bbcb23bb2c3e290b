"""Grey-zone projective hashing and the two-flow oblivious transfer on top.

Two interchangeable backends: a prime-order-group one (exact correctness) and
a lattice one (statistical correctness). `get_scheme` resolves an
instantiation tag or name plus a parameter preset.
"""

from .core import (
    ConfigError,
    Crs,
    DecodeError,
    GzotError,
    ProtocolAbort,
    RhoMode,
    RhoTrapdoor,
    SigmaMode,
    SphfScheme,
    check_crs_consistency,
    xor_mask,
)
from .util import Rng

__version__ = "0.1.0"

INSTANTIATIONS = ("dh", "lwe")


def get_scheme(inst: str, preset: str = "test") -> SphfScheme:
    """Resolve an instantiation name ("dh" or "lwe") and preset to a scheme."""
    if inst == "dh":
        from .dh import DhScheme

        return DhScheme(preset)
    if inst == "lwe":
        from .lwe import LweScheme

        return LweScheme(preset)
    raise ConfigError(f"unknown instantiation {inst!r}")


def scheme_by_tag(tag: int, preset: str = "test") -> SphfScheme:
    for name in INSTANTIATIONS:
        s = get_scheme(name, preset)
        if s.tag == tag:
            return s
    raise ConfigError(f"unknown instantiation tag {tag}")


__all__ = [
    "Rng",
    "Crs",
    "SigmaMode",
    "RhoMode",
    "RhoTrapdoor",
    "SphfScheme",
    "check_crs_consistency",
    "xor_mask",
    "GzotError",
    "ProtocolAbort",
    "DecodeError",
    "ConfigError",
    "get_scheme",
    "scheme_by_tag",
    "INSTANTIATIONS",
]
