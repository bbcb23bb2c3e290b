"""Lattice backend: trapdoored matrices, bit encryption, projective hashing."""

from .encrypt import encode_bit, lwe_decrypt, lwe_encrypt, witness_check
from .gaussian import sample_gauss
from .params import PRESETS, LweParams, get_params
from .sphf import (
    FullHashKey,
    FullProjKey,
    LweScheme,
    bit_hash,
    bit_hash_kg,
    bit_proj_hash,
    bit_proj_kg,
    ecc_decode,
    ecc_encode,
    full_hash,
    full_hash_kg,
    full_proj_hash,
    full_proj_kg,
    prob_round,
)
from .trapdoor import Trapdoor, gadget_invert, gadget_matrix, gadget_vec, trapgen

__all__ = [
    "LweParams",
    "get_params",
    "PRESETS",
    "sample_gauss",
    "Trapdoor",
    "trapgen",
    "gadget_vec",
    "gadget_matrix",
    "gadget_invert",
    "encode_bit",
    "lwe_encrypt",
    "lwe_decrypt",
    "witness_check",
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
