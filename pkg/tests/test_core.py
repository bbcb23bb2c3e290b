import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gzot import Rng, RhoMode, SigmaMode, check_crs_consistency, get_scheme, xor_mask
from gzot.core import Crs, RhoTrapdoor
from gzot.ot import derive_crs

SID = bytes(range(8))


def test_xor_mask_examples():
    assert xor_mask(b"\x00\x00", b"\xab\xcd") == b"\xab\xcd"
    assert xor_mask(b"\xab\xcd", b"\xab\xcd") == b"\x00\x00"
    assert xor_mask(b"\xa5", b"\x5a") == b"\xff"


def test_xor_mask_length_mismatch():
    with pytest.raises(ValueError):
        xor_mask(b"\x00", b"\x00\x00")


@given(st.binary(min_size=0, max_size=64), st.binary(min_size=0, max_size=64))
def test_xor_mask_involution(m, mask):
    n = min(len(m), len(mask))
    m, mask = m[:n], mask[:n]
    assert xor_mask(xor_mask(m, mask), mask) == m


@pytest.fixture(scope="module")
def dh_toy():
    return get_scheme("dh", "toy")


def test_consistency_structural(dh_toy):
    rng = Rng(5)
    sigma, td = dh_toy.sample_sigma(SigmaMode.S1, rng)
    rho, _ = dh_toy.sample_rho(RhoMode.R0, sigma, rng)

    good = Crs(dh_toy, sigma, rho, SigmaMode.S1, RhoMode.R0, td_sigma=td)
    assert check_crs_consistency(good)

    # S0 with a trapdoor attached, S1 without one
    assert not check_crs_consistency(dataclasses.replace(good, sigma_mode=SigmaMode.S0))
    assert not check_crs_consistency(dataclasses.replace(good, td_sigma=None))
    # trapdoor that does not open sigma
    assert not check_crs_consistency(
        dataclasses.replace(good, td_sigma=(td + 1) % dh_toy.group.q)
    )


def test_consistency_r1_tampered_pair(dh_toy):
    rng = Rng(6)
    crs = dh_toy.make_crs(rng, SigmaMode.S0, RhoMode.R1)
    assert check_crs_consistency(crs)
    td = crs.td_rho
    # second word no longer the complement of the first
    wrong = RhoTrapdoor(td.word, td.word, td.witness, td.witness)
    assert not check_crs_consistency(dataclasses.replace(crs, td_rho=wrong))
    # witness swapped between the words
    swapped = RhoTrapdoor(td.word, td.word_prime, td.witness_prime, td.witness)
    assert not check_crs_consistency(dataclasses.replace(crs, td_rho=swapped))
    # R1' must not carry witnesses
    assert not check_crs_consistency(dataclasses.replace(crs, rho_mode=RhoMode.R1PRIME))


def test_consistency_r1prime_with_s1(dh_toy):
    crs = dh_toy.make_crs(Rng(7), SigmaMode.S1, RhoMode.R1PRIME)
    assert check_crs_consistency(crs)
    td = crs.td_rho
    # replace one trapdoor word with an honest-language word: wordtest fails
    word_l, _ = dh_toy.wordgen_l(crs.sigma, Rng(8))
    bad = RhoTrapdoor(word_l, dh_toy.complement(crs.rho, word_l))
    assert not check_crs_consistency(dataclasses.replace(crs, td_rho=bad))


@pytest.mark.parametrize("inst,preset", [("dh", "toy"), ("lwe", "toy")])
def test_public_bytes_exclude_trapdoors(inst, preset):
    # the same sid derives the same public CRS whatever the modes, and the
    # byte form never embeds trapdoor material
    scheme = get_scheme(inst, preset)
    plain = derive_crs(SID, scheme).public_bytes()
    with_td = derive_crs(SID, scheme, SigmaMode.S1, RhoMode.R0).public_bytes()
    assert plain == with_td


def test_public_bytes_parse_shape(dh_toy):
    crs = derive_crs(SID, dh_toy)
    blob = crs.public_bytes()
    ln = int.from_bytes(blob[:4], "big")
    sigma_part = blob[4 : 4 + ln]
    assert sigma_part == dh_toy.sigma_bytes(crs.sigma)
    ln2 = int.from_bytes(blob[4 + ln : 8 + ln], "big")
    assert len(blob) == 8 + ln + ln2
