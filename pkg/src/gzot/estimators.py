"""Monte Carlo suites for the statistical claims, plus their analytic oracles.

Each suite runs a seeded experiment and emits a TrialReport (counts, rate,
95% Wilson half-width, wall time). Rates that admit an independent
prediction -- the cosine-rounding agreement, repetition-decoding failure, the
parallel-slot product law -- carry the predicted value in `extra`, computed
by closed-form or exact binomial arithmetic rather than by the code path
under test.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import get_scheme
from .core import ConfigError, RhoMode, SigmaMode
from .lwe import get_params, lwe_encrypt, sample_gauss, trapgen
from .lwe.trapdoor import gadget_invert
from .ot import (
    Flow1,
    IdealOtState,
    decode_flow1_payload,
    decode_flow2_payload,
    decode_frame,
    derive_crs,
    extract_choice,
    extract_messages,
    ideal_ot_step,
    receiver_init,
    run_protocol,
    sender_respond,
    simulate_honest_transcript,
)
from .util import Rng, matmul_mod

__all__ = [
    "TrialReport",
    "wilson_halfwidth",
    "binomial_tail",
    "predicted_bit_disagreement",
    "predicted_block_failure",
    "predicted_full_correctness",
    "SUITES",
    "run_suite",
    "append_report",
]

_Z95 = 1.959963984540054


def wilson_halfwidth(successes: int, trials: int, z: float = _Z95) -> float:
    """Half-width of the Wilson score interval (sane at small counts)."""
    if trials <= 0:
        return 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    return z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom


@dataclass
class TrialReport:
    suite: str
    trials: int
    successes: int
    wall_time_ms: float
    extra: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def radius(self) -> float:
        return wilson_halfwidth(self.successes, self.trials)

    def to_json(self) -> str:
        doc = {
            "suite": self.suite,
            "trials": self.trials,
            "successes": self.successes,
            "rate": self.rate,
            "radius": self.radius,
            "wall_time_ms": round(self.wall_time_ms, 3),
        }
        doc.update(self.extra)
        return json.dumps(doc, sort_keys=True, default=str)


def append_report(path: str, report: TrialReport) -> None:
    """Reports are append-only JSON lines; existing files are never rewritten."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")


# -- analytic oracles ---------------------------------------------------------


def binomial_tail(n: int, k: int, p: float) -> float:
    """P[Bin(n, p) >= k], exact rational arithmetic."""
    pf = Fraction(p).limit_denominator(10**12)
    acc = Fraction(0)
    for j in range(k, n + 1):
        acc += math.comb(n, j) * pf**j * (1 - pf) ** (n - j)
    return float(acc)


def predicted_bit_disagreement(params) -> float:
    """Expected Pr[bit hash != bit projection] on honest words.

    Independent cosine roundings of x and x + delta agree with probability
    1/2 + E[cos(2 pi delta / q)] / 4; for Gaussian key and noise the cosine
    average is (1 + (s_hk t / q)^2)^(-m/2).
    """
    ratio = (params.s_hk * params.t / params.q) ** 2
    e_cos = (1.0 + ratio) ** (-params.m / 2.0)
    return 0.5 - e_cos / 4.0


def predicted_block_failure(params) -> float:
    """Majority-decoding failure of one repetition block at the predicted bit error."""
    return binomial_tail(params.rep, (params.rep + 1) // 2, predicted_bit_disagreement(params))


def predicted_full_correctness(params) -> float:
    """Probability the full key decodes across all blocks of all parallel slots."""
    return (1.0 - predicted_block_failure(params)) ** (params.kappa * params.k_amp)


# -- batched lattice helpers --------------------------------------------------


def _rowdot_mod(x: np.ndarray, y: np.ndarray, q: int) -> np.ndarray:
    # centered entries keep products below 2^62 for q < 2^31
    xc = np.where(x > q // 2, x - q, x)
    yc = np.where(y > q // 2, y - q, y)
    return ((xc * yc) % q).sum(axis=1) % q


def _honest_word_batch(params, A, count: int, rng: Rng):
    """count independent encryptions of 0: returns (C, S, E)."""
    S = rng.np.integers(0, params.q, size=(count, params.n), dtype=np.int64)
    E = sample_gauss(params.t, (count, params.m), rng)
    bad = (E * E).sum(axis=1) > params.B2  # |e| <= 12t so int64 is exact
    while bad.any():  # pragma: no cover - rejection is ~never hit
        idx = np.flatnonzero(bad)
        E[idx] = sample_gauss(params.t, (len(idx), params.m), rng)
        bad[idx] = (E[idx] * E[idx]).sum(axis=1) > params.B2
    C = (matmul_mod(S, A.T, params.q) + E) % params.q
    return C, S, E


def _round_bits(params, vals: np.ndarray, rng: Rng) -> np.ndarray:
    p = 0.5 * (1.0 + np.cos(2.0 * np.pi * vals.astype(np.float64) / params.q))
    return (rng.np.random(vals.shape) < p).astype(np.uint8)


# -- suites -------------------------------------------------------------------


def suite_bit_correctness(preset: str, trials: int, rng: Rng, **_) -> TrialReport:
    """Agreement of hash vs projection hash on honest words, bit level."""
    t0 = time.perf_counter()
    params = get_params(preset)
    td = trapgen(params, rng.derive("sigma"))
    A = td.A
    successes = 0
    chunk = 1024
    done = 0
    while done < trials:
        cn = min(chunk, trials - done)
        crng = rng.derive("chunk", done)
        C, S, _ = _honest_word_batch(params, A, cn, crng)
        H = sample_gauss(params.s_hk, (cn, params.m), crng)
        # <h, c> rowwise: |h| <= 12 s_hk, centered c < q/2, m terms: < 2^62
        Cc = np.where(C > params.q // 2, C - params.q, C)
        hv = np.einsum("ij,ij->i", H, Cc) % params.q
        HP = matmul_mod(H, A, params.q)
        pv = _rowdot_mod(HP, S % params.q, params.q)
        hb = _round_bits(params, hv, crng)
        pb = _round_bits(params, pv, crng)
        successes += int((hb == pb).sum())
        done += cn
    ms = (time.perf_counter() - t0) * 1000
    pred = 1.0 - predicted_bit_disagreement(params)
    return TrialReport("bit-correctness", trials, successes, ms,
                       {"preset": preset, "predicted_rate": pred})


def suite_full_correctness(preset: str, trials: int, rng: Rng, **_) -> TrialReport:
    """End-to-end lattice OT runs; success means the receiver got m_b exactly."""
    t0 = time.perf_counter()
    scheme = get_scheme("lwe", preset)
    nbytes = scheme.kappa_bits // 8
    successes = 0
    for i in range(trials):
        trng = rng.derive("run", i)
        sid = trng.randbytes(8)
        crs = derive_crs(sid, scheme)
        b = trng.randbit()
        m0, m1 = trng.randbytes(nbytes), trng.randbytes(nbytes)
        out, _, _ = run_protocol(crs, sid, b, m0, m1, trng)
        successes += out == (m0, m1)[b]
    ms = (time.perf_counter() - t0) * 1000
    params = get_params(preset)
    return TrialReport("full-correctness", trials, successes, ms, {
        "preset": preset,
        "predicted_rate": predicted_full_correctness(params),
        "predicted_rate_demo": predicted_full_correctness(get_params("demo")),
    })


def suite_smoothness_bias(inst: str, preset: str, trials: int, rng: Rng, **_) -> TrialReport:
    """Frequency of 1-bits in hashes of uniformly random words (expect 1/2)."""
    t0 = time.perf_counter()
    if inst == "lwe":
        params = get_params(preset)
        td = trapgen(params, rng.derive("sigma"))
        successes = 0
        chunk, done = 2048, 0
        while done < trials:
            cn = min(chunk, trials - done)
            crng = rng.derive("chunk", done)
            C = crng.np.integers(0, params.q, size=(cn, params.m), dtype=np.int64)
            H = sample_gauss(params.s_hk, (cn, params.m), crng)
            Cc = np.where(C > params.q // 2, C - params.q, C)
            hv = np.einsum("ij,ij->i", H, Cc) % params.q
            successes += int(_round_bits(params, hv, crng).sum())
            done += cn
        total = trials
    else:
        scheme = get_scheme("dh", preset)
        crs = derive_crs(rng.randbytes(8), scheme)
        ones = total = 0
        for i in range(trials):
            trng = rng.derive("trial", i)
            word = scheme.wordgen_x(crs.sigma, trng)
            hk = scheme.hash_kg(trng)
            mask = scheme.to_mask(scheme.hash_value(hk, word), 64)
            ones += sum(bin(byte).count("1") for byte in mask)
            total += 64
        successes = ones
    ms = (time.perf_counter() - t0) * 1000
    return TrialReport("smoothness-bias", total, successes, ms,
                       {"inst": inst, "preset": preset, "predicted_rate": 0.5})


def suite_dh_decomposition(preset: str, trials: int, rng: Rng, **_) -> TrialReport:
    """How often a uniform rho decrypts to the identity (the splittable event)."""
    t0 = time.perf_counter()
    scheme = get_scheme("dh", preset)
    crs = derive_crs(rng.randbytes(8), scheme, SigmaMode.S1)
    successes = 0
    for i in range(trials):
        trng = rng.derive("trial", i)
        rho = scheme.wordgen_x(crs.sigma, trng)
        successes += not scheme.wordtest(crs.td_sigma, rho)
    ms = (time.perf_counter() - t0) * 1000
    return TrialReport("dh-decomposition", trials, successes, ms, {
        "preset": preset,
        "predicted_rate": 1.0 / scheme.group.q,
        "bound": 2.0 / scheme.group.q,
    })


def suite_lwe_half_decomposition(preset: str, trials: int, rng: Rng, **_) -> TrialReport:
    """Fraction of uniform vectors splittable into two zero-decrypting halves.

    A split into ciphertexts both decrypting to 0 forces the vector within
    twice the decryption radius of the lattice, which trapdoor inversion
    detects; the one-one split likewise shows up at a doubled-encoding
    offset, reported alongside."""
    t0 = time.perf_counter()
    params = get_params(preset)
    td = trapgen(params, rng.derive("sigma"))
    bound2 = 4 * params.Bpp2  # squared distance (2 B'')^2
    offset = np.zeros(params.m, dtype=np.int64)
    offset[-1] = 1  # doubled bit encoding of 1 + 1
    successes = 0
    near_one_pair = 0
    for i in range(trials):
        trng = rng.derive("trial", i)
        v = trng.np.integers(0, params.q, size=params.m, dtype=np.int64)
        successes += gadget_invert(td, v, bound2) is not None
        near_one_pair += gadget_invert(td, (v - offset) % params.q, bound2) is not None
    ms = (time.perf_counter() - t0) * 1000
    return TrialReport("lwe-half-decomposition", trials, successes, ms,
                       {"preset": preset, "bound": 0.5, "near_one_pair": near_one_pair})


def suite_kfold(preset: str, trials: int, rng: Rng, plant_prob: float = 0.5, **_) -> TrialReport:
    """Planted-decomposition search across all parallel slots.

    Each slot is decomposable with probability `plant_prob` (a sum of two
    honest ciphertexts) and uniform otherwise; success requires detecting a
    decomposition in every slot, so the rate should track the per-slot rate
    raised to the slot count.
    """
    t0 = time.perf_counter()
    params = get_params(preset)
    td = trapgen(params, rng.derive("sigma"))
    bound2 = 4 * params.Bpp2
    all_hits = 0
    slot_hits = 0
    for i in range(trials):
        trng = rng.derive("trial", i)
        ok = True
        for j in range(params.k_amp):
            if trng.np.random() < plant_prob:
                c1, _ = lwe_encrypt(params, td.A, 0, trng)
                c2, _ = lwe_encrypt(params, td.A, 0, trng)
                v = (c1 + c2) % params.q
            else:
                v = trng.np.integers(0, params.q, size=params.m, dtype=np.int64)
            hit = gadget_invert(td, v, bound2) is not None
            slot_hits += hit
            ok = ok and hit
        all_hits += ok
    ms = (time.perf_counter() - t0) * 1000
    slot_rate = slot_hits / (trials * params.k_amp)
    return TrialReport("kfold", trials, all_hits, ms, {
        "preset": preset,
        "slot_rate": slot_rate,
        "predicted_rate": slot_rate ** params.k_amp,
        "k_amp": params.k_amp,
    })


def suite_extraction(inst: str, preset: str, trials: int, rng: Rng,
                     mode: str = "choice", msg_len: int = 16, **_) -> TrialReport:
    """Correctness of the trapdoor extractors on honest runs."""
    t0 = time.perf_counter()
    scheme = get_scheme(inst, preset)
    if scheme.kappa_bits is not None:
        msg_len = scheme.kappa_bits // 8
    successes = 0
    aborts = 0
    both_recognizable = 0
    for i in range(trials):
        trng = rng.derive("trial", i)
        if mode == "choice":
            crs = derive_crs(trng.randbytes(8), scheme, SigmaMode.S1, RhoMode.R0)
            b = trng.randbit()
            _, flow1 = receiver_init(crs, b"\0" * 8, b, trng)
            got, (w0, w1) = extract_choice(crs, flow1, with_tests=True)
            aborts += got is None
            both_recognizable += w0 and w1
            successes += got == b
        elif mode == "messages":
            crs = derive_crs(trng.randbytes(8), scheme, SigmaMode.S0, RhoMode.R1)
            m0, m1 = trng.randbytes(msg_len), trng.randbytes(msg_len)
            flow1 = Flow1(scheme.word_bytes(crs.td_rho.word))
            flow2 = sender_respond(crs, m0, m1, flow1, trng.derive("sender"))
            got = extract_messages(crs, flow1, flow2, trng.derive("extract"))
            successes += got == (m0, m1)
        else:
            raise ConfigError(f"unknown extraction mode {mode!r}")
    ms = (time.perf_counter() - t0) * 1000
    extra = {"inst": inst, "preset": preset, "mode": mode, "aborts": aborts}
    if mode == "choice":
        extra["both_recognizable"] = both_recognizable
    return TrialReport("extraction", trials, successes, ms, extra)


def suite_ideal_vs_real(inst: str, preset: str, trials: int, rng: Rng,
                        msg_len: int = 16, **_) -> TrialReport:
    """Side-by-side outputs of the real protocol and the trusted party."""
    t0 = time.perf_counter()
    scheme = get_scheme(inst, preset)
    if scheme.kappa_bits is not None:
        msg_len = scheme.kappa_bits // 8
    successes = 0
    for i in range(trials):
        trng = rng.derive("trial", i)
        sid = trng.randbytes(8)
        crs = derive_crs(sid, scheme)
        b = trng.randbit()
        m0, m1 = trng.randbytes(msg_len), trng.randbytes(msg_len)
        real, _, _ = run_protocol(crs, sid, b, m0, m1, trng)
        st = IdealOtState(sid)
        st, _ = ideal_ot_step(st, ("sender", sid, m0, m1))
        st, _ = ideal_ot_step(st, ("receiver", sid, b))
        _, ideal = ideal_ot_step(st, ("answer", sid))
        successes += real == ideal
    ms = (time.perf_counter() - t0) * 1000
    return TrialReport("ideal-vs-real", trials, successes, ms,
                       {"inst": inst, "preset": preset})


def suite_simulation(inst: str, preset: str, trials: int, rng: Rng,
                     msg_len: int = 16, **_) -> TrialReport:
    """Simulated honest transcripts parse and match real transcript lengths."""
    t0 = time.perf_counter()
    scheme = get_scheme(inst, preset)
    if scheme.kappa_bits is not None:
        msg_len = scheme.kappa_bits // 8
    sid = rng.randbytes(8)
    crs_real = derive_crs(sid, scheme)
    rrng = rng.derive("real")
    _, f1_real, f2_real = run_protocol(
        crs_real, sid, rrng.randbit(), rrng.randbytes(msg_len), rrng.randbytes(msg_len), rrng
    )
    crs_sim = derive_crs(sid, scheme, SigmaMode.S0, RhoMode.R1PRIME)
    successes = 0
    for i in range(trials):
        trng = rng.derive("trial", i)
        f1, f2 = simulate_honest_transcript(crs_sim, sid, trng, msg_len)
        _, _, _, p1 = decode_frame(f1)
        _, _, _, p2 = decode_frame(f2)
        scheme.word_from_bytes(decode_flow1_payload(p1).word_bytes)
        decode_flow2_payload(p2)
        successes += len(f1) == len(f1_real) and len(f2) == len(f2_real)
    ms = (time.perf_counter() - t0) * 1000
    return TrialReport("simulation", trials, successes, ms, {"inst": inst, "preset": preset})


SUITES = {
    "bit-correctness": suite_bit_correctness,
    "full-correctness": suite_full_correctness,
    "smoothness-bias": suite_smoothness_bias,
    "dh-decomposition": suite_dh_decomposition,
    "lwe-half-decomposition": suite_lwe_half_decomposition,
    "kfold": suite_kfold,
    "extraction": suite_extraction,
    "ideal-vs-real": suite_ideal_vs_real,
    "simulation": suite_simulation,
}

_LWE_ONLY = {"bit-correctness", "full-correctness", "lwe-half-decomposition", "kfold"}
_DH_ONLY = {"dh-decomposition"}


def _run_suite_worker(args):  # pragma: no cover - exercised via processes
    name, kwargs = args
    rep = SUITES[name](**kwargs)
    return rep.trials, rep.successes, rep.extra


def run_suite(name: str, *, inst: str = "lwe", preset: str = "test",
              trials: int = 1000, seed: int = 0, workers: int = 1, **kwargs) -> TrialReport:
    """Dispatch a named suite; deterministic given (seed, trials, workers).

    With workers > 1 the trials split into equal chunks on child streams and
    the counts reduce in chunk order, so the result does not depend on
    scheduling.
    """
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}")
    fn = SUITES[name]
    base = Rng(seed).derive("suite", name)
    common = dict(preset=preset, trials=trials, **kwargs)
    if name not in _LWE_ONLY and name not in _DH_ONLY:
        common["inst"] = inst
    if workers <= 1 or trials < 2 * workers:
        return fn(rng=base, **common)
    t0 = time.perf_counter()
    per = [trials // workers] * workers
    per[-1] += trials - sum(per)
    jobs = []
    for w, cnt in enumerate(per):
        kw = dict(common)
        kw["trials"] = cnt
        kw["rng"] = base.derive("worker", w)
        jobs.append((name, kw))
    total = succ = 0
    extra = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for tr, sc, ex in pool.map(_run_suite_worker, jobs):
            total += tr
            succ += sc
            extra = ex
    ms = (time.perf_counter() - t0) * 1000
    extra["workers"] = workers
    return TrialReport(name, total, succ, ms, extra)
