import json
import math

import pytest

from gzot.core import ConfigError
from gzot.estimators import (
    TrialReport,
    append_report,
    binomial_tail,
    predicted_bit_disagreement,
    predicted_full_correctness,
    run_suite,
    wilson_halfwidth,
)
from gzot.lwe import get_params


def test_wilson_known_value():
    # closed form at p=1/2, n=100, z=1.96
    assert abs(wilson_halfwidth(50, 100) - 0.0962) < 0.0005
    assert wilson_halfwidth(0, 0) == 1.0
    # interval shrinks like 1/sqrt(n)
    assert wilson_halfwidth(500, 1000) < wilson_halfwidth(50, 100)


def test_binomial_tail_exact_small():
    # P[Bin(3, 1/2) >= 2] = 1/2
    assert abs(binomial_tail(3, 2, 0.5) - 0.5) < 1e-12
    assert binomial_tail(10, 0, 0.3) == 1.0
    assert binomial_tail(10, 11, 0.3) == 0.0


def test_binomial_tail_against_complement():
    # tail + head = 1
    head = sum(
        math.comb(63, j) * 0.25**j * 0.75 ** (63 - j) for j in range(32)
    )
    assert abs(binomial_tail(63, 32, 0.25) + head - 1.0) < 1e-9


def test_repetition_failure_bound_at_quarter_noise():
    # independent quarter-rate flips, 127-fold repetition
    assert binomial_tail(127, 64, 0.25) <= 1.3e-7


def test_predicted_rates_sane():
    p = get_params("test")
    d = predicted_bit_disagreement(p)
    assert 0.245 <= d <= 0.26
    assert predicted_full_correctness(p) >= 0.99
    assert predicted_full_correctness(get_params("demo")) >= 1 - 1e-5


def test_report_json_fields():
    rep = TrialReport("demo-suite", 10, 7, 12.5, {"preset": "toy"})
    doc = json.loads(rep.to_json())
    assert doc["suite"] == "demo-suite"
    assert doc["trials"] == 10 and doc["successes"] == 7
    assert abs(doc["rate"] - 0.7) < 1e-12
    assert doc["preset"] == "toy"
    assert doc["radius"] == wilson_halfwidth(7, 10)


def test_append_report_is_append_only(tmp_path):
    path = tmp_path / "reports.jsonl"
    append_report(str(path), TrialReport("a", 1, 1, 0.0))
    append_report(str(path), TrialReport("b", 2, 1, 0.0))
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["suite"] == "a"
    assert json.loads(lines[1])["suite"] == "b"


def test_unknown_suite():
    with pytest.raises(ConfigError):
        run_suite("no-such-suite")


def test_suite_determinism():
    a = run_suite("dh-decomposition", inst="dh", preset="toy", trials=500, seed=5)
    b = run_suite("dh-decomposition", inst="dh", preset="toy", trials=500, seed=5)
    assert (a.trials, a.successes) == (b.trials, b.successes)


def test_bit_correctness_toy():
    rep = run_suite("bit-correctness", preset="toy", trials=4000, seed=6)
    assert 0.72 <= rep.rate <= 0.78
    assert abs(rep.rate - rep.extra["predicted_rate"]) < 0.03


def test_smoothness_bias_both():
    lwe = run_suite("smoothness-bias", inst="lwe", preset="toy", trials=4000, seed=7)
    assert abs(lwe.rate - 0.5) <= 0.02
    dh = run_suite("smoothness-bias", inst="dh", preset="test", trials=300, seed=8)
    assert abs(dh.rate - 0.5) <= 0.02


def test_dh_decomposition_toy():
    rep = run_suite("dh-decomposition", inst="dh", preset="toy", trials=4000, seed=9)
    assert rep.rate <= rep.extra["bound"]
    assert abs(rep.rate - rep.extra["predicted_rate"]) < 0.03


def test_lwe_half_decomposition_toy():
    rep = run_suite("lwe-half-decomposition", preset="toy", trials=300, seed=10)
    assert rep.rate <= 0.5


def test_kfold_toy():
    rep = run_suite("kfold", preset="toy", trials=600, seed=11)
    assert abs(rep.extra["slot_rate"] - 0.5) < 0.06
    assert abs(rep.rate - rep.extra["predicted_rate"]) < 0.08


def test_extraction_suite_choice():
    rep = run_suite("extraction", inst="dh", preset="test", trials=150, seed=12, mode="choice")
    assert rep.successes == rep.trials
    assert rep.extra["aborts"] == 0


def test_extraction_suite_choice_toy_aborts_at_rate_one_over_q():
    # at the 11-element group the no-witness event is common and must be
    # counted as an abort, not a wrong answer
    rep = run_suite("extraction", inst="dh", preset="toy", trials=300, seed=12, mode="choice")
    assert rep.successes + rep.extra["aborts"] == rep.trials
    assert 0.02 <= rep.extra["aborts"] / rep.trials <= 0.2  # expect ~1/11


def test_extraction_suite_messages():
    rep = run_suite("extraction", inst="dh", preset="toy", trials=50, seed=13, mode="messages")
    assert rep.successes == rep.trials


def test_ideal_vs_real_suite():
    rep = run_suite("ideal-vs-real", inst="dh", preset="toy", trials=100, seed=14)
    assert rep.successes == rep.trials


def test_simulation_suite():
    rep = run_suite("simulation", inst="dh", preset="toy", trials=20, seed=15)
    assert rep.successes == rep.trials


def test_full_correctness_suite_toy():
    rep = run_suite("full-correctness", preset="toy", trials=40, seed=16)
    assert rep.rate >= 0.9
    assert rep.extra["predicted_rate_demo"] >= 1 - 1e-5


def test_worker_pool_deterministic():
    a = run_suite("dh-decomposition", inst="dh", preset="toy", trials=400, seed=17, workers=2)
    b = run_suite("dh-decomposition", inst="dh", preset="toy", trials=400, seed=17, workers=2)
    assert (a.trials, a.successes) == (b.trials, b.successes)
    assert a.trials == 400
