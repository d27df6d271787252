import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from klyachko.experiment import (
    BLOCK_SIZE,
    BiasedSingleParticle,
    ExperimentStats,
    PairingScheme,
    Quantum,
    SharedChartLHV,
    analytic_targets,
    evaluate,
    run_trials,
)
from klyachko.geometry import build_pentagram
from klyachko.lhv import (
    MixtureWeights,
    feasible_vertices,
    half_half_bias,
    quantum_matching_bias,
    solve_marginal_mixtures,
)

P_CASE3 = (3 - math.sqrt(5)) / 6


@pytest.fixture(scope="module")
def frame():
    return build_pentagram()


@pytest.fixture(scope="module")
def mixtures():
    return solve_marginal_mixtures()


@st.composite
def mixtures_any(draw):
    ints = draw(st.lists(st.integers(0, 20), min_size=11, max_size=11).filter(lambda x: sum(x) > 0))
    return MixtureWeights(tuple(Fraction(k, sum(ints)) for k in ints))


def test_rejects_zero_trials(frame):
    with pytest.raises(ValueError):
        run_trials(Quantum(), frame, 0, 1)
    with pytest.raises(ValueError):
        run_trials(Quantum(), frame, 10, -1)
    with pytest.raises(ValueError):
        run_trials(Quantum(), frame, 10, 1, pairing="nonsense")


def test_invalid_pairing():
    with pytest.raises(ValueError):
        PairingScheme(0, 0, 0, 0)
    with pytest.raises(ValueError):
        PairingScheme(-1, 1, 1, 0)


def test_deterministic_and_worker_independent(frame):
    n = 3 * BLOCK_SIZE + 17
    one = run_trials(Quantum(), frame, n, 99)
    again = run_trials(Quantum(), frame, n, 99)
    many = run_trials(Quantum(), frame, n, 99, workers=4)
    assert one.to_dict() == again.to_dict() == many.to_dict()
    assert run_trials(Quantum(), frame, n, 100).to_dict() != one.to_dict()


def test_prefix_stability(frame):
    # trial t depends only on (seed, t): the first full block is shared by longer runs
    short = run_trials(Quantum(), frame, BLOCK_SIZE, 5, "pentagon")
    long = run_trials(Quantum(), frame, 2 * BLOCK_SIZE, 5, "pentagon")
    assert np.all(long.counts["pentagon_both"] >= short.counts["pentagon_both"])


def test_pairing_schemes_route_cases(frame):
    for name, key in (("same", "agreement"), ("pentagram", "pentagram_double_one"), ("pentagon", "pentagon_sum")):
        est = run_trials(Quantum(), frame, 5000, 3, name).estimates()
        assert key in est
        others = {"agreement", "pentagram_double_one", "pentagon_sum"} - {key}
        assert not others & set(est)


def test_pentagon_pairing_orientation(frame):
    stats = run_trials(Quantum(), frame, 10_000, 1, "pentagon")
    # B's vertex for A's vertex a is a + 3 mod 5 (1->4, 4->2, ...), so B's counts mirror A's
    a_counts = stats.counts["a_count"]
    b_counts = stats.counts["b_count"]
    np.testing.assert_array_equal(b_counts, np.roll(a_counts, 3))


@given(mixtures_any(), st.integers(0, 2**63))
@settings(max_examples=25, deadline=None)
def test_lhv_constraints_exact(frame, w, seed):
    est = run_trials(SharedChartLHV(w), frame, 3000, seed).estimates()
    assert est["agreement"].value == 1.0
    assert est["pentagram_double_one"].value == 0.0


def test_quantum_constraints_exact(frame):
    est = run_trials(Quantum(), frame, 200_000, 11).estimates()
    assert est["agreement"].value == 1.0
    assert est["pentagram_double_one"].value == 0.0


def test_uniform_pairing_covers_everything(frame):
    stats = run_trials(Quantum(), frame, 200_000, 2, "uniform")
    est = stats.estimates()
    verdict = evaluate(stats, analytic_targets(Quantum(), frame, "uniform"))
    assert verdict.passed
    assert "pentagon_e3" in est


def test_standard_errors(frame):
    stats = run_trials(Quantum(), frame, 50_000, 4, "pentagon")
    for name, e in stats.estimates().items():
        if name.startswith("pentagon_e"):
            assert e.se == pytest.approx(math.sqrt(e.value * (1 - e.value) / e.n))
            assert 0 <= e.value <= 1


@pytest.mark.slow
def test_quantum_case_iii(frame):
    stats = run_trials(Quantum(), frame, 10**6, 2024, "pentagon")
    e = stats.estimates()["pentagon_edge_pooled"]
    assert abs(e.value - P_CASE3) <= 3 * e.se


@pytest.mark.slow
def test_biased_half_half(frame):
    stats = run_trials(BiasedSingleParticle(half_half_bias()), frame, 10**6, 8)
    k = stats.estimates()["klyachko_sum"]
    assert abs(k.value - 2.5) <= 3 * k.se
    verdict = evaluate(stats, analytic_targets(BiasedSingleParticle(half_half_bias()), frame))
    assert verdict.passed
    assert verdict.inequalities["klyachko"] == "violated"


def test_biased_quantum_matching(frame):
    model = BiasedSingleParticle(quantum_matching_bias())
    stats = run_trials(model, frame, 200_000, 8)
    assert evaluate(stats, analytic_targets(model, frame)).passed


def test_evaluate_quantum_passes(frame):
    stats = run_trials(Quantum(), frame, 300_000, 6)
    verdict = evaluate(stats, analytic_targets(Quantum(), frame), sigma=4)
    assert verdict.passed, verdict.failures()
    assert verdict.inequalities == {"klyachko": "satisfied", "pentagon": "violated"}


@pytest.mark.slow
def test_evaluate_lhv_against_quantum_target_fails(frame, mixtures):
    _, m20 = mixtures
    stats = run_trials(SharedChartLHV(m20), frame, 10**6, 6)
    verdict = evaluate(stats, {"pentagon_edge_pooled": P_CASE3})
    assert not verdict.passed
    assert stats.estimates()["pentagon_edge_pooled"].value == pytest.approx(1 / 6, abs=0.005)


def test_evaluate_guards(frame):
    stats = run_trials(Quantum(), frame, 1000, 1, "same")
    with pytest.raises(ValueError):
        evaluate(stats, {"pentagon_sum": 0.6})
    with pytest.raises(ValueError):
        evaluate(stats, {})
    empty = ExperimentStats("quantum", 0, stats.counts)
    with pytest.raises(ValueError):
        evaluate(empty, {"agreement": 1.0})


def test_lhv_pentagon_sums_within_bounds(frame):
    for v in feasible_vertices():
        stats = run_trials(SharedChartLHV(v), frame, 150_000, 17, "pentagon")
        p = stats.estimates()["pentagon_sum"]
        assert 2 / 3 - 4 * p.se <= p.value <= 5 / 6 + 4 * p.se


def test_error_scaling(frame):
    ns = [10**3, 10**4, 10**5, 10**6]
    rms = []
    for n in ns:
        errs = [run_trials(Quantum(), frame, n, s, "pentagon").estimates()["pentagon_edge_pooled"].value - P_CASE3
                for s in range(16)]
        rms.append(math.sqrt(np.mean(np.square(errs))))
    slope = np.polyfit(np.log(ns), np.log(rms), 1)[0]
    assert -0.65 <= slope <= -0.35


def test_to_dict_is_json_ready(frame):
    import json

    d = run_trials(Quantum(), frame, 1000, 0).to_dict()
    assert json.loads(json.dumps(d)) == d
