import json
import math

import pytest

import bufmanet as bm


def test_reference_throughput():
    report = bm.analyze(bm.NetworkParams(Bs=5, Br=20))
    assert report.throughput == pytest.approx(0.0332, abs=2e-4)
    assert sum(report.pi_s) == pytest.approx(1.0)
    assert len(report.pi_r) == 21


def test_capacity_ignores_feedback_and_source_buffer():
    a = bm.analyze(bm.NetworkParams(Bs=1, feedback=False))
    b = bm.analyze(bm.NetworkParams(Bs=20, feedback=True))
    assert a.capacity == b.capacity
    assert b.fixed_point_residual < 1e-6


def test_source_law_balanced_case():
    osd = bm.source_osd(0.2, 0.2, 4)
    assert osd.tau == pytest.approx(1.0)
    assert osd.pi[1:] == pytest.approx([osd.pi[1]] * 4)
    assert osd.pi[1] / osd.pi[0] == pytest.approx(1 / 0.8)


def test_substate_law_sums_to_one():
    assert sum(bm.relay_substate_dist(20, 4, l) for l in range(1, 5)) == pytest.approx(1.0)


def test_saturated_limit_is_infinite():
    p = bm.NetworkParams(lambda_s=0.5)
    assert math.isinf(bm.limiting_delay(p, bm.sched_probs(p), bm.DelayLimit.BsInfSaturated))


def test_ec_geometry():
    probs, geo = bm.ec_mac_probs(72, 6, 1, 1.0)
    assert geo.gamma == 1
    assert probs.psr == probs.prd


def test_bad_parameters_raise_value_error():
    with pytest.raises(ValueError):
        bm.NetworkParams(n=3)
    p = bm.NetworkParams()
    p.lambda_s = 0.0
    with pytest.raises(ValueError):
        bm.analyze(p)


def test_non_convergence_is_reported():
    p = bm.NetworkParams(feedback=True)
    with pytest.raises(bm.ConvergenceError) as info:
        bm.analyze(p, bm.FixedPointOptions(tolerance=1e-300, max_iterations=1))
    assert info.value.iterations == 1


def test_short_simulation_is_deterministic_and_balanced():
    p = bm.NetworkParams(n=20, m=4, Bs=3, Br=3, lambda_s=0.02)
    o = bm.SimOptions(slots=20_000, replications=2, seed=5, threads=1)
    a = bm.simulate(p, o)
    b = bm.simulate(p, o)
    assert a.throughput == b.throughput
    assert a.accounting.balanced()
    assert len(a.replications) == 2
    assert json.loads(a.to_json())["slots_run"] == 20_000


def test_cli_in_process():
    code, out, err = bm.cli(["theory", "--n", "20", "--m", "4", "--lambda", "0.02"])
    assert code == 0, err
    assert json.loads(out)["throughput"] > 0
    code, _, _ = bm.cli(["theory", "--n", "2"])
    assert code == 2
