import math

import pytest
from scipy.optimize import brentq

from semiheat.config import RunConfig
from semiheat.constants import HypothesisError, InitialDataSpec
from semiheat.experiments import (
    run_cross_frame_check,
    run_decay_experiment,
    run_fujita_scan,
    run_negative_entropy_test,
    run_wang_audit,
    scan_workers,
)

from oracles import entropy_gaussian


@pytest.fixture(scope="module")
def decay_report():
    return run_decay_experiment(RunConfig())


def test_default_decay_rates(decay_report):
    assert decay_report.outcome["status"] == "Decayed"
    assert decay_report.checks and all(c.passed for c in decay_report.checks)
    names = [c.quantity for c in decay_report.checks]
    assert names[:5] == ["norm_l2rho_v", "E", "I", "K", "norm_l2_u"]
    assert "norm_l4_u" in names
    for c in decay_report.checks:
        assert c.residual >= 0 and len(c.window) == 2
    assert not decay_report.reduced_scope


def test_lambda_above_lambda_max_rejected():
    with pytest.raises(HypothesisError, match="lambda_max"):
        run_decay_experiment(RunConfig(lam=0.9))


def test_subcritical_rejected():
    with pytest.raises(HypothesisError, match="supercritical"):
        run_decay_experiment(RunConfig(p=1.5))


def test_failed_wang_check_rejected():
    with pytest.raises(HypothesisError, match="violated at r=1"):
        run_decay_experiment(RunConfig(init=InitialDataSpec("gaussian", 1.0, 2.0)))


def test_p_below_p_tilde_is_reduced_scope():
    # p = 2 fails the Wang gate (p > N/(N-2) = 3) for N = 3; N = 5 has 5/3 < p_tilde = 1.8
    cfg = RunConfig(N=5, p=1.75, lam=0.06, init=InitialDataSpec("gaussian", 0.01, 2.0))
    rep = run_decay_experiment(cfg)
    assert rep.reduced_scope and "g-bound" in rep.reduced_scope[0]
    assert rep.outcome["status"] == "Decayed"
    assert rep.checks and all(c.passed for c in rep.checks)


def test_p_two_in_three_dimensions_names_wang_hypothesis():
    with pytest.raises(HypothesisError, match="Wang"):
        run_decay_experiment(RunConfig(p=2.0))


def test_negative_entropy_blows_up():
    rep = run_negative_entropy_test(RunConfig(init=InitialDataSpec("gaussian", 3.0, 2.0)))
    assert rep["applicable"] and rep["sign"] == "negative" and rep["passed"]
    assert rep["E0"] == pytest.approx(entropy_gaussian(3.0, 3, 5.0), rel=1e-3)
    assert rep["E0"] == pytest.approx(-233.7, abs=0.5)
    assert rep["outcome"]["status"] == "BlewUp"
    assert rep["s_at_threshold"] > 0


def test_positive_entropy_is_inapplicable():
    rep = run_negative_entropy_test(RunConfig())
    assert not rep["applicable"] and rep["sign"] == "positive"


def test_entropy_zero_crossing_is_indeterminate():
    # root of 27.841 A^2 = 0.664 A^6
    a_star = brentq(lambda a: entropy_gaussian(a, 3, 5.0), 1.0, 4.0, xtol=1e-14)
    assert a_star == pytest.approx(2.544, abs=1e-3)
    assert entropy_gaussian(a_star, 3, 5.0) == pytest.approx(0.0, abs=1e-9)
    rep = run_negative_entropy_test(RunConfig(init=InitialDataSpec("gaussian", a_star, 2.0)))
    assert rep["sign"] == "indeterminate" and "outcome" not in rep


def test_cross_frame():
    full = run_cross_frame_check(RunConfig())
    assert full["passed"] and full["discrepancy"] < 0.01
    half = run_cross_frame_check(RunConfig(), dt=5e-4)
    assert half["discrepancy"] < full["discrepancy"]
    assert run_cross_frame_check(RunConfig(), t_max=0.0)["discrepancy"] == 0.0
    with pytest.raises(ValueError):
        run_cross_frame_check(RunConfig(), t_max=2.0)


def test_wang_audit_default():
    rep = run_wang_audit(RunConfig())
    assert rep["passed"]
    assert rep["worst_envelope_ratio"] < 1 and rep["worst_barrier_ratio"] < 1


def test_wang_audit_scaled_singular():
    rep = run_wang_audit(RunConfig(init=InitialDataSpec("singular", 0.9, 0.5)))
    assert rep["passed"]
    assert rep["initial"]["max_ratio"] == pytest.approx(0.9, rel=1e-9)
    assert rep["initial"]["r_at_max"] == pytest.approx(0.5, abs=0.02)
    assert rep["barrier_margin_t0"] == pytest.approx(0.1, rel=1e-6)


def test_wang_audit_rejects_violation():
    with pytest.raises(HypothesisError, match="violated at r=1"):
        run_wang_audit(RunConfig(init=InitialDataSpec("gaussian", 1.0, 2.0)))


SCAN_P = (1.5, 5 / 3, 5.0)
SCAN_A = (0.05, 0.5, 3.0)


@pytest.fixture(scope="module")
def serial_table():
    return run_fujita_scan(SCAN_P, SCAN_A, RunConfig(), workers=1)


def test_scan_examples(serial_table):
    t = serial_table
    assert t.outcome(5.0, 0.05) == "Decayed"
    assert t.outcome(5.0, 3.0) == "BlewUp"
    for p in SCAN_P[:2]:
        assert "Decayed" not in [t.outcome(p, a) for a in SCAN_A]
    v = t.verdicts()
    assert v["p=5.0"]["has_decayed"] and v["p=5.0"]["has_blowup"]
    assert all(x["monotone_in_amplitude"] for x in v.values())
    assert t.as_dict()["config"]["experiment"] == "scan"


def test_scan_single_cell_subcritical():
    t = run_fujita_scan((1.5,), (1.0,), RunConfig(), workers=1)
    assert t.outcome(1.5, 1.0) == "BlewUp"
    assert t.cells[0].t_blowup > 0


@pytest.mark.slow
def test_scan_parallel_matches_serial(serial_table):
    par = run_fujita_scan(SCAN_P, SCAN_A, RunConfig(), workers=3)
    assert par.rows() == serial_table.rows()


def test_scan_rejects_unsorted_axes():
    with pytest.raises(ValueError):
        run_fujita_scan((5.0, 1.5), (0.1,), RunConfig())


def test_scan_workers_env(monkeypatch):
    monkeypatch.setenv("SEMIHEAT_WORKERS", "4")
    assert scan_workers() == 4
    assert scan_workers(2) == 2
    monkeypatch.delenv("SEMIHEAT_WORKERS")
    assert scan_workers() == 1
