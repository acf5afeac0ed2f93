import math

import numpy as np
import pytest

from semiheat import InitialDataSpec, ProblemParams, build_grid
from semiheat.constants import HypothesisError, derive_constants, u_infinity_profile, wang_envelope_v
from semiheat.dynamics import (
    Field,
    Frame,
    ImexStepper,
    Status,
    StepControls,
    evolve,
    make_initial_data,
    map_u_to_v,
    map_v_to_u,
    require_wang,
    rhs_u,
    rhs_v,
    step_imex,
    weighted_norm_of,
)
from semiheat.grid import weighted_norm

from conftest import phi1
from oracles import RK4Radial, dense_wang_ratio

C35 = 0.25**0.25


# -- initial data -------------------------------------------------------------

def test_wang_check_passes_for_default_data(grid3, params):
    _, rep = make_initial_data(grid3, InitialDataSpec("gaussian", 0.1, 2.0), params)
    ref, r_ref = dense_wang_ratio(0.1, 0.5, C35, 5.0)
    assert ref == pytest.approx(0.2203, abs=1e-4) and r_ref == pytest.approx(1.0, abs=1e-3)
    assert rep.passes and rep.max_ratio == pytest.approx(ref, rel=1e-4)
    assert rep.r_at_max == pytest.approx(1.0, abs=grid3.dr)


def test_wang_check_fails_for_large_data(grid3, params):
    _, rep = make_initial_data(grid3, InitialDataSpec("gaussian", 1.0, 2.0), params)
    assert not rep.passes
    assert rep.max_ratio == pytest.approx(2.203, abs=1e-3)
    assert "r=1" in rep.reason
    with pytest.raises(HypothesisError, match="violated at r=1"):
        require_wang(rep)


def test_trivial_and_negative_data_rejected(grid3, params):
    with pytest.raises(ValueError, match="zero"):
        make_initial_data(grid3, InitialDataSpec("bump", 0.0, 2.0), params)
    with pytest.raises(ValueError):
        InitialDataSpec("gaussian", -1.0, 2.0)


def test_wang_not_applicable_below_sobolev_exponent(grid3):
    pr = ProblemParams(3, 2.0, 0.5)
    _, rep = make_initial_data(grid3, InitialDataSpec("gaussian", 0.1, 2.0), pr)
    assert not rep.applicable
    with pytest.raises(HypothesisError):
        require_wang(rep)


# -- right-hand sides ---------------------------------------------------------

def test_rhs_zero_and_eigenfunction(grid3, params):
    assert not np.any(rhs_v(grid3, params, np.zeros(grid3.size)))
    assert not np.any(rhs_u(grid3, params, np.zeros(grid3.size)))
    # (-N/2 + 1/(p-1)) phi + phi^p at the origin: -1.5 + 0.25 + 1
    assert rhs_v(grid3, params, phi1(grid3))[0] == pytest.approx(-0.25, abs=1e-3)
    r = grid3.nodes
    sel = r <= 8
    expect = -1.25 * phi1(grid3) + phi1(grid3) ** 5
    assert np.allclose(rhs_v(grid3, params, phi1(grid3))[sel], expect[sel], atol=1e-3)


def test_rhs_linear_part_is_linear(grid3, params):
    rng = np.random.default_rng(1)
    f, g = rng.normal(size=(2, grid3.size))
    a, b = 1.7, -0.4
    lhs = rhs_v(grid3, params, a * f + b * g, nonlinear=False)
    rhs = a * rhs_v(grid3, params, f, False) + b * rhs_v(grid3, params, g, False)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-6)


def test_rhs_u_constant_and_steady_state(grid3, params):
    c = np.full(grid3.size, 0.3)
    assert np.allclose(rhs_u(grid3, params, c)[1:-1], 0.3**5)
    r = grid3.nodes
    sel = (r >= 1) & (r <= 8)
    u_inf = np.zeros_like(r)
    u_inf[1:] = u_infinity_profile(r[1:], 3, 5.0)
    res = rhs_u(grid3, params, u_inf)[sel]
    assert np.max(np.abs(res) / u_inf[sel] ** 5) < 1e-2


# -- stepping -----------------------------------------------------------------

def test_zero_is_fixed_point(grid3, params):
    st = step_imex(Field(np.zeros(grid3.size), Frame.V, 0.0, grid3), params, 1e-3)
    assert not np.any(st.values) and st.clock == 1e-3


def test_linear_step_on_eigenfunction(grid3, params):
    f = phi1(grid3)
    out = step_imex(Field(f, Frame.V, 0.0, grid3), params, 1e-3, nonlinear=False)
    factor = out.values[0] / f[0]
    assert factor == pytest.approx(1 / (1 + 1.25e-3), abs=1e-4)
    assert factor == pytest.approx(0.998751, abs=1e-4)


def test_first_order_in_time(params):
    g = build_grid(3, 256, 16.0)
    u0, _ = make_initial_data(g, params.init, params)

    def run(dt):
        return evolve(g, params, u0, StepControls(dt=dt, horizon=0.5, sample_every=10**9)).final.values

    ref = run(1e-4)
    e1 = weighted_norm(g, run(4e-3) - ref)
    e2 = weighted_norm(g, run(2e-3) - ref)
    assert 1.7 < e1 / e2 < 2.4


def test_dt_above_dominance_bound_rejected(grid3, params):
    stepper = ImexStepper(grid3, Frame.V, params)
    assert math.isfinite(stepper.dt_bound)
    with pytest.raises(ValueError, match="dominance"):
        stepper.step(phi1(grid3), 2 * stepper.dt_bound)


def test_dominance_bound_for_higher_dimension():
    g = build_grid(5, 1024, 16.0)
    pr = ProblemParams(5, 3.0, 0.5)
    st = ImexStepper(g, Frame.V, pr)
    out = st.step(phi1(g), 1e-3)
    assert np.all(out >= 0)


# -- frame maps -----------------------------------------------------------------

def test_map_identity_at_zero(grid3, params):
    u0, _ = make_initial_data(grid3, params.init, params)
    v0 = map_u_to_v(u0, 5.0)
    assert v0.frame is Frame.V and v0.clock == 0.0
    assert np.array_equal(v0.values, u0.values)


def test_map_round_trip(grid3):
    r = grid3.nodes
    u = Field(0.2 * np.exp(-(r**2) / 4), Frame.U, 1.0, grid3)
    u.values[-1] = 0.0
    v = map_u_to_v(u, 5.0, s=math.log(2))
    assert v.clock == pytest.approx(math.log(2))
    back = map_v_to_u(v, 5.0, t=1.0)
    err = np.linalg.norm((back.values - u.values) * np.sqrt(grid3.vol_weights))
    assert err / np.linalg.norm(u.values * np.sqrt(grid3.vol_weights)) < 1e-4


def test_map_rejects_mismatched_clock(grid3):
    u = Field(phi1(grid3), Frame.U, 1.0, grid3)
    with pytest.raises(ValueError, match="clock"):
        map_u_to_v(u, 5.0, s=1.0)
    with pytest.raises(ValueError):
        map_v_to_u(u, 5.0)


def test_singular_profile_is_scale_invariant(grid3):
    r = grid3.nodes
    vals = np.zeros_like(r)
    vals[1:] = u_infinity_profile(r[1:], 3, 5.0)
    t = math.e - 1
    v = map_u_to_v(Field(vals, Frame.U, t, grid3), 5.0)
    sel = (r >= 1) & (r <= 4)
    assert np.allclose(v.values[sel], C35 / np.sqrt(r[sel]), rtol=1e-3)


# -- evolution ------------------------------------------------------------------

def test_default_run_decays(default_run):
    assert default_run.outcome.status is Status.DECAYED
    assert default_run.samples[-1].norm_l2rho_v < 1e-3
    assert default_run.samples[-1].s == pytest.approx(8.0)


@pytest.mark.slow
def test_decay_matches_rk4_oracle(default_run):
    oracle = RK4Radial(3, 5.0, 256, 16.0)
    v0 = 0.1 * np.exp(-oracle.r**2 / 4)
    status, s, v = oracle.run(v0, 8.0, 1e-4)
    assert status == "Finished"
    ref = oracle.weighted_norm(v)
    assert ref < 1e-3
    assert default_run.samples[-1].norm_l2rho_v == pytest.approx(ref, rel=2e-2)


def test_negative_energy_data_blows_up():
    g = build_grid(3, 1024, 16.0)
    pr = ProblemParams(3, 5.0, 0.5, InitialDataSpec("gaussian", 3.0, 2.0))
    u0, _ = make_initial_data(g, pr.init, pr)
    tr = evolve(g, pr, u0, StepControls(horizon=1.0))
    assert tr.outcome.status is Status.BLEW_UP
    oracle = RK4Radial(3, 5.0, 256, 16.0)
    status, s_b, _ = oracle.run(3.0 * np.exp(-oracle.r**2 / 4), 1.0, 1e-5)
    assert status == "BlewUp"
    assert tr.outcome.t_blowup == pytest.approx(math.expm1(s_b), rel=0.2)


@pytest.mark.slow
def test_subcritical_blows_up_in_original_frame():
    g = build_grid(3, 1024, 16.0)
    pr = ProblemParams(3, 1.5, 0.5, InitialDataSpec("gaussian", 1.0, 2.0))
    u0, _ = make_initial_data(g, pr.init, pr)
    tr = evolve(g, pr, u0, StepControls(dt=1e-2, horizon=50.0), frame=Frame.U)
    assert tr.outcome.status is Status.BLEW_UP
    oracle = RK4Radial(3, 1.5, 256, 16.0, rescaled=False)
    status, t_b, _ = oracle.run(np.exp(-oracle.r**2 / 4), 50.0, 1e-3)
    assert status == "BlewUp"
    assert tr.outcome.t_blowup == pytest.approx(t_b, rel=0.05)


def test_positivity_and_wang_envelope(default_run, params):
    assert default_run.min_ratio >= -1e-10
    for smp in default_run.samples:
        assert smp.min_v >= -1e-10 * smp.sup_v
        if smp.s >= 0.05:
            assert smp.sup_v <= wang_envelope_v(smp.s, 5.0, 0.5) * (1 + 1e-3)


def test_evolve_is_deterministic(params):
    g = build_grid(3, 256, 16.0)
    u0, _ = make_initial_data(g, params.init, params)
    ctl = StepControls(horizon=1.0, sample_every=50)
    a = evolve(g, params, u0, ctl)
    b = evolve(g, params, u0, ctl)
    assert np.array_equal(a.final.values, b.final.values)
    assert [x.as_dict() for x in a.samples] == [x.as_dict() for x in b.samples]


def test_python_backend_agrees(params):
    from semiheat._core import pykernels

    g = build_grid(3, 128, 16.0)
    u0, _ = make_initial_data(g, params.init, params)
    ctl = StepControls(horizon=0.2, sample_every=50)
    a = evolve(g, params, u0, ctl)
    b = evolve(g, params, u0, ctl, kernel_module=pykernels)
    assert np.array_equal(a.final.values, b.final.values)


def test_evolve_requires_time_zero_data(grid3, params):
    f = Field(phi1(grid3), Frame.U, 0.5, grid3)
    with pytest.raises(ValueError):
        evolve(grid3, params, f, StepControls(horizon=0.1))


def test_step_controls_validation():
    for kw in (dict(dt=0), dict(dt=1e-3, dt_min=1e-2), dict(blowup_threshold=10),
               dict(sample_every=0), dict(horizon=-1)):
        with pytest.raises(ValueError):
            StepControls(**kw)


def test_zero_horizon(grid3, params):
    u0, _ = make_initial_data(grid3, params.init, params)
    tr = evolve(grid3, params, u0, StepControls(horizon=0.0))
    assert tr.steps == 0 and tr.samples == []
    assert weighted_norm_of(tr.final) == pytest.approx(tr.initial.norm_l2rho_v)
