"""Reproduction scenarios: decay rates, Fujita phase scan, negative-entropy
blow-up, cross-frame consistency and the Wang barrier audit."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import RunConfig
from .constants import (
    HypothesisError,
    InitialDataSpec,
    ProblemParams,
    Regime,
    classify_regime,
    derive_constants,
    lq_exponents,
    wang_envelope_v,
)
from .diagnostics import default_window, entropy, fit_log_slope
from .dynamics import (
    Status,
    Trajectory,
    evolve,
    make_initial_data,
    map_u_to_v,
    require_wang,
)
from .grid import Frame, build_grid, dirichlet_integral, weighted_inner, weighted_norm

WORKERS_ENV = "SEMIHEAT_WORKERS"
WANG_SLACK = 1e-3


@dataclass
class RateCheck:
    quantity: str
    slope: float
    target: float
    kind: str  # "within" (relative tolerance) or "at_most" (one-sided)
    tolerance: float
    residual: float
    window: tuple
    passed: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class DecayReport:
    config: dict
    constants: dict
    outcome: dict
    checks: list = field(default_factory=list)
    reduced_scope: list = field(default_factory=list)
    trajectory: Trajectory | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return dict(config=self.config, constants=self.constants, outcome=self.outcome,
                    checks=[c.as_dict() for c in self.checks],
                    reduced_scope=self.reduced_scope, passed=self.passed)


def _within(fit, target: float, tol: float) -> RateCheck:
    ok = abs(fit.slope - target) <= tol * abs(target)
    return RateCheck(fit.quantity, fit.slope, target, "within", tol, fit.residual, fit.window, ok)


def _at_most(fit, target: float) -> RateCheck:
    return RateCheck(fit.quantity, fit.slope, target, "at_most", 0.0, fit.residual,
                     fit.window, fit.slope <= target)


def decay_gates(cfg: RunConfig):
    """Check the layered hypotheses of the decay theorems; returns (consts, reduced-scope notes)."""
    params = cfg.params
    consts = derive_constants(params.N, params.p, params.lam)
    if classify_regime(params.N, params.p) is not Regime.SUPERCRITICAL:
        raise HypothesisError("supercritical p > 1 + 2/N (gamma > 0)",
                              f"gamma = {consts.gamma:.6g}")
    if not params.wang_path:
        raise HypothesisError("Wang hypotheses N >= 3 and p > N/(N-2)")
    if consts.s1 is None:
        raise HypothesisError(
            "K-functional decay lemma: lambda < lambda_max",
            f"lambda = {params.lam} >= lambda_max = {consts.lambda_max:.6g}")
    reduced = []
    if consts.p_tilde is None or not params.p > consts.p_tilde:
        reduced.append(f"p <= p_tilde = {consts.p_tilde}: g-bound assertions disabled")
    return consts, reduced


def run_decay_experiment(cfg: RunConfig, kernel_module=None) -> DecayReport:
    params = cfg.params
    consts, reduced = decay_gates(cfg)
    grid = build_grid(params.N, cfg.M, cfg.r_max)
    u0, wang = make_initial_data(grid, params.init, params)
    require_wang(wang)
    traj = evolve(grid, params, u0, cfg.controls, Frame.V, cfg.q_list,
                  kernel_module=kernel_module)
    if not math.isfinite(traj.initial.I):
        raise HypothesisError("I(u0) finite", "production of the initial data is not finite")
    report = DecayReport(cfg.as_dict(), consts.as_dict(), traj.outcome.as_dict(),
                         reduced_scope=reduced, trajectory=traj)
    if traj.outcome.status is not Status.DECAYED:
        report.checks.append(RateCheck("outcome", math.nan, math.nan, "status", 0.0, math.nan,
                                       (), False))
        return report

    window = cfg.fit_window or default_window(consts, cfg.horizon)
    s = np.array([x.s for x in traj.samples])
    g = consts.gamma

    def fit(name):
        return fit_log_slope(s, [getattr(x, name) for x in traj.samples], window, name)

    report.checks.append(_within(fit("norm_l2rho_v"), -g, 0.05))
    report.checks.append(_within(fit("E"), -2 * g, 0.10))
    report.checks.append(_within(fit("I"), -2 * g, 0.10))
    report.checks.append(_at_most(fit("K"), -(2 * g + consts.a)))
    tp1 = np.exp(s)
    uwin = (math.exp(window[0]), math.exp(window[1]))
    fu = fit_log_slope(tp1, [x.norm_l2_u for x in traj.samples], uwin, "norm_l2_u", True)
    report.checks.append(_within(fu, -params.N / 4.0, 0.10))
    for q in cfg.q_list:
        if q == 2.0:
            continue
        bound_rate, _ = lq_exponents(params.N, params.p, q)
        fq = fit_log_slope(tp1, [x.norm_lq_u[float(q)] for x in traj.samples], uwin,
                           f"norm_l{q:g}_u", True)
        report.checks.append(_at_most(fq, -bound_rate))
    return report


# -- Fujita phase scan -----------------------------------------------------


@dataclass
class PhaseCell:
    p: float
    amplitude: float
    outcome: str
    t_blowup: float | None
    reason: str


@dataclass
class PhaseTable:
    N: int
    p_values: tuple
    amplitudes: tuple
    cells: list
    p_star: float
    config: dict

    def outcome(self, p: float, a: float) -> str:
        for c in self.cells:
            if c.p == p and c.amplitude == a:
                return c.outcome
        raise KeyError((p, a))

    def rows(self):
        return [(c.p, c.amplitude, c.outcome, c.t_blowup) for c in self.cells]

    def verdicts(self) -> dict:
        out = {}
        for p in self.p_values:
            row = [self.outcome(p, a) for a in self.amplitudes]
            key = f"p={p!r}"
            if classify_regime(self.N, p) is Regime.SUPERCRITICAL:
                out[key] = {
                    "regime": "supercritical",
                    "has_decayed": Status.DECAYED.value in row,
                    "has_blowup": Status.BLEW_UP.value in row,
                    "monotone_in_amplitude": _monotone(row),
                }
            else:
                out[key] = {
                    "regime": classify_regime(self.N, p).value,
                    "no_decayed": Status.DECAYED.value not in row,
                    "monotone_in_amplitude": _monotone(row),
                }
        return out

    def as_dict(self) -> dict:
        return dict(N=self.N, p_star=self.p_star, p_values=list(self.p_values),
                    amplitudes=list(self.amplitudes),
                    cells=[c.__dict__ for c in self.cells], verdicts=self.verdicts(),
                    thresholds_note="amplitude thresholds are empirical observations",
                    config=self.config)


def _monotone(row) -> bool:
    seen_blowup = False
    for outcome in row:
        if outcome == Status.BLEW_UP.value:
            seen_blowup = True
        elif seen_blowup:
            return False
    return True


def _scan_cell(args) -> PhaseCell:
    cfg, p, a = args
    params = ProblemParams(cfg.N, p, cfg.lam, InitialDataSpec(cfg.init.kind, a, cfg.init.b))
    grid = build_grid(cfg.N, cfg.M, cfg.r_max)
    u0, _ = make_initial_data(grid, params.init, params)
    traj = evolve(grid, params, u0, cfg.controls, Frame.V, (2.0,))
    o = traj.outcome
    return PhaseCell(p, a, o.status.value, o.t_blowup, o.reason)


def scan_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def run_fujita_scan(p_list, amp_list, cfg: RunConfig, workers: int | None = None) -> PhaseTable:
    p_list = tuple(float(p) for p in p_list)
    amp_list = tuple(float(a) for a in amp_list)
    if any(b <= a for a, b in zip(p_list, p_list[1:])) or \
            any(b <= a for a, b in zip(amp_list, amp_list[1:])):
        raise ValueError("scan axes must be strictly increasing")
    cfg = replace(cfg, p_list=p_list, amp_list=amp_list, experiment="scan")
    tasks = [(cfg, p, a) for p in p_list for a in amp_list]
    n = scan_workers(workers)
    if n == 1:
        cells = [_scan_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            cells = list(pool.map(_scan_cell, tasks))
    # aggregation order is fixed by (p, A) regardless of completion order
    cells.sort(key=lambda c: (c.p, c.amplitude))
    return PhaseTable(cfg.N, p_list, amp_list, cells, 1 + 2 / cfg.N, cfg.as_dict())


# -- negative entropy ------------------------------------------------------


def run_negative_entropy_test(cfg: RunConfig) -> dict:
    params = cfg.params
    grid = build_grid(params.N, cfg.M, cfg.r_max)
    u0, _ = make_initial_data(grid, params.init, params)
    v = u0.values
    E0 = entropy(grid, params, v)
    p = params.p
    pos = 0.5 * dirichlet_integral(grid, v)
    neg = weighted_inner(grid, v**2 / (2 * (p - 1)) + v ** (p + 1) / (p + 1), 1.0)
    quad_tol = 1e-3 * (pos + neg)
    report = dict(config=cfg.as_dict(), E0=E0, quadrature_tolerance=quad_tol)
    if abs(E0) <= quad_tol:
        report.update(applicable=False, sign="indeterminate",
                      reason="E(u0) is zero within quadrature tolerance; no outcome asserted")
        return report
    if E0 >= 0:
        report.update(applicable=False, sign="positive",
                      reason="E(u0) >= 0 on the grid; the negative-entropy criterion does not apply")
        return report
    traj = evolve(grid, params, u0, cfg.controls, Frame.V, (2.0,))
    blew = traj.outcome.status is Status.BLEW_UP
    report.update(applicable=True, sign="negative", outcome=traj.outcome.as_dict(),
                  s_at_threshold=traj.final.clock if blew else None, passed=blew)
    return report


# -- cross-frame -----------------------------------------------------------


def run_cross_frame_check(cfg: RunConfig, t_max: float | None = None,
                          dt: float | None = None) -> dict:
    t_max = cfg.t_max if t_max is None else t_max
    if not 0 <= t_max <= 1:
        raise ValueError("cross-frame comparison is capped at t_max <= 1")
    dt = cfg.dt if dt is None else dt
    params = cfg.params
    grid = build_grid(params.N, cfg.M, cfg.r_max)
    u0, _ = make_initial_data(grid, params.init, params)
    cu = replace(cfg.controls, dt=dt, horizon=t_max, dt_min=min(cfg.dt_min, dt))
    cv = replace(cu, horizon=math.log1p(t_max))
    tu = evolve(grid, params, u0, cu, Frame.U, (2.0,))
    tv = evolve(grid, params, u0, cv, Frame.V, (2.0,))
    mapped = map_u_to_v(tu.final, params.p, tv.final.clock)
    ref = weighted_norm(grid, tv.final.values)
    disc = weighted_norm(grid, mapped.values - tv.final.values) / ref
    return dict(config=cfg.as_dict(), t_max=t_max, dt=dt, s_max=tv.final.clock,
                discrepancy=disc, passed=disc < 0.01)


# -- Wang audit ------------------------------------------------------------


def run_wang_audit(cfg: RunConfig, traj: Trajectory | None = None) -> dict:
    params = cfg.params
    grid = build_grid(params.N, cfg.M, cfg.r_max)
    u0, wang = make_initial_data(grid, params.init, params)
    require_wang(wang)
    if traj is None:
        traj = evolve(grid, params, u0, cfg.controls, Frame.V, (2.0,))
    env_ratio = []
    u_ratio = [wang.max_ratio]
    for smp in traj.samples:
        if smp.s > 0:
            env_ratio.append(smp.sup_v / wang_envelope_v(smp.s, params.p, params.lam))
        u_ratio.append(smp.wang_u_ratio)
    worst_env = max(env_ratio) if env_ratio else 0.0
    worst_u = max(u_ratio)
    passed = worst_env <= 1 + WANG_SLACK and worst_u <= 1 + WANG_SLACK
    return dict(config=cfg.as_dict(), initial=wang.as_dict(),
                worst_envelope_ratio=worst_env, worst_barrier_ratio=worst_u,
                barrier_margin_t0=1.0 - wang.max_ratio,
                outcome=traj.outcome.as_dict(), samples=len(traj.samples), passed=passed)
