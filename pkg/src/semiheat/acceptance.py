"""Exit criteria of the desk-scale reproduction, runnable from the CLI (``semiheat check``)
and from pytest. Tolerances are fixed here and nowhere else."""

from __future__ import annotations

import filecmp
import math
import os
import tempfile
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .config import RunConfig, parse_config
from .constants import InitialDataSpec, derive_constants
from .diagnostics import (
    entropy,
    entropy_balance,
    fit_log_slope,
    k_decay_profile,
    max_relative_increase,
    production_balance,
    weighted_k_integral,
)
from .dynamics import Status, evolve, make_initial_data
from .experiments import run_cross_frame_check, run_fujita_scan, run_wang_audit
from .grid import Frame, apply_L, build_grid, dirichlet_integral, weighted_inner
from .io import emit_outputs

FOUR_PI = 4.0 * math.pi


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d}. {self.title}: {self.detail}"


def gaussian_entropy_3d_p5(amplitude: float) -> float:
    """E(A e^{-r^2/4}) for N=3, p=5 from closed-form Gaussian integrals."""
    quad = 0.625 * FOUR_PI**1.5  # (N/4 - 1/(2(p-1))) * ||phi||^2
    sextic = (FOUR_PI / 5.0) ** 1.5 / 6.0
    return quad * amplitude**2 - sextic * amplitude**6


class Suite:
    """Lazily shares the default desk run between criteria."""

    def __init__(self, cfg: RunConfig | None = None):
        self.cfg = cfg or RunConfig()

    @cached_property
    def grid(self):
        return build_grid(self.cfg.N, self.cfg.M, self.cfg.r_max)

    @cached_property
    def consts(self):
        return derive_constants(self.cfg.N, self.cfg.p, self.cfg.lam)

    @cached_property
    def run(self):
        params = self.cfg.params
        u0, _ = make_initial_data(self.grid, params.init, params)
        return evolve(self.grid, params, u0, self.cfg.controls, Frame.V, self.cfg.q_list)

    # 1
    def constants(self) -> Criterion:
        c = derive_constants(3, 5.0, 0.5)
        # exact closed forms: B = 150/7, (1+B)/2 = 157/14, mu(s1) = 143/60
        exact = dict(gamma=1.25, c_np=0.25**0.25, lambda_max=1.7**-0.25,
                     wang_coeff=60**-0.25, big_b=150 / 7, s1=math.log(157 / 143),
                     a=143 / 120, p_star=5 / 3, p_tilde=3.0)
        target = dict(gamma=1.25, c_np=0.707107, lambda_max=0.875806, wang_coeff=0.359301,
                      big_b=21.428571, s1=0.093404, a=1.191667, p_star=1.666667, p_tilde=3.0)
        exact_ok = all(abs(getattr(c, k) - v) <= 1e-12 * abs(v) for k, v in exact.items())
        bad = {k: getattr(c, k) for k, v in target.items()
               if abs(getattr(c, k) - v) > 1e-6 * abs(v)}
        ok = exact_ok and not bad
        detail = f"closed forms exact={exact_ok}"
        if bad:
            detail += "; off target by > 1e-6 rel: " + ", ".join(
                f"{k}={v:.7f} (target {target[k]})" for k, v in bad.items())
        return Criterion(1, "derived constants", ok, detail)

    # 2
    def operator(self) -> Criterion:
        g2 = build_grid(3, 2048, 16.0)
        r = g2.nodes
        phi = np.exp(-(r**2) / 4.0)
        phi[-1] = 0.0
        sel = r <= 0.9 * g2.r_max
        eig = np.max(np.abs(apply_L(g2, phi)[sel] - 1.5 * phi[sel])) / phi.max()
        eq = dirichlet_integral(g2, phi) / (1.5 * weighted_inner(g2, phi, phi)) - 1.0
        worst = poincare_random_ratio(self.grid, 50, seed=2024)
        ok = eig < 1e-3 and abs(eq) < 5e-3 and worst >= 1 - 1e-3
        return Criterion(2, "operator fidelity", ok,
                         f"eig err {eig:.2e}, equality dev {eq:.2e}, min Poincare ratio {worst:.4f}")

    # 3
    def entropy_balance(self) -> Criterion:
        _, res = entropy_balance(self.run.samples, (0.5, 4.0), 1e-12)
        ok = res.size > 0 and res.max() < 0.01
        return Criterion(3, "entropy balance dE/ds = -I", ok,
                         f"max rel residual {res.max():.2e} over {res.size} intervals")

    # 4
    def production_balance(self) -> Criterion:
        _, res = production_balance(self.run.samples, self.consts.gamma, (0.5, 4.0), 1e-10)
        ok = res.size > 0 and res.max() < 0.05
        return Criterion(4, "production balance dI/ds = -2 gamma I - 2R", ok,
                         f"max rel residual {res.max():.2e} over {res.size} intervals")

    def _slope(self, name, window=(2.0, 6.0)):
        s = np.array([x.s for x in self.run.samples])
        return fit_log_slope(s, [getattr(x, name) for x in self.run.samples], window, name).slope

    # 5
    def decay_rates(self) -> Criterion:
        g = self.consts.gamma
        sv, sE, sI = self._slope("norm_l2rho_v"), self._slope("E"), self._slope("I")
        ok = (abs(sv + g) <= 0.05 * g and abs(sE + 2 * g) <= 0.10 * 2 * g
              and abs(sI + 2 * g) <= 0.10 * 2 * g)
        return Criterion(5, "decay rates in s", ok,
                         f"||v||: {sv:.4f} (-1.25), E: {sE:.4f} (-2.5), I: {sI:.4f} (-2.5)")

    # 6
    def u_rates(self) -> Criterion:
        s = np.array([x.s for x in self.run.samples])
        tp1 = np.exp(s)
        win = (math.exp(2.0), math.exp(6.0))
        s2 = fit_log_slope(tp1, [x.norm_l2_u for x in self.run.samples], win, "l2", True).slope
        s4 = fit_log_slope(tp1, [x.norm_l4_u for x in self.run.samples], win, "l4", True).slope
        ok = abs(s2 + 0.75) <= 0.075 and s4 <= -0.5
        return Criterion(6, "u-frame power laws", ok,
                         f"L2 slope {s2:.4f} (-0.75), L4 slope {s4:.4f} (<= -0.5)")

    # 7
    def gbound(self) -> Criterion:
        p = self.cfg.p
        worst = min(
            x.gbound_margin / (0.5 * x.I + (p + 1) * abs(x.E) + 4 * x.g)
            for x in self.run.samples
        )
        ok = worst >= -1e-8
        return Criterion(7, "g-bound margin", ok, f"min scaled margin {worst:.3e}")

    # 8
    def k_structure(self) -> Criterion:
        gap = min(x.poincare_gap / x.I for x in self.run.samples if x.I > 0)
        _, prof = k_decay_profile(self.run.samples, self.consts)
        rise = max_relative_increase(prof)
        i6 = weighted_k_integral(self.run.samples, self.consts.gamma, 6.0)
        i8 = weighted_k_integral(self.run.samples, self.consts.gamma, 8.0)
        change = abs(i8 - i6) / i6
        ok = gap >= -1e-3 and rise <= 0.01 and change < 0.01
        return Criterion(8, "K-functional lemma structure", ok,
                         f"min (R+K/2)/||v_s||^2 {gap:.2e}, max rise {rise:.2e}, "
                         f"integral change {change:.2e}")

    # 9
    def wang(self) -> Criterion:
        rep = run_wang_audit(self.cfg, self.run)
        return Criterion(9, "Wang barrier audit", rep["passed"],
                         f"sup v / envelope <= {rep['worst_envelope_ratio']:.4f}, "
                         f"u / (lambda u_inf) <= {rep['worst_barrier_ratio']:.4f}")

    # 10
    def blowup(self) -> Criterion:
        e_oracle = gaussian_entropy_3d_p5(3.0)
        cfg = replace(self.cfg, init=InitialDataSpec("gaussian", 3.0, 2.0), horizon=5.0)
        params = cfg.params
        u0, _ = make_initial_data(self.grid, params.init, params)
        e_grid = entropy(self.grid, params, u0.values)
        t1 = evolve(self.grid, params, u0, cfg.controls, Frame.V, (2.0,))
        cfg2 = replace(self.cfg, p=1.5, init=InitialDataSpec("gaussian", 1.0, 2.0),
                       horizon=math.log(51.0))
        u0b, _ = make_initial_data(self.grid, cfg2.params.init, cfg2.params)
        t2 = evolve(self.grid, cfg2.params, u0b, cfg2.controls, Frame.V, (2.0,))
        ok = (e_oracle < 0 and e_grid < 0 and t1.outcome.status is Status.BLEW_UP
              and t1.final.clock < 5.0 and t2.outcome.status is Status.BLEW_UP
              and math.expm1(t2.final.clock) < 50.0)
        return Criterion(10, "blow-up detection", ok,
                         f"E(u0) oracle {e_oracle:.2f} grid {e_grid:.2f}; p=5 A=3 "
                         f"{t1.outcome.status.value} at s={t1.final.clock:.4g}; p=1.5 A=1 "
                         f"{t2.outcome.status.value} at t={math.expm1(t2.final.clock):.4g}")

    # 11
    def cross_frame(self) -> Criterion:
        a = run_cross_frame_check(self.cfg, 1.0, self.cfg.dt)["discrepancy"]
        b = run_cross_frame_check(self.cfg, 1.0, self.cfg.dt / 2)["discrepancy"]
        ok = a < 0.01 and b < a
        return Criterion(11, "cross-frame consistency", ok,
                         f"discrepancy {a:.2e} (dt), {b:.2e} (dt/2)")

    # 12
    def phase_scan(self, workers: int = 3) -> Criterion:
        p_list, amps = (1.5, 5.0 / 3.0, 5.0), (0.05, 0.5, 3.0)
        serial = run_fujita_scan(p_list, amps, self.cfg, workers=1)
        parallel = run_fujita_scan(p_list, amps, self.cfg, workers=workers)
        no_decay = all(serial.outcome(p, a) != Status.DECAYED.value
                       for p in p_list[:2] for a in amps)
        row5 = (serial.outcome(5.0, 0.05) == Status.DECAYED.value
                and serial.outcome(5.0, 3.0) == Status.BLEW_UP.value)
        same = serial.rows() == parallel.rows()
        ok = no_decay and row5 and same
        table = "; ".join(f"p={p:.4g},A={a:g}:{o}" for p, a, o, _ in serial.rows())
        return Criterion(12, "Fujita phase scan", ok,
                         f"sub/critical rows decay-free={no_decay}, p=5 row ok={row5}, "
                         f"serial==parallel={same} [{table}]")

    # 13
    def determinism(self) -> Criterion:
        with tempfile.TemporaryDirectory() as tmp:
            first = (os.path.join(tmp, "a.csv"), os.path.join(tmp, "a.json"))
            second = (os.path.join(tmp, "b.csv"), os.path.join(tmp, "b.json"))
            emit_outputs(self.run, self.cfg, *first)
            echoed = parse_config(self.cfg.echo())
            params = echoed.params
            grid = build_grid(params.N, echoed.M, echoed.r_max)
            u0, _ = make_initial_data(grid, params.init, params)
            again = evolve(grid, params, u0, echoed.controls, echoed.frame, echoed.q_list)
            emit_outputs(again, echoed, *second)
            ok = all(filecmp.cmp(x, y, shallow=False) for x, y in zip(first, second))
        return Criterion(13, "determinism from echoed config", ok,
                         "CSV and JSON byte-identical" if ok else "outputs differ")

    def all(self) -> list[Criterion]:
        order = [self.constants, self.operator, self.entropy_balance, self.production_balance,
                 self.decay_rates, self.u_rates, self.gbound, self.k_structure, self.wang,
                 self.blowup, self.cross_frame, self.phase_scan, self.determinism]
        return [f() for f in order]


def poincare_random_ratio(grid, count: int, seed: int) -> float:
    """Smallest Dirichlet-integral / ((N/2) ||f||^2) over random boundary-compatible fields."""
    rng = np.random.default_rng(seed)
    r = grid.nodes
    worst = math.inf
    for _ in range(count):
        coeffs = rng.normal(size=rng.integers(1, 7))
        f = np.polyval(coeffs, r) * np.exp(-(r**2) / 3.0)
        f[-1] = 0.0
        ratio = dirichlet_integral(grid, f) / (0.5 * grid.N * weighted_inner(grid, f, f))
        worst = min(worst, ratio)
    return worst


def run_all(cfg: RunConfig | None = None) -> list[Criterion]:
    return Suite(cfg).all()
