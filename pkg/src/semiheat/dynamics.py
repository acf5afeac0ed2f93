"""Time integration of u_t = Lap u + u^p and of its self-similar rescaling.

The rescaled equation is v_s = Lap v + (y/2).grad v + v/(p-1) + v^p with
v(y, s) = (t+1)^(1/(p-1)) u((t+1)^(1/2) y, t), t = e^s - 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._core import BACKEND, kernels
from .constants import (
    HypothesisError,
    InitialDataSpec,
    ProblemParams,
    derive_constants,
    u_infinity_profile,
)
from .grid import (
    Field,
    Frame,
    RadialGrid,
    check_tail,
    radial_derivative,
    radial_laplacian,
    weighted_norm,
)

NEGATIVITY_TOL = 1e-12


class Status(str, enum.Enum):
    DECAYED = "Decayed"
    BLEW_UP = "BlewUp"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class StepControls:
    dt: float = 1e-3
    horizon: float = 8.0
    sample_every: int = 100
    blowup_threshold: float = 1e6
    dt_min: float = 1e-30
    decay_threshold: float = 1e-3
    max_rel_change: float = 0.1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.dt_min <= self.dt:
            raise ValueError("dt_min must not exceed dt")
        if not self.blowup_threshold >= 1e3:
            raise ValueError("blowup_threshold must be >= 1e3")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if not self.horizon >= 0:
            raise ValueError("horizon must be nonnegative")


@dataclass(frozen=True)
class RunOutcome:
    status: Status
    reason: str
    t_blowup: float | None = None

    def as_dict(self) -> dict:
        return {"status": self.status.value, "reason": self.reason, "t_blowup": self.t_blowup}


@dataclass(frozen=True)
class WangReport:
    applicable: bool
    passes: bool
    max_ratio: float | None
    r_at_max: float | None
    reason: str = ""

    def as_dict(self) -> dict:
        return dict(applicable=self.applicable, passes=self.passes,
                    max_ratio=self.max_ratio, r_at_max=self.r_at_max, reason=self.reason)


@dataclass
class Trajectory:
    frame: Frame
    params: ProblemParams
    controls: StepControls
    samples: list = field(default_factory=list)
    initial: object = None
    outcome: RunOutcome | None = None
    final: Field | None = None
    steps: int = 0
    dt_final: float = 0.0
    min_ratio: float = 0.0
    backend: str = BACKEND

    def series(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        s = np.array([smp.s for smp in self.samples])
        return s, np.array([getattr(smp, name) for smp in self.samples])


# -- initial data ----------------------------------------------------------


def initial_profile(r: np.ndarray, spec: InitialDataSpec, params: ProblemParams) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if spec.kind == "gaussian":
        return spec.a * np.exp(-((r / spec.b) ** 2))
    if spec.kind == "bump":
        out = np.zeros_like(r)
        inside = r < spec.b
        x = r[inside] / spec.b
        out[inside] = spec.a * np.exp(1.0 - 1.0 / (1.0 - x**2))
        return out
    # singular: fraction * lambda * u_inf, capped inside the cutoff, Gaussian taper outside
    cut = spec.b
    rr = np.maximum(r, cut)
    base = spec.a * params.lam * u_infinity_profile(rr, params.N, params.p)
    return base * np.exp(-((np.maximum(r - cut, 0.0)) ** 2) / 4.0)


def wang_check(grid: RadialGrid, values: np.ndarray, params: ProblemParams) -> WangReport:
    """Check 0 <= u0 <= lambda u_inf at every node r > 0."""
    if not params.wang_path:
        return WangReport(False, False, None, None,
                          "Wang hypotheses N >= 3 and p > N/(N-2) not met")
    r = grid.nodes[1:]
    ratio = values[1:] / (params.lam * u_infinity_profile(r, params.N, params.p))
    k = int(np.argmax(ratio))
    worst = float(ratio[k])
    ok = worst <= 1.0 and bool(np.all(values >= 0))
    reason = "" if ok else f"u0 <= lambda*u_inf violated at r={r[k]:.4g} (ratio {worst:.4g})"
    return WangReport(True, ok, worst, float(r[k]), reason)


def make_initial_data(grid: RadialGrid, spec: InitialDataSpec,
                      params: ProblemParams) -> tuple[Field, WangReport]:
    values = initial_profile(grid.nodes, spec, params)
    values[-1] = 0.0
    if np.any(values < 0):
        raise ValueError("initial data must be nonnegative")
    if not np.any(values > 0):
        raise ValueError("initial data is identically zero")
    check_tail(grid, values, "initial data")
    values.flags.writeable = False
    return Field(values, Frame.U, 0.0, grid), wang_check(grid, values, params)


# -- spatial operators -----------------------------------------------------


def _power(v: np.ndarray, p: float) -> np.ndarray:
    return np.maximum(v, 0.0) ** p


def rhs_v(grid: RadialGrid, params: ProblemParams, v, nonlinear: bool = True) -> np.ndarray:
    """Lap v + (r/2) v_r + v/(p-1) + v^p; zero at the Dirichlet node."""
    v = np.asarray(v, dtype=float)
    out = (radial_laplacian(grid, v) + 0.5 * grid.nodes * radial_derivative(grid, v)
           + v / (params.p - 1.0))
    if nonlinear:
        out = out + _power(v, params.p)
    out[-1] = 0.0
    return out


def rhs_u(grid: RadialGrid, params: ProblemParams, u, nonlinear: bool = True) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = radial_laplacian(grid, u)
    if nonlinear:
        out = out + _power(u, params.p)
    out[-1] = 0.0
    return out


def linear_bands(grid: RadialGrid, frame: Frame, p: float):
    """Tridiagonal coefficients (lower, diag, upper) of the linear part of the RHS."""
    n = grid.size
    h = grid.dr
    r = grid.nodes
    drift = 0.5 if frame is Frame.V else 0.0
    growth = 1.0 / (p - 1.0) if frame is Frame.V else 0.0
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    ri = r[1:-1]
    b = (grid.N - 1) / ri + drift * ri
    lower[1:-1] = 1.0 / h**2 - b / (2 * h)
    diag[1:-1] = -2.0 / h**2 + growth
    upper[1:-1] = 1.0 / h**2 + b / (2 * h)
    diag[0] = -2.0 * grid.N / h**2 + growth
    upper[0] = 2.0 * grid.N / h**2
    return lower, diag, upper


class ImexStepper:
    """Backward Euler on the linear operator, explicit u^p, one factorization per dt."""

    def __init__(self, grid: RadialGrid, frame: Frame, params: ProblemParams,
                 nonlinear: bool = True, kernel_module=None):
        self.grid = grid
        self.frame = frame
        self.params = params
        self.nonlinear = nonlinear
        self.kernels = kernel_module or kernels
        self.bands = linear_bands(grid, frame, params.p)
        self.dt_bound = self._dominance_bound()
        self._cache: dict[float, tuple] = {}

    def _dominance_bound(self) -> float:
        # Row 1 is excluded for N >= 4: its origin coupling breaks dominance at any
        # practical dt; the pivot check in _factor covers it instead.
        lower, diag, upper = self.bands
        rows = np.arange(self.grid.size - 1)
        if self.grid.N >= 4:
            rows = rows[rows != 1]
        excess = np.abs(lower[rows]) + np.abs(upper[rows]) + diag[rows]
        # need 1 - dt*diag > dt*(|lower| + |upper|), diag < 0
        excess = excess[excess > 0]
        return float(1.0 / excess.max()) if excess.size else math.inf

    def _factor(self, dt: float):
        hit = self._cache.get(dt)
        if hit is not None:
            return hit
        if dt >= self.dt_bound:
            raise ValueError(f"dt={dt:g} exceeds the diagonal-dominance bound {self.dt_bound:g}")
        lower, diag, upper = self.bands
        n = self.grid.size
        lo = -dt * lower
        di = 1.0 - dt * diag
        up = -dt * upper
        lo[0] = 0.0
        lo[-1] = 0.0
        di[-1] = 1.0
        up[-1] = 0.0
        cprime = np.empty(n)
        denom = np.empty(n)
        self.kernels.factor_tridiag(lo, di, up, cprime, denom)
        if not np.all(denom > 0):
            raise ValueError("tridiagonal factorization lost positivity")
        if len(self._cache) > 256:
            self._cache.clear()
        self._cache[dt] = (lo, cprime, denom)
        return self._cache[dt]

    def step(self, values: np.ndarray, dt: float, out: np.ndarray | None = None) -> np.ndarray:
        lo, cprime, denom = self._factor(dt)
        if out is None:
            out = np.empty_like(values)
        self.kernels.imex_step(lo, cprime, denom, np.ascontiguousarray(values, dtype=float),
                               float(dt), float(self.params.p), self.nonlinear, out)
        return out


def step_imex(state: Field, params: ProblemParams, dt: float,
              nonlinear: bool = True) -> Field:
    stepper = ImexStepper(state.grid, state.frame, params, nonlinear)
    return state.with_values(stepper.step(state.values, dt), state.clock + dt)


# -- frame changes ---------------------------------------------------------


def _rescale(field_: Field, factor_r: float, amp: float, frame: Frame, clock: float) -> Field:
    grid = field_.grid
    if factor_r == 1.0 and amp == 1.0:
        return Field(np.array(field_.values), frame, clock, grid)
    interp = PchipInterpolator(grid.nodes, field_.values, extrapolate=False)
    x = factor_r * grid.nodes
    vals = np.nan_to_num(interp(x), nan=0.0)
    vals[x > grid.r_max] = 0.0
    vals *= amp
    vals[-1] = 0.0
    return Field(vals, frame, clock, grid)


def map_u_to_v(u: Field, p: float, s: float | None = None) -> Field:
    """v(y, s) = (t+1)^(1/(p-1)) u((t+1)^(1/2) y, t) with s = ln(1+t)."""
    if u.frame is not Frame.U:
        raise ValueError("map_u_to_v expects a u-frame field")
    s_expected = math.log1p(u.clock)
    if s is not None and not math.isclose(s, s_expected, rel_tol=1e-12, abs_tol=1e-14):
        raise ValueError(f"clock mismatch: t={u.clock} maps to s={s_expected}, not {s}")
    tp1 = 1.0 + u.clock
    return _rescale(u, math.sqrt(tp1), tp1 ** (1.0 / (p - 1.0)), Frame.V, s_expected)


def map_v_to_u(v: Field, p: float, t: float | None = None) -> Field:
    """u(x, t) = (t+1)^(-1/(p-1)) v(x (t+1)^(-1/2), s) with t = e^s - 1."""
    if v.frame is not Frame.V:
        raise ValueError("map_v_to_u expects a v-frame field")
    t_expected = math.expm1(v.clock)
    if t is not None and not math.isclose(t, t_expected, rel_tol=1e-12, abs_tol=1e-14):
        raise ValueError(f"clock mismatch: s={v.clock} maps to t={t_expected}, not {t}")
    tp1 = 1.0 + t_expected
    return _rescale(v, 1.0 / math.sqrt(tp1), tp1 ** (-1.0 / (p - 1.0)), Frame.U, t_expected)


# -- driver ----------------------------------------------------------------


def _original_time(frame: Frame, clock: float) -> float:
    return math.expm1(clock) if frame is Frame.V else clock


def _sup_u(frame: Frame, clock: float, sup: float, p: float) -> float:
    if frame is Frame.V:
        return math.exp(-clock / (p - 1.0)) * sup
    return sup


def _blowup_time(t2: float, m1: float, m2: float, dt_orig: float, p: float) -> float:
    """Blow-up time of m' = k m^p fitted through the last two sup-norm values."""
    y2 = m2 ** (1.0 - p)
    slope = (y2 - m1 ** (1.0 - p)) / dt_orig if dt_orig > 0 else 0.0
    if not slope < 0:
        slope = -(p - 1.0)
    return t2 + y2 / -slope


def evolve(grid: RadialGrid, params: ProblemParams, init: Field,
           controls: StepControls, frame: Frame | str = Frame.V,
           q_list=(2.0, 4.0), nonlinear: bool = True,
           kernel_module=None) -> Trajectory:
    """Integrate from ``init`` (a t = 0 field) to ``controls.horizon`` in ``frame``.

    The horizon is in s for the v-frame and in t for the u-frame.
    """
    from .diagnostics import sample_diagnostics

    frame = Frame(frame)
    if init.clock != 0.0:
        raise ValueError("evolve starts from t = s = 0 data")
    check_tail(grid, init.values, "initial data")
    consts = derive_constants(params.N, params.p, params.lam)
    traj = Trajectory(frame, params, controls)
    stepper = ImexStepper(grid, frame, params, nonlinear, kernel_module)
    p = params.p

    state = np.array(init.values, dtype=float)
    work = np.empty_like(state)

    def record(values, clock):
        fld = Field(values.copy(), frame, clock, grid)
        if frame is Frame.U:
            fld = map_u_to_v(fld, p)
        return sample_diagnostics(grid, params, consts, fld.values, fld.clock, q_list)

    traj.initial = record(state, 0.0)
    dt = controls.dt
    base_clock, k = 0.0, 0
    clock = 0.0
    steps = 0
    min_ratio = 0.0
    prev_sup_u = None
    outcome = None
    horizon = controls.horizon

    while outcome is None:
        remaining = horizon - clock
        if remaining <= 1e-9 * dt:
            break
        h = dt if remaining > dt else remaining
        stepper.step(state, h, out=work)
        if not np.all(np.isfinite(work)):
            t_now = _original_time(frame, clock + h)
            outcome = RunOutcome(Status.BLEW_UP, "non-finite values", t_now)
            break
        sup_old = float(state.max())
        sup_new = float(work.max())
        if sup_old > 0 and abs(sup_new - sup_old) > controls.max_rel_change * sup_old:
            if dt / 2 < controls.dt_min:
                outcome = RunOutcome(
                    Status.UNDETERMINED,
                    f"step control hit dt_min={controls.dt_min:g} at clock {clock:.6g}")
                break
            dt /= 2
            base_clock, k = clock, 0
            continue
        state, work = work, state
        steps += 1
        if h == dt:
            k += 1
            clock = base_clock + k * dt
        else:
            clock = horizon
        scale = float(np.abs(state).max())
        lo = float(state.min())
        if scale > 0:
            min_ratio = min(min_ratio, lo / scale)
            if lo < -NEGATIVITY_TOL * scale:
                raise FloatingPointError(
                    f"positivity lost: min {lo:.3e} vs scale {scale:.3e} at clock {clock:.6g}")
        sup_u = _sup_u(frame, clock, sup_new, p)
        at_end = horizon - clock <= 1e-9 * dt
        if sup_new >= controls.blowup_threshold:
            dt_orig = h * (1.0 + _original_time(frame, clock)) if frame is Frame.V else h
            t_now = _original_time(frame, clock)
            t_b = _blowup_time(t_now, prev_sup_u or sup_u, sup_u, dt_orig, p)
            outcome = RunOutcome(
                Status.BLEW_UP,
                f"sup-norm {sup_new:.3e} crossed {controls.blowup_threshold:g} at "
                f"{'s' if frame is Frame.V else 't'}={clock:.6g}; t_b is an ODE extrapolation",
                t_b)
        prev_sup_u = sup_u
        if steps % controls.sample_every == 0 or at_end or outcome is not None:
            traj.samples.append(record(state, clock))

    if outcome is None:
        last = traj.samples[-1] if traj.samples else traj.initial
        norm = last.norm_l2rho_v
        if norm < controls.decay_threshold:
            outcome = RunOutcome(Status.DECAYED,
                                 f"||v||_L2rho = {norm:.3e} < {controls.decay_threshold:g} at horizon")
        else:
            outcome = RunOutcome(Status.UNDETERMINED,
                                 f"||v||_L2rho = {norm:.3e} at horizon; neither decayed nor blew up")
    traj.outcome = outcome
    traj.final = Field(state.copy(), frame, clock, grid)
    traj.steps = steps
    traj.dt_final = dt
    traj.min_ratio = min_ratio
    return traj


def require_wang(report: WangReport) -> None:
    if not report.applicable:
        raise HypothesisError(report.reason)
    if not report.passes:
        raise HypothesisError("Wang hypothesis 0 <= u0 <= lambda*u_inf", report.reason)


def weighted_norm_of(field_: Field) -> float:
    return weighted_norm(field_.grid, field_.values)
