"""Entropy-method functionals, rate fits and balance checks along trajectories.

All functionals use the spatial right-hand side of the rescaled equation as
v_s; time differences appear only in the balance checks.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .constants import (
    DerivedConstants,
    HypothesisError,
    ProblemParams,
    mu_of_s,
    u_infinity_profile,
    wang_envelope_v,
)
from .dynamics import rhs_v
from .grid import RadialGrid, apply_L, dirichlet_integral, lq_norm_unweighted, weighted_inner

CSV_COLUMNS = ("s", "t", "E", "I", "K", "R", "g", "dirichlet", "norm_l2rho_v",
               "norm_l2_u", "norm_l4_u", "sup_v", "wang_margin", "gbound_margin")


def _clipped(v) -> np.ndarray:
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def entropy(grid: RadialGrid, params: ProblemParams, v) -> float:
    v = np.asarray(v, dtype=float)
    p = params.p
    vp = _clipped(v)
    dens = -v**2 / (2 * (p - 1)) - vp ** (p + 1) / (p + 1)
    return 0.5 * dirichlet_integral(grid, v) + weighted_inner(grid, dens, 1.0)


def production(grid: RadialGrid, params: ProblemParams, v, vs=None) -> float:
    vs = rhs_v(grid, params, v) if vs is None else vs
    return weighted_inner(grid, vs, vs)


def k_functional(grid: RadialGrid, params: ProblemParams, v, vs=None) -> float:
    vs = rhs_v(grid, params, v) if vs is None else vs
    p = params.p
    return 2 * p * weighted_inner(grid, _clipped(v) ** (p - 1), vs * vs)


def poincare_gap(grid: RadialGrid, params: ProblemParams, v, vs=None) -> float:
    """(L v_s, v_s) - (N/2) ||v_s||^2, which equals R + K/2."""
    vs = rhs_v(grid, params, v) if vs is None else vs
    return weighted_inner(grid, apply_L(grid, vs), vs) - 0.5 * grid.N * weighted_inner(grid, vs, vs)


def r_functional(grid: RadialGrid, params: ProblemParams, v, vs=None) -> float:
    vs = rhs_v(grid, params, v) if vs is None else vs
    return poincare_gap(grid, params, v, vs) - 0.5 * k_functional(grid, params, v, vs)


def g_functional(grid: RadialGrid, v) -> float:
    v = np.asarray(v, dtype=float)
    return 0.5 * weighted_inner(grid, v, v)


def gbound_coefficient(params: ProblemParams) -> float:
    return (params.p - 1) * params.N / 2.0 - 2.0


def gbound_margin(E: float, I: float, g: float, params: ProblemParams,
                  consts: DerivedConstants | None = None) -> float:
    """1/2 I + (p+1) E - ((p-1)N/2 - 2) g; nonnegative when the g-bound holds."""
    p_tilde = consts.p_tilde if consts is not None else (
        3.0 if params.N == 3 else (1 + 4 / params.N if params.N >= 4 else None))
    if p_tilde is None or not params.p > p_tilde:
        raise HypothesisError("p > p_tilde (g-bound hypothesis)",
                              f"N={params.N}, p={params.p}, p_tilde={p_tilde}")
    return 0.5 * I + (params.p + 1) * E - gbound_coefficient(params) * g


@dataclass(frozen=True)
class DiagnosticsSample:
    s: float
    t: float
    E: float
    I: float
    K: float
    R: float
    g: float
    dirichlet: float
    norm_l2rho_v: float
    norm_l2_u: float
    norm_l4_u: float
    sup_v: float
    wang_margin: float
    gbound_margin: float
    norm_lq_u: dict = field(default_factory=dict)
    poincare_gap: float = 0.0
    power_ratio: float = math.nan
    wang_u_ratio: float = math.nan
    min_v: float = 0.0

    def row(self, extra_q=()) -> list:
        vals = [getattr(self, c) for c in CSV_COLUMNS]
        return vals + [self.norm_lq_u[q] for q in extra_q]

    def as_dict(self) -> dict:
        d = asdict(self)
        d["norm_lq_u"] = {str(k): v for k, v in self.norm_lq_u.items()}
        return d


def u_norm_from_v(grid: RadialGrid, v, s: float, p: float, q: float) -> float:
    """||u(t)||_q from the v-frame field by exact scaling, t = e^s - 1."""
    log_tp1 = s
    nv = lq_norm_unweighted(grid, v, q)
    expo = -1.0 / (p - 1.0) + (0.0 if math.isinf(q) else grid.N / (2.0 * q))
    return math.exp(expo * log_tp1) * nv


def sample_diagnostics(grid: RadialGrid, params: ProblemParams, consts: DerivedConstants,
                       v, s: float, q_list=(2.0, 4.0)) -> DiagnosticsSample:
    v = np.asarray(v, dtype=float)
    p = params.p
    vs = rhs_v(grid, params, v)
    E = entropy(grid, params, v)
    I = weighted_inner(grid, vs, vs)
    K = k_functional(grid, params, v, vs)
    gap = poincare_gap(grid, params, v, vs)
    g = g_functional(grid, v)
    sup_v = float(v.max())
    lq = {float(q): u_norm_from_v(grid, v, s, p, float(q)) for q in sorted(set(q_list) | {2.0, 4.0})}
    wang_margin = (wang_envelope_v(s, p, params.lam) - sup_v) if s > 0 else math.inf
    try:
        gm = gbound_margin(E, I, g, params, consts)
    except HypothesisError:
        gm = math.nan
    vv = weighted_inner(grid, v, v)
    power_ratio = weighted_inner(grid, _clipped(v) ** (p + 1), 1.0) / vv if vv > 0 else math.nan
    wang_u_ratio = math.nan
    if params.wang_path:
        r = grid.nodes[1:]
        # u <= lambda u_inf is scale invariant, so it can be read off in the v-frame
        wang_u_ratio = float(np.max(v[1:] / (params.lam * u_infinity_profile(r, params.N, p))))
    return DiagnosticsSample(
        s=s, t=math.expm1(s), E=E, I=I, K=K, R=gap - 0.5 * K, g=g,
        dirichlet=dirichlet_integral(grid, v), norm_l2rho_v=math.sqrt(max(vv, 0.0)),
        norm_l2_u=lq[2.0], norm_l4_u=lq[4.0], sup_v=sup_v, wang_margin=wang_margin,
        gbound_margin=gm, norm_lq_u=lq, poincare_gap=gap, power_ratio=power_ratio,
        wang_u_ratio=wang_u_ratio, min_v=float(v.min()),
    )


# -- rate fitting ----------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    quantity: str
    slope: float
    intercept: float
    window: tuple
    residual: float
    n: int
    abscissa: str = "s"

    def as_dict(self) -> dict:
        return asdict(self)


def fit_log_slope(x, y, window, quantity: str = "", log_abscissa: bool = False) -> RateFit:
    """Least-squares line through (x, ln y) for x in the window.

    With ``log_abscissa`` the abscissa is ln(x) instead (power laws in t + 1).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = window
    sel = (x >= lo) & (x <= hi)
    if sel.sum() < 10:
        raise ValueError(f"need >= 10 samples in window {window}, got {int(sel.sum())}")
    if np.any(y[sel] <= 0) or not np.all(np.isfinite(y[sel])):
        raise ValueError(f"{quantity or 'series'} is not positive in window {window}; fit refused")
    xs = np.log(x[sel]) if log_abscissa else x[sel]
    ys = np.log(y[sel])
    A = np.vstack([xs, np.ones_like(xs)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - (slope * xs + intercept)
    return RateFit(quantity, float(slope), float(intercept), (float(lo), float(hi)),
                   float(np.sqrt(np.mean(resid**2))), int(sel.sum()),
                   "ln(t+1)" if log_abscissa else "s")


def default_window(consts: DerivedConstants, horizon: float) -> tuple[float, float]:
    lo = max(consts.s1 or 0.0, 2.0)
    return lo, horizon - 1.0


# -- balance checks --------------------------------------------------------


def _midpoint_geometric(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Log-linear midpoint value; falls back to the arithmetic mean for nonpositive data."""
    out = 0.5 * (a + b)
    pos = (a > 0) & (b > 0)
    out[pos] = np.sqrt(a[pos] * b[pos])
    return out


def entropy_balance(samples, window=(0.5, 4.0), floor: float = 1e-12):
    """Relative residuals |dE/ds + I| / max(I, floor) over consecutive sample pairs.

    The difference quotient is centred on the pair midpoint, where I is taken
    by log-linear interpolation.
    """
    s = np.array([x.s for x in samples])
    E = np.array([x.E for x in samples])
    I = np.array([x.I for x in samples])
    mid = 0.5 * (s[1:] + s[:-1])
    dE = np.diff(E) / np.diff(s)
    Im = _midpoint_geometric(I[:-1], I[1:])
    sel = (s[:-1] >= window[0]) & (s[1:] <= window[1])
    res = np.abs(dE + Im) / np.maximum(Im, floor)
    return mid[sel], res[sel]


def production_balance(samples, gamma: float, window=(0.5, 4.0), floor: float = 1e-10):
    """Relative residuals |dI/ds + 2 gamma I + 2 R| / max(I, floor) at pair midpoints."""
    s = np.array([x.s for x in samples])
    I = np.array([x.I for x in samples])
    R = np.array([x.R for x in samples])
    mid = 0.5 * (s[1:] + s[:-1])
    dI = np.diff(I) / np.diff(s)
    Im = _midpoint_geometric(I[:-1], I[1:])
    Rm = 0.5 * (R[:-1] + R[1:])
    sel = (s[:-1] >= window[0]) & (s[1:] <= window[1]) & (Im > floor)
    res = np.abs(dI + 2 * gamma * Im + 2 * Rm) / np.maximum(Im, floor)
    return mid[sel], res[sel]


def k_decay_profile(samples, consts: DerivedConstants):
    """K(s) exp((2 gamma + a) s) for samples with s >= s1."""
    consts.require("a", "s1")
    rate = 2 * consts.gamma + consts.a
    s = np.array([x.s for x in samples])
    K = np.array([x.K for x in samples])
    sel = s >= consts.s1
    return s[sel], K[sel] * np.exp(rate * s[sel])


def max_relative_increase(seq) -> float:
    """Largest relative rise between consecutive entries (0 for a non-increasing sequence)."""
    seq = np.asarray(seq, dtype=float)
    if seq.size < 2:
        return 0.0
    prev = seq[:-1]
    rise = (seq[1:] - prev) / np.where(prev > 0, prev, 1.0)
    return float(max(rise.max(), 0.0))


def weighted_k_integral(samples, gamma: float, s_max: float) -> float:
    """Trapezoid estimate of the integral of e^(2 gamma s) K(s) over the samples with s <= s_max."""
    s = np.array([x.s for x in samples])
    K = np.array([x.K for x in samples])
    sel = s <= s_max + 1e-12
    y = np.exp(2 * gamma * s[sel]) * K[sel]
    return float(np.trapezoid(y, s[sel])) if hasattr(np, "trapezoid") else float(np.trapz(y, s[sel]))


def mu_profile(s, params: ProblemParams):
    return np.array([mu_of_s(x, params.N, params.p, params.lam) for x in np.atleast_1d(s)])
