"""Uniform radial grid on [0, r_max] with Gaussian-growth weight rho = exp(r^2/4)."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

R_MAX_LIMIT = 52.0
TAIL_WARN = 1e-8
TAIL_ERROR = 1e-4


class TruncationError(ValueError):
    """The weighted mass of a field reaches the outer truncation radius."""


class Frame(str, enum.Enum):
    U = "u"
    V = "v"


@dataclass(frozen=True, eq=False)
class RadialGrid:
    N: int
    M: int
    r_max: float
    nodes: np.ndarray
    vol_weights: np.ndarray
    rho: np.ndarray
    omega_n: float

    @property
    def dr(self) -> float:
        return self.r_max / self.M

    @property
    def size(self) -> int:
        return self.M + 1

    def key(self) -> tuple:
        return (self.N, self.M, self.r_max)


@dataclass(frozen=True, eq=False)
class Field:
    """Radial profile of u (clock = t) or v (clock = s) on a grid."""

    values: np.ndarray
    frame: Frame
    clock: float
    grid: RadialGrid

    def with_values(self, values: np.ndarray, clock: float | None = None) -> "Field":
        return Field(values, self.frame, self.clock if clock is None else clock, self.grid)


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def build_grid(N: int, M: int, r_max: float) -> RadialGrid:
    if N < 1:
        raise ValueError("N must be >= 1")
    if M < 16:
        raise ValueError("need at least 16 radial intervals")
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    if r_max > R_MAX_LIMIT:
        raise ValueError(f"r_max={r_max} overflows the weight exp(r^2/4)")
    nodes = np.linspace(0.0, r_max, M + 1)
    nodes[-1] = r_max
    dr = r_max / M
    omega = sphere_area(N)
    w = omega * nodes ** (N - 1) * dr
    w[0] *= 0.5
    w[-1] *= 0.5
    rho = np.exp(nodes**2 / 4.0)
    for arr in (nodes, w, rho):
        arr.flags.writeable = False
    return RadialGrid(N, M, float(r_max), nodes, w, rho, omega)


def weighted_inner(grid: RadialGrid, f, g) -> float:
    return float(np.sum(f * g * grid.rho * grid.vol_weights))


def weighted_norm(grid: RadialGrid, f) -> float:
    return math.sqrt(max(weighted_inner(grid, f, f), 0.0))


def lq_norm_unweighted(grid: RadialGrid, f, q: float) -> float:
    f = np.abs(np.asarray(f, dtype=float))
    if math.isinf(q):
        return float(f.max())
    if q < 1:
        raise ValueError("q must be >= 1")
    return float(np.sum(f**q * grid.vol_weights)) ** (1.0 / q)


def radial_derivative(grid: RadialGrid, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    h = grid.dr
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    out[0] = 0.0
    out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return out


def radial_laplacian(grid: RadialGrid, f) -> np.ndarray:
    """f_rr + (N-1)/r f_r; radial limit 2N (f_1 - f_0)/dr^2 at the origin."""
    f = np.asarray(f, dtype=float)
    h = grid.dr
    r = grid.nodes
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2 + (grid.N - 1) / r[1:-1] * (
        f[2:] - f[:-2]
    ) / (2 * h)
    out[0] = 2 * grid.N * (f[1] - f[0]) / h**2
    frr = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    fr = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    out[-1] = frr + (grid.N - 1) / r[-1] * fr
    return out


def apply_L(grid: RadialGrid, f) -> np.ndarray:
    """L f = -Lap f - (r/2) f_r."""
    return -radial_laplacian(grid, f) - 0.5 * grid.nodes * radial_derivative(grid, f)


def dirichlet_integral(grid: RadialGrid, f) -> float:
    """Weighted Dirichlet integral of |grad f|^2 rho (|grad f| = |f_r| for radial f)."""
    fr = radial_derivative(grid, f)
    return weighted_inner(grid, fr, fr)


def tail_fraction(grid: RadialGrid, f) -> float:
    """Share of the weighted mass sum f^2 rho w carried by the outer 5% of nodes."""
    dens = np.asarray(f, dtype=float) ** 2 * grid.rho * grid.vol_weights
    total = float(dens.sum())
    if total == 0.0:
        return 0.0
    n_tail = max(1, int(math.ceil(0.05 * grid.size)))
    return float(dens[-n_tail:].sum()) / total


def check_tail(grid: RadialGrid, f, what: str = "field") -> float:
    frac = tail_fraction(grid, f)
    if frac >= TAIL_ERROR:
        raise TruncationError(
            f"{what}: tail fraction {frac:.3e} >= {TAIL_ERROR:g}; increase r_max"
        )
    if frac > TAIL_WARN:
        warnings.warn(f"{what}: tail fraction {frac:.3e} above {TAIL_WARN:g}", stacklevel=2)
    return frac
