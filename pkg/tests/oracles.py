"""Independent reference computations used to freeze expected values.

Nothing here imports the package's stencils or integrator.
"""

import math

import numpy as np

FOUR_PI = 4 * math.pi


def gaussian_weighted_mass(N, decay):
    """Integral over R^N of exp(-decay |y|^2)."""
    return (math.pi / decay) ** (N / 2)


def entropy_gaussian(A, N, p):
    """E(A e^{-r^2/4}) in closed form (gradient term via the Poincare equality case)."""
    phi2 = gaussian_weighted_mass(N, 0.25)  # phi^2 rho = e^{-r^2/4}
    quad = (N / 4 - 1 / (2 * (p - 1))) * phi2
    power = gaussian_weighted_mass(N, (p + 1) / 4 - 0.25) / (p + 1)
    return quad * A**2 - power * A ** (p + 1)


def dense_wang_ratio(A, lam, c_np, p, r_max=20.0, n=2_000_001):
    r = np.linspace(1e-6, r_max, n)
    ratio = A * np.exp(-(r**2) / 4) * r ** (2 / (p - 1)) / (lam * c_np)
    k = int(np.argmax(ratio))
    return ratio[k], r[k]


class RK4Radial:
    """Explicit RK4 method of lines for the rescaled (or original) radial equation."""

    def __init__(self, N, p, M, r_max, rescaled=True):
        self.N, self.p, self.rescaled = N, p, rescaled
        self.r = np.linspace(0, r_max, M + 1)
        self.h = r_max / M

    def rhs(self, v):
        h, r, N = self.h, self.r, self.N
        out = np.zeros_like(v)
        vr = (v[2:] - v[:-2]) / (2 * h)
        vrr = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
        ri = r[1:-1]
        out[1:-1] = vrr + (N - 1) / ri * vr
        out[0] = 2 * N * (v[1] - v[0]) / h**2
        if self.rescaled:
            out[1:-1] += 0.5 * ri * vr
            out[:-1] += v[:-1] / (self.p - 1)
        out[:-1] += np.abs(v[:-1]) ** self.p
        return out

    def run(self, v0, horizon, dt, blowup=1e6):
        v = np.array(v0, dtype=float)
        v[-1] = 0.0
        s = 0.0
        n = int(round(horizon / dt))
        for _ in range(n):
            k1 = self.rhs(v)
            k2 = self.rhs(v + 0.5 * dt * k1)
            k3 = self.rhs(v + 0.5 * dt * k2)
            k4 = self.rhs(v + dt * k3)
            v = v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            s += dt
            if not np.all(np.isfinite(v)) or v.max() >= blowup:
                return "BlewUp", s, v
        return "Finished", s, v

    def weighted_norm(self, v):
        w = 2 * math.pi ** (self.N / 2) / math.gamma(self.N / 2) * self.r ** (self.N - 1)
        dens = v**2 * np.exp(self.r**2 / 4) * w
        return math.sqrt(np.trapezoid(dens, self.r) if hasattr(np, "trapezoid") else np.trapz(dens, self.r))
