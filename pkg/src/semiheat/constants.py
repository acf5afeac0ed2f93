"""Closed-form constants of the entropy-method decay argument.

Everything here is a pure function of ``(N, p, lambda)``. Quantities whose
defining hypotheses fail are returned as ``None`` and the reason is kept in
``DerivedConstants.missing`` so that callers can name the failed hypothesis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

CRITICAL_TOL = 1e-12


class HypothesisError(ValueError):
    """A run or experiment was requested outside the hypotheses it relies on."""

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        msg = hypothesis if not detail else f"{hypothesis}: {detail}"
        super().__init__(msg)


class Regime(str, enum.Enum):
    SUBCRITICAL = "SubcriticalFujita"
    CRITICAL = "CriticalFujita"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class InitialDataSpec:
    """Radial initial profile.

    ``kind`` is one of ``gaussian`` (``a * exp(-r^2/b^2)``), ``bump``
    (smooth compact bump of height ``a`` and radius ``b``) or ``singular``
    (``a * lambda * u_inf`` capped at the inner cutoff ``b``, Gaussian taper
    outside it).
    """

    kind: str = "gaussian"
    a: float = 0.1
    b: float = 2.0

    KINDS = ("gaussian", "bump", "singular")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown initial-data kind {self.kind!r}")
        if not self.b > 0:
            raise ValueError("width/radius/cutoff must be positive")
        if self.a < 0:
            raise ValueError("amplitude must be nonnegative")

    @classmethod
    def parse(cls, text: str) -> "InitialDataSpec":
        """Parse ``kind:a:b`` (e.g. ``gaussian:0.1:2``)."""
        parts = text.strip().split(":")
        if len(parts) != 3:
            raise ValueError(f"initial data must look like kind:a:b, got {text!r}")
        return cls(parts[0].lower(), float(parts[1]), float(parts[2]))

    def __str__(self) -> str:
        return f"{self.kind}:{self.a!r}:{self.b!r}"


@dataclass(frozen=True)
class ProblemParams:
    N: int = 3
    p: float = 5.0
    lam: float = 0.5
    init: InitialDataSpec = field(default_factory=InitialDataSpec)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not 0 < self.lam < 1:
            raise ValueError("lambda must lie in (0, 1)")

    @property
    def wang_path(self) -> bool:
        """N >= 3 and p > N/(N-2), the hypotheses under which u_inf is a barrier."""
        return self.N >= 3 and self.p > self.N / (self.N - 2)


@dataclass(frozen=True)
class DerivedConstants:
    N: int
    p: float
    lam: float
    p_star: float
    p_tilde: float | None
    gamma: float
    c_np: float | None
    lambda_max: float | None
    wang_coeff: float
    big_b: float | None
    s1: float | None
    mu_s1: float | None
    a: float | None
    missing: dict = field(default_factory=dict)

    FIELDS = ("p_star", "p_tilde", "gamma", "c_np", "lambda_max", "wang_coeff",
              "big_b", "s1", "mu_s1", "a")

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise HypothesisError(self.missing[name], f"{name} unavailable")

    def as_dict(self) -> dict:
        out = {name: getattr(self, name) for name in self.FIELDS}
        out["regime"] = classify_regime(self.N, self.p).value
        out["missing"] = dict(self.missing)
        return out


def fujita_exponent(N: int) -> float:
    return 1.0 + 2.0 / N


def decay_rate(N: int, p: float) -> float:
    """gamma = N/2 - 1/(p-1)."""
    return N / 2.0 - 1.0 / (p - 1.0)


def classify_regime(N: int, p: float) -> Regime:
    if not p > 1:
        raise ValueError("p must exceed 1")
    diff = Fraction(p) - Fraction(N + 2, N)
    if abs(diff) <= CRITICAL_TOL:
        return Regime.CRITICAL
    return Regime.SUBCRITICAL if diff < 0 else Regime.SUPERCRITICAL


def singular_coefficient(N: int, p: float) -> float:
    """C(N,p) of the singular steady state; requires N - 2p/(p-1) >= 0."""
    base = (2.0 / (p - 1.0)) * (N - 2.0 * p / (p - 1.0))
    if base < 0:
        raise HypothesisError("p >= N/(N-2) (singular equilibrium exists)",
                              f"N={N}, p={p}")
    return base ** (1.0 / (p - 1.0))


def lambda_power_gap(p: float, lam: float) -> float:
    """lambda^(1-p) - 1, positive for lambda in (0,1)."""
    return lam ** (1.0 - p) - 1.0


def f_of_s(s: float) -> float:
    """e^s / (e^s - 1), written to stay accurate for small s."""
    return 1.0 / -math.expm1(-s)


def f_inverse(w: float) -> float:
    """Inverse of f_of_s on (1, inf)."""
    if not w > 1:
        raise ValueError("f(s) > 1 for every s > 0")
    return math.log1p(1.0 / (w - 1.0))


def derive_constants(N: int, p: float, lam: float) -> DerivedConstants:
    params = ProblemParams(N, p, lam)  # validates p > 1, lambda in (0,1)
    missing: dict[str, str] = {}
    gamma = decay_rate(N, p)
    gap = lambda_power_gap(p, lam)
    try:
        wang_coeff = (gap * (p - 1.0)) ** (-1.0 / (p - 1.0))
    except OverflowError:  # p close to 1: the envelope constant is astronomically large
        wang_coeff = math.inf

    p_tilde = None
    if N == 3:
        p_tilde = N / (N - 2.0)
    elif N >= 4:
        p_tilde = 1.0 + 4.0 / N
    else:
        missing["p_tilde"] = "N >= 3 (p_tilde undefined for N < 3)"

    c_np = None
    if N < 3:
        missing["c_np"] = "N >= 3 (singular equilibrium)"
    elif p < N / (N - 2.0):
        missing["c_np"] = "p >= N/(N-2) (singular equilibrium)"
    else:
        c_np = singular_coefficient(N, p)

    lambda_max = big_b = s1 = mu_s1 = a = None
    if not params.wang_path:
        reason = "Wang hypotheses N >= 3 and p > N/(N-2)"
    elif gamma <= 0:
        reason = "gamma > 0 (supercritical p > 1 + 2/N)"
    else:
        reason = None
        lambda_max = ((3 * p - 1) / (gamma * (p - 1) ** 2) + 1.0) ** (1.0 / (1.0 - p))
        big_b = gamma * (p - 1) ** 2 * gap / (3 * p - 1)
        if big_b > 1:
            w = 0.5 * (1.0 + big_b)
            s1 = f_inverse(w)
            mu_s1 = (p - 1) * gamma - (3 * p - 1) / (gap * (p - 1)) * w
            a = mu_s1 / 2.0
        else:
            tail = f"lambda < lambda_max = {lambda_max:.6g} (B > 1)"
            for name in ("s1", "mu_s1", "a"):
                missing[name] = tail
    if reason is not None:
        for name in ("lambda_max", "big_b", "s1", "mu_s1", "a"):
            missing[name] = reason

    return DerivedConstants(
        N=N, p=p, lam=lam,
        p_star=fujita_exponent(N), p_tilde=p_tilde, gamma=gamma, c_np=c_np,
        lambda_max=lambda_max, wang_coeff=wang_coeff, big_b=big_b,
        s1=s1, mu_s1=mu_s1, a=a, missing=missing,
    )


def u_infinity_profile(r, N: int, p: float):
    """C(N,p) r^(-2/(p-1)); accepts scalars or arrays of positive radii."""
    import numpy as np

    if not (N >= 3 and p > N / (N - 2.0)):
        raise HypothesisError("Wang hypotheses N >= 3 and p > N/(N-2)", f"N={N}, p={p}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("u_inf is singular at r = 0; radii must be positive")
    out = singular_coefficient(N, p) * r_arr ** (-2.0 / (p - 1.0))
    return float(out) if out.ndim == 0 else out


def wang_envelope_v(s: float, p: float, lam: float) -> float:
    if not s > 0:
        raise ValueError("envelope diverges at s <= 0")
    coeff = (lambda_power_gap(p, lam) * (p - 1.0)) ** (-1.0 / (p - 1.0))
    return coeff * f_of_s(s) ** (1.0 / (p - 1.0))


def wang_envelope_u(t: float, p: float, lam: float) -> float:
    if not t > 0:
        raise ValueError("envelope diverges at t <= 0")
    return (lambda_power_gap(p, lam) * (p - 1.0) * t) ** (-1.0 / (p - 1.0))


def mu_of_s(s: float, N: int, p: float, lam: float) -> float:
    """Decay margin of the K-functional: (p-1) gamma - (3p-1) f(s) / ((lambda^(1-p)-1)(p-1))."""
    if not s > 0:
        raise ValueError("mu(s) requires s > 0")
    gamma = decay_rate(N, p)
    return (p - 1) * gamma - (3 * p - 1) / (lambda_power_gap(p, lam) * (p - 1)) * f_of_s(s)


def lq_exponents(N: int, p: float, q: float) -> tuple[float, float]:
    """Positive decay exponents of ||u(t)||_q: (entropy-method rate, Kawanago rate)."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if math.isinf(q):
        return 1.0 / (p - 1.0), N / 2.0
    bound_rate = 1.0 / (p - 1.0) + (2.0 / q) * (N / 4.0 - 1.0 / (p - 1.0))
    kawanago_rate = (N / 2.0) * (1.0 - 1.0 / q)
    return bound_rate, kawanago_rate
