"""Semilinear heat equation u_t = Lap u + u^p in original and self-similar variables.

Radial finite differences on a Gaussian-weighted grid, an IMEX integrator with a
compiled tridiagonal kernel, entropy-method diagnostics and the experiments that
check their decay rates, the Wang barrier and the Fujita blow-up dichotomy.
"""

from ._core import BACKEND
from .config import RunConfig, parse_config
from .constants import (
    DerivedConstants,
    HypothesisError,
    InitialDataSpec,
    ProblemParams,
    Regime,
    classify_regime,
    derive_constants,
    lq_exponents,
    u_infinity_profile,
    wang_envelope_u,
    wang_envelope_v,
)
from .dynamics import StepControls, evolve, make_initial_data
from .grid import Field, Frame, RadialGrid, build_grid

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DerivedConstants", "Field", "Frame", "HypothesisError", "InitialDataSpec",
    "ProblemParams", "RadialGrid", "Regime", "RunConfig", "StepControls", "build_grid",
    "classify_regime", "derive_constants", "evolve", "lq_exponents", "make_initial_data",
    "parse_config", "u_infinity_profile", "wang_envelope_u", "wang_envelope_v",
]
