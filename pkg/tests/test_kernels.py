import numpy as np
import pytest
from scipy.linalg import solve_banded

from semiheat._core import BACKEND, kernels, pykernels

needs_ext = pytest.mark.skipif(BACKEND != "cython", reason="compiled extension not built")


def _system(n, seed):
    rng = np.random.default_rng(seed)
    lower = rng.uniform(-1, 0, n)
    upper = rng.uniform(-1, 0, n)
    lower[0] = upper[-1] = 0.0
    diag = np.abs(lower) + np.abs(upper) + rng.uniform(0.5, 2.0, n)
    return lower, diag, upper


@pytest.mark.parametrize("mod", [pykernels, kernels], ids=["python", BACKEND])
@pytest.mark.parametrize("n", [2, 17, 300])
def test_thomas_matches_banded_solver(mod, n):
    lower, diag, upper = _system(n, n)
    rhs = np.random.default_rng(n + 1).normal(size=n)
    cp, dn = np.empty(n), np.empty(n)
    pivot = mod.factor_tridiag(lower, diag, upper, cp, dn)
    assert pivot > 0
    out = np.empty(n)
    mod.solve_factored(lower, cp, dn, rhs, out)
    ab = np.vstack([np.r_[0.0, upper[:-1]], diag, np.r_[lower[1:], 0.0]])
    assert np.allclose(out, solve_banded((1, 1), ab, rhs), rtol=1e-12, atol=1e-12)


@needs_ext
@pytest.mark.parametrize("nonlinear", [True, False])
def test_backends_bit_identical(nonlinear):
    n = 257
    lower, diag, upper = _system(n, 3)
    state = np.abs(np.random.default_rng(4).normal(size=n))
    state[5] = -1e-3  # negative entries skip the power term in both
    res = []
    for mod in (pykernels, kernels):
        cp, dn, out = np.empty(n), np.empty(n), np.empty(n)
        piv = mod.factor_tridiag(lower, diag, upper, cp, dn)
        mod.imex_step(lower, cp, dn, state, 1e-3, 5.0, nonlinear, out)
        res.append((piv, cp.copy(), dn.copy(), out.copy()))
    assert res[0][0] == res[1][0]
    for a, b in zip(res[0][1:], res[1][1:]):
        assert np.array_equal(a, b)


def test_imex_step_pins_boundary():
    n = 20
    lower, diag, upper = _system(n, 9)
    lower[-1] = 0.0
    diag[-1] = 1.0
    cp, dn, out = np.empty(n), np.empty(n), np.empty(n)
    kernels.factor_tridiag(lower, diag, upper, cp, dn)
    kernels.imex_step(lower, cp, dn, np.ones(n), 0.1, 2.0, True, out)
    assert out[-1] == 0.0


def test_backend_flag_reported():
    assert BACKEND in ("cython", "python")


def test_env_forces_pure_python():
    import os
    import subprocess
    import sys

    env = dict(os.environ, SEMIHEAT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import semiheat; print(semiheat.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
