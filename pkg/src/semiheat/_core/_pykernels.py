"""Pure-Python versions of the compiled kernels, same operation order."""

from __future__ import annotations


def factor_tridiag(lower, diag, upper, cprime, denom):
    n = len(diag)
    lo = lower.tolist()
    di = diag.tolist()
    up = upper.tolist()
    d = [0.0] * n
    c = [0.0] * n
    d[0] = di[0]
    c[0] = up[0] / d[0]
    for i in range(1, n):
        d[i] = di[i] - lo[i] * c[i - 1]
        c[i] = up[i] / d[i]
    cprime[:] = c
    denom[:] = d
    return min(abs(x) for x in d)


def _solve(lo, c, d, x):
    n = len(x)
    x[0] = x[0] / d[0]
    prev = x[0]
    for i in range(1, n):
        prev = (x[i] - lo[i] * prev) / d[i]
        x[i] = prev
    nxt = x[n - 1]
    for i in range(n - 2, -1, -1):
        nxt = x[i] - c[i] * nxt
        x[i] = nxt
    return x


def solve_factored(lower, cprime, denom, rhs, out):
    out[:] = _solve(lower.tolist(), cprime.tolist(), denom.tolist(), rhs.tolist())


def imex_step(lower, cprime, denom, state, dt, p, nonlinear, out):
    x = state.tolist()
    if nonlinear:
        x = [v + dt * v**p if v > 0.0 else v for v in x]
    x[-1] = 0.0
    out[:] = _solve(lower.tolist(), cprime.tolist(), denom.tolist(), x)
