# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tridiagonal kernels for the IMEX step."""

from libc.math cimport pow


def factor_tridiag(const double[::1] lower, const double[::1] diag,
                   const double[::1] upper, double[::1] cprime, double[::1] denom):
    cdef Py_ssize_t n = diag.shape[0], i
    denom[0] = diag[0]
    cprime[0] = upper[0] / denom[0]
    for i in range(1, n):
        denom[i] = diag[i] - lower[i] * cprime[i - 1]
        cprime[i] = upper[i] / denom[i]
    return min_abs(denom)


cdef double min_abs(double[::1] x):
    cdef Py_ssize_t i
    cdef double m = abs(x[0])
    for i in range(1, x.shape[0]):
        if abs(x[i]) < m:
            m = abs(x[i])
    return m


cdef void _solve(const double[::1] lower, const double[::1] cprime,
                 const double[::1] denom, double[::1] out) noexcept nogil:
    # out holds the right-hand side on entry
    cdef Py_ssize_t n = out.shape[0], i
    out[0] = out[0] / denom[0]
    for i in range(1, n):
        out[i] = (out[i] - lower[i] * out[i - 1]) / denom[i]
    for i in range(n - 2, -1, -1):
        out[i] = out[i] - cprime[i] * out[i + 1]


def solve_factored(const double[::1] lower, const double[::1] cprime,
                   const double[::1] denom, const double[::1] rhs, double[::1] out):
    cdef Py_ssize_t i
    for i in range(rhs.shape[0]):
        out[i] = rhs[i]
    with nogil:
        _solve(lower, cprime, denom, out)


def imex_step(const double[::1] lower, const double[::1] cprime,
              const double[::1] denom, const double[::1] state, double dt,
              double p, bint nonlinear, double[::1] out):
    """Backward Euler on the linear part, explicit power term, Dirichlet zero at the end node."""
    cdef Py_ssize_t n = state.shape[0], i
    cdef double x
    with nogil:
        for i in range(n):
            x = state[i]
            if nonlinear and x > 0.0:
                out[i] = x + dt * pow(x, p)
            else:
                out[i] = x
        out[n - 1] = 0.0
        _solve(lower, cprime, denom, out)
