# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 reference kernels; see _pykernels for the contract."""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "compiled"


def rk4_poly(coeffs, y0, double tau0, double tau1, long n):
    """Classical RK4 for y' = P(tau); k2 = k3, so each step is Simpson.

    The per-step increments are tiny against the running total, so the
    accumulation is Kahan-compensated; plain summation would cost ~1e-12
    relative over 1e5 substeps.
    """
    cdef cnp.float64_t[:, ::1] c = np.ascontiguousarray(
        np.atleast_2d(np.asarray(coeffs, dtype=np.float64)))
    cdef cnp.float64_t[::1] y = np.array(y0, dtype=np.float64)
    cdef cnp.float64_t[::1] comp = np.zeros(y.shape[0], dtype=np.float64)
    cdef Py_ssize_t dim = y.shape[0]
    cdef Py_ssize_t terms = c.shape[0]
    cdef double h = (tau1 - tau0) / n
    cdef double a, term, fresh
    cdef Py_ssize_t i, d
    cdef double k1, k2, k4

    if c.shape[1] != dim:
        raise ValueError("coefficient width does not match state dimension")
    for i in range(n):
        a = tau0 + i * h
        for d in range(dim):
            k1 = _horner(c, terms, d, a)
            k2 = _horner(c, terms, d, a + 0.5 * h)
            k4 = _horner(c, terms, d, a + h)
            term = (h / 6.0) * (k1 + 4.0 * k2 + k4) - comp[d]
            fresh = y[d] + term
            comp[d] = (fresh - y[d]) - term
            y[d] = fresh
    return np.asarray(y)


cdef inline double _horner(cnp.float64_t[:, ::1] c, Py_ssize_t terms,
                           Py_ssize_t d, double tau) nogil:
    cdef double out = 0.0
    cdef Py_ssize_t j
    for j in range(terms - 1, -1, -1):
        out = out * tau + c[j, d]
    return out


def rk4_linear_state(double lam, y0, double tau0, double tau1, long n):
    """Classical RK4 for y' = lam * y / sqrt(1 + tau^2)."""
    cdef cnp.float64_t[::1] y = np.array(y0, dtype=np.float64)
    cdef Py_ssize_t dim = y.shape[0]
    cdef double h = (tau1 - tau0) / n
    cdef double a, p, q, r, k1, k2, k3, k4, growth
    cdef Py_ssize_t i, d

    for i in range(n):
        a = tau0 + i * h
        p = lam / sqrt(1.0 + a * a)
        q = lam / sqrt(1.0 + (a + 0.5 * h) * (a + 0.5 * h))
        r = lam / sqrt(1.0 + (a + h) * (a + h))
        k1 = p
        k2 = q * (1.0 + 0.5 * h * k1)
        k3 = q * (1.0 + 0.5 * h * k2)
        k4 = r * (1.0 + h * k3)
        growth = 1.0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for d in range(dim):
            y[d] = y[d] * growth
    return np.asarray(y)
