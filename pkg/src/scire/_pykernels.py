"""Pure-Python RK4 reference kernels for the synthetic model families.

Drop-in fallback for the compiled extension (same functions, same
classical RK4 discretization); :mod:`scire.kernels` picks whichever is
importable. The two families that matter are

* ``rk4_poly``: y'(tau) = P(tau), a state-free polynomial integrand
  (covers the constant and taupoly models), and
* ``rk4_linear_state``: y'(tau) = lam * y / sqrt(1 + tau^2), the
  linear-state model under a variance-preserving schedule, where
  alpha(rNSR(tau)) = 1 / sqrt(1 + tau^2).

Both integrate a fixed signed step h = (tau1 - tau0) / n.
"""
from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def rk4_poly(coeffs: np.ndarray, y0: np.ndarray, tau0: float, tau1: float,
             n: int) -> np.ndarray:
    """Classical RK4 for y' = P(tau); k2 = k3, so each step is Simpson.

    The increments are accumulated with math.fsum: over 1e5 substeps a
    running float64 total would lose ~1e-12 relative.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    y0 = np.asarray(y0, dtype=float)
    h = (tau1 - tau0) / n
    a = tau0 + h * np.arange(n)

    def poly(ts):
        out = np.zeros((len(ts), coeffs.shape[1]))
        for row in coeffs[::-1]:
            out = out * ts[:, None] + row
        return out

    k1 = poly(a)
    k2 = poly(a + 0.5 * h)
    k4 = poly(a + h)
    dy = (h / 6.0) * (k1 + 4.0 * k2 + k4)
    return np.array([math.fsum(dy[:, d]) + y0[d]
                     for d in range(dy.shape[1])])


def rk4_linear_state(lam: float, y0: np.ndarray, tau0: float, tau1: float,
                     n: int) -> np.ndarray:
    """Classical RK4 for y' = lam * y / sqrt(1 + tau^2).

    The ODE is linear in y, so each step multiplies y by a factor that
    depends only on tau; the factors are computed vectorized and
    accumulated in step order.
    """
    y0 = np.asarray(y0, dtype=float)
    h = (tau1 - tau0) / n
    a = tau0 + h * np.arange(n)
    p = lam / np.sqrt(1.0 + a * a)
    q = lam / np.sqrt(1.0 + (a + 0.5 * h) ** 2)
    r = lam / np.sqrt(1.0 + (a + h) ** 2)
    k1 = p
    k2 = q * (1.0 + 0.5 * h * k1)
    k3 = q * (1.0 + 0.5 * h * k2)
    k4 = r * (1.0 + h * k3)
    growth = 1.0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y0 * np.cumprod(growth)[-1]
