"""Rescaled-difference derivative estimation for the solver steppers.

The first-derivative estimate consumed by the steppers is a forward
difference rescaled by 1/phi_1:

    d eps / d tau  ~=  (eps_far - eps_near) / (phi_1 * h)

where phi_1 depends on the estimation mode:

* ``finite(m)``: phi_1(m) = sum_{k=1}^{m} (-1)^(k-1) / k!   (m >= 3)
* ``limit``:     phi_1 = (e - 1) / e, the m -> infinity limit
* ``fde``:       phi_1 = 1, the plain finite difference

The companion coefficients phi_2, phi_3 enter only the full estimator
(kept here as a verification utility, see
:func:`recursive_first_derivative`); the steppers truncate them away.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

__all__ = ["Phi1Mode", "phi", "phi_fraction", "rde_diff",
           "recursive_first_derivative"]

PHI1_LIMIT = (math.e - 1.0) / math.e


@dataclass(frozen=True)
class Phi1Mode:
    """Derivative-rescaling mode: finite(m), limit, or fde."""

    kind: str  # "finite" | "limit" | "fde"
    m: int = 3

    def __post_init__(self):
        if self.kind not in ("finite", "limit", "fde"):
            raise ValueError(f"unknown phi mode {self.kind!r}")
        if self.kind == "finite" and self.m < 3:
            raise ValueError(f"finite mode requires m >= 3, got m={self.m}")

    @classmethod
    def finite(cls, m: int = 3) -> "Phi1Mode":
        return cls(kind="finite", m=m)

    @classmethod
    def limit(cls) -> "Phi1Mode":
        return cls(kind="limit")

    @classmethod
    def fde(cls) -> "Phi1Mode":
        return cls(kind="fde")

    @classmethod
    def from_config(cls, name: str) -> "Phi1Mode":
        """Config-key spelling: m3 (or m4, ...), limit, fde."""
        name = name.strip().lower()
        if name == "limit":
            return cls.limit()
        if name == "fde":
            return cls.fde()
        if name.startswith("m") and name[1:].isdigit():
            return cls.finite(int(name[1:]))
        raise ValueError(f"unknown phi1 mode {name!r} (expected m3/limit/fde)")

    def phi1(self) -> float:
        return phi(1, self)


def phi_fraction(j: int, m: int) -> Fraction:
    """Exact partial sum phi_j(m) as a rational number.

    phi_1 = sum_{k=1}^m (-1)^(k-1)/k!,  phi_2 = sum_{k=2}^m (-1)^k/k!,
    phi_3 = sum_{k=3}^m (-1)^(k+1)/k!.
    """
    if j not in (1, 2, 3):
        raise ValueError(f"j must be 1, 2 or 3, got {j}")
    total = Fraction(0)
    for k in range(j, m + 1):
        sign = (-1) ** (k - j)
        total += Fraction(sign, math.factorial(k))
    return total


def phi(j: int, mode: Phi1Mode) -> float:
    """Coefficient phi_j for the given mode.

    ``limit`` and ``fde`` are defined for j=1 only; the steppers never
    need their higher coefficients.
    """
    if j not in (1, 2, 3):
        raise ValueError(f"j must be 1, 2 or 3, got {j}")
    if mode.kind == "finite":
        return float(phi_fraction(j, mode.m))
    if j != 1:
        raise ValueError(f"phi_{j} is undefined in {mode.kind!r} mode")
    return 1.0 if mode.kind == "fde" else PHI1_LIMIT


def rde_diff(eps_far, eps_near, h: float, mode: Phi1Mode,
             tau_scale: float = 1.0):
    """Rescaled difference (eps_far - eps_near) / (phi_1 * h).

    ``h`` is the signed NSR gap from the near point to the far one; the
    estimate is linear in both vector arguments and scales as 1/h.
    Raises on a degenerate gap (|h| below round-off at ``tau_scale``).
    """
    if abs(h) < 1e-15 * max(abs(tau_scale), 1.0):
        raise ZeroDivisionError(f"degenerate NSR step h={h!r}")
    eps_far = np.asarray(eps_far, dtype=float)
    eps_near = np.asarray(eps_near, dtype=float)
    return (eps_far - eps_near) / (phi(1, mode) * h)


def recursive_first_derivative(
        eps: Callable[[float], float],
        d1: Callable[[float], float],
        d2: Callable[[float], float],
        tau_near: float, h: float, m: int = 3) -> float:
    """Full first-derivative estimator with its correction terms.

    Estimates eps'(tau_near) from the value gap over [tau_near,
    tau_near + h] plus the first and second derivatives at the far end:

        1/phi_1 * (eps(far) - eps(near)) / h
        - phi_2/phi_1 * eps'(far)  -  phi_3*h/phi_1 * eps''(far)

    Verification utility for scalar analytic functions only; the solver
    path uses the truncated :func:`rde_diff`.
    """
    p1 = float(phi_fraction(1, m))
    p2 = float(phi_fraction(2, m))
    p3 = float(phi_fraction(3, m))
    tau_far = tau_near + h
    value_term = (eps(tau_far) - eps(tau_near)) / (p1 * h)
    return value_term - p2 / p1 * d1(tau_far) - p3 * h / p1 * d2(tau_far)
