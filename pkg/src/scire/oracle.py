"""Reference solutions and convergence-order measurement.

The reference integrates the rescaled state y = x / alpha in the NSR
variable, where the exact dynamics are y'(tau) = eps(alpha * y, rNSR(tau)).
That integrand is smooth in tau, while t-space carries a stiff 1/alpha
factor, so a classical fixed-step RK4 in tau converges fast enough to act
as ground truth for the samplers under test.

Synthetic model families run through the selected kernel backend
(:mod:`scire.kernels`); anything else falls back to a generic loop over
``model.eval``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .models import SyntheticEpsModel, SyntheticModel
from .schedule import NoiseSchedule

__all__ = ["ReferenceNotConverged", "ReferenceConfig", "reference_solve",
           "relative_error", "empirical_order"]


class ReferenceNotConverged(RuntimeError):
    """Doubling the substeps moved the reference by more than the gate."""


@dataclass(frozen=True)
class ReferenceConfig:
    substeps: int = 100_000
    richardson_check: bool = True

    def __post_init__(self):
        if self.substeps < 1000:
            raise ValueError(f"substeps={self.substeps} must be >= 1000")


def relative_error(x, ref) -> float:
    """Max-norm difference relative to max(max-norm of ref, 1)."""
    x = np.asarray(x, dtype=float)
    ref = np.asarray(ref, dtype=float)
    scale = max(float(np.max(np.abs(ref))), 1.0)
    return float(np.max(np.abs(x - ref))) / scale


def reference_solve(model, schedule: NoiseSchedule, x_init, t_start: float,
                    t_end: float, cfg: ReferenceConfig = ReferenceConfig()
                    ) -> np.ndarray:
    """Dense fixed-step solution of the sampling dynamics.

    ``model`` is either a synthetic description (kernel fast path) or any
    object with ``eval(x, t)``. With ``richardson_check`` the solve is
    repeated at twice the substeps and must agree to 1e-10 relative,
    otherwise :class:`ReferenceNotConverged` is raised.
    """
    x_init = np.atleast_1d(np.asarray(x_init, dtype=float))
    coarse = _solve(model, schedule, x_init, t_start, t_end, cfg.substeps)
    if cfg.richardson_check:
        fine = _solve(model, schedule, x_init, t_start, t_end,
                      2 * cfg.substeps)
        drift = relative_error(coarse, fine)
        if drift > 1e-10:
            raise ReferenceNotConverged(
                f"reference not converged: doubling substeps moved the "
                f"result by {drift:.3e} (> 1e-10)")
    return coarse


def _solve(model, schedule, x_init, t_start, t_end, n):
    tau0 = schedule.nsr(t_start)
    tau1 = schedule.nsr(t_end)
    y0 = x_init / schedule.alpha(t_start)

    synth = _as_synthetic(model)
    if synth is not None:
        y1 = _solve_synthetic(synth, y0, tau0, tau1, n)
    else:
        y1 = _solve_generic(model, schedule, y0, tau0, tau1, n)
    return schedule.alpha(t_end) * y1


def _as_synthetic(model) -> SyntheticModel | None:
    if isinstance(model, SyntheticModel):
        return model
    if isinstance(model, SyntheticEpsModel):
        return model.model
    return None


def _solve_synthetic(synth, y0, tau0, tau1, n):
    if synth.family == "constant":
        coeffs = synth.c[None, :]
        return kernels.rk4_poly(coeffs, _match(y0, len(synth.c)), tau0, tau1, n)
    if synth.family == "taupoly":
        return kernels.rk4_poly(synth.coeffs, _match(y0, synth.coeffs.shape[1]),
                                tau0, tau1, n)
    return kernels.rk4_linear_state(synth.lam, y0, tau0, tau1, n)


def _match(y0, dim):
    y0 = np.atleast_1d(y0)
    if len(y0) != dim:
        raise ValueError(f"state dimension {len(y0)} does not match "
                         f"model dimension {dim}")
    return y0


def _solve_generic(model, schedule, y0, tau0, tau1, n):
    h = (tau1 - tau0) / n

    def f(tau, y):
        t = schedule.rnsr(tau)
        x = schedule.alpha(t) * y
        return np.asarray(model.eval(x, t), dtype=float)

    y = y0.copy()
    for i in range(n):
        a = tau0 + i * h
        k1 = f(a, y)
        k2 = f(a + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(a + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(a + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def empirical_order(step_counts, errors):
    """Least-squares slope of log(error) against log(1/N).

    Returns the string ``"exact"`` when any error is non-positive (the
    method hit round-off; a slope would be meaningless).
    """
    ns = [int(n) for n in step_counts]
    errs = [float(e) for e in errors]
    if len(ns) != len(errs):
        raise ValueError("step_counts and errors must have equal length")
    if len(ns) < 2:
        raise ValueError("need at least two points for a slope")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("step counts must be strictly increasing")
    if min(errs) <= 0.0:
        return "exact"
    log_inv_n = np.log([1.0 / n for n in ns])
    log_err = np.log(errs)
    slope, _ = np.polyfit(log_inv_n, log_err, 1)
    return float(slope)
