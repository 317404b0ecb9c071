"""Discrete sampling time grids from t_start down to t_end.

Five families are supported. ``uniform`` and ``quadratic`` are grids in t
itself; the remaining three are uniform grids in a transform of NSR(t),
mapped back through the exact inverse rNSR:

* ``lognsr``   - uniform in log NSR(t)
* ``nsr``      - uniform in -log(NSR(t) + k * NSR(t_end)); larger k packs
                 points toward both ends
* ``sigmoid``  - uniform in sigmoid-warped -log NSR(t), controlled by k
                 (k = 0.5 is degenerate: the warp scale vanishes)

Canonical storage order is descending time [t_start ... t_end], so the NSR
values decrease along the grid and every sampling step has a negative NSR
increment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schedule import NoiseSchedule

__all__ = [
    "TrajectoryError",
    "TrajectorySpec",
    "TimeTrajectory",
    "build_trajectory",
    "validate_trajectory",
]

KINDS = ("uniform", "quadratic", "lognsr", "nsr", "sigmoid")

DEFAULT_K = {"nsr": 3.1, "sigmoid": 0.65}


class TrajectoryError(ValueError):
    """Invalid trajectory specification; ``field`` names the offender."""

    def __init__(self, field_name: str, message: str):
        super().__init__(message)
        self.field_name = field_name


@dataclass(frozen=True)
class TrajectorySpec:
    kind: str
    n_steps: int
    t_start: float
    t_end: float = 1e-3
    k_param: float | None = None

    def k(self) -> float:
        if self.k_param is not None:
            return self.k_param
        return DEFAULT_K.get(self.kind, 0.0)


@dataclass(frozen=True)
class TimeTrajectory:
    """Ordered times [t_N ... t_0] plus their NSR values (both descending)."""

    times: np.ndarray
    nsr_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", _frozen(self.times))
        object.__setattr__(self, "nsr_values", _frozen(self.nsr_values))

    def n_steps(self) -> int:
        return len(self.times) - 1


def _frozen(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a = a.copy()
    a.flags.writeable = False
    return a


def validate_spec(schedule: NoiseSchedule, spec: TrajectorySpec) -> None:
    if spec.kind not in KINDS:
        raise TrajectoryError("kind", f"kind={spec.kind!r} not one of {KINDS}")
    if spec.n_steps < 1:
        raise TrajectoryError("n_steps", f"n_steps={spec.n_steps} must be >= 1")
    if not spec.t_end > 0.0:
        raise TrajectoryError("t_end", f"t_end={spec.t_end} must be > 0")
    if not spec.t_end < spec.t_start:
        raise TrajectoryError(
            "t_end", f"t_end={spec.t_end} must be < t_start={spec.t_start}")
    if spec.t_start > schedule.t_max * (1.0 + 1e-12):
        raise TrajectoryError(
            "t_start",
            f"t_start={spec.t_start} exceeds schedule t_max={schedule.t_max}")
    if spec.kind == "sigmoid" and abs(spec.k() - 0.5) <= 1e-6:
        raise TrajectoryError(
            "k_param", f"k={spec.k()} degenerate for sigmoid trajectory "
                       "(warp scale would vanish)")
    if spec.kind == "nsr" and not spec.k() > 0.0:
        raise TrajectoryError(
            "k_param", f"k={spec.k()} must be > 0 for nsr trajectory")


def build_trajectory(schedule: NoiseSchedule, spec: TrajectorySpec) -> TimeTrajectory:
    """Build the descending time grid for ``spec``; endpoints are exact."""
    validate_spec(schedule, spec)
    n = spec.n_steps
    t_hi, t_lo = float(spec.t_start), float(spec.t_end)

    if spec.kind == "uniform":
        times = np.linspace(t_hi, t_lo, n + 1)
    elif spec.kind == "quadratic":
        # uniform in sqrt(t), then squared
        roots = np.linspace(math.sqrt(t_hi), math.sqrt(t_lo), n + 1)
        times = roots * roots
    elif spec.kind == "lognsr":
        grid = np.linspace(math.log(schedule.nsr(t_hi)),
                           math.log(schedule.nsr(t_lo)), n + 1)
        times = np.array([schedule.rnsr(math.exp(g)) for g in grid])
    elif spec.kind == "nsr":
        k = spec.k()
        tau_hi, tau_lo = schedule.nsr(t_hi), schedule.nsr(t_lo)
        trans_hi = -math.log(tau_hi + k * tau_lo)
        trans_lo = -math.log(tau_lo + k * tau_lo)
        trans = np.linspace(trans_hi, trans_lo, n + 1)
        times = np.array(
            [schedule.rnsr(math.exp(-tr) - k * tau_lo) for tr in trans])
    else:  # sigmoid
        k = spec.k()
        trans_hi = -math.log(schedule.nsr(t_hi))
        trans_lo = -math.log(schedule.nsr(t_lo))
        central = k * trans_hi + (1.0 - k) * trans_lo
        shift_hi = trans_hi - central
        shift_lo = trans_lo - central
        scale = shift_hi + shift_lo
        sig_hi = _sigmoid(shift_hi / scale)
        sig_lo = _sigmoid(shift_lo / scale)
        sig = np.linspace(sig_hi, sig_lo, n + 1)
        trans = scale * np.array([_logit(v) for v in sig]) + central
        times = np.array([schedule.rnsr(math.exp(-tr)) for tr in trans])

    times[0] = t_hi
    times[-1] = t_lo
    nsr_values = np.array([schedule.nsr(t) for t in times])
    return TimeTrajectory(times=times, nsr_values=nsr_values)


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def transform_values(schedule: NoiseSchedule, spec: TrajectorySpec,
                     traj: TimeTrajectory) -> np.ndarray | None:
    """Per-point transform recomputed from the built grid.

    Returns None for families without a transform (uniform, quadratic).
    The returned values are equally spaced by construction, which is what
    the CSV consumers check.
    """
    tau = traj.nsr_values
    if spec.kind == "lognsr":
        return np.log(tau)
    if spec.kind == "nsr":
        return -np.log(tau + spec.k() * schedule.nsr(spec.t_end))
    if spec.kind == "sigmoid":
        return -np.log(tau)
    return None


def validate_trajectory(schedule: NoiseSchedule, traj: TimeTrajectory) -> list[str]:
    """Check a trajectory against its structural invariants.

    Returns a list of human-readable violations; empty means ok.
    """
    out: list[str] = []
    times = np.asarray(traj.times, dtype=float)
    tau = np.asarray(traj.nsr_values, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        out.append("times must hold at least two points")
        return out
    if len(tau) != len(times):
        out.append(f"nsr_values length {len(tau)} != times length {len(times)}")
    for i in range(1, len(times)):
        if times[i] == times[i - 1]:
            out.append(f"non-strict ordering at index {i}")
        elif times[i] > times[i - 1]:
            out.append(f"times not decreasing at index {i}")
    for i, t in enumerate(times):
        if t < 0.0 or t > schedule.t_max * (1.0 + 1e-12):
            out.append(f"time outside schedule domain at index {i}")
    if len(tau) == len(times):
        for i in range(1, len(tau)):
            if not tau[i] < tau[i - 1]:
                out.append(f"nsr_values not strictly decreasing at index {i}")
        for i, (t, v) in enumerate(zip(times, tau)):
            if 0.0 <= t <= schedule.t_max * (1.0 + 1e-12):
                ref = schedule.nsr(t)
                if abs(v - ref) > 1e-9 * max(ref, 1.0):
                    out.append(f"nsr mismatch with schedule at index {i}")
    return out
