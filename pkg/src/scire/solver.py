"""Sampling steppers and the trajectory-driven sampling loop.

All steppers advance the state from t_from to t_to with t_to < t_from by
working in the NSR variable tau = NSR(t). The signed gap

    h = NSR(t_to) - NSR(t_from)

is negative throughout a sampling run; no formula takes its absolute
value. Each stepper consumes a fixed number of model evaluations:

    ddim    1     one value, exact for constant integrands
    scire2  2     adds a rescaled difference over an intermediate point
    scire3  3     two intermediate points at fractions r1 < r2 of h

``agile`` composes 3-, 2- and 1-evaluation steps so the total evaluation
count hits an exact budget.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import EpsModel
from .rde import Phi1Mode, phi, rde_diff
from .schedule import NoiseSchedule
from .trajectory import TrajectorySpec, build_trajectory

__all__ = [
    "SolverError",
    "SolverConfig",
    "StepRecord",
    "SampleResult",
    "AgilePlan",
    "ddim_step",
    "scire2_step",
    "scire3_step",
    "agile_plan",
    "sample",
]

METHODS = ("ddim", "scire2", "scire3", "agile")


class SolverError(RuntimeError):
    """A sampling step failed; ``step_index`` locates it."""

    def __init__(self, step_index: int, message: str):
        super().__init__(f"step {step_index}: {message}")
        self.step_index = step_index


@dataclass(frozen=True)
class SolverConfig:
    method: str
    trajectory: TrajectorySpec
    phi1: Phi1Mode = Phi1Mode.finite(3)
    r1: float | None = None   # default 1/2 for scire2, 1/3 for scire3
    r2: float = 2.0 / 3.0     # scire3 only
    nfe_budget: int = 0       # agile only

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        r1 = self.resolved_r1()
        if not 0.0 < r1 < 1.0:
            raise ValueError(f"r1={r1} must lie in (0, 1)")
        if self.method in ("scire3", "agile") and not r1 < self.r2 < 1.0:
            raise ValueError(f"scire3 requires 0 < r1 < r2 < 1, "
                             f"got r1={r1}, r2={self.r2}")

    def resolved_r1(self) -> float:
        if self.r1 is not None:
            return self.r1
        return 1.0 / 3.0 if self.method in ("scire3", "agile") else 0.5


@dataclass(frozen=True)
class StepRecord:
    index: int
    kind: str          # stepper used for this segment
    t_from: float
    t_to: float
    h: float           # signed NSR gap
    s1: float | None   # intermediate times, when the stepper has them
    s2: float | None
    step_norm: float   # max-norm of the state change


@dataclass(frozen=True)
class SampleResult:
    x_final: np.ndarray
    nfe: int
    trace: tuple[StepRecord, ...]


@dataclass(frozen=True)
class AgilePlan:
    steps: tuple[str, ...]  # "step3" | "step2" | "step1"
    total_nfe: int


def ddim_step(x, t_from: float, t_to: float, model: EpsModel,
              schedule: NoiseSchedule) -> np.ndarray:
    """One-evaluation step: rescale plus h times the value at t_from."""
    x = np.asarray(x, dtype=float)
    a_from = schedule.alpha(t_from)
    a_to = schedule.alpha(t_to)
    h = schedule.nsr(t_to) - schedule.nsr(t_from)
    return a_to / a_from * x + a_to * h * model.eval(x, t_from)


def scire2_step(x, t_from: float, t_to: float, model: EpsModel,
                schedule: NoiseSchedule, r1: float = 0.5,
                phi1: Phi1Mode = Phi1Mode.finite(3)) -> np.ndarray:
    """Two-evaluation step with one intermediate point at fraction r1 of h."""
    x = np.asarray(x, dtype=float)
    tau_from = schedule.nsr(t_from)
    h = schedule.nsr(t_to) - tau_from
    s = schedule.rnsr(tau_from + r1 * h)
    a_from = schedule.alpha(t_from)
    a_s = schedule.alpha(s)
    a_to = schedule.alpha(t_to)

    eps_from = model.eval(x, t_from)
    x_s = a_s / a_from * x + a_s * (r1 * h) * eps_from
    eps_s = model.eval(x_s, s)
    d1 = rde_diff(eps_s, eps_from, r1 * h, phi1, tau_scale=tau_from)
    return a_to / a_from * x + a_to * h * eps_from + a_to * (h * h / 2.0) * d1


def scire3_step(x, t_from: float, t_to: float, model: EpsModel,
                schedule: NoiseSchedule, r1: float = 1.0 / 3.0,
                r2: float = 2.0 / 3.0,
                phi1: Phi1Mode = Phi1Mode.finite(3)) -> np.ndarray:
    """Three-evaluation step with intermediate points at r1 and r2 of h."""
    x = np.asarray(x, dtype=float)
    tau_from = schedule.nsr(t_from)
    h = schedule.nsr(t_to) - tau_from
    s1 = schedule.rnsr(tau_from + r1 * h)
    s2 = schedule.rnsr(tau_from + r2 * h)
    a_from = schedule.alpha(t_from)
    a_s1 = schedule.alpha(s1)
    a_s2 = schedule.alpha(s2)
    a_to = schedule.alpha(t_to)
    p1 = phi(1, phi1)

    eps_from = model.eval(x, t_from)
    x_s1 = a_s1 / a_from * x + a_s1 * (r1 * h) * eps_from
    eps_s1 = model.eval(x_s1, s1)
    x_s2 = (a_s2 / a_from * x + a_s2 * (r2 * h) * eps_from
            + a_s2 * (h / p1) * (eps_s1 - eps_from))
    eps_s2 = model.eval(x_s2, s2)
    d2 = rde_diff(eps_s2, eps_from, r2 * h, phi1, tau_scale=tau_from)
    return a_to / a_from * x + a_to * h * eps_from + a_to * (h * h / 2.0) * d2


def agile_plan(nfe_budget: int) -> AgilePlan:
    """Split a budget N >= 3 into 3/2/1-evaluation steps summing to N.

    With M = floor(N/3) + 1 segments and R = N mod 3:
      R=0: (M-2) three-eval steps, one two-eval, one one-eval
      R=1: (M-1) three-eval steps, one one-eval
      R=2: (M-1) three-eval steps, one two-eval
    """
    n = int(nfe_budget)
    if n < 3:
        raise ValueError(f"agile budget must be >= 3, got {n}")
    m = n // 3 + 1
    r = n % 3
    if r == 0:
        steps = ("step3",) * (m - 2) + ("step2", "step1")
    elif r == 1:
        steps = ("step3",) * (m - 1) + ("step1",)
    else:
        steps = ("step3",) * (m - 1) + ("step2",)
    total = sum({"step3": 3, "step2": 2, "step1": 1}[s] for s in steps)
    assert total == n
    return AgilePlan(steps=steps, total_nfe=total)


_EVALS = {"ddim": 1, "scire2": 2, "scire3": 3,
          "step1": 1, "step2": 2, "step3": 3}


def sample(config: SolverConfig, model: EpsModel, schedule: NoiseSchedule,
           x_init) -> SampleResult:
    """Walk the trajectory from t_start down to t_end with the configured
    stepper and return the final state, the evaluation count, and a
    per-step trace. Step failures abort with the step index attached."""
    x = np.asarray(x_init, dtype=float)

    if config.method == "agile":
        plan = agile_plan(config.nfe_budget)
        spec = TrajectorySpec(kind=config.trajectory.kind,
                              n_steps=len(plan.steps),
                              t_start=config.trajectory.t_start,
                              t_end=config.trajectory.t_end,
                              k_param=config.trajectory.k_param)
        kinds = plan.steps
    else:
        spec = config.trajectory
        kinds = (config.method,) * spec.n_steps
    traj = build_trajectory(schedule, spec)

    r1 = config.resolved_r1()
    trace: list[StepRecord] = []
    nfe = 0
    for i, kind in enumerate(kinds):
        t_from = float(traj.times[i])
        t_to = float(traj.times[i + 1])
        try:
            x_new, s1, s2 = _one_step(kind, x, t_from, t_to, model, schedule,
                                      r1, config.r2, config.phi1)
        except Exception as exc:
            raise SolverError(i, str(exc)) from exc
        h = float(traj.nsr_values[i + 1] - traj.nsr_values[i])
        step_norm = float(np.max(np.abs(x_new - x))) if x_new.size else 0.0
        trace.append(StepRecord(index=i, kind=kind, t_from=t_from, t_to=t_to,
                                h=h, s1=s1, s2=s2, step_norm=step_norm))
        x = x_new
        nfe += _EVALS[kind]
    return SampleResult(x_final=x, nfe=nfe, trace=tuple(trace))


def _one_step(kind, x, t_from, t_to, model, schedule, r1, r2, phi1):
    # agile segments ("stepK") run their stepper with its own defaults
    tau_from = schedule.nsr(t_from)
    h = schedule.nsr(t_to) - tau_from
    if kind in ("ddim", "step1"):
        return ddim_step(x, t_from, t_to, model, schedule), None, None
    if kind in ("scire2", "step2"):
        rr = 0.5 if kind == "step2" else r1
        s = schedule.rnsr(tau_from + rr * h)
        return (scire2_step(x, t_from, t_to, model, schedule, rr, phi1),
                s, None)
    rr1, rr2 = (1.0 / 3.0, 2.0 / 3.0) if kind == "step3" else (r1, r2)
    s1 = schedule.rnsr(tau_from + rr1 * h)
    s2 = schedule.rnsr(tau_from + rr2 * h)
    return (scire3_step(x, t_from, t_to, model, schedule, rr1, rr2, phi1),
            s1, s2)
