"""Samplers for diffusion ODEs in the noise-to-signal-ratio variable.

The state update between two times separates into an exact linear
rescaling plus an integral of the noise prediction over NSR(t); the
steppers here discretize only that integral. Includes closed-form VP
schedules with exact inverses, five time-grid families, rescaled
finite-difference derivative estimation, a dense RK4 reference oracle,
and a CLI for trajectory dumps, sampling traces and order studies.
"""
from .kernels import backend as kernel_backend
from .models import (DiscreteWrapMode, EpsModel, SyntheticEpsModel,
                     SyntheticModel, TabulatedLabelModel, convert_model,
                     eval_synthetic, guided_model, wrap_discrete)
from .oracle import (ReferenceConfig, ReferenceNotConverged, empirical_order,
                     reference_solve, relative_error)
from .rde import Phi1Mode, phi, phi_fraction, rde_diff
from .schedule import DomainError, NoiseSchedule
from .solver import (AgilePlan, SampleResult, SolverConfig, SolverError,
                     StepRecord, agile_plan, ddim_step, sample, scire2_step,
                     scire3_step)
from .trajectory import (TimeTrajectory, TrajectoryError, TrajectorySpec,
                         build_trajectory, validate_trajectory)

__version__ = "0.1.0"

__all__ = [
    "AgilePlan", "DiscreteWrapMode", "DomainError", "EpsModel",
    "NoiseSchedule", "Phi1Mode", "ReferenceConfig", "ReferenceNotConverged",
    "SampleResult", "SolverConfig", "SolverError", "StepRecord",
    "SyntheticEpsModel", "SyntheticModel", "TabulatedLabelModel",
    "TimeTrajectory", "TrajectoryError", "TrajectorySpec", "agile_plan",
    "build_trajectory", "convert_model", "ddim_step", "empirical_order",
    "eval_synthetic", "guided_model", "kernel_backend", "phi",
    "phi_fraction", "rde_diff", "reference_solve", "relative_error",
    "sample", "scire2_step", "scire3_step", "validate_trajectory",
    "wrap_discrete",
]
