"""Noise-prediction model contract, analytic test models, and adapters.

Every model exposes ``eval(x, t) -> ndarray`` and a monotone ``eval_count``
so samplers can be audited against their declared evaluation budget.

The synthetic families have known exact solutions and exist purely for
verification:

* ``constant``:     eps(x, t) = c                      (c a D-vector)
* ``taupoly``:      eps(x, t) = sum_j c_j * NSR(t)^j   (c_j D-vectors)
* ``linear_state``: eps(x, t) = lam * x

Adapters wrap other prediction conventions (data / velocity / score),
discrete-label models, and classifier-guided sampling into the same
contract.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .schedule import DomainError, NoiseSchedule

__all__ = [
    "EpsModel",
    "SyntheticModel",
    "SyntheticEpsModel",
    "eval_synthetic",
    "TabulatedLabelModel",
    "DiscreteWrapMode",
    "wrap_discrete",
    "convert_model",
    "guided_model",
]

MAX_TAUPOLY_DEGREE = 6


class EpsModel:
    """Base evaluation contract with an atomic call counter.

    Subclasses implement ``_eval``; callers go through ``eval`` which
    bumps ``eval_count`` by exactly one per call.
    """

    def __init__(self):
        self._count = 0
        self._count_lock = threading.Lock()

    @property
    def eval_count(self) -> int:
        return self._count

    def eval(self, x, t: float) -> np.ndarray:
        with self._count_lock:
            self._count += 1
        return self._eval(np.asarray(x, dtype=float), float(t))

    def _eval(self, x: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError


class FuncEpsModel(EpsModel):
    """Adapter around a plain ``f(x, t) -> ndarray`` callable."""

    def __init__(self, fn: Callable[[np.ndarray, float], np.ndarray]):
        super().__init__()
        self._fn = fn

    def _eval(self, x, t):
        return np.asarray(self._fn(x, t), dtype=float)


@dataclass(frozen=True)
class SyntheticModel:
    """Parametric description of an analytic noise model."""

    family: str  # "constant" | "taupoly" | "linear_state"
    c: np.ndarray | None = None       # constant value, shape (D,)
    coeffs: np.ndarray | None = None  # taupoly coefficients, shape (deg+1, D)
    lam: float = 0.0                  # linear_state gain

    def __post_init__(self):
        if self.family not in ("constant", "taupoly", "linear_state"):
            raise ValueError(f"unknown synthetic family {self.family!r}")
        if self.family == "constant":
            c = np.atleast_1d(np.asarray(self.c, dtype=float))
            if not np.all(np.isfinite(c)):
                raise ValueError("constant model parameters must be finite")
            object.__setattr__(self, "c", c)
        elif self.family == "taupoly":
            coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
            if coeffs.shape[0] - 1 > MAX_TAUPOLY_DEGREE:
                raise ValueError(
                    f"taupoly degree {coeffs.shape[0] - 1} exceeds "
                    f"{MAX_TAUPOLY_DEGREE}")
            if not np.all(np.isfinite(coeffs)):
                raise ValueError("taupoly coefficients must be finite")
            object.__setattr__(self, "coeffs", coeffs)
        elif not math.isfinite(self.lam):
            raise ValueError("linear_state gain must be finite")

    @classmethod
    def constant(cls, c) -> "SyntheticModel":
        return cls(family="constant", c=np.asarray(c, dtype=float))

    @classmethod
    def tau_poly(cls, coeffs, dim: int | None = None) -> "SyntheticModel":
        """``coeffs`` is a sequence of per-degree vectors; scalars are
        broadcast to ``dim`` components when given."""
        arr = np.asarray(coeffs, dtype=float)
        if arr.ndim == 1:
            if dim is None:
                dim = 1
            arr = np.repeat(arr[:, None], dim, axis=1)
        return cls(family="taupoly", coeffs=arr)

    @classmethod
    def linear_state(cls, lam: float) -> "SyntheticModel":
        return cls(family="linear_state", lam=float(lam))

    def dim(self) -> int | None:
        if self.family == "constant":
            return len(self.c)
        if self.family == "taupoly":
            return self.coeffs.shape[1]
        return None  # linear_state adapts to the state dimension


def eval_synthetic(model: SyntheticModel, schedule: NoiseSchedule,
                   x, t: float) -> np.ndarray:
    """Pure evaluation of a synthetic model (no counting)."""
    x = np.asarray(x, dtype=float)
    if model.family == "constant":
        return model.c.copy()
    if model.family == "taupoly":
        tau = schedule.nsr(t)
        out = np.zeros(model.coeffs.shape[1])
        for row in model.coeffs[::-1]:  # Horner in tau
            out = out * tau + row
        return out
    return model.lam * x


class SyntheticEpsModel(EpsModel):
    """Counting wrapper binding a synthetic model to a schedule."""

    def __init__(self, model: SyntheticModel, schedule: NoiseSchedule):
        super().__init__()
        self.model = model
        self.schedule = schedule

    def _eval(self, x, t):
        return eval_synthetic(self.model, self.schedule, x, t)


# -- discrete-label wrapping ------------------------------------------


class TabulatedLabelModel:
    """Label-indexed table with linear interpolation between table nodes.

    Mimics a model trained at N = n_labels uniform times t_n = n*T/N
    (n = 1..N) whose inputs are the scaled labels 1000*(n-1)/N, so node i
    of the table holds the value at time (i+1)*T/N. For the canonical
    n_labels = 1000 the nodes sit exactly on the integer labels. Entries
    come from a state-free synthetic model, so they depend on the label
    only.
    """

    def __init__(self, synthetic: SyntheticModel, schedule: NoiseSchedule,
                 n_labels: int = 1000):
        if n_labels < 2:
            raise ValueError(f"n_labels={n_labels} must be >= 2")
        if synthetic.family == "linear_state":
            raise ValueError("tabulated base requires a state-free family")
        self.n_labels = n_labels
        self.label_max = 1000.0 * (n_labels - 1) / n_labels
        self._step = 1000.0 / n_labels
        ts = [(i + 1) * schedule.t_max / n_labels for i in range(n_labels)]
        self.table = np.stack(
            [eval_synthetic(synthetic, schedule, np.zeros(1), t) for t in ts])

    def __call__(self, x, label: float) -> np.ndarray:
        if label < -1e-9 or label > self.label_max + 1e-9:
            raise DomainError(
                f"label={label!r} outside [0, {self.label_max}]")
        pos = min(max(label, 0.0), self.label_max) / self._step
        lo = int(math.floor(pos))
        hi = min(lo + 1, self.n_labels - 1)
        w = pos - lo
        return (1.0 - w) * self.table[lo] + w * self.table[hi]


@dataclass(frozen=True)
class DiscreteWrapMode:
    """Label scaling variant: 1 shifts by one grid cell, 2 rescales."""

    variant: int  # 1 | 2
    n_labels: int = 1000

    def __post_init__(self):
        if self.variant not in (1, 2):
            raise ValueError(f"variant must be 1 or 2, got {self.variant}")
        if self.n_labels < 2:
            raise ValueError(f"n_labels={self.n_labels} must be >= 2")


class _DiscreteWrapped(EpsModel):
    def __init__(self, base, mode: DiscreteWrapMode, schedule: NoiseSchedule):
        super().__init__()
        self.base = base
        self.mode = mode
        self.schedule = schedule

    def label_for(self, t: float) -> float:
        T = self.schedule.t_max
        n = self.mode.n_labels
        if self.mode.variant == 1:
            return 1000.0 * max(t - T / n, 0.0)
        return 1000.0 * (n - 1) * t / (n * T)

    def _eval(self, x, t):
        return np.asarray(self.base(x, self.label_for(t)), dtype=float)


def wrap_discrete(base, mode: DiscreteWrapMode,
                  schedule: NoiseSchedule) -> EpsModel:
    """Continuous-time model over a label-indexed base.

    ``base(x, label)`` must accept real labels in [0, 1000*(N-1)/N] and
    apply its own interpolation rule; out-of-range mapped labels raise
    through the base.
    """
    return _DiscreteWrapped(base, mode, schedule)


class _Converted(EpsModel):
    def __init__(self, fn):
        super().__init__()
        self._fn = fn

    def _eval(self, x, t):
        return self._fn(x, t)


def convert_model(src_kind: str, src, schedule: NoiseSchedule) -> EpsModel:
    """Adapt a data / velocity / score / noise predictor to noise prediction.

    ``src`` is a plain callable (x, t) -> D-vector in the source
    convention. The conversions use the VP identities:

        score s:     eps = -sigma_t * s(x, t)
        data x0:     eps = (x - alpha_t * x0(x, t)) / sigma_t
        velocity v:  eps = alpha_t * v(x, t) + sigma_t * x
    """
    kind = src_kind.strip().lower()
    if kind == "noise":
        fn = lambda x, t: np.asarray(src(x, t), dtype=float)
    elif kind == "score":
        fn = lambda x, t: -schedule.sigma(t) * np.asarray(src(x, t), dtype=float)
    elif kind == "data":
        def fn(x, t):
            sig = schedule.sigma(t)
            if sig == 0.0:
                raise ZeroDivisionError(
                    "data-prediction conversion is singular at sigma_t = 0")
            return (x - schedule.alpha(t) * np.asarray(src(x, t), dtype=float)) / sig
    elif kind == "velocity":
        fn = lambda x, t: (schedule.alpha(t) * np.asarray(src(x, t), dtype=float)
                           + schedule.sigma(t) * x)
    else:
        raise ValueError(
            f"unknown source kind {src_kind!r} "
            "(expected noise/data/velocity/score)")
    return _Converted(fn)


class _Guided(EpsModel):
    def __init__(self, base: EpsModel, grad_log_p, scale: float,
                 schedule: NoiseSchedule):
        super().__init__()
        self.base = base
        self.grad_log_p = grad_log_p
        self.scale = float(scale)
        self.schedule = schedule

    def _eval(self, x, t):
        out = self.base.eval(x, t)
        if self.scale == 0.0:
            return out
        grad = np.asarray(self.grad_log_p(x, t), dtype=float)
        return out - self.scale * self.schedule.sigma(t) * grad


def guided_model(base: EpsModel, grad_log_p, guidance_scale: float,
                 schedule: NoiseSchedule) -> EpsModel:
    """Classifier-guided variant: eps - scale * sigma_t * grad_log_p(x, t).

    Each call consumes exactly one base evaluation.
    """
    return _Guided(base, grad_log_p, guidance_scale, schedule)
