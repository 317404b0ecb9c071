"""Variance-preserving noise schedules and the NSR time reparametrization.

A schedule fixes the pair (alpha_t, sigma_t) with alpha_t^2 + sigma_t^2 = 1.
Everything downstream works in the noise-to-signal ratio

    NSR(t) = sigma_t / alpha_t,

which is strictly increasing in t, so it has an exact inverse rNSR. Both
directions are closed forms here; no root finding is involved.

Two schedule families are supported:

* ``linear``:  log alpha_t = -(beta1 - beta0) t^2 / 4 - beta0 t / 2
* ``cosine``:  log alpha_t = log cos(pi/2 * (t+s)/(1+s)) - log cos(pi/2 * s/(1+s))

with the customary defaults beta0=0.1, beta1=20 (solved on [eps, 1]) and
s=0.008 (solved on [eps, 0.9946]).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["DomainError", "NoiseSchedule"]

LINEAR_T_MAX = 1.0
COSINE_T_MAX = 0.9946


class DomainError(ValueError):
    """Argument outside the schedule's valid time or NSR range."""


@dataclass(frozen=True)
class NoiseSchedule:
    """Immutable description of a VP noise schedule.

    All methods are pure functions of (self, argument) and safe to call
    from any number of threads.
    """

    kind: str  # "linear" | "cosine"
    beta0: float = 0.1
    beta1: float = 20.0
    s_offset: float = 0.008
    t_max: float = LINEAR_T_MAX

    def __post_init__(self):
        if self.kind not in ("linear", "cosine"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "linear" and not self.beta1 > self.beta0 > 0.0:
            raise ValueError("linear schedule requires beta1 > beta0 > 0")
        if self.kind == "cosine" and not 0.0 < self.s_offset < 1.0:
            raise ValueError("cosine schedule requires 0 < s < 1")
        if not 0.0 < self.t_max:
            raise ValueError("t_max must be positive")

    @classmethod
    def linear(cls, beta0: float = 0.1, beta1: float = 20.0,
               t_max: float = LINEAR_T_MAX) -> "NoiseSchedule":
        return cls(kind="linear", beta0=beta0, beta1=beta1, t_max=t_max)

    @classmethod
    def cosine(cls, s: float = 0.008, t_max: float = COSINE_T_MAX) -> "NoiseSchedule":
        return cls(kind="cosine", s_offset=s, t_max=t_max)

    # -- closed forms -------------------------------------------------

    def _check_time(self, t: float) -> float:
        t = float(t)
        # tolerate endpoint round-off from trajectory arithmetic
        tol = 1e-12 * max(self.t_max, 1.0)
        if t < -tol or t > self.t_max + tol:
            raise DomainError(
                f"t={t!r} outside [0, {self.t_max}] for {self.kind} schedule")
        return min(max(t, 0.0), self.t_max)

    def log_alpha(self, t: float) -> float:
        """log alpha_t for t in [0, t_max]."""
        t = self._check_time(t)
        if self.kind == "linear":
            return -(self.beta1 - self.beta0) / 4.0 * t * t - self.beta0 / 2.0 * t
        s = self.s_offset
        return (math.log(math.cos(math.pi / 2.0 * (t + s) / (1.0 + s)))
                - self._log_cos0())

    def _log_cos0(self) -> float:
        s = self.s_offset
        return math.log(math.cos(math.pi / 2.0 * s / (1.0 + s)))

    def alpha(self, t: float) -> float:
        return math.exp(self.log_alpha(t))

    def sigma(self, t: float) -> float:
        # -expm1(2 log a) = 1 - a^2, accurate when sigma is tiny
        return math.sqrt(-math.expm1(2.0 * self.log_alpha(t)))

    def nsr(self, t: float) -> float:
        """Noise-to-signal ratio sigma_t / alpha_t; NSR(0) = 0 exactly."""
        la = self.log_alpha(t)
        return math.sqrt(math.expm1(-2.0 * la))

    def nsr_max(self) -> float:
        return self.nsr(self.t_max)

    def rnsr(self, tau: float) -> float:
        """Exact inverse of :meth:`nsr`: the unique t with NSR(t) = tau.

        Raises DomainError for tau < 0 or tau beyond NSR(t_max).
        """
        tau = float(tau)
        if tau < 0.0:
            raise DomainError(f"tau={tau!r} is negative")
        hi = self.nsr_max()
        if tau > hi * (1.0 + 1e-12):
            raise DomainError(f"tau={tau!r} exceeds NSR(t_max)={hi!r}")
        tau = min(tau, hi)
        if self.kind == "linear":
            # denominator form: no cancellation as tau -> 0
            ell = math.log1p(tau * tau)
            den = math.sqrt(self.beta0 ** 2
                            + 2.0 * (self.beta1 - self.beta0) * ell) + self.beta0
            return 2.0 * ell / den
        s = self.s_offset
        varphi = -0.5 * math.log1p(tau * tau)
        arg = math.exp(varphi + self._log_cos0())
        # arccos argument clamped; round-off can push it past 1 at tau ~ 0
        arg = min(1.0, max(-1.0, arg))
        return 2.0 * (1.0 + s) / math.pi * math.acos(arg) - s

    def drift_diffusion(self, t: float) -> tuple[float, float]:
        """Analytic (f, g^2): f = d log alpha / dt and
        g^2 = d sigma^2/dt - 2 f sigma^2. No numerical differentiation."""
        t = self._check_time(t)
        if self.kind == "linear":
            f = -(self.beta1 - self.beta0) / 2.0 * t - self.beta0 / 2.0
        else:
            s = self.s_offset
            f = (-math.pi / (2.0 * (1.0 + s))
                 * math.tan(math.pi / 2.0 * (t + s) / (1.0 + s)))
        alpha_sq = math.exp(2.0 * self.log_alpha(t))
        sigma_sq = 1.0 - alpha_sq
        dsigma_sq = -2.0 * alpha_sq * f
        g_sq = dsigma_sq - 2.0 * f * sigma_sq
        return f, g_sq
