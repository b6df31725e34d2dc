"""Pure Gaussian wave packets and the maps that act on them.

A state is stored as four real parameters ``(a, b_mom, delta, eps)`` of

    psi(x) = (pi*delta)^(-1/4) exp(-(1 - i*eps)/(2*delta) (x - a)^2 + i*b_mom*x/hbar)

up to a global phase, which no observable computed here depends on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Constants",
    "GaussianState",
    "MeterConfig",
    "NumericRangeError",
    "collapse_update",
    "contraction_factor",
    "expectation_abs_x",
    "free_evolve",
    "outcome_pdf",
    "outcome_density",
    "sample_outcome",
    "uncertainty_defect",
]


class NumericRangeError(ArithmeticError):
    """Raised when a state parameter leaves the finite double range."""


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be positive and finite, got {self.mass}")


NATURAL = Constants()


@dataclass(frozen=True)
class GaussianState:
    """Four-parameter pure Gaussian state.

    Attributes
    ----------
    a : float
        Mean position.
    b_mom : float
        Mean momentum.
    delta : float
        Squared-width parameter; the position variance is ``delta / 2``.
    eps : float
        Chirp parameter; the position-momentum covariance is ``hbar * eps / 2``.
    """

    a: float = 0.0
    b_mom: float = 0.0
    delta: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        values = (self.a, self.b_mom, self.delta, self.eps)
        if not all(math.isfinite(v) for v in values):
            raise NumericRangeError(f"non-finite Gaussian parameters {values}")
        if not self.delta > 0:
            raise NumericRangeError(f"delta must be positive, got {self.delta}")

    @classmethod
    def from_width(cls, dx: float, a: float = 0.0, b_mom: float = 0.0, eps: float = 0.0) -> GaussianState:
        """State with position uncertainty ``dx``, i.e. ``delta = 2 dx**2``."""
        return cls(a=a, b_mom=b_mom, delta=2.0 * dx * dx, eps=eps)

    def var_x(self) -> float:
        return 0.5 * self.delta

    def var_p(self, c: Constants = NATURAL) -> float:
        return c.hbar**2 * (1.0 + self.eps**2) / (2.0 * self.delta)

    def cov_xp(self, c: Constants = NATURAL) -> float:
        return 0.5 * c.hbar * self.eps

    def moments(self, c: Constants = NATURAL) -> tuple[float, float, float, float, float]:
        """``(mean_x, mean_p, var_x, var_p, cov_xp)``."""
        return self.a, self.b_mom, self.var_x(), self.var_p(c), self.cov_xp(c)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.a, self.b_mom, self.delta, self.eps


@dataclass(frozen=True)
class MeterConfig:
    """Meter variance parameter ``sigma`` and measurement interval ``tau``.

    ``sigma = inf`` describes an absent meter (no collapse, no outcome).
    """

    sigma: float
    tau: float

    def __post_init__(self):
        if not self.sigma > 0 or math.isnan(self.sigma):
            raise ValueError(f"meter sigma must be positive, got {self.sigma}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"meter tau must be positive and finite, got {self.tau}")

    @classmethod
    def from_diffusion(cls, diffusion: float, tau: float) -> MeterConfig:
        """Meter with ``sigma = diffusion / tau`` (fixed continuous-limit invariant)."""
        return cls(sigma=diffusion / tau, tau=tau)

    @property
    def diffusion(self) -> float:
        return self.sigma * self.tau


def _checked(a, b_mom, delta, eps) -> GaussianState:
    if not all(math.isfinite(v) for v in (a, b_mom, delta, eps)) or not delta > 0:
        raise NumericRangeError(
            f"Gaussian parameters out of range: a={a}, b_mom={b_mom}, delta={delta}, eps={eps}"
        )
    return GaussianState(a, b_mom, delta, eps)


def free_evolve(state: GaussianState, tau: float, c: Constants = NATURAL) -> GaussianState:
    """Exact free evolution of the Gaussian parameters over a time ``tau``."""
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    a, b, delta, eps = state.as_tuple()
    s = c.hbar * tau / c.mass
    spread = (1.0 + eps * eps) * s / delta
    # delta + 2 eps s + (1 + eps^2) s^2 / delta, written as a sum of squares
    delta_new = ((delta + eps * s) ** 2 + s * s) / delta
    return _checked(a + b * tau / c.mass, b, delta_new, eps + spread)


def contraction_factor(delta_prime: float, sigma: float) -> float:
    """``C = 1 + delta'/sigma``, the ratio by which a collapse shrinks ``delta``."""
    return 1.0 + delta_prime / sigma


def outcome_pdf(state_prime: GaussianState, sigma: float) -> tuple[float, float]:
    """Mean and variance of the (Gaussian) meter-outcome density.

    The density is the convolution of the packet's position density,
    variance ``delta'/2``, with the meter's, variance ``sigma/2``.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return state_prime.a, 0.5 * (state_prime.delta + sigma)


def outcome_density(state_prime: GaussianState, sigma: float, outcome):
    """Evaluate the outcome density at ``outcome`` (scalar or array)."""
    mean, var = outcome_pdf(state_prime, sigma)
    z = np.asarray(outcome, dtype=float) - mean
    return np.exp(-0.5 * z * z / var) / math.sqrt(2.0 * math.pi * var)


def sample_outcome(state_prime: GaussianState, sigma: float, stream: np.random.Generator) -> float:
    """Draw one meter reading using the caller's random stream."""
    mean, var = outcome_pdf(state_prime, sigma)
    return mean + math.sqrt(var) * float(stream.standard_normal())


def collapse_update(
    state_prime: GaussianState, outcome: float, sigma: float, c: Constants = NATURAL
) -> GaussianState:
    """Conditional state after the meter reads ``outcome``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    a, b, delta, eps = state_prime.as_tuple()
    if math.isinf(sigma):
        return state_prime
    C = contraction_factor(delta, sigma)
    gain = (C - 1.0) / C
    jump = gain * (outcome - a)
    return _checked(a + jump, b + c.hbar * (eps / delta) * jump, delta / C, eps / C)


def expectation_abs_x(a: float, delta: float) -> float:
    """``<|x|>`` for a Gaussian position density of mean ``a`` and variance ``delta/2``."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    r = abs(a)
    return r * math.erf(r / math.sqrt(delta)) + math.sqrt(delta / math.pi) * math.exp(-a * a / delta)


def uncertainty_defect(state: GaussianState, c: Constants = NATURAL) -> float:
    """Relative deviation of ``var_x*var_p - cov_xp**2`` from ``hbar**2/4``."""
    det = state.var_x() * state.var_p(c) - state.cov_xp(c) ** 2
    return abs(det / (0.25 * c.hbar**2) - 1.0)
