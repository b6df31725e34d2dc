"""Outcome-averaged (nonselective) dynamics in closed form.

With the meter readings discarded, the continuous limit ``tau -> 0`` at fixed
``D = sigma * tau`` gives a master equation whose only effect on the first
two moments is a constant momentum-diffusion rate ``hbar^2 / (2 D)``.
The centre moves freely, ``a(t) = a(0) + b(0) t / m``; the squared width picks
up the extra ``hbar^2 t^3 / (3 m^2 D)`` term.

At finite ``D`` the discrete meter interval ``tau`` and the elapsed time ``t``
are different things: the closed forms below are in ``t`` only, and
:func:`discrete_moments` gives the exact finite-``tau`` counterpart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .gaussian_state import NATURAL, Constants, GaussianState, MeterConfig, expectation_abs_x

__all__ = [
    "ContinuousLimit",
    "Moments",
    "abs_x_of_t",
    "analytic_path_length",
    "b_scale",
    "delta_of_t",
    "discrete_moments",
    "interval_for",
    "mean_position",
    "moments_of_t",
    "path_increment",
]


@dataclass(frozen=True)
class ContinuousLimit:
    """Measurement strength ``D = sigma * tau``; ``D = inf`` means no measurement."""

    diffusion: float

    def __post_init__(self):
        if math.isnan(self.diffusion) or not self.diffusion > 0:
            raise ValueError(f"diffusion D must be positive, got {self.diffusion}")

    @classmethod
    def unmeasured(cls) -> ContinuousLimit:
        return cls(math.inf)

    @property
    def is_unmeasured(self) -> bool:
        return math.isinf(self.diffusion)

    @property
    def rate(self) -> float:
        """``1 / D``, exactly zero for the unmeasured variant."""
        return 0.0 if self.is_unmeasured else 1.0 / self.diffusion

    def __str__(self) -> str:
        return "inf" if self.is_unmeasured else repr(self.diffusion)


NO_MEASUREMENT = ContinuousLimit.unmeasured()


def _as_limit(D) -> ContinuousLimit:
    return D if isinstance(D, ContinuousLimit) else ContinuousLimit(float(D))


@dataclass(frozen=True)
class Moments:
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    cov_xp: float

    @property
    def second_x(self) -> float:
        """``<x^2>``, the quantity an ensemble of trajectories estimates directly."""
        return self.var_x + self.mean_x**2


def moments_of_t(state0: GaussianState, t: float, D, c: Constants = NATURAL) -> Moments:
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    D = _as_limit(D)
    m, hbar = c.mass, c.hbar
    _, _, sx0, sp0, sxp0 = state0.moments(c)
    kick = hbar**2 * D.rate / 2.0  # d var_p / dt
    var_p = sp0 + kick * t
    cov = sxp0 + sp0 * t / m + kick * t * t / (2.0 * m)
    var_x = sx0 + 2.0 * sxp0 * t / m + sp0 * t * t / m**2 + kick * t**3 / (3.0 * m**2)
    return Moments(mean_position(state0, t, c), state0.b_mom, var_x, var_p, cov)


def delta_of_t(state0: GaussianState, t: float, D, c: Constants = NATURAL) -> float:
    """Squared-width parameter ``2 var_x(t)`` of the outcome-averaged state."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    D = _as_limit(D)
    m, hbar = c.mass, c.hbar
    d0, e0 = state0.delta, state0.eps
    return (
        d0
        + 2.0 * hbar * e0 * t / m
        + hbar**2 * (1.0 + e0 * e0) * t * t / (m * m * d0)
        + hbar**2 * t**3 * D.rate / (3.0 * m * m)
    )


def mean_position(state0: GaussianState, t: float, c: Constants = NATURAL) -> float:
    """``a(0) + b(0) t / m``; unaffected by the measurement strength."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return state0.a + state0.b_mom * t / c.mass


def abs_x_of_t(dx: float, t: float, eps0: float, D, c: Constants = NATURAL) -> float:
    """``<|x|>(t)`` for a centred packet of initial uncertainty ``dx``."""
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    D = _as_limit(D)
    m, hbar = c.mass, c.hbar
    dx2 = dx * dx
    bracket = (
        2.0
        + 2.0 * hbar * eps0 * t / (m * dx2)
        + hbar**2 * (1.0 + eps0 * eps0) * t * t / (2.0 * m * m * dx2 * dx2)
        + hbar**2 * t**3 * D.rate / (3.0 * m * m * dx2)
    )
    return dx / math.sqrt(math.pi) * math.sqrt(bracket)


def b_scale(dx: float, t: float, c: Constants = NATURAL) -> float:
    """Dimensionless self-similarity parameter ``hbar t / (2 m dx^2)``."""
    return c.hbar * t / (2.0 * c.mass * dx * dx)


def interval_for(dx: float, bscale: float, c: Constants = NATURAL) -> float:
    """Time interval ``t`` that realises ``bscale`` at resolution ``dx``."""
    return 2.0 * c.mass * bscale * dx * dx / c.hbar


def path_increment(
    dx: float, t: float, D, eps0: float = 0.0, p_av: float = 0.0, c: Constants = NATURAL
) -> float:
    """Mean displacement ``<|x|>`` accumulated over one interval ``t``.

    The packet starts at the origin with uncertainty ``dx``, chirp ``eps0``
    and mean momentum ``p_av``.
    """
    if p_av == 0.0:
        return abs_x_of_t(dx, t, eps0, D, c)
    state0 = GaussianState.from_width(dx, b_mom=p_av, eps=eps0)
    return expectation_abs_x(mean_position(state0, t, c), delta_of_t(state0, t, D, c))


def analytic_path_length(
    schedule_point: tuple[float, float],
    T: float,
    eps0: float,
    D,
    c: Constants = NATURAL,
    p_av: float = 0.0,
) -> float:
    """Average path length ``(T / t) <dl>`` at one (dx, t) resolution point."""
    dx, t = schedule_point
    if not 0 < t <= T:
        raise ValueError(f"need 0 < t <= T, got t={t}, T={T}")
    return (T / t) * path_increment(dx, t, D, eps0=eps0, p_av=p_av, c=c)


def discrete_moments(
    state0: GaussianState, meter: MeterConfig, n_steps: int, c: Constants = NATURAL
) -> Moments:
    """Exact outcome-averaged moments after ``n_steps`` (free evolve, measure) cycles.

    Averaging the meter over its outcomes leaves position moments unchanged and
    adds ``hbar^2 / (2 sigma)`` to the momentum variance.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    m, tau = c.mass, meter.tau
    _, _, sx, sp, sxp = state0.moments(c)
    kick = 0.0 if math.isinf(meter.sigma) else c.hbar**2 / (2.0 * meter.sigma)
    for _ in range(n_steps):
        sx = sx + 2.0 * sxp * tau / m + sp * tau * tau / (m * m)
        sxp = sxp + sp * tau / m
        sp = sp + kick
    t = n_steps * tau
    return Moments(mean_position(state0, t, c), state0.b_mom, sx, sp, sxp)
