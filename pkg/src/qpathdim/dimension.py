"""Path lengths at varying resolution and Hausdorff-dimension fits.

The Hausdorff length ``L = l * dx**(d - 1)`` is resolution independent for the
right ``d``; with ``l ~ dx**slope`` that means ``d = 1 - slope``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian_state import NATURAL, Constants
from .nonselective import analytic_path_length, interval_for

__all__ = [
    "DEFAULT_RESIDUAL_THRESHOLD",
    "DimensionFit",
    "ResolutionSchedule",
    "analytic_points",
    "fit_dimension",
    "hausdorff_length",
    "path_length_sampled",
]

# RMS of natural-log residuals above which the data are not a single power law
DEFAULT_RESIDUAL_THRESHOLD = 1e-2


@dataclass(frozen=True)
class ResolutionSchedule:
    """Resolutions ``dx`` swept at fixed ``b_scale`` over a total time ``T``."""

    dx_values: tuple[float, ...]
    b_scale: float
    T: float | None = None
    constants: Constants = NATURAL

    def __post_init__(self):
        dx = tuple(float(v) for v in self.dx_values)
        if len(dx) < 1 or not all(v > 0 for v in dx):
            raise ValueError("dx_values must be a non-empty list of positive lengths")
        if any(b >= a for a, b in zip(dx, dx[1:])):
            raise ValueError("dx_values must be strictly decreasing")
        if not self.b_scale > 0:
            raise ValueError(f"b_scale must be positive, got {self.b_scale}")
        object.__setattr__(self, "dx_values", dx)
        T = self.T if self.T is not None else max(self.times)
        if max(self.times) > T * (1 + 1e-12):
            raise ValueError(f"interval t(dx={dx[0]:g}) = {max(self.times):g} exceeds T = {T:g}")
        object.__setattr__(self, "T", float(T))

    @classmethod
    def log_range(cls, dx_max: float, dx_min: float, n: int, b_scale: float, T: float | None = None,
                  constants: Constants = NATURAL) -> ResolutionSchedule:
        dx = np.geomspace(dx_max, dx_min, n)
        return cls(tuple(dx), b_scale, T, constants)

    def t_of(self, dx: float) -> float:
        return interval_for(dx, self.b_scale, self.constants)

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(self.t_of(dx) for dx in self.dx_values)

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.dx_values, self.times))


@dataclass(frozen=True)
class DimensionFit:
    """Least-squares fit of ``log l`` against ``log dx``.

    ``residual`` is the RMS of the log residuals; the dimension is only
    meaningful (``well_defined``) when it is below ``threshold``. ``local_d``
    pairs the geometric midpoint of each consecutive ``dx`` pair with the
    two-point dimension there.
    """

    d: float
    slope: float
    intercept: float
    residual: float
    local_d: list[tuple[float, float]] = field(default_factory=list)
    threshold: float = DEFAULT_RESIDUAL_THRESHOLD
    n_points: int = 0

    @property
    def well_defined(self) -> bool:
        return self.residual <= self.threshold


def hausdorff_length(l: float, dx: float, d: float) -> float:
    """Resolution-compensated length ``l * dx**(d - 1)``."""
    if l < 0:
        raise ValueError(f"length must be non-negative, got {l}")
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    return l * dx ** (d - 1.0)


def fit_dimension(points, threshold: float = DEFAULT_RESIDUAL_THRESHOLD) -> DimensionFit:
    """Fit ``d = 1 - slope`` from ``(dx, l)`` pairs."""
    arr = np.asarray(list(points), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise ValueError("need at least 3 (dx, l) points")
    if not np.all(arr > 0) or not np.all(np.isfinite(arr)):
        raise ValueError("dx and l must all be positive and finite")
    order = np.argsort(arr[:, 0])[::-1]
    dx, l = arr[order, 0], arr[order, 1]
    if np.ptp(np.log(dx)) == 0:
        raise ValueError("degenerate schedule: all dx are equal")
    X, Y = np.log(dx), np.log(l)
    A = np.column_stack([X, np.ones_like(X)])
    (slope, intercept), *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = Y - (slope * X + intercept)
    rms = float(math.sqrt(np.mean(resid**2)))
    local = []
    for i in range(len(dx) - 1):
        if dx[i + 1] == dx[i]:
            continue
        s = (Y[i + 1] - Y[i]) / (X[i + 1] - X[i])
        local.append((float(math.sqrt(dx[i] * dx[i + 1])), float(1.0 - s)))
    return DimensionFit(
        d=float(1.0 - slope),
        slope=float(slope),
        intercept=float(intercept),
        residual=rms,
        local_d=local,
        threshold=threshold,
        n_points=len(dx),
    )


def path_length_sampled(record, use: str = "outcomes") -> float:
    """Sum of absolute increments along one recorded trajectory.

    By default the increments are between successive meter readings, the data
    an experimenter actually holds; ``use="means"`` takes the conditional
    mean positions instead.
    """
    if use == "outcomes":
        x = np.asarray(record.outcomes if hasattr(record, "outcomes") else record, dtype=float)
    elif use == "means":
        x = np.asarray(record.a, dtype=float)
    else:
        raise ValueError(f"use must be 'outcomes' or 'means', got {use!r}")
    if x.size < 2:
        raise ValueError("need at least 2 positions to define a path length")
    return float(np.sum(np.abs(np.diff(x))))


def analytic_points(schedule: ResolutionSchedule, D, eps0: float = 0.0, p_av: float = 0.0) -> list[tuple[float, float]]:
    """``(dx, <l>)`` along a schedule from the closed-form path increment."""
    c = schedule.constants
    return [
        (dx, analytic_path_length((dx, t), schedule.T, eps0, D, c, p_av=p_av))
        for dx, t in schedule.points()
    ]
