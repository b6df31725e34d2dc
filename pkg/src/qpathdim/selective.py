"""Conditional (selective) dynamics: recorded outcomes, collapse, feedback.

One step is free evolution over ``tau``, a meter reading drawn from the exact
outcome density, the collapse it induces, and optionally a displacement that
kicks the mean position by ``-tau * xbar / t_c`` and the mean momentum by
``-tau * xbar * m / (2 t_c^2)``.

Because ``delta`` and ``eps`` evolve independently of the readings, every
trajectory in an ensemble shares them; only ``(a, b_mom)`` are stochastic.
Ensembles are therefore stepped as arrays, with one random stream per
trajectory so that each record depends only on ``(master_seed, index)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian_state import (
    NATURAL,
    Constants,
    GaussianState,
    MeterConfig,
    NumericRangeError,
    collapse_update,
    contraction_factor,
    free_evolve,
    sample_outcome,
)

__all__ = [
    "ConfigurationError",
    "EnsembleSummary",
    "FeedbackConfig",
    "TrajectoryRecord",
    "damped_oscillator_reference",
    "ensemble_summary",
    "feedback_mean_reference",
    "records_to_csv",
    "simulate_ensemble",
    "stationary_width",
    "step",
    "trajectory_stream",
]

_CHUNK = 512


class ConfigurationError(ValueError):
    """Inconsistent or degenerate simulation settings."""


@dataclass(frozen=True)
class FeedbackConfig:
    """Displacement feedback with control time ``t_c``."""

    t_c: float

    def __post_init__(self):
        if not (self.t_c > 0 and math.isfinite(self.t_c)):
            raise ConfigurationError(f"t_c must be positive and finite, got {self.t_c}")

    @classmethod
    def matched(cls, diffusion: float, c: Constants = NATURAL) -> FeedbackConfig:
        """Control time satisfying ``D = 2 hbar t_c^2 / m``."""
        return cls(math.sqrt(c.mass * diffusion / (2.0 * c.hbar)))

    def gamma1(self, c: Constants = NATURAL) -> float:
        """Momentum-kick gain ``m / (2 t_c^2)``."""
        return c.mass / (2.0 * self.t_c**2)

    def gamma2(self) -> float:
        """Position-kick gain ``1 / t_c``."""
        return 1.0 / self.t_c

    def matched_diffusion(self, c: Constants = NATURAL) -> float:
        return 2.0 * c.hbar * self.t_c**2 / c.mass

    def check(self, meter: MeterConfig, c: Constants = NATURAL, rtol: float = 1e-9) -> None:
        """Reject feedback on an absent meter or with ``D != 2 hbar t_c^2 / m``."""
        if math.isinf(meter.sigma):
            raise ConfigurationError("feedback needs a finite meter sigma: kicks diverge as sigma -> inf")
        want = self.matched_diffusion(c)
        if abs(meter.diffusion - want) > rtol * want:
            raise ConfigurationError(
                f"feedback t_c={self.t_c} requires D = 2 hbar t_c^2/m = {want!r}, "
                f"meter has sigma*tau = {meter.diffusion!r}"
            )


def _check_degenerate(meter: MeterConfig, fb: FeedbackConfig | None) -> None:
    if fb is not None and math.isinf(meter.sigma):
        raise ConfigurationError("feedback needs a finite meter sigma: kicks diverge as sigma -> inf")


def step(
    state: GaussianState,
    meter: MeterConfig,
    fb: FeedbackConfig | None,
    stream: np.random.Generator | None,
    c: Constants = NATURAL,
    outcome: float | None = None,
) -> tuple[GaussianState, float]:
    """Advance one measurement cycle.

    ``outcome`` forces the meter reading instead of drawing it from ``stream``.
    With an absent meter (``sigma = inf``) the state only evolves freely and
    the returned outcome is NaN.
    """
    _check_degenerate(meter, fb)
    prime = free_evolve(state, meter.tau, c)
    if math.isinf(meter.sigma):
        return prime, math.nan
    if outcome is None:
        outcome = sample_outcome(prime, meter.sigma, stream)
    post = collapse_update(prime, outcome, meter.sigma, c)
    if fb is None:
        return post, outcome
    tau = meter.tau
    a = post.a - tau * outcome * fb.gamma2()
    b = post.b_mom - tau * outcome * fb.gamma1(c)
    return GaussianState(a, b, post.delta, post.eps), outcome


def trajectory_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream for trajectory ``index`` of an ensemble."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(master_seed), int(index)])))


def _trajectory_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Outcomes and post-step states of one selective run.

    Arrays hold one entry per recorded step; ``states`` rebuilds the
    :class:`GaussianState` objects on demand.
    """

    seed: int
    times: np.ndarray
    outcomes: np.ndarray
    a: np.ndarray
    b_mom: np.ndarray
    delta: np.ndarray
    eps: np.ndarray
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        if not all(len(v) == n for v in (self.outcomes, self.a, self.b_mom, self.delta, self.eps)):
            raise ValueError("record columns differ in length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("record times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def states(self) -> list[GaussianState]:
        return [GaussianState(*map(float, row)) for row in zip(self.a, self.b_mom, self.delta, self.eps)]


def _iterate(state0, meter, n_steps, n_traj, fb, master_seed, c):
    """Yield ``(r, outcomes, a, b, delta, eps)`` after each of ``n_steps`` cycles."""
    _check_degenerate(meter, fb)
    if n_steps < 1 or n_traj < 1:
        raise ValueError(f"need n_steps >= 1 and n_traj >= 1, got {n_steps}, {n_traj}")
    tau, sigma = meter.tau, meter.sigma
    hbar, m = c.hbar, c.mass
    s = hbar * tau / m
    absent = math.isinf(sigma)
    g1 = fb.gamma1(c) if fb is not None else 0.0
    g2 = fb.gamma2() if fb is not None else 0.0

    streams = [trajectory_stream(master_seed, i) for i in range(n_traj)]
    a = np.full(n_traj, state0.a, dtype=float)
    b = np.full(n_traj, state0.b_mom, dtype=float)
    delta, eps = state0.delta, state0.eps
    z = np.empty((n_traj, 0))
    nan_outcomes = np.full(n_traj, np.nan)
    for r in range(n_steps):
        j = r % _CHUNK
        if j == 0 and not absent:
            width = min(_CHUNK, n_steps - r)
            z = np.stack([g.standard_normal(width) for g in streams])
        # free evolution, same expressions as gaussian_state.free_evolve
        spread = (1.0 + eps * eps) * s / delta
        delta_p = ((delta + eps * s) ** 2 + s * s) / delta
        eps_p = eps + spread
        a_p = a + b * tau / m
        if absent:
            a, delta, eps = a_p, delta_p, eps_p
            outcomes = nan_outcomes
        else:
            outcomes = a_p + math.sqrt(0.5 * (delta_p + sigma)) * z[:, j]
            C = contraction_factor(delta_p, sigma)
            jump = (C - 1.0) / C * (outcomes - a_p)
            a = a_p + jump
            b = b + hbar * (eps_p / delta_p) * jump
            delta, eps = delta_p / C, eps_p / C
            if fb is not None:
                a = a - tau * outcomes * g2
                b = b - tau * outcomes * g1
        if not (math.isfinite(delta) and delta > 0 and math.isfinite(eps)):
            raise NumericRangeError(f"width parameters left the double range at step {r}")
        yield r, outcomes, a, b, delta, eps


def simulate_ensemble(
    state0: GaussianState,
    meter: MeterConfig,
    n_steps: int,
    n_traj: int,
    fb: FeedbackConfig | None = None,
    master_seed: int = 0,
    c: Constants = NATURAL,
    burn_in: int = 0,
    record_every: int = 1,
) -> list[TrajectoryRecord]:
    """Run ``n_traj`` independent trajectories of ``burn_in + n_steps`` cycles.

    The first ``burn_in`` cycles are simulated but not recorded; afterwards
    every ``record_every``-th state is kept.
    """
    if n_steps < 1 or n_traj < 1:
        raise ValueError(f"need n_steps >= 1 and n_traj >= 1, got {n_steps}, {n_traj}")
    if burn_in < 0 or record_every < 1:
        raise ValueError("burn_in must be >= 0 and record_every >= 1")
    total = burn_in + n_steps
    keep = [r for r in range(burn_in, total) if (r - burn_in) % record_every == 0]
    n_keep = len(keep)
    out = np.empty((n_traj, n_keep))
    av = np.empty((n_traj, n_keep))
    bv = np.empty((n_traj, n_keep))
    dv = np.empty(n_keep)
    ev = np.empty(n_keep)
    col = 0
    for r, xbar, a, b, delta, eps in _iterate(state0, meter, total, n_traj, fb, master_seed, c):
        if col < n_keep and r == keep[col]:
            out[:, col], av[:, col], bv[:, col] = xbar, a, b
            dv[col], ev[col] = delta, eps
            col += 1
    times = meter.tau * (np.asarray(keep, dtype=float) + 1.0)
    snapshot = {
        "state0": state0.as_tuple(),
        "sigma": meter.sigma,
        "tau": meter.tau,
        "t_c": None if fb is None else fb.t_c,
        "hbar": c.hbar,
        "mass": c.mass,
        "master_seed": master_seed,
        "burn_in": burn_in,
        "record_every": record_every,
    }
    return [
        TrajectoryRecord(
            seed=_trajectory_seed(master_seed, i),
            times=times,
            outcomes=out[i],
            a=av[i],
            b_mom=bv[i],
            delta=dv,
            eps=ev,
            config={**snapshot, "index": i},
        )
        for i in range(n_traj)
    ]


@dataclass(frozen=True, eq=False)
class EnsembleSummary:
    """Per-step ensemble means and standard errors."""

    times: np.ndarray
    mean_a: np.ndarray
    stderr_a: np.ndarray
    mean_b: np.ndarray
    stderr_b: np.ndarray
    mean_x2: np.ndarray
    stderr_x2: np.ndarray
    delta: np.ndarray
    eps: np.ndarray
    n_traj: int


def ensemble_summary(
    state0: GaussianState,
    meter: MeterConfig,
    n_steps: int,
    n_traj: int,
    fb: FeedbackConfig | None = None,
    master_seed: int = 0,
    c: Constants = NATURAL,
    every: int = 1,
) -> EnsembleSummary:
    """Stream an ensemble and keep only its moments, every ``every`` steps.

    ``mean_x2`` estimates ``<x^2>`` as the ensemble mean of ``a^2 + delta/2``,
    the exact conditional second moment of each trajectory.
    """
    rows = []
    for r, _, a, b, delta, eps in _iterate(state0, meter, n_steps, n_traj, fb, master_seed, c):
        if (r + 1) % every:
            continue
        x2 = a * a + 0.5 * delta
        rows.append(
            (
                meter.tau * (r + 1),
                a.mean(),
                _stderr(a),
                b.mean(),
                _stderr(b),
                x2.mean(),
                _stderr(x2),
                delta,
                eps,
            )
        )
    cols = np.array(rows, dtype=float).T
    return EnsembleSummary(*cols, n_traj=n_traj)


def _stderr(v: np.ndarray) -> float:
    if v.size < 2:
        return math.nan
    return float(v.std(ddof=1) / math.sqrt(v.size))


def stationary_width(meter: MeterConfig, c: Constants = NATURAL, state0: GaussianState | None = None,
                     tol: float = 1e-14, max_iter: int = 1_000_000) -> tuple[float, float]:
    """Fixed point ``(delta, eps)`` of one free-evolve-then-collapse cycle.

    The cycle acts on ``(delta, eps)`` alone, so iterating it from any start
    converges to the measurement-limited width.
    """
    if math.isinf(meter.sigma):
        raise ConfigurationError("no stationary width without a meter")
    st = state0 or GaussianState()
    for _ in range(max_iter):
        new = collapse_update(free_evolve(st, meter.tau, c), st.a, meter.sigma, c)
        if abs(new.delta - st.delta) <= tol * new.delta and abs(new.eps - st.eps) <= tol * max(1.0, abs(new.eps)):
            return new.delta, new.eps
        st = GaussianState(0.0, 0.0, new.delta, new.eps)
    raise NumericRangeError("width iteration did not converge")


def damped_oscillator_reference(x0, xdot0, t_c: float, t):
    """Solution of ``x'' + x'/t_c + x/(2 t_c^2) = 0``.

    The roots are ``(-1 +- i) / (2 t_c)``: always underdamped, with decay rate
    and angular frequency both ``1 / (2 t_c)``.
    """
    if not t_c > 0:
        raise ValueError(f"t_c must be positive, got {t_c}")
    w = 0.5 / t_c
    t = np.asarray(t, dtype=float)
    out = np.exp(-w * t) * (x0 * np.cos(w * t) + (xdot0 + w * x0) / w * np.sin(w * t))
    return out if out.ndim else float(out)


def feedback_mean_reference(a0: float, b0: float, t_c: float, t, c: Constants = NATURAL):
    """Continuous-limit ensemble means ``(a(t), b(t))`` under matched feedback.

    Solves ``a' = b/m - a/t_c``, ``b' = -m a / (2 t_c^2)``; each component obeys
    the damped oscillator equation with its own initial slope.
    """
    m = c.mass
    a = damped_oscillator_reference(a0, b0 / m - a0 / t_c, t_c, t)
    b = damped_oscillator_reference(b0, -m * a0 / (2.0 * t_c**2), t_c, t)
    return a, b


_CSV_COLUMNS = ("trajectory", "step", "time", "outcome", "a", "b_mom", "delta", "eps")


def records_to_csv(records, path) -> None:
    """Write records as one row per (trajectory, step)."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(_CSV_COLUMNS) + "\n")
        for idx, rec in enumerate(records):
            i = rec.config.get("index", idx)
            for k in range(len(rec)):
                vals = (rec.times[k], rec.outcomes[k], rec.a[k], rec.b_mom[k], rec.delta[k], rec.eps[k])
                fh.write(f"{i},{k}," + ",".join(repr(float(v)) for v in vals) + "\n")
