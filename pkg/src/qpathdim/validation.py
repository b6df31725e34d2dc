"""Randomized comparison of the closed-form Gaussian maps with the grid oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle_grid as og
from .gaussian_state import (
    NATURAL,
    Constants,
    GaussianState,
    collapse_update,
    expectation_abs_x,
    free_evolve,
    outcome_density,
    outcome_pdf,
)

__all__ = ["Scenario", "check_scenario", "random_scenarios", "validate"]

# sampling box for random scenarios
RANGES = {
    "a": (-2.0, 2.0),
    "b_mom": (-2.0, 2.0),
    "delta": (0.2, 5.0),
    "eps": (-2.0, 2.0),
    "tau": (0.01, 1.0),
    "sigma": (0.2, 10.0),
}


@dataclass(frozen=True)
class Scenario:
    state: GaussianState
    tau: float
    sigma: float
    outcome_z: float  # meter reading, in outcome standard deviations from the mean


def random_scenarios(n: int, seed: int = 0) -> list[Scenario]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        u = {k: rng.uniform(*v) for k, v in RANGES.items()}
        state = GaussianState(u["a"], u["b_mom"], u["delta"], u["eps"])
        out.append(Scenario(state, u["tau"], u["sigma"], float(rng.uniform(-2.0, 2.0))))
    return out


def _rel(x: float, ref: float, scale: float = 0.0) -> float:
    return abs(x - ref) / max(abs(ref), scale)


def _state_errors(got: GaussianState, ref: GaussianState, c: Constants) -> float:
    w = math.sqrt(ref.delta)
    return max(
        _rel(got.a, ref.a, w),
        _rel(got.b_mom, ref.b_mom, c.hbar * math.sqrt(1.0 + ref.eps**2) / w),
        _rel(got.delta, ref.delta),
        _rel(got.eps, ref.eps, 1.0),
    )


def check_scenario(sc: Scenario, c: Constants = NATURAL, n_points: int = og.DEFAULT_POINTS) -> dict[str, float]:
    """Worst relative disagreement per operation for one scenario.

    Location-type quantities are compared relative to their natural scale
    (packet width, momentum spread, unity for the chirp) when the reference
    value itself is close to zero.
    """
    prime = free_evolve(sc.state, sc.tau, c)
    mean, var = outcome_pdf(prime, sc.sigma)
    xbar = mean + sc.outcome_z * math.sqrt(var)
    post = collapse_update(prime, xbar, sc.sigma, c)
    probes = mean + math.sqrt(var) * np.array([-2.0, -0.7, 0.0, 1.1, 2.0])

    grid = og.GridSpec.covering([sc.state, prime, post], n=n_points, include=list(probes))
    psi0 = og.init_gaussian(sc.state, grid, c)
    psi1 = og.propagate_free(psi0, sc.tau, c)

    errs = {"free_evolve": _state_errors(og.fit_gaussian(psi1, c), prime, c)}

    dens = outcome_density(prime, sc.sigma, probes)
    errs["outcome_pdf"] = max(_rel(og.apply_meter(psi1, float(x), sc.sigma)[1], float(d)) for x, d in zip(probes, dens))

    psi2, _ = og.apply_meter(psi1, xbar, sc.sigma)
    errs["collapse_update"] = _state_errors(og.fit_gaussian(psi2, c), post, c)

    errs["expectation_abs_x"] = max(
        _rel(og.observables(psi1, c).abs_x, expectation_abs_x(prime.a, prime.delta)),
        _rel(og.observables(psi2, c).abs_x, expectation_abs_x(post.a, post.delta)),
    )
    return errs


def validate(n_scenarios: int = 100, seed: int = 0, c: Constants = NATURAL, n_points: int = og.DEFAULT_POINTS):
    """Yield ``(index, scenario, errors)`` over random scenarios."""
    for i, sc in enumerate(random_scenarios(n_scenarios, seed)):
        yield i, sc, check_scenario(sc, c, n_points)
