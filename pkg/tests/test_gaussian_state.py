import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from qpathdim import oracle_grid as og
from qpathdim.gaussian_state import (
    Constants,
    GaussianState,
    MeterConfig,
    NumericRangeError,
    collapse_update,
    contraction_factor,
    expectation_abs_x,
    free_evolve,
    outcome_density,
    outcome_pdf,
    sample_outcome,
    uncertainty_defect,
)
from qpathdim.nonselective import discrete_moments

from .conftest import grid_for

states = st.builds(
    GaussianState,
    a=st.floats(-3, 3),
    b_mom=st.floats(-3, 3),
    delta=st.floats(0.05, 20),
    eps=st.floats(-3, 3),
)
consts = st.builds(Constants, hbar=st.floats(0.2, 5), mass=st.floats(0.2, 5))


def close_state(s, t, rel=1e-12):
    assert s.a == pytest.approx(t.a, rel=rel, abs=rel)
    assert s.b_mom == pytest.approx(t.b_mom, rel=rel, abs=rel)
    assert s.delta == pytest.approx(t.delta, rel=rel)
    assert s.eps == pytest.approx(t.eps, rel=rel, abs=rel)


def test_constants_validation():
    with pytest.raises(ValueError):
        Constants(hbar=0)
    with pytest.raises(ValueError):
        Constants(mass=-1)


def test_state_rejects_bad_width():
    with pytest.raises(NumericRangeError):
        GaussianState(delta=0.0)
    with pytest.raises(NumericRangeError):
        GaussianState(a=math.inf)


def test_moment_identities(gaussian):
    c = Constants(hbar=2.0, mass=3.0)
    assert gaussian.var_x() == pytest.approx(gaussian.delta / 2)
    assert gaussian.var_p(c) == pytest.approx(4.0 * (1 + 0.36) / (2 * 1.3))
    assert gaussian.cov_xp(c) == pytest.approx(0.6)


# free evolution


def test_free_evolve_identity(gaussian):
    assert free_evolve(gaussian, 0.0) == gaussian


@pytest.mark.parametrize(
    "state, tau, expected",
    [
        (GaussianState(0, 0, 1, 0), 1.0, (0.0, 0.0, 2.0, 1.0)),
        (GaussianState(1, 2, 2, 0), 0.5, (2.0, 2.0, 2.125, 0.25)),
    ],
)
def test_free_evolve_examples(state, tau, expected):
    # oracle: propagate the discretized packet in momentum space
    grid = grid_for(state, free_evolve(state, tau))
    on_grid = og.fit_gaussian(og.propagate_free(og.init_gaussian(state, grid), tau))
    assert on_grid.as_tuple() == pytest.approx(expected, abs=1e-9)
    assert free_evolve(state, tau).as_tuple() == pytest.approx(expected, abs=1e-15)


def test_free_evolve_rejects_negative_time(gaussian):
    with pytest.raises(ValueError):
        free_evolve(gaussian, -1e-3)


@given(states, st.floats(0, 5), st.floats(0, 5), consts)
def test_free_evolve_semigroup(s, t1, t2, c):
    close_state(free_evolve(free_evolve(s, t1, c), t2, c), free_evolve(s, t1 + t2, c), rel=1e-12)


@given(states, st.floats(0, 50), consts)
def test_free_evolve_keeps_saturation(s, tau, c):
    # var_x*var_p - cov^2 cancels ~eps^2 in floating point
    out = free_evolve(s, tau, c)
    assert uncertainty_defect(out, c) < 1e-12 * (1 + out.eps**2)


def test_free_evolve_range_error():
    with pytest.raises(NumericRangeError):
        free_evolve(GaussianState(delta=1e-300), 1e200)


# outcome density


def test_outcome_pdf_symmetric_state():
    assert outcome_pdf(GaussianState(0, 0, 3, 1), 2.0)[0] == 0.0


def test_outcome_pdf_weak_meter_limit():
    s = GaussianState(0, 0, 3, 0)
    assert outcome_pdf(s, 1e-12)[1] == pytest.approx(s.delta / 2, rel=1e-11)


def test_outcome_pdf_example():
    s = GaussianState(a=2.0, delta=1.0)
    # oracle: meter likelihood on a dense outcome grid, moments by quadrature
    xs = np.linspace(-8, 12, 801)
    grid = grid_for(s, include=[-8, 12])
    psi = og.init_gaussian(s, grid)
    lik = np.array([og.apply_meter(psi, x, 1.0)[1] for x in xs])
    h = xs[1] - xs[0]
    norm = lik.sum() * h
    mean = (xs * lik).sum() * h / norm
    var = ((xs - mean) ** 2 * lik).sum() * h / norm
    assert (norm, mean, var) == pytest.approx((1.0, 2.0, 1.0), abs=1e-9)
    assert outcome_pdf(s, 1.0) == (2.0, 1.0)


def test_outcome_density_matches_grid_pointwise(gaussian):
    sigma = 0.7
    xs = np.linspace(-6, 6, 241)
    psi = og.init_gaussian(gaussian, grid_for(gaussian, include=[-6, 6]))
    lik = np.array([og.apply_meter(psi, x, sigma)[1] for x in xs])
    assert np.max(np.abs(lik - outcome_density(gaussian, sigma, xs))) < 1e-6


def test_sample_outcome_uses_stream(gaussian):
    a = sample_outcome(gaussian, 1.0, np.random.default_rng(3))
    b = sample_outcome(gaussian, 1.0, np.random.default_rng(3))
    assert a == b
    draws = [sample_outcome(gaussian, 1.0, np.random.default_rng(k)) for k in range(4000)]
    mean, var = outcome_pdf(gaussian, 1.0)
    assert np.mean(draws) == pytest.approx(mean, abs=4 * math.sqrt(var / 4000))


# collapse


def test_collapse_at_centre():
    s = GaussianState(0.3, -0.2, 2.0, 0.5)
    post = collapse_update(s, s.a, 1.0)
    C = contraction_factor(2.0, 1.0)
    assert (post.a, post.b_mom) == (s.a, s.b_mom)
    assert post.delta == pytest.approx(s.delta / C)
    assert post.eps == pytest.approx(s.eps / C)


def test_collapse_infinitely_weak_meter(gaussian):
    assert collapse_update(gaussian, 5.0, math.inf) == gaussian
    close_state(collapse_update(gaussian, 5.0, 1e15), gaussian, rel=1e-13)


def test_collapse_example():
    s = GaussianState(0.0, 0.0, 1.0, 1.0)
    # oracle: multiply the grid wavefunction by the meter operator, renormalize
    post_grid = og.fit_gaussian(og.apply_meter(og.init_gaussian(s, grid_for(s)), 1.0, 1.0)[0])
    assert post_grid.as_tuple() == pytest.approx((0.5, 0.5, 0.5, 0.5), abs=1e-9)
    assert contraction_factor(1.0, 1.0) == 2.0
    assert collapse_update(s, 1.0, 1.0).as_tuple() == pytest.approx((0.5, 0.5, 0.5, 0.5), abs=1e-15)


def test_collapse_rejects_bad_sigma(gaussian):
    with pytest.raises(ValueError):
        collapse_update(gaussian, 0.0, 0.0)
    with pytest.raises(ValueError):
        collapse_update(gaussian, 0.0, -1.0)


@given(states, st.floats(-10, 10), st.floats(1e-3, 1e3), consts)
def test_collapse_contracts_width(s, xbar, sigma, c):
    post = collapse_update(s, xbar, sigma, c)
    C = contraction_factor(s.delta, sigma)
    assert C >= 1
    assert post.delta <= s.delta
    assert post.delta * C == pytest.approx(s.delta, rel=1e-15)
    assert uncertainty_defect(post, c) < 1e-12 * (1 + post.eps**2)


def test_collapse_marginal_reproduces_nonselective_moments():
    # Gauss-Hermite average of the conditional state over the outcome density
    c = Constants(hbar=1.3, mass=0.7)
    s = GaussianState(0.4, 0.9, 1.7, -0.8)
    meter = MeterConfig(sigma=2.5, tau=0.3)
    prime = free_evolve(s, meter.tau, c)
    mean, var = outcome_pdf(prime, meter.sigma)
    z, w = np.polynomial.hermite_e.hermegauss(40)
    w = w / w.sum()
    posts = [collapse_update(prime, mean + math.sqrt(var) * zi, meter.sigma, c) for zi in z]
    a = np.array([p.a for p in posts])
    b = np.array([p.b_mom for p in posts])
    Ea, Eb = w @ a, w @ b
    var_x = w @ (a - Ea) ** 2 + posts[0].var_x()
    var_p = w @ (b - Eb) ** 2 + posts[0].var_p(c)
    cov = w @ ((a - Ea) * (b - Eb)) + posts[0].cov_xp(c)
    ref = discrete_moments(s, meter, 1, c)
    assert Ea == pytest.approx(prime.a, rel=1e-12)
    assert var_x == pytest.approx(prime.delta / 2, rel=1e-12)
    assert (var_x, var_p, cov) == pytest.approx((ref.var_x, ref.var_p, ref.cov_xp), rel=1e-12)


@given(states, st.lists(st.tuples(st.booleans(), st.floats(0, 2), st.floats(-5, 5), st.floats(0.01, 50)), max_size=40))
def test_saturation_along_chains(s, ops):
    for evolve, tau, xbar, sigma in ops:
        s = free_evolve(s, tau) if evolve else collapse_update(s, xbar, sigma)
        assert uncertainty_defect(s) < 1e-12 * (1 + s.eps**2)


# <|x|>


def test_abs_x_centred():
    assert expectation_abs_x(0.0, 2.5) == pytest.approx(math.sqrt(2.5 / math.pi), rel=1e-15)


def test_abs_x_classical_limit():
    assert expectation_abs_x(-50.0, 1.0) == pytest.approx(50.0, rel=1e-15)


def test_abs_x_example():
    # quadrature of the defining integral
    f = lambda x: abs(x) * math.exp(-((x - 1.0) ** 2)) / math.sqrt(math.pi)
    ref = quad(f, -np.inf, 0)[0] + quad(f, 0, np.inf)[0]
    assert ref == pytest.approx(1.0502545416600122, rel=1e-12)
    assert expectation_abs_x(1.0, 1.0) == pytest.approx(1.0502545416600122, rel=1e-14)
    assert round(expectation_abs_x(1.0, 1.0), 4) == 1.0503


@given(st.floats(-20, 20), st.floats(1e-3, 100))
def test_abs_x_lower_bounds(a, delta):
    v = expectation_abs_x(a, delta)
    r = abs(a)
    assert v >= r * math.erf(r / math.sqrt(delta))
    assert v >= math.sqrt(delta / math.pi) * math.exp(-a * a / delta)
    assert v >= r * (1 - 1e-15)
