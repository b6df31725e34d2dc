import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qpathdim import oracle_grid as og
from qpathdim.gaussian_state import (
    Constants,
    GaussianState,
    MeterConfig,
    collapse_update,
    free_evolve,
    uncertainty_defect,
)
from qpathdim.nonselective import discrete_moments
from qpathdim.selective import (
    ConfigurationError,
    FeedbackConfig,
    TrajectoryRecord,
    damped_oscillator_reference,
    ensemble_summary,
    feedback_mean_reference,
    records_to_csv,
    simulate_ensemble,
    stationary_width,
    step,
    trajectory_stream,
)

from .conftest import grid_for


def displace_on_grid(psi, theta, g1, g2, c):
    """exp[-(i/hbar) theta (g1 x - g2 p)] applied by exact splitting.

    x and p only fail to commute by a c-number, so one split is exact up to
    a global phase.
    """
    amp = psi.amplitudes * np.exp(-1j * theta * g1 * psi.x / c.hbar)
    amp = np.fft.ifft(np.fft.fft(amp) * np.exp(1j * theta * g2 * psi.k))
    return psi.replace(amp)


def test_feedback_gains():
    fb = FeedbackConfig(2.0)
    c = Constants(hbar=1.0, mass=3.0)
    assert fb.gamma2() == 0.5
    assert fb.gamma1(c) == pytest.approx(3.0 / 8.0)
    assert FeedbackConfig.matched(fb.matched_diffusion(c), c).t_c == pytest.approx(2.0)
    # gamma1 = hbar / D when matched
    assert fb.gamma1(c) == pytest.approx(c.hbar / fb.matched_diffusion(c))


def test_feedback_check_rejects_mismatch():
    fb = FeedbackConfig(1.0)
    fb.check(MeterConfig.from_diffusion(2.0, 0.1))
    with pytest.raises(ConfigurationError):
        fb.check(MeterConfig.from_diffusion(3.0, 0.1))
    with pytest.raises(ConfigurationError):
        fb.check(MeterConfig(math.inf, 0.1))


def test_forced_outcome_feedback_shift():
    c = Constants()
    meter = MeterConfig.from_diffusion(2.0, 0.1)
    fb = FeedbackConfig(1.0)
    s = GaussianState(0.3, -0.4, 1.2, 0.5)
    with_fb, x1 = step(s, meter, fb, None, c, outcome=2.0)
    without, x2 = step(s, meter, None, None, c, outcome=2.0)
    assert x1 == x2 == 2.0
    assert with_fb.a - without.a == pytest.approx(-0.2, abs=1e-15)
    assert with_fb.b_mom - without.b_mom == pytest.approx(-0.1, abs=1e-15)
    assert (with_fb.delta, with_fb.eps) == (without.delta, without.eps)

    # oracle: apply the displacement operator itself to the post-collapse wavefunction
    psi = og.init_gaussian(without, grid_for(without, with_fb))
    moved = og.fit_gaussian(displace_on_grid(psi, 0.1 * 2.0, fb.gamma1(c), fb.gamma2(), c))
    base = og.fit_gaussian(psi)
    assert moved.a - base.a == pytest.approx(-0.2, abs=1e-9)
    assert moved.b_mom - base.b_mom == pytest.approx(-0.1, abs=1e-9)
    assert moved.delta == pytest.approx(base.delta, rel=1e-9)
    assert moved.eps == pytest.approx(base.eps, rel=1e-9, abs=1e-12)


def test_step_composition():
    c = Constants(hbar=0.9, mass=1.4)
    s = GaussianState(0.1, 0.2, 0.8, -0.3)
    meter = MeterConfig(0.7, 0.05)
    out, xbar = step(s, meter, None, trajectory_stream(1, 0), c)
    assert out == collapse_update(free_evolve(s, 0.05, c), xbar, 0.7, c)


def test_weak_meter_step_is_free_evolution():
    s = GaussianState(0.1, 0.2, 0.8, -0.3)
    out, xbar = step(s, MeterConfig(math.inf, 0.3), None, trajectory_stream(0, 0))
    assert out == free_evolve(s, 0.3)
    assert math.isnan(xbar)


def test_weak_meter_with_feedback_rejected():
    with pytest.raises(ConfigurationError):
        step(GaussianState(), MeterConfig(math.inf, 0.1), FeedbackConfig(1.0), trajectory_stream(0, 0))
    with pytest.raises(ConfigurationError):
        simulate_ensemble(GaussianState(), MeterConfig(math.inf, 0.1), 5, 2, FeedbackConfig(1.0))


def test_ensemble_rejects_zero_counts():
    with pytest.raises(ValueError):
        simulate_ensemble(GaussianState(), MeterConfig(1.0, 0.1), 0, 3)
    with pytest.raises(ValueError):
        simulate_ensemble(GaussianState(), MeterConfig(1.0, 0.1), 3, 0)


def test_ensemble_is_reproducible():
    args = (GaussianState(0.5, 0, 1, 0), MeterConfig.from_diffusion(2.0, 0.05), 40, 6, FeedbackConfig(1.0))
    r1 = simulate_ensemble(*args, master_seed=3)
    r2 = simulate_ensemble(*args, master_seed=3)
    r3 = simulate_ensemble(*args, master_seed=4)
    for a, b in zip(r1, r2):
        assert a.seed == b.seed
        assert a.outcomes.tobytes() == b.outcomes.tobytes()
        assert a.a.tobytes() == b.a.tobytes()
    assert r1[0].outcomes.tobytes() != r3[0].outcomes.tobytes()
    assert len({r.seed for r in r1}) == 6


def test_ensemble_matches_scalar_steps():
    c = Constants(hbar=1.1, mass=0.8)
    meter = MeterConfig.from_diffusion(2 * 1.1 * 0.25 / 0.8, 0.02)
    fb = FeedbackConfig(0.5)
    s0 = GaussianState(1.0, -0.5, 0.7, 0.2)
    recs = simulate_ensemble(s0, meter, 700, 3, fb, master_seed=9, c=c)
    for i, rec in enumerate(recs):
        stream, s = trajectory_stream(9, i), s0
        for k in range(len(rec)):
            s, x = step(s, meter, fb, stream, c)
            assert x == rec.outcomes[k]
            assert s == rec.states[k]


def test_records_burn_in_and_stride():
    meter = MeterConfig(1.0, 0.1)
    full = simulate_ensemble(GaussianState(), meter, 30, 2, master_seed=1)
    part = simulate_ensemble(GaussianState(), meter, 20, 2, master_seed=1, burn_in=10, record_every=5)
    assert part[0].times == pytest.approx([1.1, 1.6, 2.1, 2.6])
    assert np.array_equal(part[1].outcomes, full[1].outcomes[10::5])


def test_record_invariants(tmp_path):
    recs = simulate_ensemble(GaussianState(), MeterConfig(1.0, 0.1), 5, 2, master_seed=1)
    assert all(uncertainty_defect(s) < 1e-12 for r in recs for s in r.states)
    with pytest.raises(ValueError):
        TrajectoryRecord(0, np.arange(3.0), np.zeros(2), np.zeros(3), np.zeros(3), np.ones(3), np.zeros(3))
    records_to_csv(recs, tmp_path / "traj.csv")
    lines = (tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == "trajectory,step,time,outcome,a,b_mom,delta,eps"
    assert len(lines) == 11
    assert lines[6].startswith("1,0,0.1,")


def test_outcome_average_reproduces_nonselective_moments():
    c = Constants()
    s0 = GaussianState(0.0, 0.0, 1.0, 0.3)
    meter = MeterConfig.from_diffusion(0.5, 0.02)
    n = 50
    summ = ensemble_summary(s0, meter, n, 4000, None, master_seed=17, c=c)
    ref = discrete_moments(s0, meter, n, c)
    assert abs(summ.mean_a[-1]) < 4 * summ.stderr_a[-1]
    assert abs(summ.mean_x2[-1] - ref.second_x) < 4 * summ.stderr_x2[-1]


def test_stationary_width_independent_of_start():
    meter = MeterConfig.from_diffusion(2.0, 0.05)
    w1 = stationary_width(meter, state0=GaussianState(delta=0.1, eps=0.0))
    w2 = stationary_width(meter, state0=GaussianState(delta=30.0, eps=-2.0))
    assert w1 == pytest.approx(w2, rel=1e-12)
    d, e = w1
    fixed = collapse_update(free_evolve(GaussianState(0, 0, d, e), meter.tau), 0.0, meter.sigma)
    assert (fixed.delta, fixed.eps) == pytest.approx((d, e), rel=1e-12)


def test_stationary_width_continuum_limit():
    # tau -> 0 at fixed D: eps -> 1, delta -> sqrt(2 hbar D / m), where matched feedback cancels the jumps
    c = Constants(hbar=1.3, mass=0.6)
    D = 0.9
    for tau in (1e-3, 1e-4):
        d, e = stationary_width(MeterConfig.from_diffusion(D, tau), c)
        assert e == pytest.approx(1.0, abs=5 * tau * 100)
        assert d == pytest.approx(math.sqrt(2 * c.hbar * D / c.mass), rel=5 * tau * 100)


def test_ensemble_widths_converge():
    meter = MeterConfig.from_diffusion(2.0, 0.05)
    target = stationary_width(meter)
    for d0 in (0.2, 8.0):
        rec = simulate_ensemble(GaussianState(delta=d0), meter, 2000, 1, master_seed=0)[0]
        assert (rec.delta[-1], rec.eps[-1]) == pytest.approx(target, rel=1e-9)


def test_damped_oscillator_trivial():
    assert damped_oscillator_reference(0.0, 0.0, 1.0, 5.0) == 0.0
    assert abs(damped_oscillator_reference(1.0, -3.0, 0.7, 200.0)) < 1e-40
    with pytest.raises(ValueError):
        damped_oscillator_reference(1.0, 0.0, 0.0, 1.0)


def test_damped_oscillator_example():
    t = np.linspace(0, 10, 41)
    sol = solve_ivp(lambda _, y: [y[1], -y[1] - 0.5 * y[0]], (0, 10), [1.0, 0.0], t_eval=t,
                    rtol=1e-12, atol=1e-14, method="DOP853")
    assert np.allclose(sol.y[0], np.exp(-t / 2) * (np.cos(t / 2) + np.sin(t / 2)), atol=1e-10)
    assert np.allclose(damped_oscillator_reference(1.0, 0.0, 1.0, t), sol.y[0], atol=1e-10)


def test_feedback_mean_reference_solves_first_order_system():
    c = Constants(mass=2.0)
    t_c, a0, b0 = 0.8, 0.6, -1.1
    t = np.linspace(0, 6, 25)
    rhs = lambda _, y: [y[1] / c.mass - y[0] / t_c, -c.mass * y[0] / (2 * t_c**2)]
    sol = solve_ivp(rhs, (0, 6), [a0, b0], t_eval=t, rtol=1e-12, atol=1e-14, method="DOP853")
    a, b = feedback_mean_reference(a0, b0, t_c, t, c)
    assert np.allclose(a, sol.y[0], atol=1e-10)
    assert np.allclose(b, sol.y[1], atol=1e-10)


def test_feedback_ensemble_mean_follows_discrete_mean_map():
    # the mean map is linear, so the ensemble mean tracks its exact recursion at any tau
    fb = FeedbackConfig(1.0)
    meter = MeterConfig.from_diffusion(2.0, 0.05)
    s0 = GaussianState(1.0, 0.0, 1.0, 0.0)
    summ = ensemble_summary(s0, meter, 100, 3000, fb, master_seed=5)
    a, b = 1.0, 0.0
    g1, g2, tau = fb.gamma1(), fb.gamma2(), meter.tau
    for k in range(100):
        ap = a + b * tau
        a, b = ap * (1 - tau * g2), b - tau * g1 * ap
        assert abs(summ.mean_a[k] - a) < 4 * summ.stderr_a[k] + 1e-12
        assert abs(summ.mean_b[k] - b) < 4 * summ.stderr_b[k] + 1e-12
