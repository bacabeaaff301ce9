import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from lzms import dynamics
from lzms.dynamics import (
    IntegrationError,
    IntegratorConfig,
    basis_state,
    convergence_check,
    evolve,
    final_populations,
    landau_zener_asymptotic,
    lz_two_state_reference,
    transfer_efficiency,
)
from lzms.model import DecayParams, ModelParams, constant_part, sweep_diagonal
from lzms.validation import random_decay, random_model


def reference_state(p, d, psi0, t_eval=None):
    """Independent oracle: explicit high-order Runge-Kutta on the same ODE."""
    A = constant_part(p, d)
    B = sweep_diagonal(p)
    sol = solve_ivp(lambda t, y: -1j * ((A + t * B) @ y), (-p.t0, p.t0), psi0.astype(complex),
                    method="DOP853", rtol=1e-12, atol=1e-14, t_eval=t_eval)
    return sol.y.T


def test_uncoupled_state_returns_exactly():
    # the accumulated phase of each bare level integrates to zero over [-t0, t0]
    p = ModelParams(kappa=0.3, Omega=0.0, omega=0.0, t0=40.0)
    for n in (1, 2, 3):
        tr = evolve(p, None, basis_state(n))
        np.testing.assert_allclose(tr.final_state, basis_state(n), atol=1e-9)


def test_uncoupled_phase_matches_analytic():
    p = ModelParams(kappa=0.3, Omega=0.0, t0=10.0)
    tr = evolve(p, None, np.ones(3) / math.sqrt(3), IntegratorConfig(sample_count=11))
    for t, psi in zip(tr.times, tr.states):
        phase = 0.5 * p.kappa * (t**2 - p.t0**2)
        expected = np.exp(1j * np.array([phase, 0.0, -phase])) / math.sqrt(3)
        np.testing.assert_allclose(psi, expected, atol=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_matches_runge_kutta_oracle(seed):
    rng = np.random.default_rng(seed)
    p = random_model(rng, t0=15.0)
    d = random_decay(rng) if seed % 2 else None
    psi0 = basis_state(1 + seed % 3)
    cfg = IntegratorConfig(sample_count=7)
    tr = evolve(p, d, psi0, cfg)
    ref = reference_state(p, d, psi0, tr.times)
    np.testing.assert_allclose(tr.states, ref, atol=2e-8)


def test_sample_grid_and_bookkeeping():
    p = ModelParams(kappa=1.0, omega=0.5, t0=5.0)
    tr = evolve(p, None, basis_state(1), IntegratorConfig(sample_count=11))
    np.testing.assert_allclose(tr.times, np.linspace(-5, 5, 11))
    np.testing.assert_array_equal(tr.states[0], basis_state(1))
    np.testing.assert_allclose(tr.populations, np.abs(tr.states) ** 2)
    assert tr.accepted_steps > 0 and tr.rejected_steps >= 0
    np.testing.assert_array_equal(tr.final_populations, tr.populations[-1])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_ideal_norm_conserved(seed):
    rng = np.random.default_rng(seed)
    tr = evolve(random_model(rng, t0=10.0), None, basis_state(1), IntegratorConfig(sample_count=51))
    assert np.abs(tr.norms - 1.0).max() < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_norm_decays_monotonically(seed):
    rng = np.random.default_rng(seed)
    tr = evolve(random_model(rng, t0=10.0), random_decay(rng), basis_state(1),
                IntegratorConfig(sample_count=201))
    assert np.all(np.diff(tr.norms) <= 1e-12)
    assert tr.norms[-1] <= 1.0


@pytest.mark.parametrize("gamma", [0.0, 1e-3, 0.05])
def test_uniform_decay_factorizes(gamma):
    p = ModelParams(kappa=0.5, omega=0.7, phi=0.4, varphi=2.0, t0=10.0)
    cfg = IntegratorConfig(sample_count=21)
    ideal = evolve(p, None, basis_state(1), cfg)
    lossy = evolve(p, DecayParams(gamma, gamma, gamma), basis_state(1), cfg)
    factor = np.exp(-2 * gamma * (ideal.times + p.t0))
    np.testing.assert_allclose(lossy.populations, ideal.populations * factor[:, None], atol=1e-9)


@pytest.mark.parametrize("delta", [0.3, -1.7, math.pi])
def test_gauge_invariance(delta):
    p = ModelParams(kappa=0.4, omega=0.8, phi=0.2, varphi=-0.6, t0=20.0)
    q = ModelParams(kappa=0.4, omega=0.8, phi=0.2 + delta, varphi=-0.6 + 2 * delta, t0=20.0)
    d = DecayParams(0.01, 0.1, 0.02, delta=0.3)
    np.testing.assert_allclose(final_populations(p, d), final_populations(q, d), atol=1e-9)


def test_zeno_suppresses_intermediate_population():
    p = ModelParams(kappa=1.0, omega=1.0, t0=50.0)
    tr = evolve(p, DecayParams(gamma2=1e4), basis_state(1), IntegratorConfig(sample_count=2001))
    assert tr.populations[:, 1].max() < 1e-3


def test_stiff_decay_converges():
    p = ModelParams(kappa=1.0, omega=1.0, t0=50.0)
    value, err = convergence_check(p, DecayParams(gamma2=1e5))
    assert err < 1e-5
    assert 0.9 < value < 1.0


def test_convergence_check_ideal():
    value, err = convergence_check(ModelParams(kappa=0.5, omega=0.5, t0=30.0))
    assert err < 1e-6
    assert value == pytest.approx(transfer_efficiency(ModelParams(kappa=0.5, omega=0.5, t0=30.0)), abs=1e-6)


def _fixed_error(method, h, p, exact):
    cfg = IntegratorConfig(method=method, adaptive=False, max_step=h)
    return np.abs(evolve(p, None, basis_state(1), cfg).final_state - exact).max()


@pytest.mark.parametrize("method,order", [("midpoint", 2), ("magnus4", 4)])
def test_convergence_order(method, order):
    p = ModelParams(kappa=1.0, omega=0.5, phi=0.3, t0=4.0)
    exact = reference_state(p, None, basis_state(1))[-1]
    e1 = _fixed_error(method, 0.08, p, exact)
    e2 = _fixed_error(method, 0.04, p, exact)
    assert e1 / e2 > 2**order * 0.8


def test_magnus4_beats_midpoint_at_equal_tolerance():
    p = ModelParams(kappa=1.0, omega=0.5, t0=20.0)
    a = evolve(p, None, basis_state(1), IntegratorConfig(method="midpoint", rel_tol=1e-8, abs_tol=1e-10))
    b = evolve(p, None, basis_state(1), IntegratorConfig(method="magnus4", rel_tol=1e-8, abs_tol=1e-10))
    assert b.accepted_steps < a.accepted_steps
    np.testing.assert_allclose(a.final_populations, b.final_populations, atol=1e-6)


def test_transfer_efficiency_reverse_direction_and_validation():
    p = ModelParams(kappa=0.5, omega=0.3, t0=20.0)
    P = final_populations(p, None, source=3)
    assert transfer_efficiency(p, None, source=3, target=1) == pytest.approx(P[0])
    with pytest.raises(ValueError):
        transfer_efficiency(p, None, source=4)
    with pytest.raises(ValueError):
        transfer_efficiency(p, None, target=0)


def test_initial_state_validation():
    p = ModelParams(kappa=1.0, t0=5.0)
    with pytest.raises(ValueError):
        evolve(p, None, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        evolve(p, None, np.array([1.0, 0.0]))


@pytest.mark.parametrize("kwargs", [
    dict(rel_tol=1e-5), dict(rel_tol=0.0), dict(abs_tol=0.0), dict(max_step=-1.0),
    dict(init_step=0.0), dict(sample_count=1), dict(method="rk4"), dict(adaptive=False),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_tightened():
    cfg = IntegratorConfig().tightened(10.0)
    assert cfg.rel_tol == pytest.approx(1e-11) and cfg.abs_tol == pytest.approx(1e-13)


def test_integration_error_on_overflow():
    M0 = np.diag([800.0, 0.0]).astype(complex)
    with pytest.raises(IntegrationError) as info:
        dynamics._propagate(M0, np.zeros((2, 2), complex), np.array([1, 0], complex), 1.0,
                            IntegratorConfig())
    assert math.isfinite(info.value.t) and info.value.step > 0


def test_max_step_respected_in_fixed_mode():
    p = ModelParams(kappa=1.0, t0=5.0)
    tr = evolve(p, None, basis_state(1), IntegratorConfig(adaptive=False, max_step=0.01))
    assert tr.accepted_steps == 1000


# --- two-state reference ------------------------------------------------------


def test_lz_reference_without_coupling():
    assert lz_two_state_reference(0.0, 0.0, 1.0, 50.0) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("varphi", [0.5, math.pi, -2.0])
def test_lz_reference_phase_independent(varphi):
    a = lz_two_state_reference(0.7, 0.0, 0.5, 30.0)
    assert lz_two_state_reference(0.7, varphi, 0.5, 30.0) == pytest.approx(a, abs=1e-9)


def test_lz_reference_against_oracle_and_asymptote():
    value = lz_two_state_reference(1.0, 0.0, 1.0, 50.0)
    H0 = np.array([[0, 1], [1, 0]], complex)
    B = np.diag([-1.0, 1.0])
    sol = solve_ivp(lambda t, y: -1j * ((H0 + t * B) @ y), (-50, 50), np.array([1, 0], complex),
                    method="DOP853", rtol=1e-12, atol=1e-14)
    assert value == pytest.approx(abs(sol.y[1, -1]) ** 2, abs=1e-8)
    assert landau_zener_asymptotic(1.0, 1.0) == pytest.approx(1 - math.exp(-math.pi))
    assert abs(value - landau_zener_asymptotic(1.0, 1.0)) < 0.01


def test_lz_reference_validation():
    with pytest.raises(ValueError):
        lz_two_state_reference(1.0, 0.0, 0.0, 10.0)
    with pytest.raises(ValueError):
        lz_two_state_reference(-1.0, 0.0, 1.0, 10.0)


# Final populations at long windows, computed once with an explicit
# eighth-order Runge-Kutta integration (rtol 1e-12, atol 1e-14).
REFERENCE = [
    (ModelParams(kappa=0.05, t0=500.0), 1, [7.83237705e-07, 1.76844788e-03, 9.98230769e-01]),
    (ModelParams(kappa=0.1, omega=1.0, varphi=math.pi, t0=500.0), 1,
     [6.09169858e-04, 9.94923471e-01, 4.46735856e-03]),
    (ModelParams(kappa=0.1, omega=1.8, varphi=math.pi, t0=500.0), 1,
     [7.62907486e-04, 8.03395281e-04, 9.98433697e-01]),
    (ModelParams(kappa=0.1, omega=1.0, varphi=math.pi, t0=500.0), 3,
     [9.98753119e-01, 6.37711354e-04, 6.09169858e-04]),
    (ModelParams(kappa=1.2875, t0=500.0), 1, [0.00779854, 0.16102162, 0.83117983]),
]


@pytest.mark.parametrize("p,source,expected", REFERENCE)
def test_long_window_reference_values(p, source, expected):
    np.testing.assert_allclose(final_populations(p, None, source), expected, atol=2e-8)
