# tests/test_dynamics.py

import os
import sys
from math import pi

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core.certificate import certify, evaluate_batch, prepare
from core.dynamics import (
    BlowUpError,
    detect_sync,
    energy_inequality_residuals,
    freq_bound,
    freq_bound_profile,
    integrate,
    integrate_adaptive,
    integrate_ensemble,
    rhs,
    simulate_batch,
)
from core.energy import grad_potential
from core.model import State, SwingSystem
from core.roa import generate_system, init_frequencies

D0 = pi / 4


def pair(m, d, omega=(0.0, 0.0), a=0.2) -> SwingSystem:
    return SwingSystem.from_arrays(list(m), list(d), list(omega), [[0.0, a], [a, 0.0]])


def pendulum_reference(m, d, delta_omega, a, delta0, ddelta0, dt, steps):
    """RK4 escalar da equação reduzida m Δ'' + d Δ' = ΔΩ - 2a sin Δ."""
    def f(x, v):
        return v, (delta_omega - 2 * a * np.sin(x) - d * v) / m

    x, v = delta0, ddelta0
    out = [x]
    for _ in range(steps):
        k1 = f(x, v)
        k2 = f(x + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1])
        k3 = f(x + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1])
        k4 = f(x + dt * k3[0], v + dt * k3[1])
        x += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        out.append(x)
    return np.array(out)


@pytest.fixture
def hetero_pair():
    """Dois osciladores com parâmetros nas faixas padrão e Ω̂ pequeno."""
    return pair((0.12, 0.13), (0.34, 0.36), omega=(0.0005, -0.0005))


@pytest.fixture
def homogeneous():
    return pair((0.125, 0.125), (0.35, 0.35), omega=(0.03, -0.03))


# --- rhs ---

def test_rhs_equilibrio():
    s = pair((0.1, 0.1), (0.35, 0.35))
    dtheta, domega = rhs(s, State([0.4, 0.4], [0.0, 0.0]))
    np.testing.assert_array_equal(dtheta, 0.0)
    np.testing.assert_allclose(domega, 0.0, atol=1e-15)


def test_rhs_reducao_pendulo(homogeneous):
    rng = np.random.default_rng(9)
    for _ in range(20):
        x = State(rng.uniform(-3, 3, 2), rng.uniform(-1, 1, 2))
        _, domega = rhs(homogeneous, x)
        delta = x.theta[0] - x.theta[1]
        lhs = 0.125 * (domega[0] - domega[1]) + 0.35 * (x.omega[0] - x.omega[1])
        assert lhs == pytest.approx(0.06 - 0.4 * np.sin(delta), abs=1e-14)


def test_rhs_forca_igual_gradiente():
    rng = np.random.default_rng(4)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        upper = np.triu(rng.uniform(0, 1, (n, n)), k=1)
        s = SwingSystem.from_arrays(rng.uniform(0.1, 0.15, n), rng.uniform(0.3, 0.4, n),
                                    rng.uniform(-1, 1, n), upper + upper.T)
        x = State(rng.uniform(-np.pi, np.pi, n), rng.uniform(-1, 1, n))
        _, domega = rhs(s, x)
        np.testing.assert_allclose(s.m * domega + s.d * x.omega, grad_potential(s, x.theta), atol=1e-13)


# --- Integração ---

def test_integracao_equilibrio_constante():
    s = pair((0.1, 0.1), (0.35, 0.35))
    tr = integrate(s, State([0.7, 0.7], [0.0, 0.0]), dt=0.01, horizon=2.0)
    assert len(tr) == 201
    np.testing.assert_allclose(tr.theta, 0.7, atol=1e-13)
    np.testing.assert_allclose(tr.omega, 0.0, atol=1e-13)


def test_integracao_validacao(hetero_pair):
    x0 = State([0.0, 0.0], [0.0, 0.0])
    with pytest.raises(ValueError, match="dt must be positive"):
        integrate(hetero_pair, x0, dt=0.0, horizon=1.0)
    with pytest.raises(ValueError, match="horizon"):
        integrate(hetero_pair, x0, dt=0.1, horizon=0.05)


def test_blow_up_detectado(hetero_pair):
    x0 = State([3.0, 1.0], [1.0, -1.0])
    with np.errstate(all="ignore"):
        with pytest.raises(BlowUpError, match="blow-up detected at t="):
            integrate(hetero_pair, x0, dt=1000.0, horizon=1e5)


def test_pendulo_contra_referencia(homogeneous):
    x0 = init_frequencies(homogeneous, np.array([2.0, 0.5]))
    dt, horizon = 0.01, 50.0
    tr = integrate(homogeneous, x0, dt=dt, horizon=horizon)
    steps = int(round(horizon / dt))
    ref = pendulum_reference(0.125, 0.35, 0.06, 0.2, 1.5, x0.omega[0] - x0.omega[1], dt / 10, steps * 10)
    deviation = np.max(np.abs((tr.theta[:, 0] - tr.theta[:, 1]) - ref[::10]))
    assert deviation < 1e-6


def test_ordem_rk4(homogeneous):
    x0 = init_frequencies(homogeneous, np.array([3.0, 1.0]))
    fine, horizon = 0.000625, 5.0
    ref = pendulum_reference(0.125, 0.35, 0.06, 0.2, 2.0, x0.omega[0] - x0.omega[1],
                             fine, int(round(horizon / fine)))

    def max_error(dt):
        tr = integrate(homogeneous, x0, dt=dt, horizon=horizon)
        stride = int(round(dt / fine))
        return np.max(np.abs((tr.theta[:, 0] - tr.theta[:, 1]) - ref[::stride]))

    ratio = max_error(0.01) / max_error(0.005)
    assert 12 <= ratio <= 20


def test_adaptativo_concorda_com_rk4(hetero_pair):
    x0 = init_frequencies(hetero_pair, np.array([3.0, 1.0]))
    fixed = integrate(hetero_pair, x0, dt=0.001, horizon=10.0)
    adaptive = integrate_adaptive(hetero_pair, x0, dt=0.001, horizon=10.0)
    np.testing.assert_allclose(adaptive.theta, fixed.theta, atol=1e-6)
    assert len(adaptive) == len(fixed)


# --- Monitores ---

def test_limite_de_frequencia_valor():
    s = pair((0.1, 0.1), (0.35, 0.40))
    bound = freq_bound(s, State([0.0, 0.0], [0.0, 0.0]))
    np.testing.assert_allclose(bound, [0.2 / 0.35, 0.2 / 0.40])


def test_perfil_do_limite(hetero_pair):
    x0 = init_frequencies(hetero_pair, np.array([3.0, 1.0]))
    tr = integrate(hetero_pair, x0, dt=0.001, horizon=20.0)
    profile = freq_bound_profile(hetero_pair, x0, tr.times)
    assert np.all(profile <= tr.bound + 1e-12)
    assert np.all(np.abs(tr.omega) <= profile + 1e-10)


@pytest.mark.slow
def test_conservacao_e_limite_a_priori():
    systems, states = [], []
    rng = np.random.default_rng(99)
    for seed in range(20):
        s, _ = generate_system(seed)
        systems.append(s)
        states.append(init_frequencies(s, rng.uniform(0, pi, 2)))
    for tr in integrate_ensemble(systems, states, dt=1e-3, horizon=200.0):
        assert np.max(np.abs(tr.conserved - tr.conserved[0])) < 1e-8
        assert np.min(tr.freq_margin) >= -1e-10


def test_ensemble_igual_a_individual(hetero_pair, homogeneous):
    x1 = init_frequencies(hetero_pair, np.array([0.5, 2.0]))
    x2 = init_frequencies(homogeneous, np.array([1.0, 0.2]))
    trs = integrate_ensemble([hetero_pair, homogeneous], [x1, x2], dt=0.01, horizon=5.0)
    np.testing.assert_allclose(trs[0].theta, integrate(hetero_pair, x1, dt=0.01, horizon=5.0).theta, atol=1e-13)
    np.testing.assert_allclose(trs[1].omega, integrate(homogeneous, x2, dt=0.01, horizon=5.0).omega, atol=1e-13)


def test_csv_da_trajetoria(hetero_pair):
    tr = integrate(hetero_pair, State([0.1, 0.2], [0.0, 0.0]), dt=0.01, horizon=1.0)
    df = tr.to_frame(every=30)
    assert list(df.columns) == ["t", "theta_1", "theta_2", "omega_1", "omega_2",
                                "diam", "spread", "etilde", "diss", "conserved"]
    assert df["t"].iloc[-1] == pytest.approx(1.0)
    assert len(df) == 5
    assert isinstance(df, pd.DataFrame)


# --- Sincronização ---

def test_sincronizacao_equilibrio():
    s = pair((0.1, 0.1), (0.35, 0.35))
    report = detect_sync(integrate(s, State([0.3, 0.3], [0.0, 0.0]), dt=0.01, horizon=2.0))
    assert report.synced
    assert report.t_sync == 0.0
    assert report.rate is None
    assert report.phase_locked


def test_osciladores_desacoplados_nao_sincronizam():
    s = pair((0.1, 0.1), (0.35, 0.35), omega=(0.1, -0.1), a=0.0)
    x0 = init_frequencies(s, np.array([0.0, 1.0]))
    report = detect_sync(integrate(s, x0, dt=0.01, horizon=20.0))
    assert not report.synced
    assert report.t_sync is None
    assert not report.phase_locked


def test_ponto_3_1_nao_certificado_mas_sincroniza(hetero_pair):
    x0 = init_frequencies(hetero_pair, np.array([3.0, 1.0]))
    assert not certify(hetero_pair, x0, D0).certified
    report = detect_sync(integrate(hetero_pair, x0, dt=1e-3, horizon=60.0))
    assert report.synced
    assert report.t_sync < 60.0
    assert report.rate < 0
    assert report.rate_r2 > 0.99
    assert report.phase_locked


def test_lote_concorda_com_trajetoria(hetero_pair):
    theta0 = np.array([[3.0, 1.0], [0.2, 0.4], [0.0, 2.5]])
    omega0 = np.array([init_frequencies(hetero_pair, t).omega for t in theta0])
    outcome = simulate_batch(hetero_pair, theta0, omega0, dt=1e-3, horizon=40.0)
    for k in range(3):
        tr = integrate(hetero_pair, State(theta0[k], omega0[k]), dt=1e-3, horizon=40.0)
        report = detect_sync(tr)
        assert bool(outcome.synced[k]) == report.synced
        if report.synced:
            assert outcome.t_sync[k] == pytest.approx(report.t_sync, abs=0.01)
        assert outcome.max_diam[k] == pytest.approx(np.max(tr.diam))
    assert not outcome.blowup.any()


def test_lote_marca_blow_up(hetero_pair):
    with np.errstate(all="ignore"):
        outcome = simulate_batch(hetero_pair, np.array([[3.0, 1.0]]), np.array([[1.0, -1.0]]),
                                 dt=1000.0, horizon=1e5)
    assert outcome.blowup[0]
    assert not outcome.synced[0]
    assert np.isfinite(outcome.blowup_time[0])


# --- Desigualdade diferencial de energia ---

def test_desigualdade_de_energia_em_estados_certificados(hetero_pair):
    plan = prepare(hetero_pair, D0, 0.9)
    axis = (np.arange(20) + 0.5) * pi / 20
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    theta = np.column_stack([t1.ravel(), t2.ravel()])
    omega = np.array([init_frequencies(hetero_pair, t).omega for t in theta])
    _, _, certified = evaluate_batch(plan, theta, omega)
    assert certified.any()

    states = [State(theta[k], omega[k] - plan.omega_c) for k in np.nonzero(certified)[0]]
    trajectories = integrate_ensemble([plan.system] * len(states), states, dt=1e-3, horizon=30.0)
    for tr in trajectories:
        assert np.max(tr.diam) < D0
        residual, etilde_only = energy_inequality_residuals(tr, plan)
        assert np.nanmax(residual) <= 1e-6
        assert np.nanmax(etilde_only) <= 1e-6
