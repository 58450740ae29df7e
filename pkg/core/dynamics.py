"""
Integração das equações de swing e monitores ao longo das trajetórias.

RK4 clássico de passo fixo, vetorizado sobre lotes de estados iniciais
(e de sistemas), monitores de conservação, limite a priori de frequência,
energia e dissipação, e detecção de sincronização de frequências.
"""
import logging
from dataclasses import dataclass
from math import sqrt
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy.integrate import solve_ivp
from scipy.signal import find_peaks
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from core.certificate import CertificatePlan
from core.energy import dissipation_batch, energy_tilde_batch
from core.model import State, SwingSystem
from core.settings import DEFAULT_DT, DEFAULT_HORIZON, DEFAULT_RECORD_EVERY, DEFAULT_SYNC_TOL, RATE_FLOOR

logger = logging.getLogger(__name__)


class BlowUpError(RuntimeError):
    """Estado não finito durante a integração (passo grande demais)."""


@dataclass(frozen=True)
class _Params:
    m: np.ndarray
    d: np.ndarray
    omega_nat: np.ndarray
    a: np.ndarray

    @classmethod
    def of(cls, s: SwingSystem) -> "_Params":
        return cls(s.m, s.d, s.omega_nat, s.graph.a)

    @classmethod
    def stack(cls, systems: Sequence[SwingSystem]) -> "_Params":
        return cls(
            np.stack([s.m for s in systems]),
            np.stack([s.d for s in systems]),
            np.stack([s.omega_nat for s in systems]),
            np.stack([s.graph.a for s in systems]),
        )


def _force(p: _Params, theta: np.ndarray) -> np.ndarray:
    # sum_j a_ij sin(θ_j - θ_i) = cos θ_i (A sin θ)_i - sin θ_i (A cos θ)_i
    sin_t = np.sin(theta)
    cos_t = np.cos(theta)
    a_sin = np.matmul(p.a, sin_t[..., None])[..., 0]
    a_cos = np.matmul(p.a, cos_t[..., None])[..., 0]
    return p.omega_nat + cos_t * a_sin - sin_t * a_cos


def _derivs(p: _Params, theta: np.ndarray, omega: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return omega, (_force(p, theta) - p.d * omega) / p.m


def _rk4_step(p: _Params, theta: np.ndarray, omega: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    k1t, k1w = _derivs(p, theta, omega)
    k2t, k2w = _derivs(p, theta + 0.5 * dt * k1t, omega + 0.5 * dt * k1w)
    k3t, k3w = _derivs(p, theta + 0.5 * dt * k2t, omega + 0.5 * dt * k2w)
    k4t, k4w = _derivs(p, theta + dt * k3t, omega + dt * k3w)
    theta = theta + dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    omega = omega + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    return theta, omega


def _step_count(dt: float, horizon: float) -> int:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not horizon >= dt:
        raise ValueError(f"horizon must be >= dt, got horizon={horizon!r} dt={dt!r}")
    return int(round(horizon / dt))


def rhs(s: SwingSystem, x: State) -> Tuple[np.ndarray, np.ndarray]:
    """(dθ, dω) do sistema de primeira ordem."""
    return _derivs(_Params.of(s), x.theta, x.omega)


def freq_bound(s: SwingSystem, x0: State) -> np.ndarray:
    """B_i = |ω_i(0)| + (|Ω_i| + sum_j a_ij) / d_i."""
    return np.abs(x0.omega) + (np.abs(s.omega_nat) + s.graph.a.sum(axis=1)) / s.d


def freq_bound_profile(s: SwingSystem, x0: State, t) -> np.ndarray:
    """Versão dependente do tempo do limite de frequência, formato (len(t), n)."""
    t = np.asarray(t, dtype=float)[:, None]
    decay = np.exp(-s.d * t / s.m)
    forcing = (np.abs(s.omega_nat) + s.graph.a.sum(axis=1)) / s.d
    return np.abs(x0.omega) * decay + forcing * (1.0 - decay)


@dataclass(frozen=True)
class Trajectory:
    """Trajetória amostrada em passo uniforme com os canais de monitoramento."""

    system: SwingSystem
    eps: float
    times: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    diam: np.ndarray
    spread: np.ndarray
    etilde: np.ndarray
    diss: np.ndarray
    conserved: np.ndarray
    bound: np.ndarray
    freq_margin: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return self.times.shape[0]

    def state(self, k: int) -> State:
        return State(self.theta[k], self.omega[k])

    @property
    def final(self) -> State:
        return self.state(-1)

    def to_frame(self, every: int = DEFAULT_RECORD_EVERY) -> pd.DataFrame:
        """Linhas a cada `every` passos, sempre incluindo o instante final."""
        if every < 1:
            raise ValueError(f"record interval must be >= 1, got {every!r}")
        rows = np.arange(0, len(self), every)
        if rows[-1] != len(self) - 1:
            rows = np.append(rows, len(self) - 1)
        n = self.theta.shape[1]
        data = {"t": self.times[rows]}
        for i in range(n):
            data[f"theta_{i + 1}"] = self.theta[rows, i]
        for i in range(n):
            data[f"omega_{i + 1}"] = self.omega[rows, i]
        data.update(
            diam=self.diam[rows],
            spread=self.spread[rows],
            etilde=self.etilde[rows],
            diss=self.diss[rows],
            conserved=self.conserved[rows],
        )
        return pd.DataFrame(data)


def _trajectory(s: SwingSystem, times: np.ndarray, theta: np.ndarray, omega: np.ndarray,
                eps: float) -> Trajectory:
    bound = freq_bound(s, State(theta[0], omega[0]))
    arrays = {
        "times": times,
        "theta": theta,
        "omega": omega,
        "diam": np.ptp(theta, axis=1),
        "spread": np.ptp(omega, axis=1),
        "etilde": energy_tilde_batch(s, theta, omega, eps),
        "diss": dissipation_batch(theta, omega),
        "conserved": theta @ s.d + omega @ s.m,
        "bound": bound,
        "freq_margin": np.min(bound - np.abs(omega), axis=1),
    }
    for v in arrays.values():
        v.setflags(write=False)
    return Trajectory(system=s, eps=float(eps), **arrays)


def _run(p: _Params, theta: np.ndarray, omega: np.ndarray, dt: float, steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """Laço RK4 guardando todos os passos: saídas (steps + 1, ..., n)."""
    thetas = np.empty((steps + 1,) + theta.shape)
    omegas = np.empty_like(thetas)
    thetas[0], omegas[0] = theta, omega
    for k in range(1, steps + 1):
        theta, omega = _rk4_step(p, theta, omega, dt)
        if not (np.isfinite(theta).all() and np.isfinite(omega).all()):
            raise BlowUpError(f"blow-up detected at t={k * dt!r}")
        thetas[k], omegas[k] = theta, omega
    return thetas, omegas


def integrate(s: SwingSystem, x0: State, dt: float = DEFAULT_DT, horizon: float = DEFAULT_HORIZON,
              eps: float = 1.0) -> Trajectory:
    """
    RK4 clássico de passo fixo a partir de x0.

    eps só afeta o canal Ẽ(t). Levanta BlowUpError se o estado deixar de ser finito.
    """
    if x0.n != s.n:
        raise ValueError(f"state has {x0.n} oscillators, system has {s.n}")
    steps = _step_count(dt, horizon)
    theta, omega = _run(_Params.of(s), x0.theta.copy(), x0.omega.copy(), dt, steps)
    times = np.arange(steps + 1) * dt
    logger.debug(f"Integração RK4 concluída: {steps} passos, dt={dt}")
    return _trajectory(s, times, theta, omega, eps)


def integrate_ensemble(systems: Sequence[SwingSystem], states: Sequence[State], dt: float = DEFAULT_DT,
                       horizon: float = DEFAULT_HORIZON, eps: float = 1.0) -> List[Trajectory]:
    """Vários sistemas com o mesmo n integrados num único laço vetorizado."""
    if len(systems) != len(states) or not systems:
        raise ValueError("systems and states must be non-empty and of equal length")
    n = systems[0].n
    if any(s.n != n for s in systems) or any(x.n != n for x in states):
        raise ValueError("all systems and states must share the same n")
    steps = _step_count(dt, horizon)
    theta0 = np.stack([x.theta for x in states])
    omega0 = np.stack([x.omega for x in states])
    theta, omega = _run(_Params.stack(systems), theta0, omega0, dt, steps)
    times = np.arange(steps + 1) * dt
    return [_trajectory(s, times, theta[:, k], omega[:, k], eps) for k, s in enumerate(systems)]


def integrate_adaptive(s: SwingSystem, x0: State, dt: float = DEFAULT_DT, horizon: float = DEFAULT_HORIZON,
                       rtol: float = 1e-9, atol: float = 1e-11, eps: float = 1.0) -> Trajectory:
    """Dormand-Prince (RK45) adaptativo do scipy, amostrado na grade uniforme."""
    steps = _step_count(dt, horizon)
    times = np.arange(steps + 1) * dt
    p = _Params.of(s)
    n = s.n

    def fun(_t, y):
        dtheta, domega = _derivs(p, y[:n], y[n:])
        return np.concatenate([dtheta, domega])

    sol = solve_ivp(fun, (0.0, times[-1]), np.concatenate([x0.theta, x0.omega]),
                    method="RK45", t_eval=times, rtol=rtol, atol=atol)
    if not sol.success or not np.isfinite(sol.y).all():
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        raise BlowUpError(f"blow-up detected at t={t_fail!r} ({sol.message})")
    return _trajectory(s, times, sol.y[:n].T.copy(), sol.y[n:].T.copy(), eps)


@dataclass(frozen=True)
class BatchOutcome:
    """Resultados por estado inicial de simulate_batch, sem guardar trajetórias."""

    synced: np.ndarray
    t_sync: np.ndarray
    final_spread: np.ndarray
    max_diam: np.ndarray
    blowup: np.ndarray
    blowup_time: np.ndarray


def simulate_batch(s: SwingSystem, theta0, omega0, dt: float = DEFAULT_DT, horizon: float = DEFAULT_HORIZON,
                   tol: float = DEFAULT_SYNC_TOL) -> BatchOutcome:
    """
    Integra um lote (B, n) de estados iniciais com monitores online.

    t_sync é o primeiro instante a partir do qual o espalhamento de frequência
    fica abaixo de tol até o horizonte (NaN se nunca). Células com estado não
    finito são marcadas como blow-up, congeladas e contadas como não sincronizadas.
    """
    steps = _step_count(dt, horizon)
    p = _Params.of(s)
    theta = np.array(theta0, dtype=float, copy=True)
    omega = np.array(omega0, dtype=float, copy=True)
    if theta.ndim != 2 or theta.shape != omega.shape or theta.shape[1] != s.n:
        raise ValueError(f"initial states must have shape (B, {s.n})")
    batch = theta.shape[0]
    last_bad = np.where(np.ptp(omega, axis=1) >= tol, 0, -1)
    max_diam = np.ptp(theta, axis=1)
    blowup = np.zeros(batch, dtype=bool)
    blowup_time = np.full(batch, np.nan)

    for k in range(1, steps + 1):
        theta, omega = _rk4_step(p, theta, omega, dt)
        bad = ~(np.isfinite(theta).all(axis=1) & np.isfinite(omega).all(axis=1))
        if bad.any():
            fresh = bad & ~blowup
            blowup_time[fresh] = k * dt
            blowup |= bad
            theta[bad] = 0.0
            omega[bad] = 0.0
            logger.warning(f"Blow-up em {int(fresh.sum())} células em t={k * dt:.6g}")
        spread = np.ptp(omega, axis=1)
        last_bad = np.where(spread >= tol, k, last_bad)
        np.maximum(max_diam, np.ptp(theta, axis=1), out=max_diam)

    synced = (last_bad < steps) & ~blowup
    t_sync = np.where(synced, (last_bad + 1) * dt, np.nan)
    final_spread = np.where(blowup, np.nan, np.ptp(omega, axis=1))
    return BatchOutcome(synced, t_sync, final_spread, max_diam, blowup, blowup_time)


class SyncReport(BaseModel):
    synced: bool
    t_sync: Optional[float] = None
    rate: Optional[float] = None
    rate_r2: Optional[float] = None
    final_spread: float
    phase_locked: bool
    final_phase_gaps: List[List[float]]
    tol: float
    horizon: float


def _decay_fit(times: np.ndarray, spread: np.ndarray) -> Tuple[Optional[float], Optional[float]]:
    """Inclinação de log(espalhamento) sobre a envoltória de picos, e o R²."""
    peaks, _ = find_peaks(spread)
    pts = peaks if peaks.size >= 3 else np.arange(spread.size)
    below = np.nonzero(spread[pts] < RATE_FLOOR)[0]
    if below.size:
        pts = pts[:below[0]]
    if pts.size < 3:
        return None, None
    x = times[pts].reshape(-1, 1)
    y = np.log(spread[pts])
    fit = LinearRegression().fit(x, y)
    return float(fit.coef_[0]), float(r2_score(y, fit.predict(x)))


def detect_sync(tr: Trajectory, tol: float = DEFAULT_SYNC_TOL) -> SyncReport:
    """Sincronização de frequências: espalhamento < tol sustentado até o horizonte."""
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    spread = tr.spread
    violations = np.nonzero(spread >= tol)[0]
    if violations.size == 0:
        synced, t_sync = True, float(tr.times[0])
    elif violations[-1] == len(tr) - 1:
        synced, t_sync = False, None
    else:
        synced, t_sync = True, float(tr.times[violations[-1] + 1])

    rate, r2 = None, None
    if synced:
        window = tr.times >= t_sync / 2.0
        rate, r2 = _decay_fit(tr.times[window], spread[window])

    tail = tr.times >= tr.times[0] + 0.9 * (tr.times[-1] - tr.times[0])
    gaps = tr.theta[tail] - tr.theta[tail][:, :1]
    phase_locked = bool(np.max(np.ptp(gaps, axis=0)) < tol)
    final = tr.theta[-1]

    report = SyncReport(
        synced=synced,
        t_sync=t_sync,
        rate=rate,
        rate_r2=r2,
        final_spread=float(spread[-1]),
        phase_locked=phase_locked,
        final_phase_gaps=(final[:, None] - final[None, :]).tolist(),
        tol=tol,
        horizon=tr.horizon,
    )
    logger.info(f"Sincronização: synced={report.synced} t_sync={report.t_sync} rate={report.rate}")
    return report


def energy_inequality_residuals(tr: Trajectory, plan: CertificatePlan) -> Tuple[np.ndarray, np.ndarray]:
    """
    Resíduos por passo da desigualdade diferencial de Ẽ, forma trapezoidal.

    tr deve ser uma trajetória do sistema micro do plano. Retorna
    (residual, residual_etilde_only); valores <= 0 satisfazem a desigualdade e
    passos com diâmetro acima de D0 ficam NaN.
    """
    if not plan.admissible:
        raise ValueError("empty epsilon interval")
    b = plan.base
    eps = b["eps"]
    et = energy_tilde_batch(plan.system, tr.theta, tr.omega, eps)
    diss = dissipation_batch(tr.theta, tr.omega)
    gain = 2.0 * sqrt(2.0) * max(eps, 1.0) * b["omega_hat_norm"] / sqrt(b["c0"])
    root = np.sqrt(np.maximum(et, 0.0))
    dt = np.diff(tr.times)
    rate = np.diff(et) / dt
    forcing = gain * 0.5 * (root[1:] + root[:-1])
    residual = rate + b["c_ell_tilde"] * 0.5 * (diss[1:] + diss[:-1]) - forcing
    etilde_only = rate + b["c_ell_tilde"] / b["c1"] * 0.5 * (et[1:] + et[:-1]) - forcing
    inside = (tr.diam[1:] <= b["d0"]) & (tr.diam[:-1] <= b["d0"])
    return np.where(inside, residual, np.nan), np.where(inside, etilde_only, np.nan)
