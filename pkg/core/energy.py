"""
Potencial gradiente, funcionais de energia E e Ẽ e taxa de dissipação D.

As versões *_batch aceitam arrays (..., n) e são vetorizadas sobre os eixos
de lote; as operações públicas recebem um State.
"""
from typing import Tuple

import numpy as np

from core.model import State, SwingSystem


def potential(s: SwingSystem, theta: np.ndarray) -> float:
    """f(θ) = sum_k Ω_k θ_k + 1/2 sum_{k,l} a_kl cos(θ_k - θ_l)."""
    theta = np.asarray(theta, dtype=float)
    diff = theta[:, None] - theta[None, :]
    return float(np.dot(s.omega_nat, theta) + 0.5 * np.sum(s.graph.a * np.cos(diff)))


def grad_potential(s: SwingSystem, theta: np.ndarray) -> np.ndarray:
    """∇f(θ)_i = Ω_i + sum_j a_ij sin(θ_j - θ_i)."""
    theta = np.asarray(theta, dtype=float)
    diff = theta[None, :] - theta[:, None]
    return s.omega_nat + np.sum(s.graph.a * np.sin(diff), axis=1)


def energy_e_batch(s: SwingSystem, theta, omega, eps: float) -> np.ndarray:
    """E vetorizado sobre (..., n); soma no último eixo."""
    theta = np.asarray(theta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    return (
        eps * np.sum(s.d * theta ** 2, axis=-1)
        + 2.0 * eps * np.sum(s.m * theta * omega, axis=-1)
        + np.sum(s.m * omega ** 2, axis=-1)
    )


def energy_tilde_batch(s: SwingSystem, theta, omega, eps: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    # Flutuações em torno da média simples θ_c
    fluct = theta - theta.mean(axis=-1, keepdims=True)
    return energy_e_batch(s, fluct, omega, eps)


def dissipation_batch(theta, omega) -> np.ndarray:
    """D vetorizado; não depende dos parâmetros do sistema."""
    theta = np.asarray(theta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    fluct = theta - theta.mean(axis=-1, keepdims=True)
    return np.sum(omega ** 2, axis=-1) + np.sum(fluct ** 2, axis=-1)


def energy_e(s: SwingSystem, x: State, eps: float) -> float:
    """E[θ, ω] = ε<Dθ, θ> + 2ε<Mθ, ω> + <Mω, ω>."""
    return float(energy_e_batch(s, x.theta, x.omega, eps))


def energy_tilde(s: SwingSystem, x: State, eps: float) -> float:
    """Ẽ[θ, ω]: o mesmo funcional aplicado às flutuações θ - θ_c."""
    return float(energy_tilde_batch(s, x.theta, x.omega, eps))


def dissipation(x: State) -> float:
    """D[θ, ω] = ||ω||² + ||θ - θ_c||²."""
    return float(dissipation_batch(x.theta, x.omega))


def coupling_bounds(s: SwingSystem, x: State, d0: float, a_u: float, a_l: float,
                    d_l: float, l_star: float) -> Tuple[float, float, float, float]:
    """
    Estimativas da força de interação quando o diâmetro de fase é <= D0.

    Retorna (lhs_i, rhs_i, lhs_ii, rhs_ii) com
      (i)  a_u sum_W |sin(θ_j-θ_i)(ω_j-ω_i)| <= a_u² N²/d_l ||θ-θ_c||² + d_l ||ω||²
      (ii) sum_W a_ij sin(θ_j-θ_i)(θ_j-θ_i) >= 2 R0 a_l L* N ||θ-θ_c||²
    """
    n = s.n
    mask = s.graph.edge_mask
    dtheta = x.theta[None, :] - x.theta[:, None]
    domega = x.omega[None, :] - x.omega[:, None]
    fluct_sq = float(np.sum((x.theta - x.theta.mean()) ** 2))
    r0 = np.sin(d0) / d0

    lhs_i = a_u * float(np.sum(np.abs(np.sin(dtheta) * domega)[mask]))
    rhs_i = a_u ** 2 * n ** 2 / d_l * fluct_sq + d_l * float(np.sum(x.omega ** 2))
    lhs_ii = float(np.sum((s.graph.a * np.sin(dtheta) * dtheta)[mask]))
    rhs_ii = 2.0 * r0 * a_l * l_star * n * fluct_sq
    return lhs_i, rhs_i, lhs_ii, rhs_ii
