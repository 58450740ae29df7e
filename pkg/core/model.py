"""
Modelo de equações de swing com parâmetros não homogêneos.

Contém o sistema, o estado, a decomposição macro-micro e os resumos de
parâmetros extremais e de flutuação usados pelo certificado.
"""
import logging
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from core.graph import WeightedGraph

logger = logging.getLogger(__name__)


def _frozen_vector(values, name: str) -> np.ndarray:
    """Vetor 1-D finito e somente leitura."""
    v = np.array(values, dtype=float, copy=True)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class SwingSystem:
    """m_i θ''_i + d_i θ'_i = Ω_i + sum_j a_ij sin(θ_j - θ_i)."""

    m: np.ndarray
    d: np.ndarray
    omega_nat: np.ndarray
    graph: WeightedGraph

    def __post_init__(self):
        m = _frozen_vector(self.m, "m")
        d = _frozen_vector(self.d, "d")
        omega_nat = _frozen_vector(self.omega_nat, "omega")
        n = self.graph.n
        for name, v in (("m", m), ("d", d), ("omega", omega_nat)):
            if v.shape[0] != n:
                raise ValueError(f"{name} has length {v.shape[0]}, expected {n}")
        if np.any(m <= 0):
            raise ValueError("m must be strictly positive")
        if np.any(d <= 0):
            raise ValueError("d must be strictly positive")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "omega_nat", omega_nat)

    @property
    def n(self) -> int:
        return self.graph.n

    @classmethod
    def from_arrays(cls, m, d, omega, coupling) -> "SwingSystem":
        """Constrói o sistema a partir de listas; a matriz é validada em WeightedGraph."""
        return cls(m=m, d=d, omega_nat=omega, graph=WeightedGraph(coupling))

    def replace_omega(self, omega) -> "SwingSystem":
        """Cópia com novas frequências naturais."""
        return replace(self, omega_nat=omega)


@dataclass(frozen=True)
class State:
    """Fases e frequências num instante; fases vivem em R^n, sem módulo 2π."""

    theta: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        theta = _frozen_vector(self.theta, "theta")
        omega = _frozen_vector(self.omega, "omega")
        if theta.shape != omega.shape:
            raise ValueError(f"theta and omega lengths differ: {theta.shape[0]} != {omega.shape[0]}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "omega", omega)

    @property
    def n(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class ParamSummary:
    a_u: float
    a_l: float
    d_u: float
    d_l: float
    m_u: float
    m_l: float
    lam: float
    d_hat: np.ndarray
    m_hat: np.ndarray
    homogeneous: bool


def homogeneous_damping(s: SwingSystem) -> bool:
    """m_i/d_i iguais para todos os osciladores."""
    ratio = s.m / s.d
    return bool(np.allclose(ratio, ratio[0], rtol=1e-12, atol=0.0))


def param_summary(s: SwingSystem) -> ParamSummary:
    """Extremais sobre as arestas de W e a constante de flutuação λ."""
    weights = s.graph.a[s.graph.edge_mask]
    if weights.size == 0:
        raise ValueError("no edges")
    n = s.n
    d_hat = s.d - s.d.mean()
    m_hat = s.m - s.m.mean()
    lam = np.sqrt(np.sum(d_hat ** 2)) / np.sqrt(n) + 2.0 * np.sqrt(np.sum(m_hat ** 2)) / np.sqrt(n)
    return ParamSummary(
        a_u=float(weights.max()),
        a_l=float(weights.min()),
        d_u=float(s.d.max()),
        d_l=float(s.d.min()),
        m_u=float(s.m.max()),
        m_l=float(s.m.min()),
        lam=float(lam),
        d_hat=d_hat,
        m_hat=m_hat,
        homogeneous=homogeneous_damping(s),
    )


def macro_micro(s: SwingSystem) -> Tuple[SwingSystem, float]:
    """
    Decomposição macro-micro: Ω_c = sum Ω_i / tr(D) e Ω̂_i = Ω_i - d_i Ω_c.

    O sistema retornado tem frequências naturais de soma zero.
    """
    omega_c = float(s.omega_nat.sum() / s.d.sum())
    omega_hat = s.omega_nat - s.d * omega_c
    # Remove o resíduo de arredondamento sem alterar a escala
    omega_hat = omega_hat - s.d * (omega_hat.sum() / s.d.sum())
    return s.replace_omega(omega_hat), omega_c


def to_micro_state(x: State, omega_c: float) -> State:
    """Dados iniciais casados: θ̂(0) = θ(0), ω̂(0) = ω(0) - Ω_c."""
    return State(theta=x.theta, omega=x.omega - omega_c)


def weighted_sums(s: SwingSystem, x: State) -> Tuple[float, float, float, float]:
    """(θ_c, θ_s, ω_s, ω_c) com θ_s = sum d_i θ_i e ω_s = sum m_i ω_i."""
    theta_c = float(np.mean(x.theta))
    theta_s = float(np.dot(s.d, x.theta))
    omega_s = float(np.dot(s.m, x.omega))
    omega_c = float(np.mean(x.omega))
    return theta_c, theta_s, omega_s, omega_c
