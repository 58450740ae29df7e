"""
Módulo do certificado explícito de região de atração.

Avalia as hipóteses H1-H3: conexidade do grafo, a condição paramétrica,
o intervalo admissível de ε, as constantes derivadas e o limite de energia
inicial. Falhas de hipótese viram vereditos no relatório, nunca exceções.
"""
import logging
from dataclasses import dataclass
from math import pi, sqrt
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from core.energy import energy_tilde_batch
from core.graph import GraphConstants, graph_constants
from core.model import ParamSummary, State, SwingSystem, macro_micro, param_summary
from core.settings import AUTO_EPS_OFFSET

logger = logging.getLogger(__name__)

EpsChoice = Union[float, str]


class CertificateReport(BaseModel):
    d0: float
    r0: float
    eps_policy: str
    omega_c: float
    omega_hat_norm: float
    # H1
    h1_pass: bool
    connected: bool
    diameter: Optional[int] = None
    l_star: Optional[float] = None
    # H2
    lam: Optional[float] = None
    homogeneous_damping: Optional[bool] = None
    h2_pass: bool = False
    h2_lhs: Optional[float] = None
    h2_rhs: Optional[float] = None
    eps_lo: Optional[float] = None
    eps_hi: Optional[float] = None
    # H3
    eps: Optional[float] = None
    c0: Optional[float] = None
    c1: Optional[float] = None
    c_ell: Optional[float] = None
    c_ell_tilde: Optional[float] = None
    e_tilde_0: Optional[float] = None
    energy_term: Optional[float] = None
    frequency_term: Optional[float] = None
    lhs_h3: Optional[float] = None
    rhs_h3: Optional[float] = None
    margin: Optional[float] = None
    h3_pass: bool = False
    certified: bool = False
    locked_arc_below_half_pi: bool = False
    reason: Optional[str] = None


def _check_d0(d0: float) -> float:
    if not (0.0 < d0 < pi):
        raise ValueError("D0 out of range")
    return float(d0)


def _require_connected(g: GraphConstants) -> float:
    if not g.connected or g.l_star is None:
        raise ValueError("graph not connected")
    return g.l_star


def check_h2(p: ParamSummary, g: GraphConstants, n: int, d0: float) -> Tuple[bool, float, float]:
    """a_u² N² (2m_u + λ) < d_l² (2 R0 a_l L* N - λ), estrita."""
    d0 = _check_d0(d0)
    ls = _require_connected(g)
    r0 = np.sin(d0) / d0
    lhs = p.a_u ** 2 * n ** 2 * (2.0 * p.m_u + p.lam)
    rhs = p.d_l ** 2 * (2.0 * r0 * p.a_l * ls * n - p.lam)
    return bool(lhs < rhs), float(lhs), float(rhs)


def epsilon_interval(p: ParamSummary, g: GraphConstants, n: int, d0: float) -> Tuple[float, float]:
    """Intervalo aberto (lo, hi) de ε admissível; vazio se H2 falha."""
    passed, _, _ = check_h2(p, g, n, d0)
    if not passed:
        raise ValueError("empty epsilon interval")
    r0 = np.sin(d0) / d0
    lo = p.a_u ** 2 * n ** 2 / (p.d_l * (2.0 * r0 * p.a_l * g.l_star * n - p.lam))
    hi = p.d_l / (2.0 * p.m_u + p.lam)
    return float(lo), float(hi)


def constants(p: ParamSummary, g: GraphConstants, n: int, d0: float,
              eps: float) -> Tuple[float, float, float, float]:
    """C0, C1, Cℓ e C̃ℓ = Cℓ - ελ para ε admissível."""
    lo, hi = epsilon_interval(p, g, n, d0)
    if not (lo < eps < hi):
        raise ValueError(f"epsilon {eps!r} outside admissible interval ({lo!r}, {hi!r})")
    r0 = np.sin(d0) / d0
    ratio = 2.0 * eps * p.m_u / p.d_l
    c0 = min(p.m_l / 2.0, eps * p.d_l * (1.0 - ratio))
    c1 = max(1.5 * p.m_u, eps * p.d_u * (1.0 + ratio))
    c_ell = min(p.d_l - 2.0 * eps * p.m_u,
                2.0 * eps * r0 * p.a_l * g.l_star * n - p.a_u ** 2 * n ** 2 / p.d_l)
    return float(c0), float(c1), float(c_ell), float(c_ell - eps * p.lam)


def initial_energy(s: SwingSystem, x0: State, eps: float) -> float:
    """Ẽ(0) com θ_c igual à média simples das fases iniciais."""
    return float(energy_tilde_batch(s, x0.theta, x0.omega, eps))


@dataclass(frozen=True)
class CertificatePlan:
    """Parte do certificado que não depende do estado inicial."""

    system: SwingSystem
    omega_c: float
    base: Dict[str, Any]
    admissible: bool

    @property
    def eps(self) -> Optional[float]:
        return self.base.get("eps")

    @property
    def d0(self) -> float:
        return self.base["d0"]


def auto_epsilon(lo: float, hi: float) -> float:
    """Ponto a 1% da largura do intervalo, a partir de lo."""
    return lo + AUTO_EPS_OFFSET * (hi - lo)


def prepare(s: SwingSystem, d0: float, eps: EpsChoice = "auto") -> CertificatePlan:
    """Redução micro, H1, H2, intervalo de ε e constantes."""
    d0 = _check_d0(d0)
    micro, omega_c = macro_micro(s)
    omega_hat_norm = float(np.linalg.norm(micro.omega_nat))
    gc = graph_constants(s.graph)
    base: Dict[str, Any] = {
        "d0": d0,
        "r0": float(np.sin(d0) / d0),
        "eps_policy": "auto" if eps == "auto" else "explicit",
        "omega_c": omega_c,
        "omega_hat_norm": omega_hat_norm,
        "h1_pass": gc.connected,
        "connected": gc.connected,
        "diameter": gc.diameter,
        "l_star": gc.l_star,
    }
    if not gc.connected:
        base["reason"] = "H1 failed: graph not connected"
        return CertificatePlan(micro, omega_c, base, False)
    # Um único oscilador é conexo mas não tem arestas para os extremais de H2
    if gc.w_card == 0:
        base.update(h2_pass=False, reason="H2 failed: no edges")
        logger.info("H2 sem arestas: sistema com um único oscilador")
        return CertificatePlan(micro, omega_c, base, False)

    # Condição paramétrica H2
    p = param_summary(micro)
    passed, lhs, rhs = check_h2(p, gc, s.n, d0)
    base.update(lam=p.lam, homogeneous_damping=p.homogeneous, h2_pass=passed, h2_lhs=lhs, h2_rhs=rhs)
    if not passed:
        base["reason"] = "H2 failed: empty epsilon interval"
        logger.info(f"H2 falhou para D0={d0:.6g}: lhs={lhs:.6g} >= rhs={rhs:.6g}")
        return CertificatePlan(micro, omega_c, base, False)

    # Escolher ε e calcular as constantes
    lo, hi = epsilon_interval(p, gc, s.n, d0)
    chosen = auto_epsilon(lo, hi) if eps == "auto" else float(eps)
    c0, c1, c_ell, c_ell_tilde = constants(p, gc, s.n, d0, chosen)
    base.update(eps_lo=lo, eps_hi=hi, eps=chosen, c0=c0, c1=c1, c_ell=c_ell, c_ell_tilde=c_ell_tilde,
                rhs_h3=sqrt(c0) / 2.0 * d0,
                frequency_term=2.0 * sqrt(2.0) * c1 * max(chosen, 1.0) * omega_hat_norm / (c_ell_tilde * sqrt(c0)),
                locked_arc_below_half_pi=d0 <= pi / 2)
    return CertificatePlan(micro, omega_c, base, True)


def evaluate_batch(plan: CertificatePlan, theta0, omega0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    H3 vetorizado sobre estados iniciais (..., n) do sistema original.

    Retorna (lhs_h3, margin, certified); tudo NaN/False se o plano não é admissível.
    """
    theta0 = np.asarray(theta0, dtype=float)
    omega0 = np.asarray(omega0, dtype=float) - plan.omega_c
    shape = theta0.shape[:-1]
    if not plan.admissible:
        nan = np.full(shape, np.nan)
        return nan, nan.copy(), np.zeros(shape, dtype=bool)
    e0 = energy_tilde_batch(plan.system, theta0, omega0, plan.eps)
    lhs = np.maximum(np.sqrt(np.maximum(e0, 0.0)), plan.base["frequency_term"])
    margin = plan.base["rhs_h3"] - lhs
    return lhs, margin, margin > 0


def evaluate(plan: CertificatePlan, x0: State) -> CertificateReport:
    """
    Completa o relatório do plano com H3 para o estado x0 do sistema original.

    Com plano inadmissível o relatório sai como está, com o motivo de H1 ou H2.
    """
    fields = dict(plan.base)
    # Energia inicial com os dados casados ω̂(0) = ω(0) - Ω_c
    if plan.admissible:
        e0 = initial_energy(plan.system, State(x0.theta, x0.omega - plan.omega_c), plan.eps)
        energy_term = sqrt(max(e0, 0.0))
        lhs = max(energy_term, fields["frequency_term"])
        margin = fields["rhs_h3"] - lhs
        passed = lhs < fields["rhs_h3"]
        fields.update(e_tilde_0=e0, energy_term=energy_term, lhs_h3=lhs, margin=margin,
                      h3_pass=passed, certified=passed)
        if not passed:
            fields["reason"] = "H3 failed: initial energy or frequency term too large"
    return CertificateReport(**fields)


def certify(s: SwingSystem, x0: State, d0: float, eps: EpsChoice = "auto") -> CertificateReport:
    """Relatório completo H1-H3 para o estado inicial x0."""
    report = evaluate(prepare(s, d0, eps), x0)
    logger.info(f"Certificado D0={d0:.6g} eps={report.eps}: certified={report.certified}")
    return report


def omega_norm_limit(plan: CertificatePlan) -> float:
    """Maior ||Ω̂|| com termo de frequência de H3 abaixo do limite."""
    if not plan.admissible:
        raise ValueError("empty epsilon interval")
    b = plan.base
    return b["c_ell_tilde"] * b["c0"] * b["d0"] / (4.0 * sqrt(2.0) * b["c1"] * max(b["eps"], 1.0))


def d0_candidates() -> List[float]:
    """Os candidatos kπ/19, k = 1..18."""
    return [k * pi / 19 for k in range(1, 19)]


def admissible_d0(s: SwingSystem, candidates: Sequence[float]) -> List[Dict[str, Any]]:
    """Filtra candidatos de D0 pela condição paramétrica H2."""
    micro, _ = macro_micro(s)
    gc = graph_constants(s.graph)
    p = param_summary(micro)
    rows = []
    for d0 in candidates:
        passed, lhs, rhs = check_h2(p, gc, s.n, d0)
        rows.append({"d0": float(d0), "pass": passed, "lhs": lhs, "rhs": rhs})
    return rows
