"""
Estudos de região de atração para dois osciladores.

Varreduras em grade das fases iniciais: regiões certificadas por (D0, ε),
região sincronizada por simulação e estatísticas de conservadorismo.
"""
import logging
from dataclasses import dataclass, field
from math import pi
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, Field, field_validator

from core.certificate import evaluate_batch, prepare
from core.dynamics import BatchOutcome, simulate_batch
from core.graph import WeightedGraph
from core.model import State, SwingSystem, macro_micro
from core.settings import (
    DEFAULT_COUPLING,
    DEFAULT_D0,
    DEFAULT_D_RANGE,
    DEFAULT_DT,
    DEFAULT_HORIZON,
    DEFAULT_M_RANGE,
    DEFAULT_SYNC_TOL,
    OMEGA_MARGIN,
    chunk_size,
    worker_count,
)

logger = logging.getLogger(__name__)

ScanMode = Literal["cert", "sim", "both"]


def _label(value: float) -> str:
    return f"{value:.6f}"


def _require_distinct_labels(values: List[float], name: str):
    """Valores que arredondam para o mesmo rótulo dariam colunas repetidas."""
    labels = [_label(v) for v in values]
    if len(set(labels)) != len(labels):
        raise ValueError(f"{name}: values must differ in the first 6 decimals")


def initial_omega(s: SwingSystem, theta) -> np.ndarray:
    """ω_i(0) = (Ω_i + sum_j a_ij sin(θ_j - θ_i)) / d_i, com eixos de lote."""
    theta = np.asarray(theta, dtype=float)
    diff = theta[..., None, :] - theta[..., :, None]
    force = s.omega_nat + np.sum(s.graph.a * np.sin(diff), axis=-1)
    return force / s.d


def init_frequencies(s: SwingSystem, theta0) -> State:
    """Estado inicial com frequências determinadas pelas fases."""
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (s.n,):
        raise ValueError(f"theta0 must have length {s.n}")
    return State(theta0, initial_omega(s, theta0))


class ScanSpec(BaseModel):
    theta_range: Tuple[float, float] = (0.0, pi)
    resolution: int = Field(default=100, ge=2)
    d0_list: List[float] = Field(default_factory=lambda: [DEFAULT_D0], min_length=1)
    eps_policy: Union[Literal["auto"], List[float]] = "auto"
    seed: Optional[int] = None
    dt: float = Field(default=DEFAULT_DT, gt=0)
    horizon: float = Field(default=DEFAULT_HORIZON, gt=0)
    tol: float = Field(default=DEFAULT_SYNC_TOL, gt=0)

    @field_validator("d0_list")
    @classmethod
    def _d0_in_range(cls, v: List[float]) -> List[float]:
        for d0 in v:
            if not (0.0 < d0 < pi):
                raise ValueError("D0 out of range")
        _require_distinct_labels(v, "d0_list")
        return v

    @field_validator("theta_range")
    @classmethod
    def _ordered(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if not v[0] < v[1]:
            raise ValueError("theta_range must satisfy lo < hi")
        return v

    @field_validator("eps_policy")
    @classmethod
    def _positive_eps(cls, v):
        if v != "auto":
            if not v:
                raise ValueError("eps list must not be empty")
            if any(e <= 0 for e in v):
                raise ValueError("eps values must be positive")
            _require_distinct_labels(v, "eps_policy")
        return v


@dataclass
class RoaMap:
    """Uma linha por célula da grade mais metadados (semente, parâmetros, combinações)."""

    frame: pd.DataFrame
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def cert_columns(self) -> List[str]:
        """Colunas de certificado na ordem das combinações (D0, ε)."""
        return [c["column"] for c in self.metadata.get("combos", [])]

    @property
    def has_simulation(self) -> bool:
        return "sim_sync" in self.frame.columns


def grid_axes(spec: ScanSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Centros das células em cada eixo."""
    lo, hi = spec.theta_range
    centres = lo + (np.arange(spec.resolution) + 0.5) * (hi - lo) / spec.resolution
    return centres, centres.copy()


def _grid_points(spec: ScanSpec) -> np.ndarray:
    ax1, ax2 = grid_axes(spec)
    t1, t2 = np.meshgrid(ax1, ax2, indexing="ij")
    return np.column_stack([t1.ravel(), t2.ravel()])


def _require_pair(s: SwingSystem):
    if s.n != 2:
        raise ValueError(f"region scans require n = 2, got n = {s.n}")


def _eps_values(spec: ScanSpec) -> List[Union[str, float]]:
    return ["auto"] if spec.eps_policy == "auto" else list(spec.eps_policy)


def _base_frame(points: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"theta1": points[:, 0], "theta2": points[:, 1]})


def _certify_columns(s: SwingSystem, spec: ScanSpec, points: np.ndarray,
                     omega0: np.ndarray) -> Tuple[Dict[str, np.ndarray], List[Dict[str, Any]]]:
    """Uma coluna booleana por combinação (D0, ε); as inadmissíveis ficam inteiras em False."""
    columns: Dict[str, np.ndarray] = {}
    combos: List[Dict[str, Any]] = []
    for d0 in spec.d0_list:
        for eps in _eps_values(spec):
            combo: Dict[str, Any] = {"d0": d0, "eps_requested": eps, "eps": None,
                                     "admissible": False, "reason": None}
            try:
                plan = prepare(s, d0, eps)
                combo["admissible"] = plan.admissible
                combo["eps"] = plan.eps
                combo["reason"] = plan.base.get("reason")
                _, _, certified = evaluate_batch(plan, points, omega0)
            except ValueError as e:
                logger.warning(f"Combinação D0={d0:.6g} eps={eps} inadmissível: {e}")
                combo["reason"] = str(e)
                certified = np.zeros(points.shape[0], dtype=bool)
            eps_label = _label(combo["eps"]) if combo["eps"] is not None else str(eps)
            combo["column"] = f"cert_{_label(d0)}_{eps_label}"
            combo["certified_cells"] = int(certified.sum())
            columns[combo["column"]] = certified
            combos.append(combo)
    return columns, combos


def _simulate_columns(s: SwingSystem, spec: ScanSpec, points: np.ndarray,
                      omega0: np.ndarray) -> Dict[str, np.ndarray]:
    micro, omega_c = macro_micro(s)
    size = chunk_size()
    bounds = [(k, min(k + size, points.shape[0])) for k in range(0, points.shape[0], size)]
    jobs = worker_count()
    logger.info(f"Simulando {points.shape[0]} células em {len(bounds)} lotes com {jobs} workers")
    outcomes: List[BatchOutcome] = Parallel(n_jobs=jobs)(
        delayed(simulate_batch)(micro, points[a:b], omega0[a:b] - omega_c, spec.dt, spec.horizon, spec.tol)
        for a, b in bounds
    )
    blowup = np.concatenate([o.blowup for o in outcomes])
    blowup_time = np.concatenate([o.blowup_time for o in outcomes])
    if blowup.any():
        logger.warning(f"{int(blowup.sum())} células com blow-up; registradas como não sincronizadas")
    return {
        "sim_sync": np.concatenate([o.synced for o in outcomes]),
        "t_sync": np.concatenate([o.t_sync for o in outcomes]),
        "sim_max_diam": np.concatenate([o.max_diam for o in outcomes]),
        "blowup": blowup,
        "error": np.where(blowup, [f"blow-up detected at t={t!r}" for t in blowup_time], ""),
    }


def scan(s: SwingSystem, spec: ScanSpec, mode: ScanMode = "both") -> RoaMap:
    """
    Varredura da grade em modo cert, sim ou both.

    Em both, células certificadas e não sincronizadas contam como violações
    de corretude e ficam em metadata["soundness_violations"].
    """
    _require_pair(s)
    if mode not in ("cert", "sim", "both"):
        raise ValueError(f"unknown scan mode {mode!r}")
    # Montar a grade e as frequências iniciais de cada célula
    points = _grid_points(spec)
    omega0 = initial_omega(s, points)
    frame = _base_frame(points)
    _, omega_c = macro_micro(s)
    metadata: Dict[str, Any] = {
        "mode": mode,
        "seed": spec.seed,
        "spec": spec.model_dump(),
        "system": {
            "m": s.m.tolist(),
            "d": s.d.tolist(),
            "omega": s.omega_nat.tolist(),
            "coupling": s.graph.a.tolist(),
        },
        "omega_c": omega_c,
        "combos": [],
    }

    # Calcular as colunas pedidas pelo modo
    if mode in ("cert", "both"):
        columns, combos = _certify_columns(s, spec, points, omega0)
        for name, values in columns.items():
            frame[name] = values
        metadata["combos"] = combos
    if mode in ("sim", "both"):
        for name, values in _simulate_columns(s, spec, points, omega0).items():
            frame[name] = values
    else:
        frame["error"] = ""

    # Verificar corretude: certificado sem sincronização é violação
    roa_map = RoaMap(frame, metadata)
    if mode == "both":
        violations = soundness_violations(roa_map)
        metadata["soundness_violations"] = violations
        if violations:
            logger.error(f"{violations} células certificadas não sincronizaram")
    logger.info(f"Varredura {mode} concluída: {len(frame)} células")
    return roa_map


def scan_certified(s: SwingSystem, spec: ScanSpec) -> RoaMap:
    """Só as colunas cert_<D0>_<ε>, sem simulação."""
    return scan(s, spec, "cert")


def scan_simulated(s: SwingSystem, spec: ScanSpec) -> RoaMap:
    """Só a simulação: sim_sync, t_sync, sim_max_diam, blowup e error."""
    return scan(s, spec, "sim")


def soundness_violations(m: RoaMap) -> int:
    """Células certificadas em alguma combinação e não sincronizadas."""
    if not m.has_simulation or not m.cert_columns:
        return 0
    certified_any = m.frame[m.cert_columns].any(axis=1)
    return int((certified_any & ~m.frame["sim_sync"].astype(bool)).sum())


class RegionStats(BaseModel):
    cells: int
    certified_counts: Dict[str, int]
    simulated_count: Optional[int] = None
    conservativeness: Dict[str, Optional[float]] = Field(default_factory=dict)
    soundness_violations: Optional[int] = None
    nesting_violations: List[Dict[str, Any]] = Field(default_factory=list)
    growth_violations: List[Dict[str, Any]] = Field(default_factory=list)


def _containment(frame: pd.DataFrame, inner: str, outer: str) -> int:
    """Células em inner que não estão em outer."""
    return int((frame[inner].astype(bool) & ~frame[outer].astype(bool)).sum())


def region_stats(m: RoaMap) -> RegionStats:
    """
    Contagens por combinação, razão certificado/simulado e violações.

    Aninhamento: para D0 fixo, a região com ε maior deve caber na de ε menor.
    Crescimento: para ε explícito fixo, a região com D0 menor deve caber na de
    D0 maior. Só combinações admissíveis entram nas comparações.
    """
    frame = m.frame
    combos = m.metadata.get("combos", [])
    counts = {c["column"]: int(frame[c["column"]].sum()) for c in combos}
    stats = RegionStats(cells=len(frame), certified_counts=counts)

    if m.has_simulation:
        simulated = int(frame["sim_sync"].sum())
        stats.simulated_count = simulated
        stats.conservativeness = {k: (v / simulated if simulated else None) for k, v in counts.items()}
        stats.soundness_violations = soundness_violations(m)

    admissible = [c for c in combos if c["admissible"]]
    for d0 in sorted({c["d0"] for c in admissible}):
        by_eps = sorted((c for c in admissible if c["d0"] == d0), key=lambda c: c["eps"])
        for small, large in zip(by_eps, by_eps[1:]):
            cells = _containment(frame, large["column"], small["column"])
            if cells:
                stats.nesting_violations.append(
                    {"d0": d0, "eps_small": small["eps"], "eps_large": large["eps"], "cells": cells})
    explicit = [c for c in admissible if c["eps_requested"] != "auto"]
    for eps in sorted({c["eps"] for c in explicit}):
        by_d0 = sorted((c for c in explicit if c["eps"] == eps), key=lambda c: c["d0"])
        for small, large in zip(by_d0, by_d0[1:]):
            cells = _containment(frame, small["column"], large["column"])
            if cells:
                stats.growth_violations.append(
                    {"eps": eps, "d0_small": small["d0"], "d0_large": large["d0"], "cells": cells})

    if stats.nesting_violations or stats.growth_violations:
        logger.warning(f"Violações de monotonicidade: aninhamento={len(stats.nesting_violations)} "
                       f"crescimento={len(stats.growth_violations)}")
    return stats


def generate_system(seed: int, n: int = 2, m_range: Tuple[float, float] = DEFAULT_M_RANGE,
                    d_range: Tuple[float, float] = DEFAULT_D_RANGE, coupling_value: float = DEFAULT_COUPLING,
                    d0_ref: float = DEFAULT_D0, margin: float = OMEGA_MARGIN) -> Tuple[SwingSystem, Dict[str, Any]]:
    """
    Instância aleatória: m, d uniformes, grafo completo e Ω̂ de soma zero.

    Ω̂ é escalado para que, na célula de origem (θ = 0) com ε automático, os
    dois termos de H3 fiquem em `margin` vezes o limite. Se H2 falha em
    d0_ref, usa Ω̂ = 0.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng(seed)
    m = rng.uniform(m_range[0], m_range[1], n)
    d = rng.uniform(d_range[0], d_range[1], n)
    raw = rng.uniform(-1.0, 1.0, n)
    graph = WeightedGraph.complete(n, coupling_value)
    base = SwingSystem(m, d, np.zeros(n), graph)
    metadata: Dict[str, Any] = {
        "seed": seed,
        "m_range": list(m_range),
        "d_range": list(d_range),
        "coupling_value": coupling_value,
        "d0_ref": d0_ref,
        "margin": margin,
    }

    plan = prepare(base, d0_ref)
    if not plan.admissible:
        logger.warning(f"H2 falhou para a semente {seed} em D0={d0_ref:.6g}; usando Ω̂ = 0")
        metadata.update(h2_pass=False, omega_scale=0.0)
        return base, metadata

    direction = raw - d * (raw.sum() / d.sum())
    if not np.any(direction):
        metadata.update(h2_pass=True, omega_scale=0.0)
        return base, metadata
    # Na origem: θ - θ_c = 0 e ω(0) = Ω̂ / d, logo os dois termos são lineares na escala
    energy_unit = np.sqrt(np.sum(m * (direction / d) ** 2))
    b = plan.base
    freq_unit = 2.0 * np.sqrt(2.0) * b["c1"] * max(b["eps"], 1.0) * np.linalg.norm(direction) / (
        b["c_ell_tilde"] * np.sqrt(b["c0"]))
    scale = margin * b["rhs_h3"] / max(energy_unit, freq_unit)
    metadata.update(h2_pass=True, omega_scale=float(scale))
    logger.info(f"Sistema gerado (semente {seed}): escala de Ω̂ = {scale:.6g}")
    return base.replace_omega(scale * direction), metadata
