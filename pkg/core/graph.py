"""
Módulo do grafo de acoplamento: conectividade, diâmetro em saltos e a
constante L* da desigualdade em grafos conexos.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightedGraph:
    """Grafo não direcionado induzido pela matriz simétrica de acoplamento."""

    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"coupling must be a square n x n matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("coupling has non-finite entries")
        if np.any(a < 0):
            raise ValueError("coupling has negative entries")
        if np.any(np.diag(a) != 0):
            raise ValueError("coupling diagonal must be zero")
        if not np.array_equal(a, a.T):
            raise ValueError("coupling is not symmetric")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def edge_mask(self) -> np.ndarray:
        """Pares ordenados (i, j) com a[i][j] > 0."""
        return self.a > 0

    @classmethod
    def complete(cls, n: int, weight: float) -> "WeightedGraph":
        """Grafo completo com o mesmo peso em todas as arestas."""
        a = np.full((n, n), float(weight))
        np.fill_diagonal(a, 0.0)
        return cls(a)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]], weight: float = 1.0) -> "WeightedGraph":
        a = np.zeros((n, n))
        for i, j in edges:
            a[i, j] = a[j, i] = weight
        return cls(a)

    def to_networkx(self) -> nx.Graph:
        """Só a estrutura de arestas; os pesos não entram nas distâncias."""
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        rows, cols = np.nonzero(np.triu(self.edge_mask, k=1))
        g.add_edges_from(zip(rows.tolist(), cols.tolist()))
        return g


@dataclass(frozen=True)
class GraphConstants:
    """Resumo de H1: conexidade, diâmetro, |W|, |W^c| e L* (None se desconexo)."""

    connected: bool
    diameter: Optional[int]
    w_card: int
    wc_card: int
    l_star: Optional[float]


def is_connected(g: WeightedGraph) -> bool:
    """Verdadeiro se todo vértice é alcançável a partir do vértice 0."""
    return nx.is_connected(g.to_networkx())


def hop_diameter(g: WeightedGraph) -> int:
    """Maior distância em saltos entre pares de vértices (pesos só definem arestas)."""
    nxg = g.to_networkx()
    if not nx.is_connected(nxg):
        raise ValueError("graph not connected")
    if g.n == 1:
        return 0
    return int(nx.diameter(nxg))


def edge_cardinalities(g: WeightedGraph) -> Tuple[int, int]:
    """|W| e |W^c| contados sobre pares ordenados fora da diagonal."""
    w_card = int(np.count_nonzero(g.edge_mask))
    return w_card, g.n * (g.n - 1) - w_card


def l_star(g: WeightedGraph) -> float:
    """L* = 1 / (1 + d(G)|W^c|)."""
    diameter = hop_diameter(g)
    _, wc_card = edge_cardinalities(g)
    return 1.0 / (1.0 + diameter * wc_card)


def graph_constants(g: WeightedGraph) -> GraphConstants:
    """
    Constantes do grafo usadas por H1 e H2.

    Grafo desconexo não levanta erro: volta connected=False e L* = None.
    """
    # Contar arestas em pares ordenados
    w_card, wc_card = edge_cardinalities(g)
    if not is_connected(g):
        logger.warning(f"Grafo com {g.n} vértices não é conexo")
        return GraphConstants(False, None, w_card, wc_card, None)
    # Diâmetro em saltos e L*
    diameter = hop_diameter(g)
    return GraphConstants(True, diameter, w_card, wc_card, 1.0 / (1.0 + diameter * wc_card))


def deviation_sums(g: WeightedGraph, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Somas sum_{l,k}|θ_l-θ_k|² (todos os pares) e sum_{(l,k) em W}|θ_l-θ_k|².

    theta pode ter eixos de lote à esquerda: (..., n).
    """
    theta = np.asarray(theta, dtype=float)
    sq = (theta[..., :, None] - theta[..., None, :]) ** 2
    return sq.sum(axis=(-2, -1)), np.where(g.edge_mask, sq, 0.0).sum(axis=(-2, -1))
