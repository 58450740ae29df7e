"""
Modelos pydantic dos documentos JSON de entrada e saída da CLI.
"""
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from core.dynamics import SyncReport
from core.model import SwingSystem
from core.roa import generate_system
from core.settings import DEFAULT_COUPLING, DEFAULT_D_RANGE, DEFAULT_M_RANGE


class RandomBlock(BaseModel):
    m_range: Tuple[float, float] = DEFAULT_M_RANGE
    d_range: Tuple[float, float] = DEFAULT_D_RANGE
    coupling_value: float = Field(default=DEFAULT_COUPLING, ge=0)

    @model_validator(mode="after")
    def _ranges(self):
        for name in ("m_range", "d_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must satisfy 0 < lo <= hi")
        return self


class SystemFile(BaseModel):
    """
    Arquivo de sistema: arrays explícitos ou um bloco `random` com `seed`.

    Quando os arrays estão presentes eles definem o sistema; o bloco random
    fica só como registro de como foram gerados.
    """

    n: int = Field(ge=1)
    m: Optional[List[float]] = None
    d: Optional[List[float]] = None
    omega: Optional[List[float]] = None
    coupling: Optional[List[List[float]]] = None
    seed: Optional[int] = None
    random: Optional[RandomBlock] = None

    @model_validator(mode="after")
    def _consistent(self):
        arrays = {"m": self.m, "d": self.d, "omega": self.omega, "coupling": self.coupling}
        present = [k for k, v in arrays.items() if v is not None]
        if not present:
            if self.random is None or self.seed is None:
                raise ValueError("either m, d, omega, coupling or random with seed must be given")
            return self
        missing = [k for k in arrays if k not in present]
        if missing:
            raise ValueError(f"missing field: {missing[0]}")
        for name in ("m", "d", "omega"):
            if len(arrays[name]) != self.n:
                raise ValueError(f"{name}: expected {self.n} entries, got {len(arrays[name])}")
        for name in ("m", "d"):
            if any(v <= 0 for v in arrays[name]):
                raise ValueError(f"{name}: entries must be strictly positive")
        a = np.asarray(self.coupling, dtype=float)
        if a.shape != (self.n, self.n):
            raise ValueError(f"coupling: expected {self.n}x{self.n} matrix")
        if np.any(a < 0):
            raise ValueError("coupling: negative entries")
        if np.any(np.diag(a) != 0):
            raise ValueError("coupling: diagonal must be zero")
        if not np.array_equal(a, a.T):
            raise ValueError("coupling: matrix is not symmetric")
        return self

    def to_system(self) -> SwingSystem:
        if self.m is None:
            block = self.random
            system, _ = generate_system(self.seed, self.n, block.m_range, block.d_range, block.coupling_value)
            return system
        return SwingSystem.from_arrays(self.m, self.d, self.omega, self.coupling)

    @classmethod
    def from_system(cls, s: SwingSystem, seed: Optional[int] = None,
                    random: Optional[RandomBlock] = None) -> "SystemFile":
        return cls(n=s.n, m=s.m.tolist(), d=s.d.tolist(), omega=s.omega_nat.tolist(),
                   coupling=s.graph.a.tolist(), seed=seed, random=random)


class SimulationResponse(BaseModel):
    micro: bool
    omega_c: float
    method: str
    dt: float
    horizon: float
    freq_bound: List[float]
    freq_bound_ok: bool
    conservation_drift: Optional[float] = None
    max_diam: float
    sync: SyncReport
    csv: Optional[str] = None


class ScanResponse(BaseModel):
    csv: str
    metadata: str
    stats: Dict[str, Any]
