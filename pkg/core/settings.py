"""
Configurações compartilhadas do SwingROA.

Centraliza variáveis de ambiente, constantes numéricas padrão e a
configuração de logging para evitar importação circular entre os módulos.
"""
import logging
import os
from math import pi

import joblib
from dotenv import load_dotenv

load_dotenv()

# Variáveis de ambiente
THREADS_ENV = "SWING_ROA_THREADS"
LOG_LEVEL_ENV = "SWING_ROA_LOG_LEVEL"
CHUNK_ENV = "SWING_ROA_CHUNK"

# Integração
DEFAULT_DT = 1e-3
DEFAULT_HORIZON = 200.0
DEFAULT_SYNC_TOL = 1e-6
DEFAULT_RECORD_EVERY = 100
DEFAULT_CHUNK = 250

# Certificado
AUTO_EPS_OFFSET = 0.01
RATE_FLOOR = 1e-12

# Instâncias aleatórias de referência (dois osciladores)
DEFAULT_M_RANGE = (0.10, 0.15)
DEFAULT_D_RANGE = (0.30, 0.40)
DEFAULT_COUPLING = 0.2
DEFAULT_D0 = pi / 4
OMEGA_MARGIN = 0.5

# Configurar logging (stderr, stdout fica reservado ao JSON)
logging.basicConfig(
    level=os.getenv(LOG_LEVEL_ENV, "INFO").upper(),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)


def worker_count() -> int:
    """Número de workers para as varreduras (SWING_ROA_THREADS limita)."""
    available = joblib.cpu_count()
    raw = os.getenv(THREADS_ENV)
    if not raw:
        return available
    try:
        cap = int(raw)
    except ValueError:
        logger.warning(f"Valor inválido em {THREADS_ENV}: {raw!r}, usando {available}")
        return available
    return max(1, min(cap, available))


def chunk_size() -> int:
    """Células por lote vetorizado; fixo para não depender do número de workers."""
    raw = os.getenv(CHUNK_ENV)
    if not raw:
        return DEFAULT_CHUNK
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"Valor inválido em {CHUNK_ENV}: {raw!r}, usando {DEFAULT_CHUNK}")
        return DEFAULT_CHUNK
