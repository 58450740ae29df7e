"""
Leitura de arquivos de sistema, parsing de ângulos e escrita de CSV/JSON.

Números saem com 17 dígitos significativos (CSV) ou repr de float (JSON),
para que execuções idênticas gerem bytes idênticos.
"""
import ast
import json
import logging
import math
import operator
from pathlib import Path
from typing import Any, List, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from cli.schemas import SystemFile
from core.model import SwingSystem

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def _eval_node(node) -> float:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_node(node.operand))
    raise ValueError("unsupported expression")


def parse_angle(text: str) -> float:
    """Número ou expressão com pi: '0.5', 'pi/4', '3*pi/19'."""
    try:
        value = _eval_node(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ValueError(f"invalid number or pi expression: {text!r}")
    if not math.isfinite(value):
        raise ValueError(f"invalid number or pi expression: {text!r}")
    return value


def parse_list(text: str) -> List[float]:
    """Lista separada por vírgulas de números ou expressões com pi."""
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError(f"empty list: {text!r}")
    return [parse_angle(t) for t in items]


def parse_range(text: str) -> Tuple[float, float]:
    values = parse_list(text)
    if len(values) != 2:
        raise ValueError(f"range must have two values: {text!r}")
    return values[0], values[1]


def load_system_file(path: Union[str, Path]) -> SystemFile:
    """Lê e valida o JSON; erros de validação nomeiam o campo."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: invalid JSON ({e})")
    return SystemFile.model_validate(raw)


def load_system(path: Union[str, Path]) -> Tuple[SwingSystem, SystemFile]:
    doc = load_system_file(path)
    system = doc.to_system()
    logger.info(f"Sistema carregado de {path}: n={system.n}")
    return system, doc


def _clean(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def to_json(obj: Any) -> str:
    """JSON com NaN/inf como null."""
    if isinstance(obj, BaseModel):
        obj = obj.model_dump(mode="python")
    return json.dumps(_clean(obj), indent=2, allow_nan=False)


def write_json(obj: Any, path: Union[str, Path]):
    Path(path).write_text(to_json(obj) + "\n", encoding="utf-8")
    logger.info(f"JSON salvo em {path}")


def write_frame(df: pd.DataFrame, path: Union[str, Path]):
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"CSV salvo em {path} ({len(df)} linhas)")
