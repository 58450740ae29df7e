"""
Comando check: relatório H1-H3 para um estado inicial.

Saída 0 se certificado, 1 se alguma hipótese falha.
"""
import argparse
import logging

import numpy as np

from cli.io import load_system, parse_angle, parse_list, to_json
from core.certificate import certify
from core.model import State
from core.roa import init_frequencies
from core.settings import DEFAULT_D0

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("check", help="Avalia o certificado de região de atração")
    parser.add_argument("system", help="Arquivo JSON do sistema")
    parser.add_argument("--d0", type=parse_angle, default=DEFAULT_D0, help="Limite de diâmetro de fase D0 (aceita pi)")
    parser.add_argument("--eps", default="auto", help="ε explícito ou 'auto'")
    parser.add_argument("--theta0", type=parse_list, default=None, help="Fases iniciais (padrão: zeros)")
    parser.add_argument("--omega0", default=None, help="Frequências iniciais, 'derive' ou omitido (repouso)")
    parser.set_defaults(func=run)


def initial_state(system, theta0, omega0) -> State:
    """Estado inicial a partir das flags --theta0/--omega0."""
    theta = np.zeros(system.n) if theta0 is None else np.asarray(theta0, dtype=float)
    if theta.shape != (system.n,):
        raise ValueError(f"theta0: expected {system.n} values")
    if omega0 == "derive":
        return init_frequencies(system, theta)
    omega = np.zeros(system.n) if omega0 is None else np.asarray(parse_list(omega0))
    if omega.shape != (system.n,):
        raise ValueError(f"omega0: expected {system.n} values")
    return State(theta, omega)


def parse_eps(text: str):
    return "auto" if text == "auto" else parse_angle(text)


def run(args: argparse.Namespace) -> int:
    system, _ = load_system(args.system)
    x0 = initial_state(system, args.theta0, args.omega0)
    report = certify(system, x0, args.d0, parse_eps(args.eps))
    print(to_json(report))
    if not report.certified:
        logger.info(f"Certificado rejeitado: {report.reason}")
        return 1
    return 0
