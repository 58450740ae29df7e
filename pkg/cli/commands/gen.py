"""
Comando gen: gera um arquivo de sistema aleatório reprodutível pela semente.
"""
import argparse
import logging

from cli.io import parse_range, to_json
from cli.schemas import RandomBlock, SystemFile
from core.roa import generate_system
from core.settings import DEFAULT_COUPLING, DEFAULT_D_RANGE, DEFAULT_M_RANGE

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("gen", help="Gera um sistema aleatório no formato JSON")
    parser.add_argument("--n", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--paper-defaults", action="store_true",
                        help="Fixa m em (0.10, 0.15), d em (0.30, 0.40) e acoplamento 0.2")
    parser.add_argument("--m-range", type=parse_range, default=DEFAULT_M_RANGE)
    parser.add_argument("--d-range", type=parse_range, default=DEFAULT_D_RANGE)
    parser.add_argument("--coupling", type=float, default=DEFAULT_COUPLING)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    if args.paper_defaults:
        block = RandomBlock()
    else:
        block = RandomBlock(m_range=args.m_range, d_range=args.d_range, coupling_value=args.coupling)
    system, metadata = generate_system(args.seed, args.n, block.m_range, block.d_range, block.coupling_value)
    logger.info(f"Sistema gerado: semente {args.seed}, escala de Ω̂ {metadata['omega_scale']:.6g}")
    print(to_json(SystemFile.from_system(system, seed=args.seed, random=block)))
    return 0
