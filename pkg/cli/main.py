"""
Ponto de entrada da linha de comando do SwingROA.

Uso: python -m cli.main {check,simulate,scan,gen} ...
Códigos de saída: 0 sucesso, 1 certificado/simulação falhou, 2 erro de entrada.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

# Adiciona o diretório raiz ao path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from pydantic import ValidationError

from cli.commands import check, gen, scan, simulate
from core.dynamics import BlowUpError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def create_parser() -> argparse.ArgumentParser:
    """
    Cria o parser com os subcomandos registrados
    """
    parser = argparse.ArgumentParser(
        prog="swing-roa",
        description="Certificado de região de atração para equações de swing com inércia",
    )
    parser.add_argument("--log-level", default=None, help="Nível de log (padrão: SWING_ROA_LOG_LEVEL ou INFO)")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (check, simulate, scan, gen):
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        logging.getLogger().setLevel(args.log_level.upper())

    try:
        return args.func(args)
    except ValidationError as e:
        logger.error(f"Arquivo de entrada inválido: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as e:
        logger.error(f"Erro de entrada: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except BlowUpError as e:
        logger.error(f"Integração divergiu: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
