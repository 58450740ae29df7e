"""
Comando scan: varredura em grade (cert, sim ou both) com CSV e metadados JSON.

Em modo both a saída é 1 se alguma célula certificada não sincronizar.
"""
import argparse
import logging
from math import pi

from cli.io import load_system, parse_list, parse_range, to_json, write_frame, write_json
from cli.schemas import ScanResponse
from core.certificate import d0_candidates
from core.roa import ScanSpec, region_stats, scan
from core.settings import DEFAULT_D0, DEFAULT_DT, DEFAULT_HORIZON, DEFAULT_SYNC_TOL

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("scan", help="Varredura da região de atração (n = 2)")
    parser.add_argument("system", help="Arquivo JSON do sistema")
    parser.add_argument("--d0-list", type=parse_list, default=[DEFAULT_D0], help="Lista de D0 (aceita pi)")
    parser.add_argument("--d0-grid", action="store_true", help="Usa os candidatos kπ/19, k = 1..18")
    parser.add_argument("--eps-list", default="auto", help="'auto' ou lista de ε")
    parser.add_argument("--res", type=int, default=100, help="Células por eixo")
    parser.add_argument("--mode", choices=["cert", "sim", "both"], default="both")
    parser.add_argument("--theta-range", type=parse_range, default=(0.0, pi))
    parser.add_argument("--dt", type=float, default=DEFAULT_DT)
    parser.add_argument("--horizon", type=float, default=DEFAULT_HORIZON)
    parser.add_argument("--tol", type=float, default=DEFAULT_SYNC_TOL)
    parser.add_argument("--out", default="roa", help="Prefixo dos arquivos .csv e .json")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    system, doc = load_system(args.system)
    spec = ScanSpec(
        theta_range=args.theta_range,
        resolution=args.res,
        d0_list=d0_candidates() if args.d0_grid else args.d0_list,
        eps_policy="auto" if args.eps_list == "auto" else parse_list(args.eps_list),
        seed=doc.seed,
        dt=args.dt,
        horizon=args.horizon,
        tol=args.tol,
    )
    roa_map = scan(system, spec, args.mode)
    stats = region_stats(roa_map)
    roa_map.metadata["stats"] = stats.model_dump()

    csv_path, json_path = f"{args.out}.csv", f"{args.out}.json"
    write_frame(roa_map.frame, csv_path)
    write_json(roa_map.metadata, json_path)
    print(to_json(ScanResponse(csv=csv_path, metadata=json_path, stats=stats.model_dump())))

    if args.mode == "both" and stats.soundness_violations:
        logger.error(f"Certificado violado em {stats.soundness_violations} células")
        return 1
    return 0
