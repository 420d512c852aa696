# src/main.py
import argparse
import logging
import sys
from typing import List, Optional

from src.config import COMMANDS, Config, RunConfig, parse_grid, parse_pairs, parse_values
from src.coupling.dyadic_core import DyadicContext
from src.experiments.commands import COMMAND_HANDLERS
from src.utils.numerics import QuadratureError, QuadratureSpec, SeriesAccuracy

logger = logging.getLogger(__name__)

EXIT_OPERATIONAL_ERROR = 2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Acoplamiento diádico de movimientos brownianos: fórmulas, simulación y validación")
    parser.add_argument("--command", required=True, choices=COMMANDS,
                        help="Comando a ejecutar")
    parser.add_argument("--seed", type=int, help="Semilla base (por defecto, la de la configuración)")
    parser.add_argument("--psi-grid", help="Grid de psi lo:hi:pasos, espaciado logarítmico")
    parser.add_argument("--psi-values", help="Lista explícita de psi separada por comas (reemplaza --psi-grid)")
    parser.add_argument("--p-grid", help="Grid de probabilidades lo:hi:pasos, espaciado lineal")
    parser.add_argument("--dt", type=float, help="Paso máximo de la simulación de trayectorias")
    parser.add_argument("--n", type=int, help="Muestras del muestreo exacto")
    parser.add_argument("--n-path", type=int, help="Acoplamientos simulados de extremo a extremo")
    parser.add_argument("--horizon", type=float, help="Horizonte de censura de la simulación")
    parser.add_argument("--out", help="Directorio de salida")
    parser.add_argument("--tol-quad", type=float, help="Tolerancia relativa de la cuadratura")
    parser.add_argument("--tol-series", type=float, help="Tolerancia absoluta de truncamiento de series")
    parser.add_argument("--c-values", help="Brechas c a barrer, separadas por comas")
    parser.add_argument("--scan-points", help="Pares s:t explícitos para el barrido, separados por comas")
    parser.add_argument("--figure", type=int, choices=(1, 2, 3), help="Figura a generar (todas si se omite)")
    parser.add_argument("--save-defaults", action="store_true",
                        help="Guardar --seed, --out y --tol-quad como valores por defecto en la configuración")
    parser.add_argument("--log-level", default="INFO",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Nivel de logging")
    # Control negativo de la validación: reescala el tiempo de la CDF de referencia
    parser.add_argument("--corrupt-formula", type=float, default=1.0, help=argparse.SUPPRESS)
    return parser


def build_run_config(args: argparse.Namespace, config: Config) -> RunConfig:
    """Combina la configuración persistente con los argumentos de la línea de comandos."""
    quad = config.get_quadrature_spec()
    if args.tol_quad is not None:
        quad = QuadratureSpec(rel_tol=args.tol_quad, abs_tol=quad.abs_tol,
                              max_subdivisions=quad.max_subdivisions)
    series = config.get_series_accuracy()
    if args.tol_series is not None:
        series = SeriesAccuracy(abs_tol=args.tol_series, max_terms=series.max_terms)

    if args.psi_values:
        psi_grid = parse_values(args.psi_values)
    else:
        psi_grid = parse_grid(args.psi_grid or config.get_psi_grid(), log=True)

    return RunConfig(
        command=args.command,
        seed=args.seed if args.seed is not None else config.get_seed(),
        output_dir=args.out or config.get_output_dir(),
        quadrature=quad,
        series=series,
        psi_grid=psi_grid,
        p_grid=parse_grid(args.p_grid or config.get_p_grid(), log=False),
        c_values=parse_values(args.c_values) if args.c_values else (),
        scan_points=parse_pairs(args.scan_points) if args.scan_points else (),
        dt=args.dt if args.dt is not None else config.get_dt(),
        n=args.n if args.n is not None else config.get_sample_size(),
        n_path=args.n_path if args.n_path is not None else config.get_path_sample_size(),
        horizon=args.horizon if args.horizon is not None else config.get_horizon(),
        j_min=config.get_j_min(),
        figure=args.figure,
        corrupt_formula=args.corrupt_formula,
    )


def save_defaults(args: argparse.Namespace, config: Config):
    """Persiste en la configuración los valores dados explícitamente en la línea de comandos."""
    if args.seed is not None:
        config.set_seed(args.seed)
    if args.out:
        config.set_output_dir(args.out)
    if args.tol_quad is not None:
        config.set_quadrature_tolerance(args.tol_quad, config.get_quadrature_spec().abs_tol)
    logger.info(f"Valores por defecto guardados en: {config.config_path}")


def main(argv: Optional[List[str]] = None, config: Optional[Config] = None) -> int:
    """
    Punto de entrada. Códigos de salida: 0 todas las afirmaciones confirmadas,
    1 alguna afirmación numérica violada, 2 error operativo.
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    logger.info(f"Iniciando comando '{args.command}'...")

    config = config or Config()
    try:
        run_config = build_run_config(args, config)
    except ValueError as e:
        logger.error(f"Argumentos inválidos: {e}")
        return EXIT_OPERATIONAL_ERROR
    if args.save_defaults:
        save_defaults(args, config)

    try:
        return COMMAND_HANDLERS[run_config.command](run_config)
    except (OSError, ValueError, QuadratureError, DyadicContext.WindowError) as e:
        logger.error(f"Error al ejecutar '{run_config.command}': {e}")
        return EXIT_OPERATIONAL_ERROR
    except Exception as e:
        logger.exception(f"Error inesperado al ejecutar '{run_config.command}': {e}")
        return EXIT_OPERATIONAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
