# src/experiments/commands.py
# Comandos reproducibles: tabla de probabilidades de fallo, datos de las figuras,
# informe de no existencia y batería de validación Monte Carlo. Cada comando
# recibe una RunConfig y devuelve el código de salida (0 confirmado, 1 violado).

import logging
import math
import os
from typing import Any, Dict, List, Tuple

import numpy as np

from ..analysis import analytics, montecarlo
from ..config import RunConfig
from ..coupling.dyadic_core import DyadicContext, new_context, save_context
from ..coupling.path_sim import (
    TimeGrid,
    dyadic_paths,
    simulate_bes3,
    top_level_reached,
    values_at_hitting_level,
)
from ..utils import numerics
from ..utils.output_writer import (
    write_bundle_csv,
    write_columns,
    write_json,
    write_samples_csv,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CLAIM_VIOLATED = 1

SANDWICH_SLACK = 1e-9
TWO_ROUTE_TOL = 1e-8

# Cocientes de cuantiles: cota de la figura y umbrales de los extremos p = 1e-4, 1 − 1e-4
RATIO_MAX = 1.5
RATIO_MIN_SLACK = 1e-9
RATIO_LOW_P = 1e-4
RATIO_LOW_P_MAX = 1.35
RATIO_HIGH_P_MAX = 1.01
WEB_RATIO_TOL = 1e-12

# Figura 1: puntos de partida equiespaciados en [0, 1] y horizonte
FIGURE1_STARTS = 41
FIGURE1_HORIZON = 1.0
FIGURE1_J_MIN = -8

# Testigos de la desigualdad de no existencia
WITNESS_RHS = (0.33, 0.3348)
WITNESS_RHS_MIN = 0.0019
WITNESS_GAP_C = 1.0025
WITNESS_GAP = (0.2361, 0.2408)

# Validación Monte Carlo
VALIDATION_PSI = 1.0
DISCRETIZATION_ALLOWANCE = 0.01
MARGINAL_SAMPLES = 100000
MARGINAL_LEVELS = tuple(range(-3, 4))
MARGINAL_SIGMAS = 4.0
TAIL_TIMES = (10.0, 100.0)


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.output_dir, name)


def _exit_code(checks: Dict[str, bool]) -> int:
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        logger.error(f"Afirmaciones violadas: {failed}")
        return EXIT_CLAIM_VIOLATED
    logger.info("Todas las afirmaciones confirmadas.")
    return EXIT_OK


# --- failure-prob ---

def cmd_failure_prob(cfg: RunConfig) -> int:
    """Tabla de h por ambas rutas, las fórmulas de comparación y las cotas."""
    psi = np.array(cfg.psi_grid, dtype=float)
    logger.info(f"Paso 1: Evaluando h en {psi.size} valores de psi...")
    h_dyadic = np.array([analytics.failure_prob_dyadic(v, cfg.quadrature, cfg.series) for v in psi])
    h_series = np.asarray(analytics.failure_prob_dyadic_series(psi, cfg.series))
    heads = [analytics.bound_head(v) for v in psi]
    columns = {
        "psi": psi,
        "h_dyadic": h_dyadic,
        "h_series": h_series,
        "h_reflection": np.asarray(analytics.failure_prob_reflection(psi)),
        "h_web": np.asarray(analytics.failure_prob_brownian_web(psi)),
        "bound_tail": np.asarray(analytics.bound_tail(psi)),
        "bound_head": np.array([hb.value for hb in heads]),
        "bound_head_valid": np.array([hb.valid for hb in heads]),
        "bound_uniform": np.asarray(analytics.bound_uniform(psi)),
    }

    logger.info("Paso 2: Comprobando el sándwich y el acuerdo entre rutas...")
    report = analytics.BoundReport(
        psi_grid=psi, h_exact=h_dyadic, lower_reflection=columns["h_reflection"],
        bound_tail=columns["bound_tail"], bound_head=columns["bound_head"],
        bound_head_valid=columns["bound_head_valid"], bound_uniform=columns["bound_uniform"])
    max_route_gap = float(np.max(np.abs(h_series - h_dyadic), initial=0.0))
    checks = {
        "sandwich": report.sandwich_holds(SANDWICH_SLACK),
        "two_route_agreement": max_route_gap <= TWO_ROUTE_TOL,
    }

    logger.info(f"Paso 3: Guardando resultados en '{cfg.output_dir}'...")
    write_columns(_out(cfg, "failure_prob.csv"), columns)
    write_json(_out(cfg, "failure_prob_summary.json"), {
        "psi_count": int(psi.size),
        "max_route_gap": max_route_gap,
        "sandwich_violations": psi[report.violations(SANDWICH_SLACK)].tolist(),
        "checks": checks,
    })
    return _exit_code(checks)


# --- figures ---

def _figure1(cfg: RunConfig) -> Dict[str, bool]:
    ctx_seed, path_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    grid = TimeGrid.uniform(FIGURE1_HORIZON, cfg.dt)
    path = simulate_bes3(path_seed, grid)
    starts = np.linspace(0.0, 1.0, FIGURE1_STARTS)

    ctx = new_context(ctx_seed, j_min=FIGURE1_J_MIN, alpha_range=(0.0, 1.0))
    try:
        bundle = dyadic_paths(ctx, path, starts, FIGURE1_HORIZON)
    except DyadicContext.WindowError:
        # Misma semilla: se conservan Θ y el prefijo de signos
        needed = top_level_reached(path, ctx.theta) + 1
        logger.info(f"Ampliando el contexto hasta j_max >= {needed}")
        ctx = new_context(ctx_seed, j_min=FIGURE1_J_MIN, alpha_range=(0.0, 1.0), min_j_max=needed)
        bundle = dyadic_paths(ctx, path, starts, FIGURE1_HORIZON)

    rows: Dict[str, List[Any]] = {"level": [], "hitting_time": [], "distinct_paths": [],
                                  "min_spacing": [], "spacing_unit": []}
    spacing_ok = True
    for level in ctx.levels:
        time = bundle.hitting.time(int(level))
        if time > FIGURE1_HORIZON:
            break
        values = np.unique(values_at_hitting_level(bundle, int(level)))
        unit = 2.0 ** (level + ctx.theta + 1.0)
        gaps = np.diff(values)
        min_gap = float(gaps.min()) if gaps.size else math.nan
        if gaps.size:
            multiples = gaps / unit
            spacing_ok &= bool(np.all(np.abs(multiples - np.round(multiples)) <= 1e-9 * multiples.max())
                               and np.all(np.round(multiples) >= 1))
        rows["level"].append(int(level))
        rows["hitting_time"].append(time)
        rows["distinct_paths"].append(int(values.size))
        rows["min_spacing"].append(min_gap)
        rows["spacing_unit"].append(unit)

    write_bundle_csv(_out(cfg, "figure1_paths.csv"), bundle)
    write_columns(_out(cfg, "figure1_levels.csv"), rows)
    save_context(ctx, _out(cfg, "figure1_context.json"))
    return {"figure1_coalescence_spacing": spacing_ok}


def _figure2(cfg: RunConfig) -> Dict[str, bool]:
    # t = 1/ψ² recorre el grid de ψ en escala logarítmica
    t = np.sort(1.0 / np.square(np.array([v for v in cfg.psi_grid if v > 0], dtype=float)))
    columns = {
        "t": t,
        "F_dyadic": np.asarray(analytics.coupling_time_cdf("dyadic", t)),
        "F_reflection": np.asarray(analytics.coupling_time_cdf("reflection", t)),
        "F_bound": np.asarray(analytics.coupling_time_cdf("bound", t)),
        "F_web": np.asarray(analytics.coupling_time_cdf("web", t)),
    }
    ordered = bool(np.all(columns["F_reflection"] >= columns["F_dyadic"] - SANDWICH_SLACK)
                   and np.all(columns["F_dyadic"] >= columns["F_bound"] - SANDWICH_SLACK))
    write_columns(_out(cfg, "figure2_cdf.csv"), columns)
    return {"figure2_ordering": ordered}


def _figure3(cfg: RunConfig) -> Dict[str, bool]:
    curve = analytics.ratio_curve(cfg.p_grid, cfg.quadrature)
    checks = {
        "figure3_ratio_range": bool(np.all(curve.ratio >= 1.0 - RATIO_MIN_SLACK)
                                    and np.all(curve.ratio <= RATIO_MAX)),
        "figure3_web_constant": bool(np.all(np.abs(curve.ratio_web - 2.0) <= WEB_RATIO_TOL)),
    }
    if curve.p_grid[0] <= RATIO_LOW_P * (1 + 1e-9):
        checks["figure3_low_p_endpoint"] = bool(curve.ratio[0] <= RATIO_LOW_P_MAX)
    if curve.p_grid[-1] >= 1.0 - RATIO_LOW_P * (1 + 1e-9):
        checks["figure3_high_p_endpoint"] = bool(curve.ratio[-1] <= RATIO_HIGH_P_MAX)
    logger.info(f"Cociente máximo de la figura 3: {curve.ratio.max():.6f}")
    write_columns(_out(cfg, "figure3_ratio.csv"), {
        "p": curve.p_grid, "ratio_dyadic": curve.ratio,
        "ratio_web": curve.ratio_web, "ratio_bound": curve.ratio_bound})
    return checks


def cmd_figures(cfg: RunConfig) -> int:
    """Datos de las figuras 1-3 (todas si cfg.figure es None)."""
    builders = {1: _figure1, 2: _figure2, 3: _figure3}
    which = [cfg.figure] if cfg.figure is not None else [1, 2, 3]
    checks: Dict[str, bool] = {}
    for step, number in enumerate(which, start=1):
        logger.info(f"Paso {step}: Generando datos de la figura {number}...")
        checks.update(builders[number](cfg))
    write_json(_out(cfg, "figures_summary.json"), {"figures": which, "checks": checks})
    return _exit_code(checks)


# --- nonexistence ---

def _scan_grid(cfg: RunConfig) -> Tuple[np.ndarray, np.ndarray]:
    if cfg.scan_points:
        points = np.array(cfg.scan_points, dtype=float).reshape(-1, 2)
        return points[:, 0], points[:, 1]
    return analytics.default_scan_grid()


def _scan_record(result: analytics.GapScanResult) -> Dict[str, Any]:
    return {"c": result.c, "verdict": result.verdict, "min_deficit": result.min_deficit,
            "witness": [result.witness_s, result.witness_t],
            "pairs_checked": result.pairs_checked}


def cmd_nonexistence(cfg: RunConfig) -> int:
    """Barrido de la desigualdad de no existencia para cada c y para el acoplamiento diádico."""
    grid = _scan_grid(cfg)
    c_values = cfg.c_values or (1.0, WITNESS_GAP_C, analytics.MAX_GAP)

    logger.info("Paso 1: Evaluando los testigos puntuales...")
    rhs = float(analytics.thm4_rhs(*WITNESS_RHS))
    gap_deficit = float(analytics.thm4_deficit(
        analytics.attainable_gap_excess(WITNESS_GAP_C), *WITNESS_GAP))
    checks = {
        "witness_rhs": rhs >= WITNESS_RHS_MIN,
        "witness_gap_violated": gap_deficit < 0.0,
    }

    logger.info(f"Paso 2: Barriendo {grid[0].size} pares (s, t) para c = {list(c_values)}...")
    scans = [analytics.gap_attainability_scan(c, grid) for c in c_values]
    for result in scans:
        if result.c == 1.0:
            checks["c_1_not_attainable"] = result.not_attainable
        elif result.c == WITNESS_GAP_C and not cfg.scan_points:
            checks["c_1.0025_not_attainable"] = result.not_attainable
        elif math.isclose(result.c, analytics.MAX_GAP, rel_tol=1e-12):
            checks["c_2e2_no_violation"] = not result.not_attainable

    logger.info("Paso 3: Comprobando que el acoplamiento diádico satisface la desigualdad...")
    dyadic = analytics.gap_attainability_scan(None, grid, h_tilde=analytics.dyadic_gap_excess)
    checks["dyadic_no_violation"] = not dyadic.not_attainable

    write_json(_out(cfg, "nonexistence.json"), {
        "witness_rhs": {"s": WITNESS_RHS[0], "t": WITNESS_RHS[1], "rhs": rhs},
        "witness_gap": {"c": WITNESS_GAP_C, "s": WITNESS_GAP[0], "t": WITNESS_GAP[1],
                        "deficit": gap_deficit},
        "scans": [_scan_record(r) for r in scans],
        "dyadic": _scan_record(dyadic),
        "checks": checks,
    })
    return _exit_code(checks)


# --- validate ---

def _ks_record(distance: float, critical: float) -> Dict[str, Any]:
    return {"pass": bool(distance <= critical), "ks_distance": distance, "critical_value": critical}


def cmd_validate(cfg: RunConfig) -> int:
    """
    Batería estadística: KS del muestreo exacto contra la fórmula cerrada, consistencia
    de la simulación de trayectorias, leyes marginales de K y T₁ y la cola pesada.
    `cfg.corrupt_formula` ≠ 1 reescala el tiempo de la CDF de referencia (control negativo).
    """
    streams = np.random.SeedSequence(cfg.seed).spawn(5)
    tests: Dict[str, Dict[str, Any]] = {}
    psi = VALIDATION_PSI

    logger.info(f"Paso 1: Muestreo exacto de {cfg.n} tiempos de acoplamiento...")
    exact = montecarlo.sample_upsilon_exact(streams[0], psi, cfg.n)

    def reference_cdf(s: np.ndarray) -> np.ndarray:
        return np.asarray(analytics.coupling_time_cdf("dyadic", np.asarray(s) * cfg.corrupt_formula, psi))

    distance = montecarlo.ks_distance(montecarlo.empirical_cdf(exact), reference_cdf)
    tests["exact_ks"] = _ks_record(distance, montecarlo.ks_critical_value(cfg.n))

    logger.info("Paso 2: Cola pesada del tiempo de acoplamiento...")
    for s in TAIL_TIMES:
        fraction, sigma = exact.failure_fraction(s)
        bound = float(analytics.bound_tail(psi / math.sqrt(s)))
        tests[f"tail_bound_s{int(s)}"] = {"pass": bool(fraction <= bound + 3.0 * sigma),
                                           "fraction": fraction, "bound": bound, "sigma": sigma}

    logger.info("Paso 3: Leyes marginales de K y T1...")
    n_marginal = min(cfg.n, MARGINAL_SAMPLES)
    rng = np.random.default_rng(streams[1])
    _, k = montecarlo.sample_disagreement_levels(rng, psi, n_marginal)
    worst = 0.0
    marginal_ok = True
    for level in MARGINAL_LEVELS:
        expected = analytics.z_tail(psi, 2.0 ** level)
        observed = float(np.mean(k >= level))
        sigma = math.sqrt(max(expected * (1.0 - expected), 1e-300) / n_marginal)
        worst = max(worst, abs(observed - expected) / sigma)
        marginal_ok &= abs(observed - expected) <= MARGINAL_SIGMAS * sigma
    tests["k_marginal"] = {"pass": bool(marginal_ok), "max_sigmas": worst,
                           "levels": list(MARGINAL_LEVELS)}

    t1 = montecarlo.SampleSet(values=montecarlo.sample_t1(rng, n_marginal),
                              censored=np.zeros(n_marginal, dtype=bool), method="exact")
    t1_distance = montecarlo.ks_distance(
        montecarlo.empirical_cdf(t1),
        lambda s: np.where(s > 0, numerics.kolmogorov_sup_sf(1.0 / np.sqrt(np.maximum(s, 1e-300))), 0.0))
    tests["t1_ks"] = _ks_record(t1_distance, montecarlo.ks_critical_value(n_marginal))

    logger.info(f"Paso 4: Simulación de {cfg.n_path} acoplamientos completos (dt={cfg.dt}, "
                f"horizonte {cfg.horizon})...")
    grid = TimeGrid.uniform(cfg.horizon, cfg.dt)
    ctx_config = montecarlo.ContextConfig(j_min=cfg.j_min)
    path = montecarlo.sample_upsilon_pathsim(streams[2], 0.0, psi, grid, cfg.n_path, ctx_config)
    expected = analytics.failure_prob_dyadic(psi, cfg.quadrature, cfg.series)
    fraction, sigma = path.failure_fraction(1.0)
    tolerance = max(DISCRETIZATION_ALLOWANCE, 3.0 * sigma)
    tests["path_failure_at_1"] = {"pass": bool(abs(fraction - expected) <= tolerance),
                                  "fraction": fraction, "expected": expected,
                                  "tolerance": tolerance}

    expected_censored = float(analytics.failure_prob_dyadic_series(psi / math.sqrt(cfg.horizon)))
    censored_sigma = math.sqrt(expected_censored * (1.0 - expected_censored) / cfg.n_path)
    tests["path_censoring"] = {
        "pass": bool(abs(path.censored_fraction - expected_censored)
                     <= 3.0 * censored_sigma + DISCRETIZATION_ALLOWANCE),
        "censored_fraction": path.censored_fraction, "expected": expected_censored}

    logger.info("Paso 5: Comparación de dos muestras, exacto contra trayectorias...")
    exact_small = montecarlo.sample_upsilon_exact(streams[3], psi, cfg.n_path)
    two_sample = montecarlo.ks_distance(montecarlo.empirical_cdf(exact_small),
                                        montecarlo.empirical_cdf(path))
    tests["exact_vs_path_ks"] = _ks_record(
        two_sample, montecarlo.ks_critical_value(cfg.n_path, cfg.n_path))

    logger.info(f"Paso 6: Guardando informe en '{cfg.output_dir}'...")
    write_samples_csv(_out(cfg, "validate_exact_samples.csv"), exact)
    write_samples_csv(_out(cfg, "validate_path_samples.csv"), path)
    checks = {name: bool(record["pass"]) for name, record in tests.items()}
    write_json(_out(cfg, "validate.json"), {
        "seed": cfg.seed, "n": cfg.n, "n_path": cfg.n_path, "dt": cfg.dt,
        "horizon": cfg.horizon, "corrupt_formula": cfg.corrupt_formula,
        "tests": tests, "all_pass": all(checks.values()),
    })
    return _exit_code(checks)


COMMAND_HANDLERS = {
    "failure-prob": cmd_failure_prob,
    "figures": cmd_figures,
    "nonexistence": cmd_nonexistence,
    "validate": cmd_validate,
}
