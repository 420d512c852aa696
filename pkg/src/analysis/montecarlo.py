# src/analysis/montecarlo.py
# Muestreo del tiempo de acoplamiento Υ: exacto (sin discretización) a partir de su
# representación como tiempo de llegada, y de extremo a extremo por simulación de
# trayectorias. CDF empírica y distancias de Kolmogorov-Smirnov.

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Tuple, Union

import numpy as np
from scipy import special, stats

from ..coupling.dyadic_core import SeedLike, disagreement_level, new_context
from ..coupling.path_sim import (
    TimeGrid,
    coalescence_time,
    dyadic_paths,
    simulate_bes3_until,
    top_level_reached,
)
from .analytics import as_psi

logger = logging.getLogger(__name__)

METHODS = ("exact", "path_sim")

# Fracción de muestras censuradas por encima de la cual se avisa
CENSORED_WARNING = 0.05

# Cada cuántas muestras se informa el progreso de la simulación de trayectorias
PROGRESS_EVERY = 1000


class EmptySampleError(ValueError):
    """No hay muestras no censuradas con las que construir una CDF."""
    pass


@dataclass(frozen=True)
class CouplingTimeSample:
    value: float
    censored: bool
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"Método desconocido: {self.method}")
        if not self.value >= 0:
            raise ValueError(f"El tiempo de acoplamiento debe ser ≥ 0, recibido: {self.value}")
        if self.censored and self.method != "path_sim":
            raise ValueError("Sólo las muestras de simulación de trayectorias pueden estar censuradas")


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Muestras de Υ en forma vectorial; `censored[i]` indica que Υ > values[i]."""
    values: np.ndarray
    censored: np.ndarray
    method: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        censored = np.asarray(self.censored, dtype=bool)
        if self.method not in METHODS:
            raise ValueError(f"Método desconocido: {self.method}")
        if values.ndim != 1 or values.shape != censored.shape:
            raise ValueError("values y censored deben ser vectores de la misma longitud")
        if np.any(values < 0):
            raise ValueError("Los tiempos de acoplamiento deben ser ≥ 0")
        if self.method == "exact" and np.any(censored):
            raise ValueError("El muestreo exacto no produce muestras censuradas")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "censored", censored)

    def __len__(self) -> int:
        return int(self.values.size)

    def __iter__(self) -> Iterator[CouplingTimeSample]:
        for value, censored in zip(self.values, self.censored):
            yield CouplingTimeSample(float(value), bool(censored), self.method)

    @property
    def censored_count(self) -> int:
        return int(np.count_nonzero(self.censored))

    @property
    def censored_fraction(self) -> float:
        return self.censored_count / len(self) if len(self) else 0.0

    def failure_fraction(self, s: float) -> Tuple[float, float]:
        """
        Fracción de muestras con Υ > s y su error estándar binomial.

        Raises:
            ValueError: si s alcanza el punto de censura (la fracción no es observable).
        """
        if len(self) == 0:
            raise EmptySampleError("No hay muestras")
        if self.censored_count and s >= float(self.values[self.censored].min()):
            raise ValueError(f"s={s} no está por debajo del punto de censura")
        fraction = float(np.count_nonzero(self.values > s)) / len(self)
        return fraction, math.sqrt(fraction * (1.0 - fraction) / len(self))


@dataclass(frozen=True, eq=False)
class CdfTable:
    """CDF empírica continua por la derecha: p[i] = F(s[i]), s estrictamente creciente."""
    s: np.ndarray
    p: np.ndarray
    sample_count: int
    censored_count: int
    method: str
    censor_point: float = math.inf

    @property
    def points(self) -> np.ndarray:
        return np.column_stack((self.s, self.p))

    def evaluate(self, x: Union[float, np.ndarray]) -> np.ndarray:
        idx = np.searchsorted(self.s, np.asarray(x, dtype=float), side='right') - 1
        return np.where(idx >= 0, self.p[np.maximum(idx, 0)], 0.0)


@dataclass(frozen=True)
class ContextConfig:
    """Parámetros con que se construye cada contexto en la simulación de trayectorias."""
    j_min: int = -12
    theta: Optional[float] = None


# --- Muestreo exacto ---

def sample_disagreement_levels(rng: np.random.Generator, psi: float,
                               n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Θ ~ U[0, 1] y K con P(K ≥ l | Θ = θ) = min{2^{−(l+θ)}ψ, 1}, por transformada
    inversa: K = floor(log₂(ψ/U) − Θ) con U ~ U(0, 1].
    """
    theta = rng.random(n)
    u = 1.0 - rng.random(n)
    k = np.floor(np.log2(psi / u) - theta).astype(np.int64)
    return theta, k


def t1_quantile(survival: np.ndarray) -> np.ndarray:
    """
    s con P(T₁ > s) = survival, donde T₁ es el tiempo de llegada de un Bessel(3) desde 0
    al nivel 1. Como P(T₁ ≤ s) = P(sup_{t≤1} Y > 1/√s) y P(sup_{t≤1} Y ≤ z) =
    kolmogorov(π/(2z)), resulta s = (2·kolmogi(survival)/π)².
    """
    return (2.0 * special.kolmogi(survival) / math.pi) ** 2


def sample_t1(rng: np.random.Generator, n: int) -> np.ndarray:
    """T₁ por transformada inversa con U ~ U(0, 1]."""
    return t1_quantile(1.0 - rng.random(n))


def sample_upsilon_exact(rng_seed: SeedLike, psi: float, n: int) -> SampleSet:
    """Υ = L²·T₁ con L = 2^{K+Θ} para puntos a distancia ψ (tiempo en unidades de s)."""
    psi = as_psi(psi)
    if psi == 0.0:
        raise ValueError("El muestreo exacto requiere psi > 0")
    if n < 1:
        raise ValueError(f"n debe ser al menos 1, recibido: {n}")

    rng = np.random.default_rng(rng_seed)
    theta, k = sample_disagreement_levels(rng, psi, n)
    t1 = sample_t1(rng, n)
    values = np.exp2(2.0 * (k + theta)) * t1
    logger.debug(f"{n} muestras exactas de Υ para psi={psi}")
    return SampleSet(values=values, censored=np.zeros(n, dtype=bool), method="exact")


# --- Muestreo por simulación de trayectorias ---

def _pair_coupling_time(ctx_seed: np.random.SeedSequence, path_seed: np.random.SeedSequence,
                        lo: float, hi: float, grid: TimeGrid,
                        cfg: ContextConfig) -> Tuple[float, bool]:
    ctx = new_context(ctx_seed, theta=cfg.theta, j_min=cfg.j_min, alpha_range=(lo, hi))
    level = disagreement_level(ctx, lo, hi).level
    path = simulate_bes3_until(path_seed, grid, 2.0 ** (level + ctx.theta))

    # El haz necesita la ventana hasta el nivel activo al final de la trayectoria
    needed = max(level + 1, top_level_reached(path, ctx.theta))
    if needed > ctx.j_max:
        ctx = new_context(ctx_seed, theta=cfg.theta, j_min=cfg.j_min, alpha_range=(lo, hi),
                          min_j_max=needed)

    bundle = dyadic_paths(ctx, path, (lo, hi), path.grid.horizon)
    meet = coalescence_time(bundle, 0, 1)
    if math.isinf(meet):
        return grid.horizon, True

    # Las filas coinciden desde el primer punto posterior a T_{θ,K}
    t = bundle.grid.t
    previous = float(t[np.searchsorted(t, meet) - 1]) if meet > 0 else 0.0
    hit = bundle.hitting.time(level)
    if previous < hit <= meet:
        return hit, False
    logger.warning(f"Coalescencia en t={meet} fuera del paso que contiene T_K={hit}")
    return meet, False


def sample_upsilon_pathsim(rng_seed: SeedLike, alpha: float, beta: float, grid: TimeGrid,
                           n: int = 1, ctx_config: Optional[ContextConfig] = None) -> SampleSet:
    """
    Tiempo de acoplamiento de extremo a extremo: para cada muestra se construye un
    contexto, se simula el Bessel(3) sobre `grid` hasta que llega a 2^{K+Θ} (K, el
    nivel de desacuerdo de α y β), se calculan las dos trayectorias con dyadic_paths
    y el tiempo se lee del haz: el primer punto desde el que las filas coinciden,
    refinado a T_{Θ,K} interpolado. Las muestras que no coalescen antes del
    horizonte quedan censuradas en ese horizonte.

    Cada muestra usa su propio flujo de semillas (SeedSequence.spawn), así que el
    resultado no depende del orden en que se evalúen.
    """
    if n < 1:
        raise ValueError(f"n debe ser al menos 1, recibido: {n}")
    cfg = ctx_config or ContextConfig()
    if alpha == beta:
        return SampleSet(values=np.zeros(n), censored=np.zeros(n, dtype=bool), method="path_sim")

    lo, hi = min(alpha, beta), max(alpha, beta)
    root = rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)
    values = np.empty(n)
    censored = np.zeros(n, dtype=bool)

    for i, child in enumerate(root.spawn(n)):
        ctx_seed, path_seed = child.spawn(2)
        values[i], censored[i] = _pair_coupling_time(ctx_seed, path_seed, lo, hi, grid, cfg)
        if (i + 1) % PROGRESS_EVERY == 0:
            logger.info(f"Simulación de trayectorias: {i + 1}/{n} muestras")

    samples = SampleSet(values=values, censored=censored, method="path_sim")
    if samples.censored_fraction > CENSORED_WARNING:
        logger.warning(
            f"{samples.censored_fraction:.1%} de las muestras censuradas en t={grid.horizon}")
    return samples


# --- CDF empírica y Kolmogorov-Smirnov ---

def empirical_cdf(samples: SampleSet) -> CdfTable:
    """
    CDF empírica con saltos en las muestras no censuradas. Las censuradas cuentan en
    el denominador y nunca como salto, por lo que la tabla sólo es válida por debajo
    del primer punto de censura.

    Raises:
        EmptySampleError: si no hay ninguna muestra no censurada.
    """
    observed = samples.values[~samples.censored]
    if observed.size == 0:
        raise EmptySampleError("No hay muestras no censuradas")
    s, counts = np.unique(observed, return_counts=True)
    censor_point = (float(samples.values[samples.censored].min())
                    if samples.censored_count else math.inf)
    return CdfTable(s=s, p=np.cumsum(counts) / len(samples), sample_count=len(samples),
                    censored_count=samples.censored_count, method=samples.method,
                    censor_point=censor_point)


def ks_distance(a: CdfTable, b: Union[CdfTable, Callable[[np.ndarray], np.ndarray]]) -> float:
    """
    sup |F_a − F_b| por debajo del punto de censura. `b` puede ser otra tabla o una
    CDF continua vectorizada.
    """
    if isinstance(b, CdfTable):
        cut = min(a.censor_point, b.censor_point)
        x = np.union1d(a.s[a.s < cut], b.s[b.s < cut])
        if x.size == 0:
            return 0.0
        return float(np.max(np.abs(a.evaluate(x) - b.evaluate(x))))

    below = a.s < a.censor_point
    s = a.s[below]
    p = a.p[below]
    p_left = np.concatenate(([0.0], a.p[:-1]))[below]
    f = np.asarray(b(s), dtype=float)
    distance = float(max(np.max(np.abs(p - f), initial=0.0), np.max(np.abs(p_left - f), initial=0.0)))
    if math.isfinite(a.censor_point) and s.size:
        distance = max(distance, abs(float(p[-1]) - float(np.asarray(b(np.array([a.censor_point])))[0])))
    return distance


def ks_critical_value(n: int, m: Optional[int] = None, alpha: float = 0.01) -> float:
    """
    Valor crítico asintótico de Kolmogorov-Smirnov: K_α/√n_eff, con n_eff = n para una
    muestra y nm/(n+m) para dos.
    """
    if n < 1 or (m is not None and m < 1):
        raise ValueError("Los tamaños de muestra deben ser positivos")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha debe estar en (0, 1), recibido: {alpha}")
    n_eff = n if m is None else n * m / (n + m)
    return float(stats.kstwobign.isf(alpha)) / math.sqrt(n_eff)
