# src/coupling/path_sim.py
# Simulación de trayectorias: el proceso de Bessel(3) que impulsa el acoplamiento,
# sus tiempos de llegada a los niveles diádicos y las trayectorias acopladas X_{θ,α,t}.

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np

from .dyadic_core import DyadicContext, SeedLike, compute_g_levels

logger = logging.getLogger(__name__)

# Pasos por bloque al buscar el primer paso por un nivel
PASSAGE_CHUNK = 16384

RngLike = Union[SeedLike, np.random.Generator]


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Rejilla temporal estrictamente creciente que empieza en 0."""
    t: np.ndarray
    dt_max: float

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 2 or t[0] != 0.0:
            raise ValueError("La rejilla debe ser unidimensional, con al menos dos puntos y t[0] = 0")
        steps = np.diff(t)
        if np.any(steps <= 0):
            raise ValueError("La rejilla debe ser estrictamente creciente")
        if steps.max() > self.dt_max * (1 + 1e-9):
            raise ValueError(f"Paso máximo {steps.max()} supera dt_max={self.dt_max}")
        object.__setattr__(self, "t", t)

    @classmethod
    def uniform(cls, horizon: float, dt: float) -> "TimeGrid":
        if not (horizon > 0 and dt > 0):
            raise ValueError(f"horizon y dt deben ser positivos: horizon={horizon}, dt={dt}")
        n = int(math.ceil(horizon / dt - 1e-9))
        return cls(t=np.linspace(0.0, horizon, n + 1), dt_max=horizon / n)

    @property
    def horizon(self) -> float:
        return float(self.t[-1])


@dataclass(frozen=True, eq=False)
class Bes3Path:
    grid: TimeGrid
    y: np.ndarray
    running_sup: np.ndarray


@dataclass(frozen=True)
class HittingTimes:
    """Primer tiempo en que Y alcanza 2^{i+θ}; los niveles no alcanzados quedan en `absent`."""
    theta: float
    times: Dict[int, float]
    absent: Tuple[int, ...] = ()

    def time(self, level: int) -> float:
        return self.times.get(level, math.inf)


@dataclass(frozen=True, eq=False)
class PathBundle:
    grid: TimeGrid
    starts: np.ndarray
    x: np.ndarray
    context: DyadicContext
    hitting: Optional[HittingTimes] = field(default=None)


def _gaussian_increments(rng: np.random.Generator, steps: np.ndarray, dim: int) -> np.ndarray:
    return rng.standard_normal((steps.size, dim)) * np.sqrt(steps)[:, None]


def simulate_bes3(rng_seed: RngLike, grid: TimeGrid) -> Bes3Path:
    """Y_t = √(B₁² + B₂² + B₃²) con tres movimientos brownianos de incrementos gaussianos."""
    rng = np.random.default_rng(rng_seed)
    increments = _gaussian_increments(rng, np.diff(grid.t), 3)
    b = np.vstack((np.zeros((1, 3)), np.cumsum(increments, axis=0)))
    y = np.linalg.norm(b, axis=1)
    return Bes3Path(grid=grid, y=y, running_sup=np.maximum.accumulate(y))


def hitting_times(path: Bes3Path, theta: float, levels: Iterable[int]) -> HittingTimes:
    """
    Tiempos T_{θ,i} interpolados linealmente entre los puntos de la rejilla que
    encierran el primer cruce de 2^{i+θ}.
    """
    levels = np.asarray(list(levels), dtype=int)
    targets = np.exp2(levels + theta)
    idx = np.searchsorted(path.running_sup, targets, side='left')

    times: Dict[int, float] = {}
    absent = []
    t, y = path.grid.t, path.y
    for level, target, m in zip(levels, targets, idx):
        if m >= y.size:
            absent.append(int(level))
            continue
        # y[m] ≥ target > y[m-1]; m ≥ 1 porque y[0] = 0
        fraction = (target - y[m - 1]) / (y[m] - y[m - 1])
        times[int(level)] = float(t[m - 1] + fraction * (t[m] - t[m - 1]))
    if absent:
        logger.debug(f"Niveles no alcanzados antes de t={path.grid.horizon}: {absent}")
    return HittingTimes(theta=theta, times=times, absent=tuple(absent))


def top_level_reached(path: Bes3Path, theta: float) -> int:
    """Menor nivel i con 2^{i+θ} ≥ sup Y (el nivel activo al final de la trayectoria)."""
    sup = float(path.running_sup[-1])
    if sup <= 0:
        raise ValueError("La trayectoria no se separa de 0")
    return int(math.ceil(math.log2(sup) - theta))


def simulate_bes3_until(rng_seed: RngLike, grid: TimeGrid, level: float) -> Bes3Path:
    """
    Como simulate_bes3, pero por bloques y deteniéndose en el primer punto de la
    rejilla con Y ≥ level. Si no se cruza, la trayectoria cubre toda la rejilla.
    """
    rng = np.random.default_rng(rng_seed)
    n_steps = grid.t.size - 1
    pieces = [np.zeros(1)]
    position = np.zeros(3)
    stop = n_steps
    done = 0
    while done < n_steps:
        m = min(PASSAGE_CHUNK, n_steps - done)
        steps = np.diff(grid.t[done:done + m + 1])
        chunk = position + np.cumsum(_gaussian_increments(rng, steps, 3), axis=0)
        y = np.linalg.norm(chunk, axis=1)
        crossed = np.flatnonzero(y >= level)
        if crossed.size:
            k = int(crossed[0])
            pieces.append(y[:k + 1])
            stop = done + k + 1
            break
        pieces.append(y)
        position = chunk[-1]
        done += m

    y = np.concatenate(pieces)
    t = grid.t[:stop + 1]
    return Bes3Path(grid=TimeGrid(t=t, dt_max=grid.dt_max), y=y,
                    running_sup=np.maximum.accumulate(y))


def bes3_first_passage(rng: RngLike, level: float, dt: float,
                       horizon: float) -> Tuple[float, bool]:
    """
    Primer paso de Y por `level`, interpolado linealmente en el último paso.
    Devuelve (tiempo, censurado); si no se cruza antes de horizon, (horizon, True).
    """
    path = simulate_bes3_until(rng, TimeGrid.uniform(horizon, dt), level)
    if path.y[-1] < level:
        return horizon, True
    t, y = path.grid.t, path.y
    fraction = (level - y[-2]) / (y[-1] - y[-2])
    return min(float(t[-2] + fraction * (t[-1] - t[-2])), horizon), False


def dyadic_paths(ctx: DyadicContext, path: Bes3Path, starts: Iterable[float],
                 horizon: float) -> PathBundle:
    """
    Trayectorias acopladas X_{θ,α,t} para cada punto de partida.

    En la etapa i (T_{θ,i−1} < t ≤ T_{θ,i}) se usa la forma
        X = (Y_t − 2^{i+θ})·G_i + S_{j_max+1} − Σ_{j=i+1}^{j_max} G_j 2^{j+θ−1},
    que difiere de α + Σ_{j<i} G_j 2^{j+θ−1} + (Y_t − 2^{i+θ−1})·G_i en a lo sumo
    2^{j_min+θ−1} y sólo depende de la historia G_{j≥i}: filas con la misma historia
    son idénticas bit a bit. Antes de T_{θ,j_min} la trayectoria interpola entre α
    y su valor en T_{θ,j_min} proporcionalmente a Y_t.

    Raises:
        DyadicContext.WindowError: si el contexto no cubre los puntos de partida o
            si Y supera 2^{j_max+θ} antes de `horizon`.
    """
    starts = np.asarray(list(starts), dtype=float)
    if np.any(np.diff(starts) < 0):
        raise ValueError("Los puntos de partida deben estar ordenados")

    levels = ctx.levels
    g = compute_g_levels(ctx, starts)
    if np.any(g[:, -1] != ctx.signs[-1]):
        raise DyadicContext.WindowError(
            f"El contexto no cubre los puntos de partida en [{starts[0]}, {starts[-1]}]")

    keep = path.grid.t <= horizon
    t = path.grid.t[keep]
    y = path.y[keep]

    hits = hitting_times(path, ctx.theta, levels)
    level_times = np.array([hits.time(int(i)) for i in levels])
    stage = np.searchsorted(level_times, t, side='left')
    if np.any(stage >= levels.size):
        raise DyadicContext.WindowError(
            f"Y supera 2^(j_max+theta) antes de t={horizon}; ampliar j_max (actual {ctx.j_max})")

    weights = np.exp2(levels + ctx.theta - 1.0)
    contrib = g * weights[None, :]
    from_level = np.cumsum(contrib[:, ::-1], axis=1)[:, ::-1]
    above = np.hstack((from_level[:, 1:], np.zeros((starts.size, 1))))
    s_top = float(ctx.prefix_sums[-1])

    x = np.empty((starts.size, t.size))
    late = np.flatnonzero(stage >= 1)
    if late.size:
        ms = stage[late]
        offset = y[late] - np.exp2(levels[ms] + ctx.theta)
        x[:, late] = offset[None, :] * g[:, ms] + s_top - above[:, ms]

    early = np.flatnonzero(stage == 0)
    if early.size:
        anchor = s_top - above[:, 0]
        ratio = y[early] / 2.0 ** (ctx.j_min + ctx.theta)
        x[:, early] = starts[:, None] + (anchor - starts)[:, None] * ratio[None, :]
    x[:, 0] = starts

    logger.debug(
        f"Haz de {starts.size} trayectorias calculado en {t.size} tiempos (niveles {ctx.j_min}..{ctx.j_max})")
    return PathBundle(grid=TimeGrid(t=t, dt_max=path.grid.dt_max), starts=starts,
                      x=x, context=ctx, hitting=hits)


def values_at_hitting_level(bundle: PathBundle, level: int) -> np.ndarray:
    """
    X_{θ,α,T_{θ,level}} para cada punto de partida: S_{j_max+1} − Σ_{j>level} G_j 2^{j+θ−1}.
    Sólo depende de G_{j>level}; los valores distintos distan múltiplos de 2^{level+θ+1}.
    """
    ctx = bundle.context
    ctx.check_level(level)
    g = compute_g_levels(ctx, bundle.starts)
    weights = np.exp2(ctx.levels + ctx.theta - 1.0)
    higher = ctx.levels > level
    return float(ctx.prefix_sums[-1]) - (g[:, higher] * weights[higher]).sum(axis=1)


def coalescence_time(bundle: PathBundle, a: int, b: int) -> float:
    """Primer tiempo de la rejilla a partir del cual las filas a y b coinciden (inf si nunca)."""
    differ = np.flatnonzero(bundle.x[a] != bundle.x[b])
    if differ.size == 0:
        return 0.0
    last = int(differ[-1])
    if last == bundle.x.shape[1] - 1:
        return math.inf
    return float(bundle.grid.t[last + 1])
