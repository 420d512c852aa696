# src/coupling/dyadic_core.py
# Núcleo combinatorio del acoplamiento diádico: signos W_j, signos derivados
# G_{θ,α,j}, índices de piso y nivel de desacuerdo entre dos puntos de partida.

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

CONTEXT_FORMAT_VERSION = 1

# Los signos se sortean por bloques para que ampliar la ventana conserve el prefijo
SIGN_CHUNK = 64

SeedLike = Union[int, np.random.SeedSequence, None]


@dataclass(frozen=True, eq=False)
class DyadicContext:
    """
    Aleatoriedad de una realización del acoplamiento: fase Θ, signos W_j en la
    ventana [j_min, j_max] y la cola S_{j_min} muestreada exactamente como uniforme.
    """
    theta: float
    j_min: int
    j_max: int
    signs: np.ndarray
    tail_uniform: float
    seed: Optional[int] = None

    class WindowError(Exception):
        """Nivel fuera de la ventana materializada (contexto insuficiente)."""
        pass

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta debe estar en [0, 1], recibido: {self.theta}")
        if self.j_min > self.j_max:
            raise ValueError(f"j_min={self.j_min} mayor que j_max={self.j_max}")
        signs = np.array(self.signs, dtype=np.int8)
        if signs.shape != (self.j_max - self.j_min + 1,):
            raise ValueError(
                f"Se esperaban {self.j_max - self.j_min + 1} signos, recibidos {signs.shape}")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("Todos los signos deben ser +1 o -1")
        if abs(self.tail_uniform) > 2.0 ** (self.j_min + self.theta - 1):
            raise ValueError(
                f"|tail_uniform|={abs(self.tail_uniform)} excede 2^(j_min+theta-1)")
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DyadicContext):
            return NotImplemented
        return (self.theta == other.theta and self.j_min == other.j_min
                and self.j_max == other.j_max and self.tail_uniform == other.tail_uniform
                and np.array_equal(self.signs, other.signs))

    __hash__ = None

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)

    def sign(self, j: int) -> int:
        self.check_level(j)
        return int(self.signs[j - self.j_min])

    def check_level(self, j: int, allow_top: bool = False):
        upper = self.j_max + 1 if allow_top else self.j_max
        if not self.j_min <= j <= upper:
            raise DyadicContext.WindowError(
                f"Nivel {j} fuera de la ventana [{self.j_min}, {upper}]")

    @cached_property
    def prefix_sums(self) -> np.ndarray:
        # prefix_sums[m] = S_{j_min+m}; longitud j_max - j_min + 2
        weights = np.exp2(self.levels + self.theta - 1.0)
        steps = np.concatenate(([self.tail_uniform], self.signs * weights))
        return np.cumsum(steps)


@dataclass(frozen=True)
class DisagreementRecord:
    """Nivel máximo en que difieren los índices de piso de α y β (None si α = β)."""
    alpha: float
    beta: float
    level: Optional[int]


def _witness_threshold(reach: float) -> Optional[int]:
    # Menor k entero con 2^k > 4·reach; None si reach = 0 (cualquier nivel sirve)
    if reach == 0:
        return None
    return math.floor(math.log2(4.0 * reach)) + 1


def new_context(rng_seed: SeedLike, theta: Optional[float] = None, j_min: int = -12,
                alpha_range: Tuple[float, float] = (0.0, 1.0),
                min_j_max: Optional[int] = None) -> DyadicContext:
    """
    Construye un DyadicContext determinista a partir de la semilla.

    Orden de sorteo: Θ (si theta es None), la cola uniforme y después los signos
    por bloques desde j_min hacia arriba, hasta que por encima del umbral
    2^k > 4·max|α| hayan aparecido un +1 y un −1. j_max queda un nivel por encima
    del último testigo, de modo que G = W desde j_max para todo α cubierto.

    Args:
        rng_seed: semilla (entero o SeedSequence).
        theta: fase fija en [0, 1]; None para sortearla.
        j_min: nivel más bajo materializado.
        alpha_range: intervalo de puntos de partida que debe cubrir el contexto.
        min_j_max: cota inferior opcional para j_max (ampliación determinista).
    """
    rng = np.random.default_rng(rng_seed)
    theta_value = float(rng.random()) if theta is None else float(theta)
    half = 2.0 ** (j_min + theta_value - 1)
    tail = float(rng.uniform(-half, half))

    reach = max(abs(float(alpha_range[0])), abs(float(alpha_range[1])))
    threshold = _witness_threshold(reach)
    start = j_min if threshold is None else max(threshold, j_min)

    signs: list = []
    plus_level: Optional[int] = None
    minus_level: Optional[int] = None
    required = j_min if min_j_max is None else max(j_min, min_j_max)

    while True:
        chunk = rng.integers(0, 2, size=SIGN_CHUNK) * 2 - 1
        for w in chunk:
            level = j_min + len(signs)
            signs.append(int(w))
            if level >= start:
                if w == 1 and plus_level is None:
                    plus_level = level
                elif w == -1 and minus_level is None:
                    minus_level = level
        top = j_min + len(signs) - 1
        if plus_level is not None and minus_level is not None:
            j_max = max(required, max(plus_level, minus_level) + 1)
            if top >= j_max:
                break

    logger.debug(
        f"Contexto creado: theta={theta_value:.6f}, ventana [{j_min}, {j_max}], "
        f"testigos +1 en {plus_level}, -1 en {minus_level}")
    return DyadicContext(theta=theta_value, j_min=j_min, j_max=j_max,
                         signs=np.array(signs[:j_max - j_min + 1], dtype=np.int8),
                         tail_uniform=tail,
                         seed=rng_seed if isinstance(rng_seed, int) else None)


def partial_sum(ctx: DyadicContext, j: int) -> float:
    """S_j = tail_uniform + Σ_{k=j_min}^{j−1} W_k 2^{k+θ−1}, para j_min ≤ j ≤ j_max + 1."""
    ctx.check_level(j, allow_top=True)
    return float(ctx.prefix_sums[j - ctx.j_min])


def _g_table(ctx: DyadicContext, alpha: np.ndarray) -> np.ndarray:
    # G para cada α (filas) y cada nivel de la ventana (columnas)
    levels = ctx.levels
    exponent = levels + ctx.theta
    half = np.exp2(exponent - 1.0)
    width = np.exp2(exponent)
    period = np.exp2(exponent + 1.0)
    v = alpha[:, None] - ctx.prefix_sums[None, :-1] + half[None, :]
    r = v - period * np.floor(v / period)
    w = ctx.signs.astype(np.int64)[None, :]
    return np.where(r < width[None, :], w, -w)


def compute_g_levels(ctx: DyadicContext, alpha: Union[float, np.ndarray]) -> np.ndarray:
    """Matriz de signos G_{θ,α,j} (una fila por α, una columna por nivel de la ventana)."""
    return _g_table(ctx, np.atleast_1d(np.asarray(alpha, dtype=float)))


def compute_g(ctx: DyadicContext, alpha: Union[float, np.ndarray], j: int):
    """
    G_{θ,α,j}: W_j si (α − S_j + 2^{j+θ−1}) mod 2^{j+θ+1} ∈ [0, 2^{j+θ}), −W_j si no.
    El módulo es a mod b = a − b·floor(a/b).
    """
    ctx.check_level(j)
    g = compute_g_levels(ctx, alpha)[:, j - ctx.j_min]
    return int(g[0]) if np.ndim(alpha) == 0 else g


def _floor_indices(ctx: DyadicContext, alpha: float) -> np.ndarray:
    scale = np.exp2(-(ctx.levels + ctx.theta))
    return np.floor((alpha - ctx.prefix_sums[:-1]) * scale + 0.5).astype(np.int64)


def floor_level_indices(ctx: DyadicContext, alpha: float) -> np.ndarray:
    """Índices de piso n_j de α en todos los niveles de la ventana (j_min..j_max)."""
    return _floor_indices(ctx, float(alpha))


def floor_level_index(ctx: DyadicContext, alpha: float, j: int) -> int:
    """floor(2^{−(j+θ)}(α − S_j) + 1/2)."""
    ctx.check_level(j)
    return int(_floor_indices(ctx, float(alpha))[j - ctx.j_min])


def disagreement_level(ctx: DyadicContext, alpha: float, beta: float) -> DisagreementRecord:
    """
    Mayor nivel j en que difieren los índices de piso de α y β.

    Raises:
        DyadicContext.WindowError: si el desacuerdo alcanza j_max (contexto que no
            cubre α, β) o si no hay desacuerdo dentro de la ventana (|α − β| por
            debajo de la resolución de j_min).
    """
    if alpha == beta:
        return DisagreementRecord(alpha=alpha, beta=beta, level=None)

    differ = np.nonzero(_floor_indices(ctx, float(alpha)) != _floor_indices(ctx, float(beta)))[0]
    if differ.size == 0:
        raise DyadicContext.WindowError(
            f"Sin desacuerdo en [{ctx.j_min}, {ctx.j_max}] para α={alpha}, β={beta}; "
            f"reconstruir con j_min menor")
    level = int(ctx.levels[differ[-1]])
    if level >= ctx.j_max:
        raise DyadicContext.WindowError(
            f"El desacuerdo entre α={alpha} y β={beta} alcanza j_max={ctx.j_max}; "
            f"reconstruir el contexto con un rango mayor")
    return DisagreementRecord(alpha=alpha, beta=beta, level=level)


def reconstruct_alpha(ctx: DyadicContext, alpha: float) -> float:
    """Σ_{j=j_min}^{j_max} (W_j − G_j) 2^{j+θ−1}; dista de α a lo sumo 2^{j_min+θ}."""
    g = compute_g_levels(ctx, alpha)[0]
    weights = np.exp2(ctx.levels + ctx.theta - 1.0)
    return float(np.sum((ctx.signs - g) * weights))


# --- Persistencia ---

def context_to_dict(ctx: DyadicContext) -> Dict[str, Any]:
    return {
        "version": CONTEXT_FORMAT_VERSION,
        "seed": ctx.seed,
        "theta": ctx.theta,
        "j_min": ctx.j_min,
        "j_max": ctx.j_max,
        "signs": [int(w) for w in ctx.signs],
        "tail_uniform": ctx.tail_uniform,
    }


def context_from_dict(record: Dict[str, Any]) -> DyadicContext:
    version = record.get("version")
    if version != CONTEXT_FORMAT_VERSION:
        raise ValueError(f"Versión de contexto no soportada: {version}")
    return DyadicContext(theta=float(record["theta"]), j_min=int(record["j_min"]),
                         j_max=int(record["j_max"]),
                         signs=np.array(record["signs"], dtype=np.int8),
                         tail_uniform=float(record["tail_uniform"]),
                         seed=record.get("seed"))


def save_context(ctx: DyadicContext, path: str):
    """Guarda el contexto como JSON (floats con repr exacta)."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(context_to_dict(ctx), f, indent=4)
        logger.info(f"Contexto guardado en: {path}")
    except OSError as e:
        logger.error(f"Error al guardar el contexto en {path}: {e}")
        raise


def load_context(path: str) -> DyadicContext:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            record = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Error al cargar el contexto desde {path}: {e}")
        raise
    return context_from_dict(record)
