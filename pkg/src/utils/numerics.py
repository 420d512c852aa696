# src/utils/numerics.py
# Funciones especiales, series alternantes, cuadratura adaptativa e inversión
# de funciones monótonas. Todas las fórmulas analíticas del proyecto pasan por aquí.

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize, special

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Por debajo de este valor la serie alternante converge en pocos términos;
# por encima se usa la serie dual (Jacobi), que converge rápido para z grande.
KOLMOGOROV_DUAL_SWITCH = 1.0

# Tolerancias de la bisección (ancho relativo del intervalo final)
INVERSION_RTOL = 1e-13
INVERSION_XTOL = 1e-300
INVERSION_MAX_ITER = 400

# Expansión automática de intervalos para tiempos (dominio positivo)
BRACKET_FACTOR = 10.0
BRACKET_MAX_EXPANSIONS = 40


@dataclass(frozen=True)
class SeriesAccuracy:
    """Controla el truncamiento de las series alternantes."""
    abs_tol: float = 1e-15
    max_terms: int = 100_000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol debe ser positivo, recibido: {self.abs_tol}")
        if self.max_terms < 3:
            raise ValueError(f"max_terms debe ser al menos 3, recibido: {self.max_terms}")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerancias de la cuadratura adaptativa (Gauss-Kronrod vía QUADPACK)."""
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError(
                f"Las tolerancias deben ser positivas: rel_tol={self.rel_tol}, abs_tol={self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError(
                f"max_subdivisions debe ser positivo, recibido: {self.max_subdivisions}")


DEFAULT_SERIES = SeriesAccuracy()
DEFAULT_QUADRATURE = QuadratureSpec()


class QuadratureError(Exception):
    """La integral no convergió; conserva la mejor estimación y su error."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BracketError(ValueError):
    """El intervalo no encierra la probabilidad buscada."""
    pass


class DomainError(ValueError):
    """Argumento fuera del dominio de la función especial."""
    pass


def _as_array(x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"Se esperaba un argumento finito, recibido: {x}")
    return arr


def _finish(result: np.ndarray, original: ArrayLike) -> ArrayLike:
    # Escalares entran como escalares y salen como float
    if np.ndim(original) == 0:
        return float(np.reshape(result, ()))
    return result


# --- Funciones especiales ---

def erf(x: ArrayLike) -> ArrayLike:
    """Función error, erf(x) = (2/√π)∫₀ˣ e^{-u²} du."""
    return _finish(special.erf(_as_array(x)), x)


def erfc(x: ArrayLike) -> ArrayLike:
    """Complemento 1 − erf(x), sin cancelación para x grande."""
    return _finish(special.erfc(_as_array(x)), x)


def erfc_inverse(p: ArrayLike) -> ArrayLike:
    """x con erfc(x) = p, para p en (0, 2)."""
    arr = _as_array(p)
    if np.any((arr <= 0) | (arr >= 2)):
        raise DomainError(f"erfc_inverse requiere p en (0, 2), recibido: {p}")
    return _finish(special.erfcinv(arr), p)


def exp_integral_ei(x: ArrayLike) -> ArrayLike:
    """
    Integral exponencial Ei(x) = −∫_{−x}^{∞} e^{−u}/u du, sólo para x < 0.

    Raises:
        DomainError: si algún x ≥ 0.
    """
    arr = _as_array(x)
    if np.any(arr >= 0):
        raise DomainError(f"exp_integral_ei sólo admite argumentos negativos, recibido: {x}")
    return _finish(special.expi(arr), x)


# --- Distribución del supremo de un Bessel(3) ---

def _alternating_sup_series(z: np.ndarray, acc: SeriesAccuracy) -> np.ndarray:
    # Σ_{k≥1} 2(−1)^{k+1} exp(−k²π²/(2z²)); términos decrecientes en k
    total = np.zeros_like(z)
    scale = -(math.pi ** 2) / (2.0 * z ** 2)
    for k in range(1, acc.max_terms + 1):
        sign = 1.0 if k % 2 else -1.0
        total += sign * 2.0 * np.exp(scale * k * k)
        next_term = 2.0 * np.exp(scale * (k + 1) ** 2)
        if k >= 3 and np.all(next_term < acc.abs_tol):
            return total
    logger.warning(
        f"Serie alternante truncada en {acc.max_terms} términos sin alcanzar abs_tol={acc.abs_tol}")
    return total


def _dual_sup_tail(z: np.ndarray, acc: SeriesAccuracy) -> np.ndarray:
    # 1 − P(sup ≤ z) = 2√(2/π)·z·Σ_{k≥1} exp(−(2k−1)²z²/2)
    prefactor = 2.0 * math.sqrt(2.0 / math.pi) * z
    total = np.zeros_like(z)
    for k in range(1, acc.max_terms + 1):
        total += np.exp(-((2 * k - 1) ** 2) * z ** 2 / 2.0)
        next_term = prefactor * np.exp(-((2 * k + 1) ** 2) * z ** 2 / 2.0)
        if k >= 3 and np.all(next_term < acc.abs_tol):
            break
    return prefactor * total


def kolmogorov_sup_cdf(z: ArrayLike, acc: Optional[SeriesAccuracy] = None) -> ArrayLike:
    """
    P(sup_{t≤1} Y_t ≤ z) para Y un proceso de Bessel de dimensión 3 desde 0.

    Se evalúa la serie alternante Σ 2(−1)^{k+1} exp(−k²π²/(2z²)) truncada cuando el
    siguiente término cae por debajo de acc.abs_tol. Para z > KOLMOGOROV_DUAL_SWITCH
    se usa la representación dual equivalente, cuyo truncamiento también queda
    acotado por el primer término omitido. El resultado se recorta a [0, 1].

    Args:
        z: nivel (escalar o arreglo), estrictamente positivo.
        acc: tolerancia de truncamiento.

    Raises:
        DomainError: si algún z no es positivo y finito.
    """
    acc = acc or DEFAULT_SERIES
    z_arr = np.atleast_1d(_as_array(z))
    if np.any(z_arr <= 0):
        raise DomainError(f"kolmogorov_sup_cdf requiere z > 0, recibido: {z}")

    out = np.empty_like(z_arr)
    small = z_arr <= KOLMOGOROV_DUAL_SWITCH
    out[small] = _alternating_sup_series(z_arr[small], acc)
    out[~small] = 1.0 - _dual_sup_tail(z_arr[~small], acc)
    return _finish(np.clip(out, 0.0, 1.0), z)


def kolmogorov_sup_sf(z: ArrayLike, acc: Optional[SeriesAccuracy] = None) -> ArrayLike:
    """1 − kolmogorov_sup_cdf(z), preciso también cuando el valor es diminuto (z grande)."""
    acc = acc or DEFAULT_SERIES
    z_arr = np.atleast_1d(_as_array(z))
    if np.any(z_arr <= 0):
        raise DomainError(f"kolmogorov_sup_sf requiere z > 0, recibido: {z}")

    out = np.empty_like(z_arr)
    small = z_arr <= KOLMOGOROV_DUAL_SWITCH
    out[small] = 1.0 - _alternating_sup_series(z_arr[small], acc)
    out[~small] = _dual_sup_tail(z_arr[~small], acc)
    return _finish(np.clip(out, 0.0, 1.0), z)


# --- Cuadratura ---

def integrate(f: Callable[[float], float], domain: Tuple[float, float],
              spec: Optional[QuadratureSpec] = None,
              points: Optional[Sequence[float]] = None) -> float:
    """
    Integra f sobre un intervalo finito o semi-infinito con scipy.integrate.quad.

    Un dominio [a, ∞) con a > 0 se lleva a (0, 1] mediante x = a/v, de modo que una
    densidad con decaimiento 1/x² queda acotada en v. Con a ≤ 0 se delega en la
    transformación propia de QUADPACK. Los puntos de quiebre `points` se dan en la
    variable original.

    Returns:
        float: la estimación, con error estimado ≤ max(abs_tol, rel_tol·|resultado|).

    Raises:
        QuadratureError: si no converge tras max_subdivisions.
    """
    spec = spec or DEFAULT_QUADRATURE
    lower, upper = float(domain[0]), float(domain[1])
    breakpoints = list(points or [])

    if math.isinf(upper) and lower > 0:
        def mapped(v: float) -> float:
            if v == 0.0:
                return 0.0
            return f(lower / v) * lower / (v * v)

        fun, a, b = mapped, 0.0, 1.0
        breakpoints = [lower / p for p in breakpoints if p > lower and math.isfinite(p)]
    else:
        fun, a, b = f, lower, upper

    kwargs = dict(limit=spec.max_subdivisions, epsabs=spec.abs_tol,
                  epsrel=spec.rel_tol, full_output=1)
    if math.isfinite(a) and math.isfinite(b):
        inner = sorted(p for p in breakpoints if a < p < b)
        if inner:
            kwargs["points"] = inner

    result = sp_integrate.quad(fun, a, b, **kwargs)
    value, error = float(result[0]), float(result[1])
    if len(result) > 3 and error > max(spec.abs_tol, spec.rel_tol * abs(value)):
        logger.error(
            f"La cuadratura no convergió en [{lower}, {upper}]: estimación={value}, error={error}. {result[3]}")
        raise QuadratureError(
            f"La cuadratura no convergió en [{lower}, {upper}] (error estimado {error:.3e})",
            estimate=value, error=error)
    return value


# --- Inversión de funciones monótonas ---

def invert_monotone(F: Callable[[float], float], p: float,
                    bracket: Tuple[float, float]) -> float:
    """
    Devuelve s con F(s) = p para F no decreciente, por bisección.

    El intervalo final tiene ancho relativo ≤ INVERSION_RTOL. Si p coincide con F en
    un extremo, se devuelve ese extremo.

    Raises:
        BracketError: si F(lo) ≤ p ≤ F(hi) no se cumple.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    f_lo, f_hi = F(lo), F(hi)
    if not (f_lo <= p <= f_hi):
        raise BracketError(
            f"El intervalo [{lo}, {hi}] no encierra p={p}: F(lo)={f_lo}, F(hi)={f_hi}")
    if f_lo == p:
        return lo
    if f_hi == p:
        return hi
    return float(optimize.bisect(lambda s: F(s) - p, lo, hi,
                                 xtol=INVERSION_XTOL, rtol=INVERSION_RTOL,
                                 maxiter=INVERSION_MAX_ITER))


def expand_bracket(F: Callable[[float], float], p: float,
                   lo: float = 1e-3, hi: float = 1e3) -> Tuple[float, float]:
    """
    Amplía geométricamente un intervalo positivo hasta que F(lo) ≤ p ≤ F(hi).

    Raises:
        BracketError: si tras BRACKET_MAX_EXPANSIONS pasos no se encierra p.
    """
    for _ in range(BRACKET_MAX_EXPANSIONS):
        if F(lo) <= p:
            break
        lo /= BRACKET_FACTOR
    else:
        raise BracketError(f"No se encontró un extremo inferior para p={p} (lo={lo})")

    for _ in range(BRACKET_MAX_EXPANSIONS):
        if F(hi) >= p:
            break
        hi *= BRACKET_FACTOR
    else:
        raise BracketError(f"No se encontró un extremo superior para p={p} (hi={hi})")

    logger.debug(f"Intervalo para p={p}: [{lo:.3e}, {hi:.3e}]")
    return lo, hi
