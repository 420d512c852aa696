# src/analysis/analytics.py
# Expresiones cerradas del acoplamiento: probabilidad de fallo h(ψ) por dos rutas
# independientes, distribución de Z, cotas, inversas, la función r y la
# desigualdad de no existencia para acoplamientos maximales por pares.

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..utils.numerics import (
    DEFAULT_QUADRATURE,
    DEFAULT_SERIES,
    ArrayLike,
    QuadratureSpec,
    SeriesAccuracy,
    erf,
    erfc,
    erfc_inverse,
    exp_integral_ei,
    expand_bracket,
    integrate,
    invert_monotone,
    kolmogorov_sup_cdf,
    kolmogorov_sup_sf,
)

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
SQRT2 = math.sqrt(2.0)
SQRT_2PI = math.sqrt(2.0 * math.pi)

# La cota de cabeza sólo es válida a partir de este ψ
HEAD_BOUND_MIN_PSI = 2.0 * SQRT2

# Cota multiplicativa alcanzable entre el acoplamiento diádico y el de reflexión
MAX_GAP = 2.0 * math.e ** 2

# Por debajo de esta probabilidad la CDF se calcula por la integral complementaria
SMALL_CDF = 1e-6

# Argumento a_k a partir del cual el término de la serie es exactamente despreciable
SERIES_ARG_CAP = 1e3

NEGLIGIBLE_CDF_PSI = 60.0

FORMULAS = ("dyadic", "reflection", "web", "bound")

PsiValue = float


def as_psi(psi: float) -> PsiValue:
    """Valida ψ = |α−β|/√s: real finito y no negativo."""
    value = float(psi)
    if not (math.isfinite(value) and value >= 0.0):
        raise ValueError(f"psi debe ser un real finito no negativo, recibido: {psi}")
    return value


def _psi_array(psi: ArrayLike) -> np.ndarray:
    arr = np.asarray(psi, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError(f"psi debe ser finito y no negativo, recibido: {psi}")
    return arr


def _finish(result: np.ndarray, original: ArrayLike) -> ArrayLike:
    if np.ndim(original) == 0:
        return float(np.reshape(result, ()))
    return np.reshape(result, np.shape(original))


# --- Distribución de Z = 2^{K+Θ}/√s ---

def _theta_star(psi: float, zeta: float) -> float:
    return min(max(math.log2(psi / zeta), 0.0), 1.0)


def z_tail(psi: float, zeta: float) -> float:
    """
    P(Z ≥ ζ) = ∫₀¹ min{ζ⁻¹2^{−θ}ψ, 1} dθ en forma cerrada por tramos.

    Con c = ψ/ζ y θ* = log₂ c recortado a [0, 1], la integral vale
    θ* + c(2^{−θ*} − 1/2)/ln 2. Para ζ ≤ ψ/2 el valor es 1.
    """
    psi = as_psi(psi)
    if not zeta > 0:
        raise ValueError(f"zeta debe ser positivo, recibido: {zeta}")
    if psi == 0.0:
        return 0.0
    c = psi / zeta
    theta_star = _theta_star(psi, zeta)
    return min(1.0, theta_star + c * (2.0 ** -theta_star - 0.5) / LN2)


def z_density(psi: float, zeta: float) -> float:
    """(ψ/(ζ² ln 2))(2^{−θ*} − 1/2); se anula para ζ < ψ/2."""
    psi = as_psi(psi)
    if not zeta > 0:
        raise ValueError(f"zeta debe ser positivo, recibido: {zeta}")
    if psi == 0.0:
        return 0.0
    return psi / (zeta * zeta * LN2) * (2.0 ** -_theta_star(psi, zeta) - 0.5)


def _z_breakpoints(psi: float) -> list:
    # La densidad tiene un quiebre en ζ = ψ; la CDF del supremo cambia de régimen cerca de 1
    return [psi, 0.5, 1.0, 2.0]


def expected_log_z(psi: float, quad_spec: Optional[QuadratureSpec] = None) -> float:
    """E[ln Z] integrando contra z_density."""
    psi = as_psi(psi)
    if psi == 0.0:
        raise ValueError("E[ln Z] no está definido para psi = 0")
    return integrate(lambda zeta: math.log(zeta) * z_density(psi, zeta),
                     (psi / 2.0, math.inf), quad_spec, points=[psi])


def expected_log_z_closed_form(psi: float) -> float:
    """ln ψ − (ln 2)/2 + 1."""
    psi = as_psi(psi)
    if psi == 0.0:
        raise ValueError("E[ln Z] no está definido para psi = 0")
    return math.log(psi) - LN2 / 2.0 + 1.0


# --- Probabilidad de fallo del acoplamiento diádico ---

def failure_prob_dyadic(psi: float, quad_spec: Optional[QuadratureSpec] = None,
                        acc: Optional[SeriesAccuracy] = None) -> float:
    """
    h(ψ) = ∫_{ψ/2}^∞ P(sup_{t≤1} Y ≤ ζ)·f_Z(ζ) dζ por cuadratura adaptativa.

    El dominio semi-infinito se lleva a (0, 1] con ζ = (ψ/2)/v (ver numerics.integrate).

    Raises:
        QuadratureError: si la integral no converge.
    """
    psi = as_psi(psi)
    if psi == 0.0:
        return 0.0

    def integrand(zeta: float) -> float:
        return kolmogorov_sup_cdf(zeta, acc) * z_density(psi, zeta)

    value = integrate(integrand, (psi / 2.0, math.inf), quad_spec, points=_z_breakpoints(psi))
    return min(1.0, max(0.0, value))


def _series_term(a: np.ndarray) -> np.ndarray:
    # φ(a) con a = πk/(√2ψ): (√π/(2a))(erfc(2a) − 2 erfc(a)) − Ei(−a²) + Ei(−4a²)
    a = np.minimum(a, SERIES_ARG_CAP)
    a2 = a * a
    return (math.sqrt(math.pi) / (2.0 * a) * (erfc(2.0 * a) - 2.0 * erfc(a))
            - exp_integral_ei(-a2) + exp_integral_ei(-4.0 * a2))


def failure_prob_dyadic_series(psi: ArrayLike, acc: Optional[SeriesAccuracy] = None) -> ArrayLike:
    """
    h(ψ) por la serie en erf/Ei, vectorizada sobre ψ.

    La serie original Σ(−1)^{k+1}[(2ψ/(√(2π)k))erf(a_k) − (ψ/(√(2π)k))erf(2a_k)
    − Ei(−a_k²) + Ei(−4a_k²)]/ln 2, con a_k = πk/(√2ψ), contiene la parte
    Σ(−1)^{k+1}ψ/(√(2π)k) = ψ ln 2/√(2π), que converge como 1/k. Se suma aparte en
    forma cerrada y el resto, que decae como e^{−a_k²}, se trunca cuando |término| <
    acc.abs_tol con a_k² ≥ 1 (régimen monótono) y al menos tres términos.
    """
    acc = acc or DEFAULT_SERIES
    psi_arr = _psi_array(psi)
    flat = np.atleast_1d(psi_arr).ravel()
    out = np.zeros_like(flat)

    positive = np.flatnonzero(flat > 0)
    p = flat[positive]
    total = np.zeros_like(p)
    active = np.arange(p.size)
    step = math.pi / SQRT2

    k = 0
    while active.size:
        k += 1
        if k > acc.max_terms:
            logger.warning(
                f"Serie de h truncada en {acc.max_terms} términos para {active.size} valores de psi")
            break
        a = step * k / p[active]
        term = _series_term(a)
        total[active] += term if k % 2 else -term
        if k >= 3:
            done = (np.abs(term) < acc.abs_tol) & (a * a >= 1.0)
            active = active[~done]

    out[positive] = p / SQRT_2PI + total / LN2
    return _finish(np.clip(out, 0.0, 1.0), psi)


def failure_prob_reflection(psi: ArrayLike) -> ArrayLike:
    """erf(ψ/(2√2)), la probabilidad de fallo del acoplamiento maximal de reflexión."""
    return erf(_psi_array(psi) / (2.0 * SQRT2))


def failure_prob_brownian_web(psi: ArrayLike) -> ArrayLike:
    """erf(ψ/2): tiempo de encuentro de dos trayectorias independientes."""
    return erf(_psi_array(psi) / 2.0)


def failure_prob_attainable_gap(c: float, psi: ArrayLike) -> ArrayLike:
    """erf(ψ√c/(2√2)): fallo de un acoplamiento hipotético con brecha multiplicativa c."""
    if not c >= 1.0:
        raise ValueError(f"c debe ser ≥ 1, recibido: {c}")
    return erf(_psi_array(psi) * math.sqrt(c) / (2.0 * SQRT2))


# --- Cotas ---

def bound_tail(psi: ArrayLike) -> ArrayLike:
    """ψ/√(2π), pendiente de h en el origen y cota de la cola."""
    return _finish(_psi_array(psi) / SQRT_2PI, psi)


@dataclass(frozen=True)
class HeadBound:
    value: float
    valid: bool


def _head_value(psi: float, delta: float) -> float:
    x = delta - 1.0
    below = (math.log1p(x) - x / delta) / LN2
    return 1.0 - (1.0 - erf(psi * delta / (2.0 * SQRT2)) ** 3) * below


def head_bound_delta(psi: float, delta: float) -> float:
    """
    1 − (1 − erf(ψδ/(2√2))³)·(ln δ + δ⁻¹ − 1)/ln 2, válida para todo 1 < δ ≤ 2.

    El segundo factor es P(Z ≤ ψδ/2).
    """
    psi = as_psi(psi)
    if psi == 0.0:
        raise ValueError("La cota de cabeza requiere psi > 0")
    if not 1.0 < delta <= 2.0:
        raise ValueError(f"delta debe estar en (1, 2], recibido: {delta}")
    return _head_value(psi, delta)


def bound_head(psi: float) -> HeadBound:
    """Cota de cabeza con δ = 1 + 8/ψ²; marcada como no válida si ψ < 2√2."""
    psi = as_psi(psi)
    if psi == 0.0:
        return HeadBound(value=math.nan, valid=False)
    return HeadBound(value=_head_value(psi, 1.0 + 8.0 / (psi * psi)),
                     valid=psi >= HEAD_BOUND_MIN_PSI)


def bound_uniform(psi: ArrayLike) -> ArrayLike:
    """erf(eψ/2): la brecha 2e² con respecto a la reflexión."""
    return erf(_psi_array(psi) * math.e / 2.0)


def bound_best(psi: float) -> float:
    """Mínimo de las cotas válidas en ψ, recortado a [0, 1]."""
    psi = as_psi(psi)
    candidates = [bound_tail(psi), bound_uniform(psi)]
    head = bound_head(psi)
    if head.valid:
        candidates.append(head.value)
    return min(1.0, max(0.0, min(candidates)))


@dataclass(frozen=True, eq=False)
class BoundReport:
    psi_grid: np.ndarray
    h_exact: np.ndarray
    lower_reflection: np.ndarray
    bound_tail: np.ndarray
    bound_head: np.ndarray
    bound_head_valid: np.ndarray
    bound_uniform: np.ndarray

    def upper_envelope(self) -> np.ndarray:
        head = np.where(self.bound_head_valid, self.bound_head, np.inf)
        return np.minimum(np.minimum(self.bound_tail, self.bound_uniform), head)

    def violations(self, slack: float = 1e-9) -> np.ndarray:
        """Índices del grid donde falla reflexión ≤ h ≤ cotas."""
        bad = (self.lower_reflection > self.h_exact + slack) | \
              (self.h_exact > self.upper_envelope() + slack)
        return np.flatnonzero(bad)

    def sandwich_holds(self, slack: float = 1e-9) -> bool:
        return self.violations(slack).size == 0


def bound_report(psi_grid: Sequence[float],
                 quad_spec: Optional[QuadratureSpec] = None) -> BoundReport:
    psi = np.array([as_psi(v) for v in psi_grid], dtype=float)
    heads = [bound_head(v) for v in psi]
    report = BoundReport(
        psi_grid=psi,
        h_exact=np.array([failure_prob_dyadic(v, quad_spec) for v in psi]),
        lower_reflection=np.asarray(failure_prob_reflection(psi)),
        bound_tail=np.asarray(bound_tail(psi)),
        bound_head=np.array([hb.value for hb in heads]),
        bound_head_valid=np.array([hb.valid for hb in heads], dtype=bool),
        bound_uniform=np.asarray(bound_uniform(psi)),
    )
    bad = report.violations()
    if bad.size:
        logger.warning(f"Sándwich violado en psi = {psi[bad].tolist()}")
    return report


# --- CDF e inversas ---

def dyadic_coupling_cdf(psi: float, quad_spec: Optional[QuadratureSpec] = None,
                        acc: Optional[SeriesAccuracy] = None) -> float:
    """
    P(Υ ≤ s) = 1 − h(ψ), con ψ = |α−β|/√s.

    Cuando el valor cae por debajo de SMALL_CDF se evita la cancelación integrando
    P(sup_{t≤1} Y > ζ)·f_Z(ζ), con tolerancia puramente relativa.
    """
    psi = as_psi(psi)
    if psi == 0.0:
        return 1.0
    value = 1.0 - failure_prob_dyadic_series(psi, acc)
    if value >= SMALL_CDF:
        return value

    base = quad_spec or DEFAULT_QUADRATURE
    relative = QuadratureSpec(rel_tol=base.rel_tol, abs_tol=1e-300,
                              max_subdivisions=base.max_subdivisions)
    lower = psi / 2.0
    width = 2.0 / psi
    points = [psi] + [lower + m * width for m in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0)]
    return integrate(lambda zeta: kolmogorov_sup_sf(zeta, acc) * z_density(psi, zeta),
                     (lower, math.inf), relative, points=points)


def coupling_time_cdf(formula: str, s: ArrayLike, distance: float = 1.0) -> ArrayLike:
    """
    P(coupling time ≤ s) para puntos a distancia `distance`, vectorizada en s.
    'dyadic' usa la serie (precisión absoluta); 'bound' es 1 − bound_best.
    """
    if formula not in FORMULAS:
        raise ValueError(f"Fórmula desconocida: {formula}. Opciones: {FORMULAS}")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros_like(s_arr)
    pos = s_arr > 0
    psi = abs(distance) / np.sqrt(s_arr[pos])
    if formula == "dyadic":
        # Para ψ > NEGLIGIBLE_CDF_PSI la CDF es menor que e^{-ψ²/8} y se toma 0
        cdf = np.zeros_like(psi)
        near = psi <= NEGLIGIBLE_CDF_PSI
        cdf[near] = 1.0 - np.asarray(failure_prob_dyadic_series(psi[near]))
        out[pos] = cdf
    elif formula == "reflection":
        out[pos] = 1.0 - np.asarray(failure_prob_reflection(psi))
    elif formula == "web":
        out[pos] = 1.0 - np.asarray(failure_prob_brownian_web(psi))
    else:
        out[pos] = [1.0 - bound_best(v) for v in psi]
    return _finish(out, s)


def inverse_failure_time(formula: str, distance: float, p: float,
                         quad_spec: Optional[QuadratureSpec] = None) -> float:
    """
    s con P(coupling time ≤ s) = p para puntos a distancia `distance`.

    Reflexión y red browniana se invierten en forma cerrada con erfc⁻¹ (coincide con
    invert_monotone sobre la misma CDF); el diádico y la cota pasan por
    invert_monotone sobre s ↦ 1 − formula(1/√s) a distancia 1, con el intervalo de
    expand_bracket. En todos los casos el resultado es distance² × (inversa a distancia 1).

    Raises:
        ValueError: si p ∉ (0, 1), distance ≤ 0 o la fórmula es desconocida.
        BracketError: si no se logra encerrar p.
    """
    if formula not in FORMULAS:
        raise ValueError(f"Fórmula desconocida: {formula}. Opciones: {FORMULAS}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p debe estar en (0, 1), recibido: {p}")
    if not distance > 0:
        raise ValueError(f"distance debe ser positiva, recibido: {distance}")

    if formula in ("reflection", "web"):
        x = erfc_inverse(p)
        scale = 8.0 if formula == "reflection" else 4.0
        unit = 1.0 / (scale * x * x)
    else:
        if formula == "dyadic":
            def F(s: float) -> float:
                return dyadic_coupling_cdf(1.0 / math.sqrt(s), quad_spec)
        else:
            def F(s: float) -> float:
                return 1.0 - bound_best(1.0 / math.sqrt(s))
        unit = invert_monotone(F, p, expand_bracket(F, p))
    return distance * distance * unit


@dataclass(frozen=True, eq=False)
class RatioCurve:
    """Cocientes de cuantiles con respecto a la reflexión, a distancia 1."""
    p_grid: np.ndarray
    ratio: np.ndarray
    ratio_web: np.ndarray
    ratio_bound: np.ndarray


def ratio_curve(p_grid: Sequence[float],
                quad_spec: Optional[QuadratureSpec] = None) -> RatioCurve:
    p = np.asarray(p_grid, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("Todas las probabilidades del grid deben estar en (0, 1)")

    ratio = np.empty_like(p)
    ratio_web = np.empty_like(p)
    ratio_bound = np.empty_like(p)
    for i, pi in enumerate(p):
        reference = inverse_failure_time("reflection", 1.0, pi)
        ratio[i] = inverse_failure_time("dyadic", 1.0, pi, quad_spec) / reference
        ratio_web[i] = inverse_failure_time("web", 1.0, pi) / reference
        ratio_bound[i] = inverse_failure_time("bound", 1.0, pi) / reference
    logger.debug(f"Curva de cocientes: {p.size} puntos, máximo {ratio.max():.6f}")
    return RatioCurve(p_grid=p, ratio=ratio, ratio_web=ratio_web, ratio_bound=ratio_bound)


def gap_function_r(t: float, quad_spec: Optional[QuadratureSpec] = None) -> float:
    """r(t) = F_Υ⁻¹(F_Υ̂(t))/t a distancia 1."""
    if not t > 0:
        raise ValueError(f"t debe ser positivo, recibido: {t}")
    p = erfc(1.0 / (2.0 * SQRT2 * math.sqrt(t)))
    if not 0.0 < p < 1.0:
        raise ValueError(f"F_reflexión({t}) = {p} no es invertible en doble precisión")
    return inverse_failure_time("dyadic", 1.0, p, quad_spec) / t


# --- Concavidad ---

@dataclass(frozen=True, eq=False)
class ConcavityReport:
    psi_grid: np.ndarray
    h: np.ndarray
    second_differences: np.ndarray
    tolerance: float

    @property
    def concave(self) -> bool:
        return bool(np.all(self.second_differences <= self.tolerance))

    @property
    def nondecreasing(self) -> bool:
        return bool(np.all(np.diff(self.h) >= -self.tolerance))


def concavity_check(psi_grid: Sequence[float],
                    quad_spec: Optional[QuadratureSpec] = None) -> ConcavityReport:
    """
    Segundas diferencias centrales de h sobre un grid uniforme. La tolerancia es el
    ruido de cuadratura: 1e-9 + 10×abs_tol.
    """
    spec = quad_spec or DEFAULT_QUADRATURE
    psi = np.array([as_psi(v) for v in psi_grid], dtype=float)
    if psi.size < 3:
        raise ValueError("Se necesitan al menos tres puntos para las segundas diferencias")
    spacing = np.diff(psi)
    if spacing[0] <= 0 or not np.allclose(spacing, spacing[0], rtol=1e-6, atol=0.0):
        raise ValueError("El grid de psi debe ser uniforme y creciente")

    h = np.array([failure_prob_dyadic(v, spec) for v in psi])
    second = h[2:] - 2.0 * h[1:-1] + h[:-2]
    report = ConcavityReport(psi_grid=psi, h=h, second_differences=second,
                             tolerance=1e-9 + 10.0 * spec.abs_tol)
    if not report.concave:
        logger.warning(f"Segunda diferencia máxima {second.max():.3e} supera la tolerancia")
    return report


def subadditivity_excess(psi1: ArrayLike, psi2: ArrayLike) -> ArrayLike:
    """h(ψ₁+ψ₂) − h(ψ₁) − h(ψ₂); no positivo por subaditividad."""
    a = _psi_array(psi1)
    b = _psi_array(psi2)
    return (np.asarray(failure_prob_dyadic_series(a + b))
            - np.asarray(failure_prob_dyadic_series(a))
            - np.asarray(failure_prob_dyadic_series(b)))


# --- Desigualdad de no existencia ---

HTilde = Callable[[np.ndarray], np.ndarray]


def zero_gap(x: np.ndarray) -> np.ndarray:
    """h̃ ≡ 0: un acoplamiento maximal por pares."""
    return np.zeros_like(np.asarray(x, dtype=float))


def attainable_gap_excess(c: float) -> HTilde:
    """h̃_c(x) = erf(x√c/(2√2)) − erf(x/(2√2))."""
    if not c >= 1.0:
        raise ValueError(f"c debe ser ≥ 1, recibido: {c}")

    def h_tilde(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(failure_prob_attainable_gap(c, x)) - np.asarray(failure_prob_reflection(x))
    return h_tilde


def dyadic_gap_excess(x: np.ndarray) -> np.ndarray:
    """h̃(x) = h(x) − erf(x/(2√2)) del acoplamiento diádico."""
    x = np.asarray(x, dtype=float)
    return np.asarray(failure_prob_dyadic_series(x)) - np.asarray(failure_prob_reflection(x))


def _on_unique(h_tilde: HTilde, x: np.ndarray) -> np.ndarray:
    values, inverse = np.unique(x, return_inverse=True)
    return np.asarray(h_tilde(values), dtype=float)[inverse].reshape(x.shape)


def thm4_rhs(s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """erfc(1/√(2t)) − erfc(1/√(2s)) − erfc(1/(4√(2(t−s))))."""
    s_arr, t_arr = _check_times(s, t)
    value = (erfc(1.0 / np.sqrt(2.0 * t_arr)) - erfc(1.0 / np.sqrt(2.0 * s_arr))
             - erfc(1.0 / (4.0 * np.sqrt(2.0 * (t_arr - s_arr)))))
    return _finish(np.asarray(value), s)


def _check_times(s: ArrayLike, t: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(s_arr <= 0) or np.any(t_arr <= s_arr):
        raise ValueError("Se requiere 0 < s < t")
    return s_arr, t_arr


def thm4_deficit(h_tilde: HTilde, s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """
    [h̃(2/√t) + h̃(2/√s) + 2h̃(1/√s)] − thm4_rhs(s, t).

    Un acoplamiento con exceso h̃ sobre la reflexión necesita déficit ≥ 0 en todo
    0 < s < t; con h̃ ≡ 0 el déficit es negativo en algún par.

    Raises:
        ValueError: si no se cumple 0 < s < t.
    """
    s_arr, t_arr = _check_times(s, t)
    lhs = (_on_unique(h_tilde, 2.0 / np.sqrt(t_arr)) + _on_unique(h_tilde, 2.0 / np.sqrt(s_arr))
           + 2.0 * _on_unique(h_tilde, 1.0 / np.sqrt(s_arr)))
    return _finish(lhs - np.asarray(thm4_rhs(s_arr, t_arr)), s)


def default_scan_grid(s_range: Tuple[float, float] = (0.1, 0.5),
                      gap_range: Tuple[float, float] = (0.0005, 0.02),
                      step: float = 1e-4) -> Tuple[np.ndarray, np.ndarray]:
    """Pares (s, t) con s y t − s sobre rejillas de paso `step`, redondeados a 4 decimales."""
    def axis(lo: float, hi: float) -> np.ndarray:
        n = int(round((hi - lo) / step)) + 1
        return np.round(lo + step * np.arange(n), 4)

    s, gap = np.meshgrid(axis(*s_range), axis(*gap_range), indexing='ij')
    s = s.ravel()
    return s, np.round(s + gap.ravel(), 4)


@dataclass(frozen=True)
class GapScanResult:
    c: Optional[float]
    min_deficit: float
    witness_s: float
    witness_t: float
    pairs_checked: int

    @property
    def not_attainable(self) -> bool:
        return self.min_deficit < 0.0

    @property
    def verdict(self) -> str:
        return "not attainable" if self.not_attainable else "no violation found"


def gap_attainability_scan(c: Optional[float],
                           grid: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                           h_tilde: Optional[HTilde] = None) -> GapScanResult:
    """
    Déficit mínimo sobre el grid de pares (s, t) para la brecha c. Si `h_tilde` se
    da explícitamente, c es sólo una etiqueta (puede ser None).
    """
    if h_tilde is None:
        if c is None:
            raise ValueError("Se requiere c o h_tilde")
        h_tilde = attainable_gap_excess(c)
    s, t = grid if grid is not None else default_scan_grid()
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))

    deficit = np.atleast_1d(thm4_deficit(h_tilde, s, t))
    worst = int(np.argmin(deficit))
    result = GapScanResult(c=c, min_deficit=float(deficit[worst]),
                           witness_s=float(s[worst]), witness_t=float(t[worst]),
                           pairs_checked=int(s.size))
    logger.info(
        f"Barrido c={c}: {result.verdict}, déficit mínimo {result.min_deficit:.3e} "
        f"en (s, t) = ({result.witness_s}, {result.witness_t}) sobre {result.pairs_checked} pares")
    return result
