# src/coupling/pair_couplings.py
# Interfaz base para los acoplamientos de pares (reflexión, red browniana)
# y la fábrica que los crea por nombre.

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .path_sim import RngLike, TimeGrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PairPaths:
    """Dos trayectorias acopladas sobre la misma rejilla y su tiempo de acoplamiento."""
    grid: TimeGrid
    x_alpha: np.ndarray
    x_beta: np.ndarray
    coupling_time: float
    censored: bool


class PairCoupling(ABC):
    """
    Interfaz base abstracta para acoplamientos de dos movimientos brownianos.
    Cada implementación debe definir `couple`.
    """
    name = "abstract"

    @abstractmethod
    def couple(self, rng: np.random.Generator, alpha: float, beta: float,
               grid: TimeGrid) -> PairPaths:
        """
        Genera las dos trayectorias desde alpha y beta.

        Returns:
            PairPaths: trayectorias, tiempo de acoplamiento y bandera de censura.

        Raises:
            PairCoupling.CouplingError: si alpha == beta.
        """
        pass

    class CouplingError(Exception):
        """Excepción base para errores de acoplamiento."""
        pass

    def _check_pair(self, alpha: float, beta: float):
        if alpha == beta:
            raise PairCoupling.CouplingError(
                f"El acoplamiento '{self.name}' requiere alpha != beta (recibido {alpha})")

    @staticmethod
    def _brownian_path(rng: np.random.Generator, start: float, grid: TimeGrid) -> np.ndarray:
        steps = np.diff(grid.t)
        increments = rng.standard_normal(steps.size) * np.sqrt(steps)
        return start + np.concatenate(([0.0], np.cumsum(increments)))

    @staticmethod
    def _first_zero_crossing(d: np.ndarray, t: np.ndarray) -> Optional[tuple]:
        # Primer índice k con d[k] del signo opuesto a d[0] (o cero); tiempo interpolado
        crossed = np.flatnonzero(d * np.sign(d[0]) <= 0)
        if crossed.size == 0:
            return None
        k = int(crossed[0])
        fraction = d[k - 1] / (d[k - 1] - d[k])
        return k, float(t[k - 1] + fraction * (t[k] - t[k - 1]))


class ReflectionCoupling(PairCoupling):
    """X̂_β = α + β − X̂_α hasta que X̂_α alcanza el punto medio; iguales después."""
    name = "reflection"

    def couple(self, rng, alpha, beta, grid):
        self._check_pair(alpha, beta)
        x_alpha = self._brownian_path(rng, alpha, grid)
        x_beta = alpha + beta - x_alpha
        crossing = self._first_zero_crossing(x_alpha - (alpha + beta) / 2.0, grid.t)
        if crossing is None:
            return PairPaths(grid, x_alpha, x_beta, grid.horizon, True)
        k, tau = crossing
        x_beta[k:] = x_alpha[k:]
        return PairPaths(grid, x_alpha, x_beta, tau, False)


class BrownianWebCoupling(PairCoupling):
    """Dos trayectorias independientes hasta su primer encuentro; iguales después."""
    name = "web"

    def couple(self, rng, alpha, beta, grid):
        self._check_pair(alpha, beta)
        x_alpha = self._brownian_path(rng, alpha, grid)
        x_beta = self._brownian_path(rng, beta, grid)
        crossing = self._first_zero_crossing(x_beta - x_alpha, grid.t)
        if crossing is None:
            return PairPaths(grid, x_alpha, x_beta, grid.horizon, True)
        k, tau = crossing
        x_beta[k:] = x_alpha[k:]
        return PairPaths(grid, x_alpha, x_beta, tau, False)


class PairCouplingFactory:
    """
    Fábrica para crear acoplamientos de pares por nombre ('reflection', 'web').
    """
    @staticmethod
    def create(kind: str) -> PairCoupling:
        """
        Raises:
            ValueError: si el tipo de acoplamiento es desconocido.
        """
        logger.debug(f"Creando acoplamiento de pares: {kind}")
        if kind.lower() == "reflection":
            return ReflectionCoupling()
        elif kind.lower() == "web":
            return BrownianWebCoupling()
        logger.error(f"Tipo de acoplamiento desconocido: '{kind}'")
        raise ValueError(f"Tipo de acoplamiento desconocido: {kind}")


def reflection_pair(rng_seed: RngLike, alpha: float, beta: float, grid: TimeGrid) -> PairPaths:
    return PairCouplingFactory.create("reflection").couple(
        np.random.default_rng(rng_seed), alpha, beta, grid)


def brownian_web_pair(rng_seed: RngLike, alpha: float, beta: float, grid: TimeGrid) -> PairPaths:
    return PairCouplingFactory.create("web").couple(
        np.random.default_rng(rng_seed), alpha, beta, grid)
