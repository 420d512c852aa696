# src/config.py
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .utils.numerics import QuadratureSpec, SeriesAccuracy

logger = logging.getLogger(__name__)

# Variable de entorno que reemplaza el directorio de salida configurado
OUTPUT_DIR_ENV = "DYADIC_COUPLING_OUTPUT_DIR"

COMMANDS = ("failure-prob", "figures", "nonexistence", "validate")


class Config:
    # Ruta del archivo de configuración en el directorio de usuario
    CONFIG_DIR = os.path.join(os.path.expanduser("~"), ".dyadic_coupling")
    CONFIG_FILE = "config.json"

    # Configuración por defecto
    DEFAULT_CONFIG = {
        "seed": 20240501,
        "quadrature": {
            "rel_tol": 1e-10,
            "abs_tol": 1e-12,
            "max_subdivisions": 200
        },
        "series": {
            "abs_tol": 1e-15,
            "max_terms": 100000
        },
        "psi_grid": "0.01:30:60",  # lo:hi:pasos, espaciado logarítmico
        "p_grid": "0.0001:0.9999:200",  # lo:hi:pasos, espaciado lineal
        "dt": 1e-4,
        "n": 1000000,
        "n_path": 10000,
        "horizon": 100.0,
        "j_min": -12,
        "output_dir": "output"
    }

    def __init__(self, config_dir: Optional[str] = None):
        """Inicializa la configuración cargando desde archivo o usando valores por defecto."""
        self.config_dir = config_dir or self.CONFIG_DIR
        self.config_path = os.path.join(self.config_dir, self.CONFIG_FILE)
        self.settings: Dict[str, Any] = {}
        self.load_config()
        # Asegurarse de que todas las claves por defecto existan en la configuración cargada
        self._ensure_default_keys(self.settings, self.DEFAULT_CONFIG)
        self.save_config()

    def load_config(self):
        """Carga la configuración desde el archivo de usuario o usa la por defecto."""
        if not os.path.exists(self.config_path):
            logger.info(
                f"Archivo de configuración no encontrado en {self.config_path}. Usando configuración por defecto.")
            self.settings = json.loads(json.dumps(self.DEFAULT_CONFIG))
            return
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                loaded_settings = json.load(f)
            if isinstance(loaded_settings, dict):
                self.settings = loaded_settings
                logger.info("Configuración cargada desde archivo.")
            else:
                logger.warning(
                    f"Contenido del archivo de configuración {self.config_path} no es un diccionario. Usando configuración por defecto.")
                self.settings = json.loads(json.dumps(self.DEFAULT_CONFIG))
        except (OSError, json.JSONDecodeError) as e:
            logger.error(
                f"Error al cargar configuración del archivo {self.config_path}: {e}")
            logger.warning("Usando configuración por defecto debido a error de carga.")
            self.settings = json.loads(json.dumps(self.DEFAULT_CONFIG))

    def save_config(self):
        """Guarda la configuración actual en el archivo de usuario."""
        try:
            os.makedirs(self.config_dir, exist_ok=True)
            with open(self.config_path, 'w', encoding='utf-8') as f:
                json.dump(self.settings, f, indent=4)
            logger.debug(f"Configuración guardada en: {self.config_path}")
        except OSError as e:
            logger.error(
                f"Error al guardar configuración en el archivo {self.config_path}: {e}")

    def _ensure_default_keys(self, settings: Dict[str, Any], default_settings: Dict[str, Any]):
        """Asegura que todas las claves por defecto existan, también en los diccionarios anidados."""
        for key, default_value in default_settings.items():
            if key not in settings:
                settings[key] = json.loads(json.dumps(default_value))
                logger.debug(f"Clave '{key}' faltante, añadiendo valor por defecto.")
            elif isinstance(default_value, dict) and isinstance(settings[key], dict):
                self._ensure_default_keys(settings[key], default_value)

    # --- Métodos Getter y Setter para acceder a la configuración ---

    def get_seed(self) -> int:
        return int(self.settings.get("seed", self.DEFAULT_CONFIG["seed"]))

    def set_seed(self, seed: int):
        self.settings["seed"] = int(seed)
        self.save_config()

    def get_quadrature_spec(self) -> QuadratureSpec:
        quad = self.settings.get("quadrature", self.DEFAULT_CONFIG["quadrature"])
        return QuadratureSpec(rel_tol=float(quad["rel_tol"]), abs_tol=float(quad["abs_tol"]),
                              max_subdivisions=int(quad["max_subdivisions"]))

    def set_quadrature_tolerance(self, rel_tol: float, abs_tol: float):
        self.settings["quadrature"]["rel_tol"] = float(rel_tol)
        self.settings["quadrature"]["abs_tol"] = float(abs_tol)
        self.save_config()

    def get_series_accuracy(self) -> SeriesAccuracy:
        series = self.settings.get("series", self.DEFAULT_CONFIG["series"])
        return SeriesAccuracy(abs_tol=float(series["abs_tol"]), max_terms=int(series["max_terms"]))

    def get_psi_grid(self) -> str:
        return self.settings.get("psi_grid", self.DEFAULT_CONFIG["psi_grid"])

    def get_p_grid(self) -> str:
        return self.settings.get("p_grid", self.DEFAULT_CONFIG["p_grid"])

    def get_dt(self) -> float:
        return float(self.settings.get("dt", self.DEFAULT_CONFIG["dt"]))

    def get_sample_size(self) -> int:
        return int(self.settings.get("n", self.DEFAULT_CONFIG["n"]))

    def get_path_sample_size(self) -> int:
        return int(self.settings.get("n_path", self.DEFAULT_CONFIG["n_path"]))

    def get_horizon(self) -> float:
        return float(self.settings.get("horizon", self.DEFAULT_CONFIG["horizon"]))

    def get_j_min(self) -> int:
        return int(self.settings.get("j_min", self.DEFAULT_CONFIG["j_min"]))

    def get_output_dir(self) -> str:
        """Directorio de salida: la variable de entorno tiene prioridad sobre el archivo."""
        return os.environ.get(OUTPUT_DIR_ENV) or self.settings.get(
            "output_dir", self.DEFAULT_CONFIG["output_dir"])

    def set_output_dir(self, output_dir: str):
        self.settings["output_dir"] = output_dir
        self.save_config()


def parse_grid(text: str, log: bool) -> Tuple[float, ...]:
    """
    'lo:hi:pasos' → tupla de `pasos` puntos entre lo y hi (extremos incluidos),
    geométricamente espaciados si `log`.

    Raises:
        ValueError: si el texto no tiene esa forma o los extremos no son válidos.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"Grid inválido '{text}': se esperaba lo:hi:pasos")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 1 or hi < lo or (steps > 1 and hi == lo):
        raise ValueError(f"Grid inválido '{text}'")
    if steps == 1:
        return (lo,)
    if log:
        if lo <= 0:
            raise ValueError(f"Un grid logarítmico requiere lo > 0: '{text}'")
        return tuple(float(v) for v in np.geomspace(lo, hi, steps))
    return tuple(float(v) for v in np.linspace(lo, hi, steps))


def parse_values(text: str) -> Tuple[float, ...]:
    """Lista separada por comas, p. ej. '0,0.5,1'."""
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise ValueError(f"Lista de valores inválida '{text}'") from e


def parse_pairs(text: str) -> Tuple[Tuple[float, float], ...]:
    """Pares s:t separados por comas, p. ej. '0.33:0.3348,0.2361:0.2408'."""
    pairs = []
    for item in text.split(","):
        if not item.strip():
            continue
        parts = item.split(":")
        if len(parts) != 2:
            raise ValueError(f"Par inválido '{item}': se esperaba s:t")
        pairs.append((float(parts[0]), float(parts[1])))
    return tuple(pairs)


@dataclass(frozen=True)
class RunConfig:
    """Entrada única de los comandos; idéntica RunConfig ⇒ salidas idénticas byte a byte."""
    command: str
    seed: int
    output_dir: str
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    series: SeriesAccuracy = field(default_factory=SeriesAccuracy)
    psi_grid: Tuple[float, ...] = ()
    p_grid: Tuple[float, ...] = ()
    c_values: Tuple[float, ...] = ()
    scan_points: Tuple[Tuple[float, float], ...] = ()
    dt: float = 1e-4
    n: int = 1000000
    n_path: int = 10000
    horizon: float = 100.0
    j_min: int = -12
    figure: Optional[int] = None
    corrupt_formula: float = 1.0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"Comando desconocido: {self.command}. Opciones: {COMMANDS}")
        if self.dt <= 0 or self.horizon <= 0:
            raise ValueError("dt y horizon deben ser positivos")
        if self.n < 1 or self.n_path < 1:
            raise ValueError("Los tamaños de muestra deben ser positivos")
        if self.figure is not None and self.figure not in (1, 2, 3):
            raise ValueError(f"Figura desconocida: {self.figure}")
        if self.corrupt_formula <= 0:
            raise ValueError("El factor de corrupción debe ser positivo")
