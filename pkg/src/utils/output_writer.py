# src/utils/output_writer.py
# Escritura de resultados: CSV (coma, cabecera, UTF-8, LF, floats con 17 cifras
# significativas) para curvas y tablas, JSON para veredictos y resúmenes.

import csv
import json
import logging
import math
from typing import Any, Dict, Iterable, List, Mapping, Sequence

import numpy as np

from .resource_manager import ResourceManager

logger = logging.getLogger(__name__)

_resources = ResourceManager()


def format_value(value: Any) -> str:
    """Representación textual determinista de un valor de celda."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, '.17g')
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    Escribe un CSV con cabecera.

    Raises:
        OSError: si el archivo no se puede escribir.
    """
    count = 0
    try:
        with _resources.managed_output_file(path) as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                if len(row) != len(header):
                    raise ValueError(
                        f"Fila con {len(row)} columnas; la cabecera tiene {len(header)}")
                writer.writerow([format_value(v) for v in row])
                count += 1
    except OSError as e:
        logger.error(f"Error al escribir el CSV {path}: {e}")
        raise
    logger.info(f"CSV guardado en: {path} ({count} filas)")
    return path


def write_columns(path: str, columns: Mapping[str, Sequence[Any]]) -> str:
    """CSV a partir de columnas de igual longitud, en el orden del diccionario."""
    header = list(columns.keys())
    lengths = {len(v) for v in columns.values()}
    if len(lengths) > 1:
        raise ValueError(f"Columnas de longitudes distintas: {sorted(lengths)}")
    return write_csv(path, header, zip(*columns.values()))


def read_columns(path: str) -> Dict[str, List[str]]:
    """Lee un CSV escrito por este módulo como columnas de texto."""
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        header = next(reader)
        columns: Dict[str, List[str]] = {name: [] for name in header}
        for row in reader:
            for name, cell in zip(header, row):
                columns[name].append(cell)
    return columns


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON no admite NaN ni infinitos
        return value if math.isfinite(value) else format_value(value)
    return value


def write_json(path: str, data: Mapping[str, Any]) -> str:
    try:
        with _resources.managed_output_file(path) as f:
            json.dump(_to_jsonable(dict(data)), f, indent=4, ensure_ascii=False)
            f.write('\n')
    except OSError as e:
        logger.error(f"Error al escribir el JSON {path}: {e}")
        raise
    logger.info(f"JSON guardado en: {path}")
    return path


def write_bundle_csv(path: str, bundle) -> str:
    """Haz de trayectorias: columna t seguida de una columna por punto de partida, cuyo
    encabezado es el propio punto de partida."""
    header = ["t"] + [format_value(start) for start in bundle.starts]
    rows = (np.concatenate(([t], bundle.x[:, k])) for k, t in enumerate(bundle.grid.t))
    return write_csv(path, header, rows)


def write_samples_csv(path: str, samples) -> str:
    """Volcado de muestras de Υ: value, censored, method."""
    rows = ((v, c, samples.method) for v, c in zip(samples.values, samples.censored))
    return write_csv(path, ["value", "censored", "method"], rows)
