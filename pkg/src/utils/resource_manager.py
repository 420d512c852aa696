# src/utils/resource_manager.py
from contextlib import contextmanager
import logging
import os

logger = logging.getLogger(__name__)


class ResourceManager:
    @contextmanager
    def managed_output_file(self, file_path: str):
        """
        Abre `file_path` para escritura de texto (UTF-8, fin de línea LF) a través de un
        archivo temporal que sólo reemplaza al destino si el bloque termina sin errores.
        """
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        temp_path = f"{file_path}.tmp"
        try:
            with open(temp_path, 'w', encoding='utf-8', newline='') as f:
                yield f
            os.replace(temp_path, file_path)
        finally:
            if os.path.exists(temp_path):
                try:
                    os.remove(temp_path)
                except OSError:
                    logger.warning(f"No se pudo eliminar el archivo temporal: {temp_path}")
