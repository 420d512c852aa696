#!/usr/bin/env python
# run.py - Script para ejecutar los comandos del acoplamiento diádico

import os
import sys

# Añadir el directorio raíz al path para poder importar el paquete src
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

if __name__ == "__main__":
    from src.main import main

    sys.exit(main())
