# conftest.py
# Registro de marcadores de pytest. Las pruebas de aceptación largas (simulación de
# trayectorias a tamaño completo) llevan el marcador `slow`: pytest -m "not slow".


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: pruebas de aceptación de varios minutos (simulación de trayectorias)")
