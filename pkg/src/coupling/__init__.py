# Este archivo inicializa el paquete `coupling`.
