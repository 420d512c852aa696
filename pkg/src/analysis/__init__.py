# Este archivo inicializa el paquete `analysis`.
