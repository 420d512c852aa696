# Este archivo inicializa el paquete utils
