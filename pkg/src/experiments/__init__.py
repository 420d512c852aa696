# Este archivo inicializa el paquete `experiments`.
