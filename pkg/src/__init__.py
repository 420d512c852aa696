# Este archivo convierte el directorio src en un paquete Python
