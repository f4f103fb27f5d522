from .server import Gateway, GatewayServer, ROLE_MATRIX, authorize

__all__ = ["Gateway", "GatewayServer", "ROLE_MATRIX", "authorize"]
