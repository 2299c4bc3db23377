from .app import create_app
from .config import GatewayConfig

__all__ = ["GatewayConfig", "create_app"]
__version__ = "0.1.0"
