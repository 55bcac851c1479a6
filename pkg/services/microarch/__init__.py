from .platforms import BUILTIN_PLATFORMS, builtin_platforms, load_platform
from .state import MicroState

__all__ = ["BUILTIN_PLATFORMS", "MicroState", "builtin_platforms", "load_platform"]
