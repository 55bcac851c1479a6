import os
from functools import lru_cache
from pathlib import Path

from shared.config import load_model
from shared.errors import ConfigError
from shared.logger import log
from shared.models import PlatformConfig

PROFILE_DIR = Path(__file__).parent / "profiles"
BUILTIN_PLATFORMS = ("sandy-bridge", "haswell", "skylake", "a9", "a53", "a57")


def _search_dirs() -> list[Path]:
    dirs = []
    extra = os.getenv("LEAKBENCH_PROFILE_DIR")
    if extra:
        dirs.append(Path(extra))
    dirs.append(PROFILE_DIR)
    return dirs


@lru_cache(maxsize=None)
def _load(path: Path) -> PlatformConfig:
    platform = load_model(path, PlatformConfig)
    log.debug(f"Loaded platform {platform.name} from {path}")
    return platform


def load_platform(name_or_path: str | Path) -> PlatformConfig:
    """Resolve a built-in profile name, a profile in LEAKBENCH_PROFILE_DIR, or a file path."""
    candidate = Path(name_or_path)
    if candidate.suffix == ".conf" or candidate.is_file():
        if not candidate.is_file():
            raise ConfigError(f"platform file {candidate} not found")
        return _load(candidate.resolve())

    for directory in _search_dirs():
        path = directory / f"{name_or_path}.conf"
        if path.is_file():
            return _load(path.resolve())
    raise ConfigError(
        f"unknown platform {str(name_or_path)!r} (built-in: {', '.join(BUILTIN_PLATFORMS)})"
    )


def builtin_platforms() -> list[PlatformConfig]:
    return [load_platform(name) for name in BUILTIN_PLATFORMS]
