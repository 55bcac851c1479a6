"""
Flat key-value configuration files.

    # comment
    name = skylake
    l1d_geometry.sets = 64
    prefetcher.data_prefetcher.enabled = true

Dotted keys nest; values are parsed as bool, int, float or left as strings.
"""

from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from .errors import ConfigError

M = TypeVar("M", bound=BaseModel)


def parse_value(raw: str) -> Any:
    value = raw.strip()
    lowered = value.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def parse_flat(text: str, source: str = "<string>") -> dict[str, Any]:
    """Parse flat `key = value` lines into a nested dict."""
    result: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")

        node = result
        *parents, leaf = key.split(".")
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"{source}:{lineno}: {part!r} is both a value and a section")
            node = child
        if leaf in node:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        node[leaf] = parse_value(raw)
    return result


def load_model(path: str | Path, model: type[M]) -> M:
    """Read a flat config file and validate it into `model`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    data = parse_flat(text, source=str(path))
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e
