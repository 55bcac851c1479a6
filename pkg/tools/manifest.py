"""
Run manifests: one INI section per experiment, `[DEFAULT]` for shared values.

    [DEFAULT]
    samples = 64
    seed = 7

    [skylake-bhb-full]
    platform = skylake
    protocol = bhb
    policy = full
"""

import configparser
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from harness.experiment import ExperimentConfig
from protocols import ProtocolSpec
from shared.errors import ConfigError

ReportFormat = Literal["csv", "json", "heatmap", "curve"]
REPORT_FORMATS: tuple[ReportFormat, ...] = ("csv", "json", "heatmap", "curve")

EXPERIMENT_KEYS = {
    "platform", "protocol", "policy", "samples", "seed", "noise", "inputs",
    "trojan_base", "spy_base", "trojan_repeats", "warmup", "scrub",
}


class RunManifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    experiments: tuple[ExperimentConfig, ...]
    out: Path
    formats: tuple[ReportFormat, ...] = REPORT_FORMATS

    @model_validator(mode="after")
    def _unique_names(self) -> "RunManifest":
        names = [e.name for e in self.experiments]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValueError(f"duplicate experiment names: {', '.join(dupes)}")
        return self


def parse_formats(raw: str) -> tuple[ReportFormat, ...]:
    formats = tuple(f.strip() for f in raw.split(",") if f.strip())
    unknown = [f for f in formats if f not in REPORT_FORMATS]
    if unknown or not formats:
        raise ConfigError(f"bad report formats {raw!r} (choose from {', '.join(REPORT_FORMATS)})")
    return formats  # type: ignore[return-value]


def parse_inputs(raw: str) -> tuple[int, ...]:
    """`0,1,5` or ranges such as `32-48`, mixed freely."""
    values: list[int] = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        try:
            values.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError:
            raise ConfigError(f"bad input list {raw!r}") from None
    return tuple(values)


def _int(raw: str) -> int:
    return int(raw, 0)


def _repeats(raw: str) -> int | None:
    """`none` lets a repeating Trojan run until its slice budget is spent."""
    return None if raw.strip().lower() == "none" else int(raw)


def experiment_from_section(name: str, section: configparser.SectionProxy) -> ExperimentConfig:
    unknown = set(section) - EXPERIMENT_KEYS - {"out", "format"}
    if unknown:
        raise ConfigError(f"[{name}]: unknown keys {', '.join(sorted(unknown))}")
    if "platform" not in section or "protocol" not in section:
        raise ConfigError(f"[{name}]: platform and protocol are required")

    try:
        protocol = ProtocolSpec(
            name=section["protocol"],
            inputs=parse_inputs(section["inputs"]) if "inputs" in section else None,
            trojan_base=_int(section["trojan_base"]) if "trojan_base" in section else None,
            spy_base=_int(section["spy_base"]) if "spy_base" in section else None,
            trojan_repeats=_repeats(section.get("trojan_repeats", "8")),
        )
        return ExperimentConfig(
            name=name,
            platform=section["platform"],
            protocol=protocol,
            policy=section.get("policy", "none"),
            samples_per_symbol=section.getint("samples", 16),
            seed=section.getint("seed", 0),
            noise_stddev=section.getfloat("noise") if "noise" in section else None,
            warmup_rounds=section.getint("warmup", 2),
            scrub_residual=section.getboolean("scrub", False),
        )
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"[{name}]: {e}") from e


def parse_manifest(text: str, source: str = "<manifest>", out: Path | None = None) -> RunManifest:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e}") from e

    sections = parser.sections()
    if not sections:
        raise ConfigError(f"{source}: no experiments")
    experiments = tuple(experiment_from_section(name, parser[name]) for name in sections)
    defaults = parser.defaults()
    try:
        return RunManifest(
            experiments=experiments,
            out=out or Path(defaults.get("out", "results")),
            formats=parse_formats(defaults.get("format", ",".join(REPORT_FORMATS))),
        )
    except ValidationError as e:
        raise ConfigError(f"{source}: {e}") from e


def load_manifest(path: str | Path, out: Path | None = None) -> RunManifest:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    return parse_manifest(text, source=str(path), out=out)
