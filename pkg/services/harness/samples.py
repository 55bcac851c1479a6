"""
Sample sets and their CSV interchange format.

    # schema_version=1
    # protocol="l1i"
    # platform="a9"
    # ...
    input,output
    12,4410

Metadata lines carry JSON values. Externally collected traces only need the
`input,output` table; metadata is optional.
"""

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import orjson
import pandas as pd

from shared.errors import ConfigError, EmptyInput, SampleParseError

SCHEMA_VERSION = 1
HEADER = "input,output"


@dataclass
class SampleSet:
    protocol: str
    inputs: np.ndarray
    outputs: np.ndarray
    input_set: list[int]
    platform: str | None = None
    policy: str | None = None
    seed: int | None = None
    samples_per_symbol: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.inputs = np.asarray(self.inputs, dtype=np.int64)
        self.outputs = np.asarray(self.outputs, dtype=np.int64)
        if self.inputs.shape != self.outputs.shape:
            raise ValueError("inputs and outputs differ in length")

    def __len__(self) -> int:
        return len(self.inputs)

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.inputs.tolist(), self.outputs.tolist()))

    def counts(self) -> dict[int, int]:
        values, counts = np.unique(self.inputs, return_counts=True)
        found = dict(zip(values.tolist(), counts.tolist()))
        return {s: found.get(s, 0) for s in self.input_set}

    def check_complete(self) -> None:
        missing = [s for s, n in self.counts().items() if n == 0]
        if missing:
            raise EmptyInput(f"{self.protocol}: no samples for inputs {missing[:10]}")

    def metadata(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "protocol": self.protocol,
            "platform": self.platform,
            "policy": self.policy,
            "seed": self.seed,
            "samples_per_symbol": self.samples_per_symbol,
            "inputs": self.input_set,
            **self.extra,
        }


def to_csv(samples: SampleSet) -> str:
    lines = [f"# {key}={orjson.dumps(value).decode()}" for key, value in samples.metadata().items()]
    lines.append(HEADER)
    lines.extend(f"{i},{o}" for i, o in zip(samples.inputs.tolist(), samples.outputs.tolist()))
    return "\n".join(lines) + "\n"


def write_csv(samples: SampleSet, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(samples))
    return path


def parse_csv(text: str, source: str = "<string>") -> SampleSet:
    meta: dict[str, Any] = {}
    header_line = None
    data_lines: list[int] = []
    body: list[str] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if header_line is not None:
                continue
            key, sep, value = line[1:].strip().partition("=")
            if not sep or not key.strip():
                raise SampleParseError(f"{source}: bad metadata line {line!r}", lineno)
            try:
                meta[key.strip()] = orjson.loads(value)
            except orjson.JSONDecodeError:
                raise SampleParseError(f"{source}: metadata value for {key.strip()!r} is not JSON", lineno) from None
            continue
        if header_line is None:
            if line.replace(" ", "") != HEADER:
                raise SampleParseError(f"{source}: expected header {HEADER!r}, got {line!r}", lineno)
            header_line = lineno
            continue
        if line.count(",") != 1:
            raise SampleParseError(f"{source}: expected 2 fields, got {line.count(',') + 1}", lineno)
        data_lines.append(lineno)
        body.append(line)

    if header_line is None:
        raise SampleParseError(f"{source}: missing {HEADER!r} header", 1)

    version = meta.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SampleParseError(f"{source}: unsupported schema_version {version}", 1)

    frame = pd.read_csv(io.StringIO("\n".join([HEADER, *body])), dtype=str, skipinitialspace=True)
    for column in ("input", "output"):
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = values.isna() | (values != values.round())
        if column == "output":
            bad |= values < 0
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise SampleParseError(
                f"{source}: {column} {frame[column].iloc[row]!r} is not a valid integer", data_lines[row]
            )
        frame[column] = values.astype(np.int64)

    inputs = frame["input"].to_numpy()
    declared = meta.get("inputs")
    if declared:
        undeclared = ~np.isin(inputs, declared)
        if undeclared.any():
            row = int(np.flatnonzero(undeclared)[0])
            raise SampleParseError(f"{source}: input {inputs[row]} not in the declared inputs", data_lines[row])
    input_set = declared or sorted(set(inputs.tolist()))

    fields = ("schema_version", "protocol", "platform", "policy", "seed", "samples_per_symbol", "inputs")
    known = {k: meta.pop(k, None) for k in fields}
    return SampleSet(
        protocol=known["protocol"] or "external",
        inputs=inputs,
        outputs=frame["output"].to_numpy(),
        input_set=[int(s) for s in input_set],
        platform=known["platform"],
        policy=known["policy"],
        seed=known["seed"],
        samples_per_symbol=known["samples_per_symbol"],
        extra=meta,
    )


def read_csv(path: str | Path) -> SampleSet:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    return parse_csv(text, source=str(path))
