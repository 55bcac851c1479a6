from typing import Literal

import orjson
from pydantic import BaseModel, ConfigDict

from harness.samples import SampleSet
from shared.logger import log

from .matrix import BinningRule, build_matrix
from .shuffle import DEFAULT_TRIALS, shuffle_bound
from .solver import blahut_arimoto

REPORT_SCHEMA_VERSION = 1


def bandwidth(capacity: float, rate: float) -> float:
    """Bits per second from bits per symbol and symbols per second."""
    return capacity * rate


class CapacityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: int = REPORT_SCHEMA_VERSION
    protocol: str
    platform: str | None = None
    policy: str | None = None
    seed: int
    samples: int
    inputs: int
    bins: int
    capacity_bits: float
    c0_bits: float
    trials: int
    verdict: Literal["channel_present", "inconclusive"]
    residual_lower_bound: float
    symbol_rate: float | None = None
    bandwidth_bps: float | None = None
    iterations: int
    input_distribution: list[float]

    def to_json(self) -> bytes:
        return orjson.dumps(self.model_dump(), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)


def analyze(
    samples: SampleSet,
    trials: int = DEFAULT_TRIALS,
    seed: int | None = None,
    rate: float | None = None,
    binning: BinningRule | None = None,
) -> CapacityReport:
    """Channel matrix, capacity, shuffle bound and verdict for one sample set."""
    seed = seed if seed is not None else (samples.seed or 0)
    matrix = build_matrix(samples, binning)
    result = blahut_arimoto(matrix.probs)
    c0 = shuffle_bound(samples, trials=trials, binning=binning, seed=seed)
    capacity = result.capacity
    verdict = "channel_present" if capacity > c0 else "inconclusive"

    report = CapacityReport(
        protocol=samples.protocol,
        platform=samples.platform,
        policy=samples.policy,
        seed=seed,
        samples=len(samples),
        inputs=matrix.shape[0],
        bins=matrix.shape[1],
        capacity_bits=capacity,
        c0_bits=c0,
        trials=trials,
        verdict=verdict,
        residual_lower_bound=max(0.0, capacity - c0),
        symbol_rate=rate,
        bandwidth_bps=bandwidth(capacity, rate) if rate is not None else None,
        iterations=result.iterations,
        input_distribution=[round(float(x), 12) for x in result.input_distribution],
    )
    log.log(
        "CAPACITY",
        f"{samples.protocol}/{samples.platform}/{samples.policy}: C={capacity:.4f} b, C0={c0:.4f} b -> {verdict}",
    )
    return report
