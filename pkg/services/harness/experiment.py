import time
from collections.abc import Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from microarch.platforms import load_platform
from microarch.state import MicroState
from protocols import ProtocolSpec, build_protocol
from shared.logger import log
from shared.models import PlatformConfig

from .policy import MitigationPolicy, apply_policy, resolve_policy
from .samples import SampleSet


class ExperimentConfig(BaseModel):
    """One Trojan/spy run.
    Args:
        platform: Built-in profile name or profile path.
        protocol: Channel protocol and buffer layout.
        policy: `none`, `full` or a comma list of mitigation actions.
        samples_per_symbol: Observations recorded per input symbol.
        seed: Seeds both the input schedule and the latency noise.
        noise_stddev: Overrides the profile's latency noise when set.
        warmup_rounds: Discarded Trojan/spy rounds after the initial prime.
        scrub_residual: Also clear state no mitigation reaches, at every switch (test hook).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "experiment"
    platform: str
    protocol: ProtocolSpec
    policy: str = "none"
    samples_per_symbol: int = Field(default=16, ge=1)
    seed: int = Field(default=0, ge=0)
    noise_stddev: float | None = Field(default=None, ge=0)
    warmup_rounds: int = Field(default=2, ge=0)
    scrub_residual: bool = False


def symbol_rate(platform: PlatformConfig) -> float:
    """One symbol per Trojan slice plus spy slice."""
    return 1.0 / (2.0 * platform.time_slice_seconds)


def input_schedule(inputs: list[int], samples_per_symbol: int, rng: np.random.Generator) -> Iterator[int]:
    """Each pass sends every input once, in a fresh random order."""
    values = np.asarray(inputs, dtype=np.int64)
    for _ in range(samples_per_symbol):
        yield from rng.permutation(values).tolist()


def _switch(state: MicroState, policy: MitigationPolicy, scrub: bool) -> None:
    apply_policy(state, policy)
    if scrub:
        state.scrub_residual_state()


def run_experiment(config: ExperimentConfig, platform: PlatformConfig | None = None) -> SampleSet:
    if platform is None:
        platform = load_platform(config.platform)
    if config.noise_stddev is not None:
        platform = platform.with_noise(config.noise_stddev)

    protocol = build_protocol(config.protocol, platform)
    policy = resolve_policy(config.policy, platform)
    schedule_seq, noise_seq = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.default_rng(schedule_seq)
    state = MicroState(platform, seed=int(noise_seq.generate_state(1)[0]))
    budget = platform.time_slice

    log.log(
        "EXPERIMENT",
        f"{config.name}: {protocol.name} on {platform.name}, policy={policy.label}, "
        f"{len(protocol.inputs)} inputs x {config.samples_per_symbol}, seed={config.seed}",
    )
    started = time.perf_counter()

    protocol.prime(state)
    _switch(state, policy, config.scrub_residual)
    for _ in range(config.warmup_rounds):
        protocol.send(state, int(rng.choice(protocol.inputs)), budget)
        _switch(state, policy, config.scrub_residual)
        protocol.receive(state)
        _switch(state, policy, config.scrub_residual)

    inputs: list[int] = []
    outputs: list[int] = []
    for s in input_schedule(protocol.inputs, config.samples_per_symbol, rng):
        protocol.send(state, s, budget)
        _switch(state, policy, config.scrub_residual)
        outputs.append(protocol.receive(state))
        _switch(state, policy, config.scrub_residual)
        inputs.append(s)

    log.log(
        "EXPERIMENT",
        f"{config.name}: {len(inputs)} samples in {time.perf_counter() - started:.2f}s "
        f"({state.cycle_counter} simulated cycles)",
    )
    return SampleSet(
        protocol=protocol.name,
        inputs=np.asarray(inputs),
        outputs=np.asarray(outputs),
        input_set=list(protocol.inputs),
        platform=platform.name,
        policy=policy.label,
        seed=config.seed,
        samples_per_symbol=config.samples_per_symbol,
    )
