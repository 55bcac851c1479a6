import numpy as np
import pytest

from harness.samples import SampleSet
from microarch.platforms import load_platform
from microarch.state import MicroState
from shared.models import PlatformConfig


def quiet(name: str) -> PlatformConfig:
    """A built-in profile with latency noise switched off."""
    return load_platform(name).with_noise(0.0)


@pytest.fixture
def skylake() -> PlatformConfig:
    return quiet("skylake")


@pytest.fixture
def a9() -> PlatformConfig:
    return quiet("a9")


@pytest.fixture
def skylake_state(skylake: PlatformConfig) -> MicroState:
    return MicroState(skylake)


def make_samples(pairs: list[tuple[int, int]], input_set: list[int] | None = None, protocol: str = "synthetic") -> SampleSet:
    inputs = [i for i, _ in pairs]
    return SampleSet(
        protocol=protocol,
        inputs=np.asarray(inputs),
        outputs=np.asarray([o for _, o in pairs]),
        input_set=input_set if input_set is not None else sorted(set(inputs)),
        seed=0,
    )
