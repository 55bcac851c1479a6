from abc import ABC, abstractmethod
from collections.abc import Iterator
from typing import ClassVar, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from microarch.state import MicroState
from shared.errors import ConfigError
from shared.models import PlatformConfig

ProtocolName = Literal["l1d", "l1i", "tlb", "bhb", "btb"]

# Default buffer placement, low enough for 32-bit profiles. The BHB code base is
# 64 KiB aligned so its counters sit away from every other branch the tools run.
DATA_BASE = 0x1000_0000
CODE_BASE = 0x2000_0000
BHB_BASE = 0x3000_0000
TLB_BASE = 0x4000_0000

# Cap on spy passes while priming; quiet state settles within a few
PRIME_PASSES = 8


class ProtocolSpec(BaseModel):
    """Which channel to drive and where the Trojan and spy buffers live.
    Args:
        name: Channel protocol.
        inputs: Explicit input subset; defaults to the protocol's full input set.
        trojan_base: Trojan buffer address; protocol default when omitted.
        spy_base: Spy buffer address; same as the Trojan's when omitted.
        trojan_repeats: How often a repeating Trojan (bhb) reruns its code per slice. The
            default of 8 keeps runs desk-scale: the spy only sees the last run's history.
            None repeats until the slice budget is spent.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: ProtocolName
    inputs: tuple[int, ...] | None = None
    trojan_base: int | None = Field(default=None, ge=0)
    spy_base: int | None = Field(default=None, ge=0)
    trojan_repeats: int | None = Field(default=8, gt=0)

    @field_validator("inputs")
    @classmethod
    def _non_empty(cls, v: tuple[int, ...] | None) -> tuple[int, ...] | None:
        if v is not None:
            if not v:
                raise ValueError("inputs must not be empty")
            if len(set(v)) != len(v):
                raise ValueError("inputs must be distinct")
        return v


class Protocol(ABC):
    """A Trojan/spy pair over one on-core component.

    `send` runs the Trojan for one slice, `receive` is the spy's timed probe,
    which also re-primes the component for the next round.
    """

    name: ClassVar[str]
    default_base: ClassVar[int]

    def __init__(self, platform: PlatformConfig, spec: ProtocolSpec) -> None:
        self.platform = platform
        self.spec = spec
        self.trojan_base = spec.trojan_base if spec.trojan_base is not None else self.default_base
        self.spy_base = spec.spy_base if spec.spy_base is not None else self.trojan_base

        full = self.default_inputs()
        if spec.inputs is None:
            self.inputs = full
        else:
            allowed = set(self.allowed_inputs())
            bad = [s for s in spec.inputs if s not in allowed]
            if bad:
                raise ConfigError(f"{self.name} on {platform.name}: inputs {bad} out of range")
            self.inputs = sorted(spec.inputs)

    @abstractmethod
    def default_inputs(self) -> list[int]: ...

    def allowed_inputs(self) -> range | list[int]:
        return self.default_inputs()

    @abstractmethod
    def trojan_steps(self, state: MicroState, s: int) -> Iterator[None]:
        """Perform the Trojan's work for symbol `s`, yielding before every step.

        A step runs only when the caller resumes the generator, so stopping the
        iteration leaves it undone.
        """

    @abstractmethod
    def step_bound(self, state: MicroState) -> int:
        """Most cycles one Trojan step can take on this state."""

    @abstractmethod
    def receive(self, state: MicroState) -> int: ...

    def send(self, state: MicroState, s: int, budget: int) -> int:
        """Run the Trojan until its work is done or the next step could overrun the
        slice budget. Returns cycles used, never more than `budget`."""
        start = state.cycle_counter
        bound = self.step_bound(state)
        for _ in self.trojan_steps(state, s):
            if state.cycle_counter - start + bound > budget:
                break
        return state.cycle_counter - start

    def prime(self, state: MicroState) -> None:
        """Repeat the spy's receive until two passes agree, so the next receive starts from steady state."""
        last = self.receive(state)
        for _ in range(PRIME_PASSES - 1):
            out = self.receive(state)
            if out == last:
                return
            last = out
