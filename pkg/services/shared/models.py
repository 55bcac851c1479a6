from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

PAGE_BYTES = 4096

MitigationAction = Literal[
    "flush_all_caches",
    "flush_tlb",
    "flush_branch_predictor",
    "disable_data_prefetcher",
]

# Canonical order in which a "full" policy applies its actions
MITIGATION_ACTIONS: tuple[MitigationAction, ...] = (
    "flush_all_caches",
    "flush_tlb",
    "flush_branch_predictor",
    "disable_data_prefetcher",
)


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class CacheGeometry(_Frozen):
    """Set-associative cache shape.
    Args:
        sets: Number of sets (power of two, virtually indexed).
        ways: Associativity.
        line_bytes: Line size in bytes (power of two).
    """

    sets: int = Field(gt=0)
    ways: int = Field(gt=0)
    line_bytes: int = Field(gt=0)

    @model_validator(mode="after")
    def _check(self) -> "CacheGeometry":
        if not is_power_of_two(self.sets) or not is_power_of_two(self.line_bytes):
            raise ValueError("cache sets and line_bytes must be powers of two")
        return self

    @property
    def size_bytes(self) -> int:
        return self.sets * self.ways * self.line_bytes

    @property
    def stride(self) -> int:
        """Distance between two addresses that map to the same set."""
        return self.sets * self.line_bytes


class TlbGeometry(_Frozen):
    entries: int = Field(gt=0)
    sets: int = Field(gt=0)
    ways: int = Field(gt=0)
    tagged: bool = True

    @model_validator(mode="after")
    def _check(self) -> "TlbGeometry":
        if self.sets * self.ways != self.entries:
            raise ValueError(f"tlb sets x ways ({self.sets}x{self.ways}) != entries ({self.entries})")
        if not is_power_of_two(self.sets):
            raise ValueError("tlb sets must be a power of two")
        return self


class BtbGeometry(_Frozen):
    """Branch target buffer shape. `tag_bits` keeps only that many low tag bits, so
    branches a multiple of `sets << tag_bits` slots apart share one entry; None keeps full tags."""

    entries: int = Field(gt=0)
    sets: int = Field(gt=0)
    ways: int = Field(gt=0)
    tag_bits: int | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check(self) -> "BtbGeometry":
        if self.sets * self.ways != self.entries:
            raise ValueError(f"btb sets x ways ({self.sets}x{self.ways}) != entries ({self.entries})")
        if not is_power_of_two(self.sets):
            raise ValueError("btb sets must be a power of two")
        return self


class LatencyModel(_Frozen):
    """Cycle costs charged by the simulated core.
    Args:
        hit_cycles: L1 hit.
        l1_miss_cycles: L1 miss (served from the next level).
        tlb_miss_cycles: Page walk when the translation's paging-structure line is not in L1-D.
        walk_cached_discount: Cycles saved on a walk whose paging-structure line is in L1-D.
        branch_correct_cycles: Correctly predicted branch.
        branch_mispredict_cycles: Mispredicted branch.
        nop_cycles: Cost of one executed no-op.
        flush_cycles: Cost of one mitigation action at a context switch.
        noise_stddev: Gaussian noise added to every returned latency.
    """

    hit_cycles: int = 4
    l1_miss_cycles: int = 20
    tlb_miss_cycles: int = 30
    walk_cached_discount: int = 20
    branch_correct_cycles: int = 1
    branch_mispredict_cycles: int = 15
    nop_cycles: int = 1
    flush_cycles: int = 0
    noise_stddev: float = 2.0

    @model_validator(mode="after")
    def _check(self) -> "LatencyModel":
        positive = (
            self.hit_cycles,
            self.l1_miss_cycles,
            self.tlb_miss_cycles,
            self.branch_correct_cycles,
            self.branch_mispredict_cycles,
            self.nop_cycles,
        )
        if min(positive) <= 0:
            raise ValueError("latencies must be > 0")
        if self.l1_miss_cycles <= self.hit_cycles:
            raise ValueError("l1_miss_cycles must exceed hit_cycles")
        if self.branch_mispredict_cycles <= self.branch_correct_cycles:
            raise ValueError("branch_mispredict_cycles must exceed branch_correct_cycles")
        if not 0 <= self.walk_cached_discount < self.tlb_miss_cycles:
            raise ValueError("walk_cached_discount must be in [0, tlb_miss_cycles)")
        if self.noise_stddev < 0 or self.flush_cycles < 0:
            raise ValueError("noise_stddev and flush_cycles must be >= 0")
        return self


class DataPrefetcherConfig(_Frozen):
    enabled: bool = True
    disableable: bool = True


class InstructionPrefetcherConfig(_Frozen):
    stream_table_size: int = Field(default=4, gt=0)
    confidence_bits: int = Field(default=2, gt=0)
    threshold: int = Field(default=2, gt=0)
    flushable: bool = False

    @model_validator(mode="after")
    def _check(self) -> "InstructionPrefetcherConfig":
        if self.threshold > (1 << self.confidence_bits) - 1:
            raise ValueError("threshold exceeds the confidence counter range")
        return self


class PrefetcherConfig(_Frozen):
    data_prefetcher: DataPrefetcherConfig = DataPrefetcherConfig()
    instruction_prefetcher: InstructionPrefetcherConfig = InstructionPrefetcherConfig()


class PlatformConfig(_Frozen):
    """One simulated processor profile.
    Args:
        name: Profile name (sandy-bridge, haswell, skylake, a9, a53, a57 or custom).
        isa: x86 or arm.
        clock_hz: Real-time scale used to turn cycles into seconds.
        time_slice: Scheduler quantum in simulated cycles.
        branch_predictor_flush: Whether the ISA can invalidate the branch predictor.
    """

    name: str
    isa: Literal["x86", "arm"]
    clock_hz: int = Field(gt=0)
    time_slice: int = Field(gt=0)
    address_bits: int = Field(default=48, gt=12, le=64)
    l1d_geometry: CacheGeometry
    l1i_geometry: CacheGeometry
    tlb_geometry: TlbGeometry
    btb_geometry: BtbGeometry
    bhb_bits: int = Field(gt=0, le=24)
    latencies: LatencyModel = LatencyModel()
    prefetcher: PrefetcherConfig = PrefetcherConfig()
    branch_predictor_flush: bool = False

    @property
    def supported_mitigations(self) -> tuple[MitigationAction, ...]:
        supported = {"flush_all_caches", "flush_tlb"}
        if self.branch_predictor_flush:
            supported.add("flush_branch_predictor")
        if self.prefetcher.data_prefetcher.disableable:
            supported.add("disable_data_prefetcher")
        return tuple(a for a in MITIGATION_ACTIONS if a in supported)

    @property
    def time_slice_seconds(self) -> float:
        return self.time_slice / self.clock_hz

    def with_noise(self, noise_stddev: float) -> "PlatformConfig":
        return self.model_copy(
            update={"latencies": self.latencies.model_copy(update={"noise_stddev": noise_stddev})}
        )


class SecurityDomain(_Frozen):
    id: Literal["trojan", "spy"]
    asid: int = Field(ge=0)


TROJAN = SecurityDomain(id="trojan", asid=1)
SPY = SecurityDomain(id="spy", asid=2)
