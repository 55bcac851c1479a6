"""
Aggregate on-core state shared by the Trojan and the spy.

Every access returns its latency in cycles and advances `cycle_counter` by that
amount. Mitigation actions mirror what the platform's ISA offers; anything the
ISA cannot reach is only cleared by `scrub_residual_state`.
"""

from shared.errors import ConfigError, UnsupportedMitigation
from shared.models import MITIGATION_ACTIONS, MitigationAction, PlatformConfig, SecurityDomain

from .branch import BRANCH_SLOT, Bhb, Btb
from .cache import SetAssocCache
from .noise import NoiseSource
from .prefetch import DataPrefetcher, InstructionPrefetcher
from .tlb import Tlb


class MicroState:
    def __init__(self, platform: PlatformConfig, seed: int = 0) -> None:
        self.platform = platform
        self.latencies = platform.latencies
        self.l1d = SetAssocCache(platform.l1d_geometry)
        self.l1i = SetAssocCache(platform.l1i_geometry)
        self.tlb = Tlb(platform.tlb_geometry)
        self.btb = Btb(platform.btb_geometry)
        self.bhb = Bhb(platform.bhb_bits)
        self.iprefetcher = InstructionPrefetcher(platform.prefetcher.instruction_prefetcher)
        self.dprefetcher = DataPrefetcher(
            platform.prefetcher.data_prefetcher.enabled, platform.l1d_geometry.line_bytes
        )
        self.cycle_counter = 0
        self._address_limit = 1 << platform.address_bits
        self._noise = NoiseSource(self.latencies.noise_stddev, seed)

    def _charge(self, cycles: int) -> int:
        if self._noise.stddev > 0:
            cycles = max(1, cycles + self._noise.draw())
        self.cycle_counter += cycles
        return cycles

    @property
    def worst_access_cycles(self) -> int:
        """Upper bound on one data or instruction access: walk and L1 miss, plus clipped noise."""
        lat = self.latencies
        return lat.tlb_miss_cycles + lat.l1_miss_cycles + self._noise.bound

    @property
    def worst_branch_cycles(self) -> int:
        lat = self.latencies
        return max(lat.branch_correct_cycles, lat.branch_mispredict_cycles) + self._noise.bound

    def worst_nop_cycles(self, count: int) -> int:
        return count * self.latencies.nop_cycles + self._noise.bound

    def _check_address(self, vaddr: int) -> None:
        if not 0 <= vaddr < self._address_limit:
            raise ConfigError(
                f"address {vaddr:#x} outside the {self.platform.address_bits}-bit space of {self.platform.name}"
            )

    def _translate(self, domain: SecurityDomain, vaddr: int) -> int:
        """Page-walk cost: zero on a TLB hit, cheaper when the walk's line is in L1-D."""
        if self.tlb.access(vaddr, domain.asid):
            return 0
        pt_line = self.tlb.paging_structure_line(vaddr, domain.asid)
        if self.l1d.access(pt_line, domain.asid):
            return self.latencies.tlb_miss_cycles - self.latencies.walk_cached_discount
        return self.latencies.tlb_miss_cycles

    def data_access(self, domain: SecurityDomain, vaddr: int) -> int:
        self._check_address(vaddr)
        cycles = self._translate(domain, vaddr)
        if self.l1d.access(vaddr, domain.asid):
            return self._charge(cycles + self.latencies.hit_cycles)

        target = self.dprefetcher.observe_miss(vaddr // self.l1d.line_bytes)
        if target is not None:
            self.l1d.fill(target * self.l1d.line_bytes, domain.asid)
        return self._charge(cycles + self.latencies.l1_miss_cycles)

    def inst_access(self, domain: SecurityDomain, vaddr: int) -> int:
        self._check_address(vaddr)
        cycles = self._translate(domain, vaddr)
        if self.l1i.access(vaddr, domain.asid):
            return self._charge(cycles + self.latencies.hit_cycles)

        # The miss already installed the line; a confident stream had it in flight
        if self.iprefetcher.observe_miss(vaddr // self.l1i.line_bytes):
            return self._charge(cycles + self.latencies.hit_cycles)
        return self._charge(cycles + self.latencies.l1_miss_cycles)

    def branch_exec(
        self,
        domain: SecurityDomain,
        branch_addr: int,
        taken: bool,
        target: int | None = None,
        conditional: bool = True,
    ) -> int:
        """Resolve one branch.

        Unconditional branches are always taken and only need the BTB target.
        Conditional branches need the direction counter to agree and, when taken,
        the BTB to hold the right target. Predictor state is not asid-tagged.
        """
        self._check_address(branch_addr)
        if target is None:
            target = branch_addr + BRANCH_SLOT
        if not conditional:
            taken = True

        target_ok = self.btb.lookup(branch_addr) == target
        if conditional:
            correct = self.bhb.predict(branch_addr) == taken and (not taken or target_ok)
            self.bhb.update(branch_addr, taken)
        else:
            correct = target_ok
        if taken:
            self.btb.install(branch_addr, target)

        lat = self.latencies
        return self._charge(lat.branch_correct_cycles if correct else lat.branch_mispredict_cycles)

    def execute_nops(self, count: int) -> int:
        if count <= 0:
            return 0
        return self._charge(count * self.latencies.nop_cycles)

    # Mitigation actions

    def _flush_cost(self) -> None:
        self.cycle_counter += self.latencies.flush_cycles

    def flush_all_caches(self) -> None:
        self.l1d.flush_all()
        self.l1i.flush_all()
        self._flush_cost()

    def flush_tlb(self) -> None:
        self.tlb.flush()
        self._flush_cost()

    def flush_branch_predictor(self) -> None:
        if not self.platform.branch_predictor_flush:
            raise UnsupportedMitigation("flush_branch_predictor", self.platform.name)
        self.btb.flush()
        self.bhb.flush()
        self._flush_cost()

    def disable_data_prefetcher(self) -> None:
        if not self.platform.prefetcher.data_prefetcher.disableable:
            raise UnsupportedMitigation("disable_data_prefetcher", self.platform.name)
        self.dprefetcher.disable()
        self._flush_cost()

    def apply(self, action: MitigationAction) -> None:
        if action not in MITIGATION_ACTIONS:
            raise ConfigError(f"unknown mitigation action {action!r}")
        getattr(self, action)()

    def scrub_residual_state(self) -> None:
        """Clear state no architected instruction reaches on this platform (test hook)."""
        self.iprefetcher.zero()
        self.dprefetcher.reset()
        if not self.platform.branch_predictor_flush:
            self.btb.flush()
            self.bhb.flush()

    def check_invariants(self) -> None:
        for unit in (self.l1d, self.l1i, self.tlb, self.btb):
            unit.check_invariants()
        if not self.tlb.tagged:
            assert len(self.tlb.resident_asids()) <= 1
        assert all(0 <= c <= 3 for c in self.bhb.counters)
        assert 0 <= self.bhb.history <= self.bhb.mask
        ip = self.iprefetcher
        assert len(ip.entries) <= ip.config.stream_table_size
        assert all(1 <= e.confidence <= ip.max_confidence for e in ip.entries)
        assert self.cycle_counter >= 0
