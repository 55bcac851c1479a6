from shared.models import BtbGeometry

from .cache import LruSets

# Branches are laid out on 16-byte boundaries
BRANCH_ALIGN_BITS = 4
BRANCH_SLOT = 1 << BRANCH_ALIGN_BITS

WEAKLY_NOT_TAKEN = 1


class Btb(LruSets):
    """Branch target buffer keyed by branch-address bits only (shared by every address space)."""

    def __init__(self, geometry: BtbGeometry) -> None:
        self.geometry = geometry
        self._tag_mask = None if geometry.tag_bits is None else (1 << geometry.tag_bits) - 1
        super().__init__(geometry.sets, geometry.ways)

    def locate(self, branch_addr: int) -> tuple[int, int]:
        slot = branch_addr >> BRANCH_ALIGN_BITS
        tag = slot // self.sets
        if self._tag_mask is not None:
            tag &= self._tag_mask
        return slot % self.sets, tag

    def lookup(self, branch_addr: int) -> int | None:
        """Predicted target, without touching replacement state."""
        set_idx, tag = self.locate(branch_addr)
        return self.get(set_idx, tag)

    def install(self, branch_addr: int, target: int) -> None:
        set_idx, tag = self.locate(branch_addr)
        self.insert(set_idx, tag, target)

    def flush(self) -> None:
        self.clear()


class Bhb:
    """Global history register feeding a gshare table of 2-bit saturating counters."""

    def __init__(self, bits: int) -> None:
        self.bits = bits
        self.mask = (1 << bits) - 1
        self.flush()

    def flush(self) -> None:
        self.history = 0
        self.counters = [WEAKLY_NOT_TAKEN] * (1 << self.bits)

    def index(self, branch_addr: int) -> int:
        return (self.history ^ (branch_addr >> BRANCH_ALIGN_BITS)) & self.mask

    def counter(self, branch_addr: int) -> int:
        return self.counters[self.index(branch_addr)]

    def predict(self, branch_addr: int) -> bool:
        return self.counters[self.index(branch_addr)] >= 2

    def update(self, branch_addr: int, taken: bool) -> None:
        idx = self.index(branch_addr)
        c = self.counters[idx]
        self.counters[idx] = min(c + 1, 3) if taken else max(c - 1, 0)
        self.history = ((self.history << 1) | int(taken)) & self.mask
