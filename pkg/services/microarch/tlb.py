from shared.models import PAGE_BYTES, TlbGeometry

from .cache import LruSets

# Paging-structure placement: each translation's walk touches one D-cache line in a
# per-address-space page-table region. Entries for consecutive pages sit 512 bytes apart.
PT_REGION_BASE = 0x7F00_0000_0100
PT_ASID_SHIFT = 40
PTE_SPACING = 512
PT_VPN_WRAP = 1 << 28


class Tlb(LruSets):
    """First-level data TLB, entries keyed by (virtual page, asid).

    An untagged TLB holds a single address space: the first access from another
    asid drops every entry, which is what a CR3 reload did on 32-bit x86.
    """

    def __init__(self, geometry: TlbGeometry) -> None:
        self.geometry = geometry
        self.tagged = geometry.tagged
        self.resident_asid: int | None = None
        super().__init__(geometry.sets, geometry.ways)

    @staticmethod
    def page_of(vaddr: int) -> int:
        return vaddr // PAGE_BYTES

    @staticmethod
    def paging_structure_line(vaddr: int, asid: int) -> int:
        vpn = vaddr // PAGE_BYTES
        return PT_REGION_BASE + (asid << PT_ASID_SHIFT) + (vpn % PT_VPN_WRAP) * PTE_SPACING

    def access(self, vaddr: int, asid: int) -> bool:
        """Returns True on a hit; on a miss installs the translation."""
        if not self.tagged and self.resident_asid not in (None, asid):
            self.clear()
        self.resident_asid = asid

        vpn = self.page_of(vaddr)
        set_idx = vpn % self.sets
        key = (vpn, asid)
        if self.touch(set_idx, key):
            return True
        self.insert(set_idx, key)
        return False

    def flush(self) -> None:
        # Paging-structure lines stay wherever they are in L1-D
        self.clear()
        self.resident_asid = None

    def resident_asids(self) -> set[int]:
        return {asid for _, (_, asid) in self}

    def paging_structure_lines(self) -> set[int]:
        """D-cache lines holding the resident translations."""
        return {self.paging_structure_line(vpn * PAGE_BYTES, asid) for _, (vpn, asid) in self}
