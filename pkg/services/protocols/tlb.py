from collections.abc import Iterator

from microarch.state import MicroState
from shared.models import PAGE_BYTES, SPY, TROJAN

from .base import TLB_BASE, Protocol


class TlbProtocol(Protocol):
    """The Trojan reads one integer from each of s consecutive pages; the spy times half the TLB's worth."""

    name = "tlb"
    default_base = TLB_BASE

    def default_inputs(self) -> list[int]:
        return list(range(self.platform.tlb_geometry.entries + 1))

    @property
    def spy_pages(self) -> int:
        return self.platform.tlb_geometry.entries // 2

    def step_bound(self, state: MicroState) -> int:
        return state.worst_access_cycles

    def trojan_steps(self, state: MicroState, s: int) -> Iterator[None]:
        for page in range(s):
            yield
            state.data_access(TROJAN, self.trojan_base + page * PAGE_BYTES)

    def receive(self, state: MicroState) -> int:
        return sum(state.data_access(SPY, self.spy_base + page * PAGE_BYTES) for page in range(self.spy_pages))
