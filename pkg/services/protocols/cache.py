"""
L1 Prime+Probe channels.

The buffer is `ways` chunks of one cache stride each; line (k, w) sits in set k of
chunk w. The Trojan fills every way of sets 0..s-1, chunk by chunk. The spy reads
one line per (set, way), set by set, and reports the total time.
"""

from collections.abc import Iterator

from microarch.branch import BRANCH_SLOT
from microarch.state import MicroState
from shared.models import SPY, TROJAN, CacheGeometry, SecurityDomain

from .base import CODE_BASE, DATA_BASE, Protocol


def line_addr(base: int, geometry: CacheGeometry, set_idx: int, way: int) -> int:
    return base + way * geometry.stride + set_idx * geometry.line_bytes


def trojan_order(geometry: CacheGeometry, s: int) -> list[tuple[int, int]]:
    return [(k, w) for w in range(geometry.ways) for k in range(s)]


def spy_order(geometry: CacheGeometry) -> list[tuple[int, int]]:
    return [(k, w) for k in range(geometry.sets) for w in range(geometry.ways)]


class L1dProtocol(Protocol):
    name = "l1d"
    default_base = DATA_BASE

    @property
    def geometry(self) -> CacheGeometry:
        return self.platform.l1d_geometry

    def default_inputs(self) -> list[int]:
        return list(range(self.geometry.sets + 1))

    def step_bound(self, state: MicroState) -> int:
        return state.worst_access_cycles

    def trojan_steps(self, state: MicroState, s: int) -> Iterator[None]:
        g = self.geometry
        for k, w in trojan_order(g, s):
            yield
            state.data_access(TROJAN, line_addr(self.trojan_base, g, k, w))

    def receive(self, state: MicroState) -> int:
        g = self.geometry
        return sum(state.data_access(SPY, line_addr(self.spy_base, g, k, w)) for k, w in spy_order(g))


class L1iProtocol(Protocol):
    """Same shape over the instruction side: each line ends in a jump to the next line to run."""

    name = "l1i"
    default_base = CODE_BASE

    @property
    def geometry(self) -> CacheGeometry:
        return self.platform.l1i_geometry

    def default_inputs(self) -> list[int]:
        return list(range(self.geometry.sets + 1))

    def step_bound(self, state: MicroState) -> int:
        return state.worst_access_cycles + state.worst_branch_cycles

    def _chain(self, base: int, order: list[tuple[int, int]]) -> list[tuple[int, int]]:
        """(line, next line) pairs of the jump chain through `order`."""
        g = self.geometry
        addrs = [line_addr(base, g, k, w) for k, w in order]
        return [(addr, addrs[(i + 1) % len(addrs)]) for i, addr in enumerate(addrs)]

    def _line(self, state: MicroState, domain: SecurityDomain, addr: int, target: int) -> int:
        cycles = state.inst_access(domain, addr)
        jump = addr + self.geometry.line_bytes - BRANCH_SLOT
        return cycles + state.branch_exec(domain, jump, taken=True, target=target, conditional=False)

    def trojan_steps(self, state: MicroState, s: int) -> Iterator[None]:
        for addr, target in self._chain(self.trojan_base, trojan_order(self.geometry, s)):
            yield
            self._line(state, TROJAN, addr, target)

    def receive(self, state: MicroState) -> int:
        return sum(
            self._line(state, SPY, addr, target) for addr, target in self._chain(self.spy_base, spy_order(self.geometry))
        )
