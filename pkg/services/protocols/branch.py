from collections.abc import Iterator
from itertools import count

from microarch.branch import BRANCH_SLOT
from microarch.state import MicroState
from shared.models import SPY, TROJAN, SecurityDomain

from .base import BHB_BASE, CODE_BASE, Protocol

SETUP_BRANCHES = 256
SKIPPED_NOPS = 256
NOP_BYTES = 4

# Trojan jumps land on no-op padding halfway through their own slot
TROJAN_LANDING = BRANCH_SLOT // 2


class BhbProtocol(Protocol):
    """Conditional-branch history channel.

    The probe code runs 256 always-taken conditional branches to fix the global
    history, then a timed conditional branch that jumps over 256 no-ops when the
    input bit is clear. The Trojan reruns it with its bit; the spy runs it with 0.
    """

    name = "bhb"
    default_base = BHB_BASE

    def default_inputs(self) -> list[int]:
        return [0, 1]

    def step_bound(self, state: MicroState) -> int:
        return (SETUP_BRANCHES + 1) * state.worst_branch_cycles + state.worst_nop_cycles(SKIPPED_NOPS)

    def _probe(self, state: MicroState, domain: SecurityDomain, base: int, bit: int) -> int:
        for i in range(SETUP_BRANCHES):
            addr = base + i * BRANCH_SLOT
            state.branch_exec(domain, addr, taken=True, target=addr + BRANCH_SLOT)

        timed = base + SETUP_BRANCHES * BRANCH_SLOT
        skip_to = timed + BRANCH_SLOT + SKIPPED_NOPS * NOP_BYTES
        taken = bit == 0
        cycles = state.branch_exec(domain, timed, taken=taken, target=skip_to)
        if not taken:
            cycles += state.execute_nops(SKIPPED_NOPS)
        return cycles

    def trojan_steps(self, state: MicroState, s: int) -> Iterator[None]:
        repeats = self.spec.trojan_repeats
        for _ in count() if repeats is None else range(repeats):
            yield
            self._probe(state, TROJAN, self.trojan_base, s)

    def receive(self, state: MicroState) -> int:
        return self._probe(state, SPY, self.spy_base, 0)


class BtbProtocol(Protocol):
    """Chains of 16-byte-spaced unconditional jumps.

    The spy's chain has one jump per BTB entry, each landing on the next jump. The
    Trojan runs the first s jumps of its own chain; with both chains at one address
    its jumps replace the spy's entries with targets the spy never uses. Inputs
    default to 3/4 to 5/4 of the BTB size in steps of 1/256 of it.
    """

    name = "btb"
    default_base = CODE_BASE

    @property
    def entries(self) -> int:
        return self.platform.btb_geometry.entries

    def default_inputs(self) -> list[int]:
        e = self.entries
        step = max(1, e // 256)
        return list(range(3 * e // 4, 5 * e // 4 + 1, step))

    def allowed_inputs(self) -> range:
        return range(0, 2 * self.entries + 1)

    def step_bound(self, state: MicroState) -> int:
        return state.worst_branch_cycles

    @staticmethod
    def _jump(state: MicroState, domain: SecurityDomain, addr: int, landing: int) -> int:
        return state.branch_exec(domain, addr, taken=True, target=addr + landing, conditional=False)

    def trojan_steps(self, state: MicroState, s: int) -> Iterator[None]:
        for i in range(s):
            yield
            self._jump(state, TROJAN, self.trojan_base + i * BRANCH_SLOT, TROJAN_LANDING)

    def receive(self, state: MicroState) -> int:
        return sum(self._jump(state, SPY, self.spy_base + i * BRANCH_SLOT, BRANCH_SLOT) for i in range(self.entries))
