import numpy as np
import pytest

from microarch.branch import BRANCH_SLOT
from microarch.noise import NoiseSource
from microarch.state import MicroState
from shared.errors import ConfigError, UnsupportedMitigation
from shared.models import SPY, TROJAN, PAGE_BYTES

from conftest import quiet

BASE = 0x1000_0000


def test_cold_then_warm_data_access(skylake_state):
    lat = skylake_state.latencies
    assert skylake_state.data_access(TROJAN, BASE) == lat.l1_miss_cycles + lat.tlb_miss_cycles
    assert skylake_state.data_access(TROJAN, BASE) == lat.hit_cycles


def test_set_conflict_eviction(skylake_state):
    g = skylake_state.platform.l1d_geometry
    addrs = [BASE + i * g.stride for i in range(g.ways + 1)]
    for a in addrs:
        skylake_state.data_access(SPY, a)
    assert skylake_state.data_access(SPY, addrs[0]) == skylake_state.latencies.l1_miss_cycles


def test_flush_all_caches_forces_miss(skylake_state):
    skylake_state.data_access(SPY, BASE)
    skylake_state.flush_all_caches()
    assert skylake_state.data_access(SPY, BASE) == skylake_state.latencies.l1_miss_cycles


def test_tlb_flush_leaves_paging_structure_cached(skylake_state):
    lat = skylake_state.latencies
    skylake_state.data_access(SPY, BASE)
    skylake_state.flush_tlb()
    assert skylake_state.data_access(SPY, BASE) == lat.tlb_miss_cycles - lat.walk_cached_discount + lat.hit_cycles
    skylake_state.flush_tlb()
    skylake_state.flush_all_caches()
    assert skylake_state.data_access(SPY, BASE) == lat.tlb_miss_cycles + lat.l1_miss_cycles


def test_data_prefetcher_fetches_next_line(skylake_state):
    hit = skylake_state.latencies.hit_cycles
    skylake_state.data_access(TROJAN, BASE)
    skylake_state.data_access(TROJAN, BASE + 64)
    assert skylake_state.data_access(TROJAN, BASE + 128) == hit


def test_disabled_data_prefetcher(skylake_state):
    skylake_state.disable_data_prefetcher()
    skylake_state.data_access(TROJAN, BASE)
    skylake_state.data_access(TROJAN, BASE + 64)
    assert skylake_state.data_access(TROJAN, BASE + 128) == skylake_state.latencies.l1_miss_cycles


def test_sequential_code_is_prefetched(skylake_state):
    lat = skylake_state.latencies
    code = 0x2000_0000
    got = [skylake_state.inst_access(TROJAN, code + i * 64) for i in range(4)]
    assert got == [lat.l1_miss_cycles + lat.tlb_miss_cycles, lat.l1_miss_cycles, lat.hit_cycles, lat.hit_cycles]
    assert skylake_state.inst_access(TROJAN, code) == lat.hit_cycles


def test_prefetcher_survives_cache_flush(skylake_state):
    code = 0x2000_0000
    for i in range(4):
        skylake_state.inst_access(TROJAN, code + i * 64)
    skylake_state.flush_all_caches()
    assert skylake_state.iprefetcher.predicts((code + 4 * 64) // 64)
    assert skylake_state.inst_access(TROJAN, code + 4 * 64) == skylake_state.latencies.hit_cycles


def _train_taken(state, addr, times=20):
    for _ in range(times):
        state.branch_exec(TROJAN, addr, taken=True)


def test_branch_saturated_agreement(skylake_state):
    addr = 0x3000_0000
    _train_taken(skylake_state, addr)
    assert skylake_state.bhb.counter(addr) == 3
    assert skylake_state.branch_exec(SPY, addr, taken=True) == skylake_state.latencies.branch_correct_cycles


def test_branch_counter_moves_toward_outcome(skylake_state):
    addr = 0x3000_0000
    _train_taken(skylake_state, addr)
    idx = skylake_state.bhb.index(addr)
    assert skylake_state.branch_exec(SPY, addr, taken=False) == skylake_state.latencies.branch_mispredict_cycles
    assert skylake_state.bhb.counters[idx] == 2


def test_probe_pattern_mispredicts_final_branch(skylake_state):
    base = 0x3000_0000
    lat = skylake_state.latencies

    def run(taken_last: bool) -> int:
        for i in range(256):
            a = base + i * BRANCH_SLOT
            skylake_state.branch_exec(TROJAN, a, taken=True, target=a + BRANCH_SLOT)
        return skylake_state.branch_exec(TROJAN, base + 256 * BRANCH_SLOT, taken=taken_last, target=base + 0x2000)

    run(True)
    run(True)
    assert run(True) == lat.branch_correct_cycles
    assert run(False) == lat.branch_mispredict_cycles


def test_unconditional_branch_needs_matching_target(skylake_state):
    lat = skylake_state.latencies
    addr = 0x2000_0000
    assert skylake_state.branch_exec(SPY, addr, True, target=addr + 64, conditional=False) == lat.branch_mispredict_cycles
    assert skylake_state.branch_exec(SPY, addr, True, target=addr + 64, conditional=False) == lat.branch_correct_cycles
    assert skylake_state.branch_exec(TROJAN, addr, True, target=addr + 128, conditional=False) == lat.branch_mispredict_cycles
    assert skylake_state.branch_exec(SPY, addr, True, target=addr + 64, conditional=False) == lat.branch_mispredict_cycles


def test_branch_latency_matches_reference(skylake_state):
    """Independent gshare + BTB replay over random branches."""
    state = skylake_state
    lat = state.latencies
    bits = state.platform.bhb_bits
    g = state.platform.btb_geometry
    counters = [1] * (1 << bits)
    history = 0
    btb = [dict() for _ in range(g.sets)]
    order = [[] for _ in range(g.sets)]

    rng = np.random.default_rng(5)
    n = 10_000
    slots = rng.integers(0, 6 * g.entries, n)
    taken_draw = rng.random(n) < 0.6
    cond_draw = rng.random(n) < 0.7
    bump_draw = rng.integers(1, 3, n)
    for slot, taken, cond, bump in zip(slots.tolist(), taken_draw.tolist(), cond_draw.tolist(), bump_draw.tolist()):
        addr = slot * BRANCH_SLOT
        target = addr + bump * BRANCH_SLOT
        s, tag = slot % g.sets, (slot // g.sets) % (1 << g.tag_bits)
        if not cond:
            taken = True
        target_ok = btb[s].get(tag) == target
        if cond:
            idx = (history ^ slot) & ((1 << bits) - 1)
            correct = (counters[idx] >= 2) == taken and (not taken or target_ok)
            counters[idx] = min(counters[idx] + 1, 3) if taken else max(counters[idx] - 1, 0)
            history = ((history << 1) | taken) & ((1 << bits) - 1)
        else:
            correct = target_ok
        if taken:
            if tag in btb[s]:
                order[s].remove(tag)
            elif len(order[s]) == g.ways:
                del btb[s][order[s].pop(0)]
            btb[s][tag] = target
            order[s].append(tag)
        expected = lat.branch_correct_cycles if correct else lat.branch_mispredict_cycles
        assert state.branch_exec(SPY, addr, taken, target=target, conditional=cond) == expected


def test_branch_predictor_flush_unsupported_on_x86(skylake_state):
    with pytest.raises(UnsupportedMitigation) as info:
        skylake_state.flush_branch_predictor()
    assert info.value.action == "flush_branch_predictor"
    assert info.value.platform == "skylake"


def test_branch_predictor_flush_on_arm(a9):
    state = MicroState(a9)
    _train_taken(state, 0x3000_0000)
    state.flush_branch_predictor()
    assert state.btb.occupancy() == 0
    assert set(state.bhb.counters) == {1}


def test_a57_data_prefetcher_cannot_be_disabled():
    state = MicroState(quiet("a57"))
    with pytest.raises(UnsupportedMitigation):
        state.disable_data_prefetcher()


def test_unknown_action_rejected(skylake_state):
    with pytest.raises(ConfigError):
        skylake_state.apply("reboot")


def test_address_width_enforced(a9):
    state = MicroState(a9)
    with pytest.raises(ConfigError):
        state.data_access(SPY, 1 << 32)


def test_scrub_clears_unreachable_state(skylake_state):
    for i in range(4):
        skylake_state.inst_access(TROJAN, 0x2000_0000 + i * 64)
    skylake_state.branch_exec(TROJAN, 0x3000_0000, True)
    skylake_state.scrub_residual_state()
    assert skylake_state.iprefetcher.entries == []
    assert skylake_state.btb.occupancy() == 0
    assert skylake_state.dprefetcher.last_miss_line is None


def test_scrub_keeps_flushable_branch_state_on_arm(a9):
    state = MicroState(a9)
    state.branch_exec(TROJAN, 0x3000_0000, True)
    state.scrub_residual_state()
    assert state.btb.occupancy() == 1


def _random_ops(state: MicroState, n: int, seed: int) -> list[int]:
    rng = np.random.default_rng(seed)
    out = []
    for op, page, line, bit in zip(
        rng.integers(0, 5, n).tolist(),
        rng.integers(0, 40, n).tolist(),
        rng.integers(0, 64, n).tolist(),
        rng.integers(0, 2, n).tolist(),
    ):
        domain = TROJAN if bit else SPY
        addr = BASE + page * PAGE_BYTES + line * 64
        if op == 0:
            out.append(state.data_access(domain, addr))
        elif op == 1:
            out.append(state.inst_access(domain, addr))
        elif op == 2:
            out.append(state.branch_exec(domain, addr, taken=bool(bit)))
        elif op == 3:
            state.flush_tlb()
        else:
            out.append(state.data_access(domain, addr + 64))
        state.check_invariants()
    return out


def test_invariants_and_monotone_cycle_counter():
    state = MicroState(load_noisy("skylake"), seed=9)
    before = state.cycle_counter
    for round_ in range(20):
        _random_ops(state, 100, seed=round_)
        assert state.cycle_counter >= before
        before = state.cycle_counter


def test_noise_is_seeded():
    a = _random_ops(MicroState(load_noisy("a53"), seed=4), 2000, seed=1)
    b = _random_ops(MicroState(load_noisy("a53"), seed=4), 2000, seed=1)
    c = _random_ops(MicroState(load_noisy("a53"), seed=5), 2000, seed=1)
    assert a == b
    assert a != c
    assert min(a) >= 1


def test_noise_is_clipped_to_the_worst_case_bound():
    noise = NoiseSource(2.0, seed=9)
    draws = [noise.draw() for _ in range(20_000)]
    assert noise.bound == 8
    assert max(map(abs, draws)) <= noise.bound

    state = MicroState(load_noisy("skylake"), seed=9)
    lat = state.latencies
    assert state.worst_access_cycles == lat.tlb_miss_cycles + lat.l1_miss_cycles + 8
    costs = [state.data_access(SPY, BASE + i * PAGE_BYTES) for i in range(2000)]
    assert max(costs) <= state.worst_access_cycles


def load_noisy(name: str):
    return quiet(name).with_noise(2.0)
