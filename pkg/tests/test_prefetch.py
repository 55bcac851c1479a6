import numpy as np
import pytest

from microarch.prefetch import DataPrefetcher, InstructionPrefetcher
from shared.models import PAGE_BYTES, InstructionPrefetcherConfig

N_ACCESSES = 10_000


def _line_walk(seed: int, n: int = N_ACCESSES, span: int = 512) -> list[int]:
    """Mostly ascending runs with short back-steps and random jumps."""
    rng = np.random.default_rng(seed)
    moves = rng.random(n)
    jumps = rng.integers(0, span, n)
    backs = rng.integers(1, 4, n)
    lines, cur = [], int(jumps[0])
    for move, jump, back in zip(moves.tolist(), jumps.tolist(), backs.tolist()):
        if move < 0.7:
            cur += 1
        elif move < 0.8:
            cur = max(0, cur - back)
        else:
            cur = jump
        lines.append(cur)
    return lines


def test_stream_becomes_confident_on_third_line():
    pf = InstructionPrefetcher(InstructionPrefetcherConfig(stream_table_size=4, threshold=2))
    served = [pf.observe_miss(line) for line in range(100, 104)]
    assert served == [False, False, True, True]


def test_confidence_saturates():
    pf = InstructionPrefetcher(InstructionPrefetcherConfig(confidence_bits=2))
    for line in range(10):
        pf.observe_miss(line)
    assert [e.confidence for e in pf.entries] == [3]


def test_replacement_prefers_low_confidence_then_lru():
    pf = InstructionPrefetcher(InstructionPrefetcherConfig(stream_table_size=2))
    for line in range(0, 4):
        pf.observe_miss(line)
    pf.observe_miss(1000)
    pf.observe_miss(2000)
    lasts = sorted(e.last_line for e in pf.entries)
    # the confident stream survives two unrelated misses
    assert lasts == [3, 2000]
    assert pf.predicts(4)


def test_zero_clears_table():
    pf = InstructionPrefetcher(InstructionPrefetcherConfig())
    for line in range(5):
        pf.observe_miss(line)
    pf.zero()
    assert not pf.predicts(5)
    assert pf.entries == []


def test_data_prefetcher_next_line_within_page():
    pf = DataPrefetcher(enabled=True, line_bytes=64)
    assert pf.observe_miss(10) is None
    assert pf.observe_miss(11) == 12
    assert pf.observe_miss(20) is None
    # last line of a 4 KiB page never prefetches into the next page
    assert pf.observe_miss(62) is None
    assert pf.observe_miss(63) is None


def test_disabled_data_prefetcher_is_inert():
    pf = DataPrefetcher(enabled=True, line_bytes=64)
    pf.disable()
    pf.observe_miss(10)
    assert pf.observe_miss(11) is None


@pytest.mark.parametrize("size,bits,threshold", [(4, 2, 2), (2, 3, 5), (8, 1, 1)])
def test_stream_table_matches_reference(size, bits, threshold):
    pf = InstructionPrefetcher(InstructionPrefetcherConfig(stream_table_size=size, confidence_bits=bits, threshold=threshold))
    top = (1 << bits) - 1
    # [last_line, confidence, stamp]
    table: list[list[int]] = []
    for t, line in enumerate(_line_walk(seed=size), start=1):
        hits = [e for e in table if e[0] + 1 == line]
        assert pf.predicts(line) == (bool(hits) and max(hits, key=lambda e: (e[1], e[2]))[1] >= threshold)
        if hits:
            best = max(hits, key=lambda e: (e[1], e[2]))
            expected = best[1] >= threshold
            best[:] = [line, min(best[1] + 1, top), t]
        else:
            expected = False
            if len(table) == size:
                table.remove(min(table, key=lambda e: (e[1], e[2])))
            table.append([line, 1, t])
        assert pf.observe_miss(line) == expected
        assert sorted((e.last_line, e.confidence) for e in pf.entries) == sorted((e[0], e[1]) for e in table)


@pytest.mark.parametrize("line_bytes", [32, 64])
def test_data_prefetcher_matches_reference(line_bytes):
    pf = DataPrefetcher(enabled=True, line_bytes=line_bytes)
    per_page = PAGE_BYTES // line_bytes
    rng = np.random.default_rng(line_bytes)
    resets = rng.random(N_ACCESSES) < 0.002
    last = None
    for line, reset in zip(_line_walk(seed=line_bytes), resets.tolist()):
        if reset:
            pf.reset()
            last = None
        expected = line + 1 if last == line - 1 and (line + 1) % per_page else None
        last = line
        assert pf.observe_miss(line) == expected
