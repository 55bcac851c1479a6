from collections import OrderedDict
from typing import Any, Hashable, Iterator

from shared.models import CacheGeometry


class LruSets:
    """Fixed number of sets, each holding up to `ways` keyed entries with true-LRU replacement.

    Each set keeps a way list (placement) and an OrderedDict (recency, least recent first).
    Misses fill the lowest-index invalid way before evicting anything.
    """

    def __init__(self, sets: int, ways: int) -> None:
        self.sets = sets
        self.ways = ways
        self.clear()

    def clear(self) -> None:
        self._ways: list[list[Hashable | None]] = [[None] * self.ways for _ in range(self.sets)]
        self._recency: list[OrderedDict[Hashable, Any]] = [OrderedDict() for _ in range(self.sets)]
        self._slot: list[dict[Hashable, int]] = [{} for _ in range(self.sets)]

    def contains(self, set_idx: int, key: Hashable) -> bool:
        return key in self._recency[set_idx]

    def get(self, set_idx: int, key: Hashable, default: Any = None) -> Any:
        return self._recency[set_idx].get(key, default)

    def touch(self, set_idx: int, key: Hashable) -> bool:
        """Mark `key` most recently used. Returns False if it is not resident."""
        recency = self._recency[set_idx]
        if key in recency:
            recency.move_to_end(key)
            return True
        return False

    def insert(self, set_idx: int, key: Hashable, value: Any = None) -> Hashable | None:
        """Install `key` as most recently used. Returns the evicted key, if any."""
        recency = self._recency[set_idx]
        if key in recency:
            recency[key] = value
            recency.move_to_end(key)
            return None

        ways = self._ways[set_idx]
        slots = self._slot[set_idx]
        evicted = None
        if len(recency) < self.ways:
            way = ways.index(None)
        else:
            evicted, _ = recency.popitem(last=False)
            way = slots.pop(evicted)
        ways[way] = key
        slots[key] = way
        recency[key] = value
        return evicted

    def invalidate(self, set_idx: int, key: Hashable) -> bool:
        recency = self._recency[set_idx]
        if key not in recency:
            return False
        del recency[key]
        way = self._slot[set_idx].pop(key)
        self._ways[set_idx][way] = None
        return True

    def resident(self, set_idx: int) -> list[Hashable]:
        """Keys in `set_idx`, least recently used first."""
        return list(self._recency[set_idx])

    def way_list(self, set_idx: int) -> list[Hashable | None]:
        return list(self._ways[set_idx])

    def occupancy(self) -> int:
        return sum(len(r) for r in self._recency)

    def __iter__(self) -> Iterator[tuple[int, Hashable]]:
        for set_idx, recency in enumerate(self._recency):
            for key in recency:
                yield set_idx, key

    def check_invariants(self) -> None:
        for set_idx in range(self.sets):
            recency = self._recency[set_idx]
            valid = [k for k in self._ways[set_idx] if k is not None]
            assert len(recency) <= self.ways
            assert sorted(map(repr, valid)) == sorted(map(repr, recency))
            for key, way in self._slot[set_idx].items():
                assert self._ways[set_idx][way] == key


class SetAssocCache(LruSets):
    """Virtually indexed L1 cache. Lines are tagged with the owning address space."""

    def __init__(self, geometry: CacheGeometry) -> None:
        self.geometry = geometry
        self.line_bytes = geometry.line_bytes
        super().__init__(geometry.sets, geometry.ways)

    def locate(self, vaddr: int, asid: int) -> tuple[int, tuple[int, int]]:
        line = vaddr // self.line_bytes
        return line % self.sets, (line // self.sets, asid)

    def contains_line(self, vaddr: int, asid: int) -> bool:
        set_idx, key = self.locate(vaddr, asid)
        return self.contains(set_idx, key)

    def access(self, vaddr: int, asid: int) -> bool:
        """Demand access: returns True on hit, fills the line on miss."""
        set_idx, key = self.locate(vaddr, asid)
        if self.touch(set_idx, key):
            return True
        self.insert(set_idx, key)
        return False

    def fill(self, vaddr: int, asid: int) -> bool:
        """Prefetch fill: installs an absent line, leaves a present one untouched."""
        set_idx, key = self.locate(vaddr, asid)
        if self.contains(set_idx, key):
            return False
        self.insert(set_idx, key)
        return True

    def flush_all(self) -> None:
        self.clear()
