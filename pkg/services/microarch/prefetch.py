from dataclasses import dataclass

from shared.models import PAGE_BYTES, InstructionPrefetcherConfig


@dataclass
class StreamEntry:
    last_line: int
    stride: int
    confidence: int
    stamp: int


class InstructionPrefetcher:
    """Next-line stream detector trained on L1-I misses.

    A miss on a line that a confident entry predicts is served by the prefetcher.
    No architected operation reaches this table; only `zero` (test hook) clears it.
    """

    def __init__(self, config: InstructionPrefetcherConfig) -> None:
        self.config = config
        self.max_confidence = (1 << config.confidence_bits) - 1
        self.entries: list[StreamEntry] = []
        self._tick = 0

    def _match(self, line: int) -> StreamEntry | None:
        best = None
        for entry in self.entries:
            if entry.last_line + entry.stride == line:
                if best is None or (entry.confidence, entry.stamp) > (best.confidence, best.stamp):
                    best = entry
        return best

    def predicts(self, line: int) -> bool:
        entry = self._match(line)
        return entry is not None and entry.confidence >= self.config.threshold

    def observe_miss(self, line: int) -> bool:
        """Train on a demand miss. Returns True when the line was already being prefetched."""
        self._tick += 1
        entry = self._match(line)
        if entry is not None:
            served = entry.confidence >= self.config.threshold
            entry.confidence = min(entry.confidence + 1, self.max_confidence)
            entry.last_line = line
            entry.stamp = self._tick
            return served

        fresh = StreamEntry(last_line=line, stride=1, confidence=1, stamp=self._tick)
        if len(self.entries) < self.config.stream_table_size:
            self.entries.append(fresh)
        else:
            # Lowest confidence goes first, least recently trained among equals
            victim = min(range(len(self.entries)), key=lambda i: (self.entries[i].confidence, self.entries[i].stamp))
            self.entries[victim] = fresh
        return False

    def zero(self) -> None:
        self.entries.clear()


class DataPrefetcher:
    """Next-line prefetcher: two ascending consecutive misses in a page fetch the following line."""

    def __init__(self, enabled: bool, line_bytes: int) -> None:
        self.enabled = enabled
        self.line_bytes = line_bytes
        self.last_miss_line: int | None = None

    def observe_miss(self, line: int) -> int | None:
        """Returns the line to prefetch, if any."""
        if not self.enabled:
            return None
        target = None
        if self.last_miss_line == line - 1:
            nxt = line + 1
            if (nxt * self.line_bytes) // PAGE_BYTES == (line * self.line_bytes) // PAGE_BYTES:
                target = nxt
        self.last_miss_line = line
        return target

    def disable(self) -> None:
        self.enabled = False
        self.last_miss_line = None

    def reset(self) -> None:
        self.last_miss_line = None
