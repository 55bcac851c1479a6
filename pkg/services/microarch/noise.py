import math

import numpy as np

NOISE_BLOCK = 4096
# Draws are clipped here so every operation has a finite worst-case cost
NOISE_CLIP_SIGMAS = 4.0


class NoiseSource:
    """Integer Gaussian jitter drawn in blocks from a seeded numpy Generator, clipped to +-`bound`."""

    def __init__(self, stddev: float, seed: int, block: int = NOISE_BLOCK) -> None:
        self.stddev = stddev
        self.bound = math.ceil(NOISE_CLIP_SIGMAS * stddev)
        self._rng = np.random.default_rng(seed)
        self._block = block
        self._buf: list[int] = []
        self._pos = 0

    def draw(self) -> int:
        if self.stddev == 0:
            return 0
        if self._pos >= len(self._buf):
            raw = np.rint(self._rng.normal(0.0, self.stddev, self._block))
            self._buf = np.clip(raw, -self.bound, self.bound).astype(np.int64).tolist()
            self._pos = 0
        value = self._buf[self._pos]
        self._pos += 1
        return value
