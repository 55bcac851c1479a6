import os

import numpy as np

from harness.samples import SampleSet
from shared.logger import log

from .matrix import BinningRule, count_matrix, encode
from .solver import batched_capacity

DEFAULT_TRIALS = int(os.getenv("LEAKBENCH_TRIALS", "1000"))
SHUFFLE_TOL = 1e-6
# Float budget per batch of shuffled matrices
BATCH_CELLS = 4_000_000


def shuffle_capacities(
    samples: SampleSet,
    trials: int = DEFAULT_TRIALS,
    binning: BinningRule | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Capacities of `trials` channel matrices rebuilt after randomly reassigning outputs to inputs.

    The output multiset is preserved and binned once; only the pairing with inputs changes.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows, cols, labels, edges = encode(samples, binning)
    n_rows, n_cols = len(labels), len(edges) - 1
    if n_cols == 1 or n_rows == 1:
        return np.zeros(trials)

    rng = np.random.default_rng(seed)
    batch = max(1, BATCH_CELLS // (n_rows * n_cols))
    per_input = np.bincount(rows, minlength=n_rows).astype(np.float64)
    offsets = rows * n_cols
    results = np.empty(trials)
    for start in range(0, trials, batch):
        size = min(batch, trials - start)
        shuffled = np.tile(cols, (size, 1))
        rng.permuted(shuffled, axis=1, out=shuffled)
        flat = (np.arange(size)[:, None] * (n_rows * n_cols) + offsets[None, :] + shuffled).ravel()
        counts = np.bincount(flat, minlength=size * n_rows * n_cols).reshape(size, n_rows, n_cols)
        results[start : start + size] = batched_capacity(counts / per_input[None, :, None], tol=SHUFFLE_TOL)
    log.debug(f"{samples.protocol}: {trials} shuffles, max {results.max():.4f} b")
    return results


def shuffle_bound(
    samples: SampleSet,
    trials: int = DEFAULT_TRIALS,
    binning: BinningRule | None = None,
    seed: int = 0,
) -> float:
    """C0: the largest capacity seen across the shuffled trials."""
    return float(shuffle_capacities(samples, trials, binning, seed).max())
