from dataclasses import dataclass

import numpy as np

from harness.samples import SampleSet
from shared.errors import ConfigError, NonStochasticMatrix

MAX_BINS = 512
ROW_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BinningRule:
    """One bin per distinct output while there are at most `max_bins` of them,
    otherwise `max_bins` equal-population quantile bins."""

    max_bins: int = MAX_BINS

    def edges(self, outputs: np.ndarray) -> np.ndarray:
        values = np.unique(outputs)
        if len(values) == 0:
            raise ConfigError("no outputs to bin")
        if len(values) <= self.max_bins:
            lower = values.astype(np.float64)
        else:
            lower = np.unique(np.quantile(outputs, np.linspace(0.0, 1.0, self.max_bins + 1))[:-1])
        return np.append(lower, float(values[-1]) + 1.0)

    @staticmethod
    def assign(outputs: np.ndarray, edges: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(edges, outputs, side="right") - 1
        return np.clip(idx, 0, len(edges) - 2)


@dataclass
class ChannelMatrix:
    labels: np.ndarray
    edges: np.ndarray
    probs: np.ndarray
    counts: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape

    @property
    def samples_per_input(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def check(self) -> None:
        check_stochastic(self.probs)
        if np.any(np.diff(self.edges) <= 0):
            raise NonStochasticMatrix("bin edges are not strictly increasing")


def check_stochastic(probs: np.ndarray) -> None:
    if probs.ndim != 2 or probs.size == 0:
        raise NonStochasticMatrix(f"expected a non-empty 2-d matrix, got shape {probs.shape}")
    if np.any(probs < 0):
        row = int(np.argwhere(probs < 0)[0][0])
        raise NonStochasticMatrix(f"row {row} has negative entries")
    sums = probs.sum(axis=1)
    off = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOLERANCE)
    if len(off):
        raise NonStochasticMatrix(f"row {int(off[0])} sums to {sums[off[0]]:.12g}")


def encode(samples: SampleSet, binning: BinningRule | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Row index per sample, bin index per sample, input labels and bin edges."""
    binning = binning or BinningRule()
    if len(samples) == 0:
        raise ConfigError(f"{samples.protocol}: empty sample set")
    samples.check_complete()
    labels = np.asarray(sorted(samples.input_set), dtype=np.int64)
    rows = np.searchsorted(labels, samples.inputs)
    if np.any(rows >= len(labels)) or np.any(labels[np.minimum(rows, len(labels) - 1)] != samples.inputs):
        raise ConfigError(f"{samples.protocol}: samples contain undeclared inputs")
    edges = binning.edges(samples.outputs)
    cols = binning.assign(samples.outputs, edges)
    return rows, cols, labels, edges


def count_matrix(rows: np.ndarray, cols: np.ndarray, n_rows: int, n_cols: int) -> np.ndarray:
    flat = np.bincount(rows * n_cols + cols, minlength=n_rows * n_cols)
    return flat.reshape(n_rows, n_cols).astype(np.float64)


def build_matrix(samples: SampleSet, binning: BinningRule | None = None) -> ChannelMatrix:
    rows, cols, labels, edges = encode(samples, binning)
    counts = count_matrix(rows, cols, len(labels), len(edges) - 1)
    probs = counts / counts.sum(axis=1, keepdims=True)
    return ChannelMatrix(labels=labels, edges=edges, probs=probs, counts=counts)
