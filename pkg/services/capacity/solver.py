"""
Channel capacity of a discrete memoryless channel by alternating maximisation.

Each pass reweights the input distribution p by 2^D(W_x || pW). I(p) is a lower
bound on capacity and never decreases; max_x D(W_x || pW) is an upper bound.
The loop stops once the two are within `tol` bits.
"""

from dataclasses import dataclass, field

import numpy as np

from .matrix import ChannelMatrix, check_stochastic

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000


@dataclass
class CapacityResult:
    capacity: float
    upper: float
    input_distribution: np.ndarray
    iterations: int
    trace: list[float] = field(default_factory=list)


def _divergences(W: np.ndarray, p: np.ndarray) -> np.ndarray:
    """D(W_x || q) in bits for every row x (batched over leading axes), q = pW."""
    q = np.einsum("...x,...xy->...y", p, W)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(W > 0, W * np.log2(W / q[..., None, :]), 0.0)
    return terms.sum(axis=-1)


def blahut_arimoto(
    W: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER, trace: bool = False
) -> CapacityResult:
    W = np.asarray(W, dtype=np.float64)
    check_stochastic(W)
    n_in, n_out = W.shape
    p = np.full(n_in, 1.0 / n_in)
    if n_out == 1 or n_in == 1:
        return CapacityResult(0.0, 0.0, p, 0, [0.0] if trace else [])

    history: list[float] = []
    lower = upper = 0.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d = _divergences(W, p)
        lower = max(float(p @ d), 0.0)
        upper = float(d.max())
        if trace:
            history.append(lower)
        if upper - lower < tol:
            break
        p = p * np.exp2(d - upper)
        p /= p.sum()
    return CapacityResult(lower, upper, p, iterations, history)


def shannon_capacity(m: ChannelMatrix | np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Capacity in bits per symbol."""
    W = m.probs if isinstance(m, ChannelMatrix) else m
    return blahut_arimoto(W, tol=tol, max_iter=max_iter).capacity


def batched_capacity(W: np.ndarray, tol: float = 1e-6, max_iter: int = 2_000) -> np.ndarray:
    """Capacities of a stack of row-stochastic matrices shaped (trials, inputs, outputs)."""
    W = np.asarray(W, dtype=np.float64)
    trials, n_in, n_out = W.shape
    if n_out == 1 or n_in == 1:
        return np.zeros(trials)

    p = np.full((trials, n_in), 1.0 / n_in)
    lower = np.zeros(trials)
    active = np.ones(trials, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if len(idx) == 0:
            break
        d = _divergences(W[idx], p[idx])
        lo = np.maximum(np.einsum("tx,tx->t", p[idx], d), 0.0)
        hi = d.max(axis=1)
        lower[idx] = lo
        done = hi - lo < tol
        active[idx[done]] = False
        step = ~done
        if step.any():
            live = idx[step]
            w = p[live] * np.exp2(d[step] - hi[step, None])
            p[live] = w / w.sum(axis=1, keepdims=True)
    return lower
