from __future__ import annotations

import numpy as np

from ..errors import CapacityError
from ..qubo import QuboModel, energies
from .sampleset import SampleSet

__all__ = ["MAX_EXACT_VARS", "solve_exact"]

MAX_EXACT_VARS = 24
_CHUNK_BITS = 16


def _bit_rows(start: int, stop: int, n: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.uint8)


def solve_exact(model: QuboModel, atol: float = 1e-9) -> SampleSet:
    """Enumerate every assignment and return all global minima.

    Candidate minima are screened with a dense matrix form and then
    re-evaluated with :func:`energies`, so reported energies match the ones
    other solvers report for the same assignment.
    """
    n = model.num_vars
    if n > MAX_EXACT_VARS:
        raise CapacityError(f"exhaustive search limited to {MAX_EXACT_VARS} variables, model has {n}")
    if n == 0:
        return SampleSet.from_samples(model, np.zeros((1, 0), dtype=np.uint8))

    upper = model.to_upper_matrix()
    np.fill_diagonal(upper, 0.0)
    total = 1 << n
    chunk = 1 << min(n, _CHUNK_BITS)
    best = np.inf
    keep: list[np.ndarray] = []
    for start in range(0, total, chunk):
        bits = _bit_rows(start, min(start + chunk, total), n)
        x = bits.astype(float)
        e = model.offset + x @ model.linear + np.einsum("ij,ij->i", x @ upper, x)
        low = e.min()
        slack = atol * max(1.0, abs(low))
        if low < best - slack:
            best = low
            keep = []
        if low <= best + slack:
            keep.append(bits[e <= best + atol * max(1.0, abs(best))])
    candidates = np.concatenate(keep)
    exact = energies(model, candidates)
    floor = exact.min()
    minima = candidates[exact <= floor + atol * max(1.0, abs(floor))]
    return SampleSet.from_samples(model, minima)
