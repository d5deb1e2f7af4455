"""Simulated-annealing sampler for QUBO models.

Each read is an independent single-flip Metropolis chain that sweeps the
variables in index order under a geometric inverse-temperature schedule.
Read ``r`` draws its initial state and acceptance uniforms from its own
stream, ``SeedSequence(seed, spawn_key=(r,))``, so results do not depend on
how reads are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import ValidationError
from ..qubo import QuboModel
from ._seeding import MASK64, seed_sequence
from .sampleset import SampleSet

__all__ = ["AnnealConfig", "default_beta_range", "solve_sa"]

# sweeps generated per block of acceptance uniforms; bounds memory on large models
_BLOCK = 128


@dataclass(frozen=True)
class AnnealConfig:
    """Sampler settings. ``None`` betas are derived from the model (see :func:`default_beta_range`)."""

    num_reads: int = 100
    sweeps: int = 1000
    beta_initial: float | None = None
    beta_final: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.num_reads < 1:
            raise ValidationError(f"num_reads must be >= 1, got {self.num_reads}")
        if self.sweeps < 1:
            raise ValidationError(f"sweeps must be >= 1, got {self.sweeps}")
        for name in ("beta_initial", "beta_final"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {value}")
        if self.beta_initial is not None and self.beta_final is not None and self.beta_final < self.beta_initial:
            raise ValidationError("beta_final must be >= beta_initial")
        object.__setattr__(self, "seed", int(self.seed) & MASK64)


def default_beta_range(model: QuboModel) -> tuple[float, float]:
    """Inverse temperatures bracketing the model's single-flip energy changes.

    The hot end accepts the largest possible uphill flip with probability 1/2;
    the cold end accepts the smallest non-zero coefficient's uphill flip with
    probability 1e-4.
    """
    lin = np.abs(model.linear)
    quad = np.abs(np.fromiter(model.quadratic.values(), dtype=float, count=len(model.quadratic)))
    if model.num_vars == 0:
        return 1.0, 1.0
    indptr, indices, weights = model.adjacency()
    row_mass = np.zeros(model.num_vars)
    if len(weights):
        np.add.at(row_mass, np.repeat(np.arange(model.num_vars), np.diff(indptr)), np.abs(weights))
    max_delta = float((lin + row_mass).max())
    nonzero = np.concatenate([lin[lin > 0], quad[quad > 0]])
    if max_delta == 0 or not len(nonzero):
        return 1.0, 1.0
    hot = math.log(2.0) / max_delta
    cold = math.log(1e4) / float(nonzero.min())
    return hot, max(hot, cold)


@njit(cache=True, nogil=True)
def _local_fields(x, linear, indptr, indices, weights):
    field = linear.copy()
    for i in range(x.shape[0]):
        if x[i]:
            for p in range(indptr[i], indptr[i + 1]):
                field[indices[p]] += weights[p]
    return field


@njit(cache=True, nogil=True)
def _metropolis(x, field, indptr, indices, weights, betas, uniforms):
    n = x.shape[0]
    for s in range(betas.shape[0]):
        beta = betas[s]
        for i in range(n):
            if x[i] == 0:
                delta = field[i]
                step = 1.0
            else:
                delta = -field[i]
                step = -1.0
            if delta <= 0.0 or uniforms[s, i] < math.exp(-beta * delta):
                x[i] = 1 - x[i]
                for p in range(indptr[i], indptr[i + 1]):
                    field[indices[p]] += step * weights[p]


def _run_read(read: int, model: QuboModel, adjacency, betas: np.ndarray, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed_sequence(seed, read)))
    n = model.num_vars
    x = rng.integers(0, 2, size=n, dtype=np.uint8)
    indptr, indices, weights = adjacency
    field = _local_fields(x, np.ascontiguousarray(model.linear), indptr, indices, weights)
    for start in range(0, len(betas), _BLOCK):
        block = betas[start:start + _BLOCK]
        uniforms = rng.random((len(block), n))
        _metropolis(x, field, indptr, indices, weights, block, uniforms)
    return x


def solve_sa(model: QuboModel, config: AnnealConfig | None = None, workers: int = 1) -> SampleSet:
    """Sample ``model`` with ``config.num_reads`` annealing chains.

    ``workers > 1`` runs reads on a thread pool; the output is identical to the
    sequential run.
    """
    config = config or AnnealConfig()
    if model.num_vars < 1:
        raise ValidationError("cannot anneal a model without variables")
    hot, cold = default_beta_range(model)
    beta_initial = config.beta_initial if config.beta_initial is not None else hot
    beta_final = config.beta_final if config.beta_final is not None else max(cold, beta_initial)
    if beta_final < beta_initial:
        raise ValidationError(f"beta_final {beta_final} < beta_initial {beta_initial}")
    betas = np.geomspace(beta_initial, beta_final, config.sweeps)
    adjacency = model.adjacency()

    reads = range(config.num_reads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(lambda r: _run_read(r, model, adjacency, betas, config.seed), reads))
    else:
        finals = [_run_read(r, model, adjacency, betas, config.seed) for r in reads]
    return SampleSet.from_samples(model, np.stack(finals))
