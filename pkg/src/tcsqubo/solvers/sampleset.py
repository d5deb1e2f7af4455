from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from ..qubo import QuboModel, energies


class Sample(NamedTuple):
    assignment: np.ndarray
    energy: float
    multiplicity: int


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Distinct assignments with their energies and occurrence counts, best first.

    Rows with equal energy are ordered lexicographically by assignment so the
    ordering is fully deterministic.
    """

    samples: np.ndarray
    energies: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_samples(cls, model: QuboModel, samples) -> SampleSet:
        x = np.asarray(samples, dtype=np.uint8)
        x = x.reshape(len(x) if x.ndim == 2 else -1, model.num_vars)
        if len(x) == 0:
            return cls(x, np.zeros(0), np.zeros(0, dtype=np.int64))
        unique, counts = np.unique(x, axis=0, return_counts=True)
        e = energies(model, unique)
        # np.unique already sorts rows lexicographically; a stable sort on energy keeps that as tie-break
        order = np.argsort(e, kind="stable")
        return cls(unique[order], e[order], counts[order].astype(np.int64))

    def __post_init__(self):
        for name in ("samples", "energies", "counts"):
            getattr(self, name).setflags(write=False)

    def __len__(self) -> int:
        return len(self.energies)

    def __iter__(self) -> Iterator[Sample]:
        for x, e, c in zip(self.samples, self.energies, self.counts):
            yield Sample(x, float(e), int(c))

    def __getitem__(self, i: int) -> Sample:
        return Sample(self.samples[i], float(self.energies[i]), int(self.counts[i]))

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (np.array_equal(self.samples, other.samples) and np.array_equal(self.energies, other.energies)
                and np.array_equal(self.counts, other.counts))

    __hash__ = None

    @property
    def first(self) -> Sample:
        if not len(self):
            raise IndexError("empty sample set")
        return self[0]

    @property
    def num_reads(self) -> int:
        return int(self.counts.sum())
