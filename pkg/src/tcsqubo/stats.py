"""Mann-Whitney U test and Vargha-Delaney A12 effect size.

Directional alternatives describe the first sample relative to the second:
``"greater"`` tests whether ``x`` tends to exceed ``y``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "Alternative",
    "Magnitude",
    "StatReport",
    "SIGNIFICANCE",
    "EXACT_MAX_TOTAL",
    "mann_whitney_u",
    "u_statistic",
    "vargha_delaney_a12",
    "classify_magnitude",
    "compare",
    "directional_report",
    "write_report",
]

SIGNIFICANCE = 0.05
# combined sample size up to which tie-free data get the exact null distribution
EXACT_MAX_TOTAL = 16
_EXACT_MAX_ARRANGEMENTS = 2_000_000


class Alternative(str, enum.Enum):
    GREATER = "greater"
    LESS = "less"
    TWO_SIDED = "two-sided"


class Magnitude(str, enum.Enum):
    NEGLIGIBLE = "negligible"
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"

    @property
    def letter(self) -> str:
        return self.value[0].upper()


def _sample(values, name: str) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValidationError(f"sample {name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"sample {name} contains non-finite values")
    return arr


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    start = 0
    while start < len(values):
        stop = start
        while stop + 1 < len(values) and sorted_vals[stop + 1] == sorted_vals[start]:
            stop += 1
        ranks[order[start:stop + 1]] = (start + stop) / 2.0 + 1.0
        start = stop + 1
    return ranks


def u_statistic(x: Sequence[float], y: Sequence[float]) -> float:
    """``U`` for ``x``: number of pairs with ``x_i > y_j`` plus half the ties."""
    x, y = _sample(x, "x"), _sample(y, "y")
    ranks = _midranks(np.concatenate([x, y]))
    return float(ranks[:len(x)].sum() - len(x) * (len(x) + 1) / 2.0)


def _exact_tails(ranks: np.ndarray, n1: int, u_obs: float) -> tuple[float, float]:
    """P(U >= u_obs), P(U <= u_obs) under random assignment of the pooled ranks."""
    total = math.comb(len(ranks), n1)
    if total > _EXACT_MAX_ARRANGEMENTS:
        raise ValidationError(f"exact test would enumerate {total} arrangements")
    shift = n1 * (n1 + 1) / 2.0
    upper = lower = 0
    for combo in itertools.combinations(range(len(ranks)), n1):
        u = ranks[list(combo)].sum() - shift
        # midranks are multiples of 1/2, so the sums are exact in binary floating point
        if u >= u_obs:
            upper += 1
        if u <= u_obs:
            lower += 1
    return upper / total, lower / total


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(
    x: Sequence[float],
    y: Sequence[float],
    alternative: Alternative | str = Alternative.TWO_SIDED,
    method: str = "auto",
) -> float:
    """p-value of the Mann-Whitney U test.

    ``method="auto"`` enumerates the exact null distribution when the samples
    are tie-free and ``len(x) + len(y) <= 16``; otherwise it uses the normal
    approximation with tie and continuity corrections. ``"exact"`` forces
    enumeration (ties then use the conditional permutation distribution) and
    ``"asymptotic"`` forces the approximation.
    """
    alternative = Alternative(alternative)
    if method not in ("auto", "exact", "asymptotic"):
        raise ValidationError(f"unknown method {method!r}")
    x, y = _sample(x, "x"), _sample(y, "y")
    n1, n2 = len(x), len(y)
    pooled = np.concatenate([x, y])
    ranks = _midranks(pooled)
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    has_ties = len(np.unique(pooled)) < len(pooled)

    if method == "exact" or (method == "auto" and not has_ties and n1 + n2 <= EXACT_MAX_TOTAL):
        upper, lower = _exact_tails(ranks, n1, u)
        if alternative is Alternative.GREATER:
            return upper
        if alternative is Alternative.LESS:
            return lower
        return min(1.0, 2.0 * min(upper, lower))

    n = n1 + n2
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(((tie_counts ** 3) - tie_counts).sum()) / (n * (n - 1)) if n > 1 else 0.0
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if variance <= 0:
        return 1.0
    sd = math.sqrt(variance)
    mean = n1 * n2 / 2.0
    if alternative is Alternative.GREATER:
        return _normal_sf((u - mean - 0.5) / sd)
    if alternative is Alternative.LESS:
        return _normal_sf((mean - u - 0.5) / sd)
    z = max(abs(u - mean) - 0.5, 0.0) / sd
    return min(1.0, 2.0 * _normal_sf(z))


def vargha_delaney_a12(x: Sequence[float], y: Sequence[float]) -> float:
    """Probability that a draw from ``x`` exceeds one from ``y``, ties counting half."""
    x, y = _sample(x, "x"), _sample(y, "y")
    greater = (x[:, None] > y[None, :]).sum()
    equal = (x[:, None] == y[None, :]).sum()
    return float((greater + 0.5 * equal) / (len(x) * len(y)))


def classify_magnitude(a12: float) -> Magnitude:
    """Effect-size band of an A12 value.

    small: (0.34, 0.44] or [0.56, 0.64); medium: (0.29, 0.34] or [0.64, 0.71);
    large: [0, 0.29] or [0.71, 1]; everything in (0.44, 0.56) is negligible.
    """
    if not 0.0 <= a12 <= 1.0:  # also rejects NaN
        raise ValidationError(f"A12 must lie in [0, 1], got {a12}")
    if a12 <= 0.29 or a12 >= 0.71:
        return Magnitude.LARGE
    if a12 <= 0.34 or a12 >= 0.64:
        return Magnitude.MEDIUM
    if a12 <= 0.44 or a12 >= 0.56:
        return Magnitude.SMALL
    return Magnitude.NEGLIGIBLE


@dataclass(frozen=True)
class StatReport:
    hypothesis: str
    p_value: float
    a12: float
    magnitude: Magnitude

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE

    def line(self) -> str:
        return f"{self.hypothesis},{self.p_value!r},{self.a12!r},{self.magnitude.value}"


def compare(hypothesis: str, x, y, alternative: Alternative | str = Alternative.GREATER) -> StatReport:
    a12 = vargha_delaney_a12(x, y)
    return StatReport(hypothesis, mann_whitney_u(x, y, alternative), a12, classify_magnitude(a12))


def directional_report(metric: str, name_a: str, a, name_b: str, b, higher_is_better: bool = True) -> StatReport:
    """Test the better-looking of two samples against the other.

    The sample whose A12 favours it is named first, giving hypotheses such as
    ``"greedy>selectqa nondominated"`` or ``"selectqa<bootqa cost"``.
    """
    a12 = vargha_delaney_a12(a, b)
    if (higher_is_better and a12 < 0.5) or (not higher_is_better and a12 > 0.5):
        name_a, a, name_b, b = name_b, b, name_a, a
    if higher_is_better:
        return compare(f"{name_a}>{name_b} {metric}", a, b, Alternative.GREATER)
    return compare(f"{name_a}<{name_b} {metric}", a, b, Alternative.LESS)


def write_report(path: str | PathLike, reports: Iterable[StatReport]) -> None:
    Path(path).write_text("".join(r.line() + "\n" for r in reports))
