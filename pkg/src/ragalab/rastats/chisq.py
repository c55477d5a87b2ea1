"""Chi-square goodness of fit with adjacent-class pooling.

Upper-tail probabilities come from the regularized upper incomplete gamma
function, ``Q(df/2, x/2)``, evaluated by its power series when ``x < a + 1``
and by a Lentz continued fraction otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .tables import FrequencyTable

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


class PoolingError(ValueError):
    pass


class NumericalError(ArithmeticError):
    """An iterative numeric routine failed to converge."""


@dataclass(frozen=True)
class PoolingSpec:
    """Ordered partition of class indices into contiguous blocks."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        flat = [i for b in blocks for i in b]
        if any(not b for b in blocks):
            raise PoolingError("empty block")
        if flat != list(range(len(flat))):
            raise PoolingError(f"blocks must cover 0..k-1 contiguously in order, got {blocks}")

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    @classmethod
    def singletons(cls, k: int) -> "PoolingSpec":
        return cls(tuple((i,) for i in range(k)))

    def pool(self, values: Sequence[float]) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        if v.size != self.size:
            raise PoolingError(f"pooling covers {self.size} classes, got {v.size} values")
        return np.array([v[list(b)].sum() for b in self.blocks])

    def labels(self, names: Sequence[str]) -> list[list[str]]:
        return [[names[i] for i in b] for b in self.blocks]

    def __str__(self) -> str:
        parts = []
        for b in self.blocks:
            parts.append(str(b[0] + 1) if len(b) == 1 else f"{b[0] + 1}-{b[-1] + 1}")
        return ";".join(parts)


def parse_pooling(text: str, k: int) -> PoolingSpec:
    """Parse a 1-based block list such as ``1;2;3;4-7``."""
    blocks = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-"))
            else:
                lo = hi = int(part)
        except ValueError:
            raise PoolingError(f"bad pooling block {part!r}") from None
        if lo > hi:
            raise PoolingError(f"bad pooling block {part!r}")
        blocks.append(tuple(range(lo - 1, hi)))
    spec = PoolingSpec(tuple(blocks))
    if spec.size != k:
        raise PoolingError(f"pooling {text!r} covers {spec.size} classes, table has {k}")
    return spec


def auto_pool(expected: Sequence[float], min_expected: float = 5.0) -> PoolingSpec:
    """Pool adjacent classes so every block reaches ``min_expected``, keeping as many blocks as possible.

    Among partitions with the maximal block count, the one whose block end
    indices are lexicographically smallest (leftmost boundaries) is returned.
    """
    e = np.asarray(expected, dtype=float)
    k = e.size
    if k == 0:
        raise PoolingError("nothing to pool")
    if e.sum() < min_expected:
        raise PoolingError(f"total expected {e.sum():g} is below the minimum cell size {min_expected:g}")
    prefix = np.concatenate([[0.0], np.cumsum(e)])

    def block_sum(i, j):  # classes i..j inclusive
        return prefix[j + 1] - prefix[i]

    # best[i]: max number of feasible blocks covering classes i..k-1 (-1 if none)
    best = [-1] * (k + 1)
    best[k] = 0
    for i in range(k - 1, -1, -1):
        for j in range(i, k):
            if best[j + 1] >= 0 and block_sum(i, j) >= min_expected:
                best[i] = max(best[i], best[j + 1] + 1)

    blocks = []
    i = 0
    while i < k:
        for j in range(i, k):
            if best[j + 1] == best[i] - 1 and block_sum(i, j) >= min_expected:
                blocks.append(tuple(range(i, j + 1)))
                i = j + 1
                break
    return PoolingSpec(tuple(blocks))


def _lower_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by power series."""
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NumericalError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _upper_fraction(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by modified Lentz continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise NumericalError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a)."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _lower_series(a, x)))
    return min(1.0, max(0.0, _upper_fraction(a, x)))


def chi_square_pvalue(statistic: float, df: int) -> float:
    """P(chi2_df >= statistic)."""
    if df < 1:
        raise ValueError(f"df must be a positive integer, got {df}")
    if statistic < 0:
        raise ValueError(f"statistic must be non-negative, got {statistic}")
    return gammaincc(df / 2.0, statistic / 2.0)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float
    pooling: PoolingSpec
    observed: tuple[float, ...]  # pooled
    expected: tuple[float, ...]  # pooled

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


def chi_square_gof(
    observed: FrequencyTable | Sequence[float],
    expected: Sequence[float],
    pooling: Optional[PoolingSpec] = None,
) -> ChiSquareResult:
    """Pearson statistic ``sum (O - E)^2 / E`` over pooled blocks, df = blocks - 1."""
    obs = np.asarray(observed.counts if isinstance(observed, FrequencyTable) else observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if obs.shape != exp.shape:
        raise PoolingError(f"observed has {obs.size} classes, expected has {exp.size}")
    if pooling is None:
        pooling = PoolingSpec.singletons(obs.size)
    o, e = pooling.pool(obs), pooling.pool(exp)
    if np.any(e <= 0):
        raise PoolingError("every pooled expected count must be positive")
    df = len(pooling) - 1
    if df < 1:
        raise PoolingError("need at least two classes after pooling")
    stat = float(np.sum((o - e) ** 2 / e))
    return ChiSquareResult(stat, df, chi_square_pvalue(stat, df), pooling, tuple(o.tolist()), tuple(e.tolist()))
