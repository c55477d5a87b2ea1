"""Multinomial model of note arrivals: pmf and first/second moments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class MultinomialModel:
    n: int
    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        object.__setattr__(self, "p", p)
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not p:
            raise ValueError("empty probability vector")
        if any(not (0.0 <= v <= 1.0) for v in p):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(sum(p) - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {sum(p)!r}, not 1")

    @property
    def k(self) -> int:
        return len(self.p)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "MultinomialModel":
        """Plug-in model: n = total, p = relative frequencies."""
        total = sum(counts)
        if total <= 0:
            raise ValueError("counts must have a positive total")
        return cls(total, tuple(c / total for c in counts))


def multinomial_logpmf(model: MultinomialModel, x: Sequence[int]) -> float:
    if len(x) != model.k:
        raise ValueError(f"x has {len(x)} entries, model has {model.k} outcomes")
    if any(int(v) != v or v < 0 for v in x):
        raise ValueError("x entries must be non-negative integers")
    if sum(x) != model.n:
        raise ValueError(f"x sums to {sum(x)}, expected n = {model.n}")
    out = math.lgamma(model.n + 1)
    for xi, pi in zip(x, model.p):
        out -= math.lgamma(xi + 1)
        if xi:
            if pi == 0.0:
                return -math.inf
            out += xi * math.log(pi)
    return out


def multinomial_pmf(model: MultinomialModel, x: Sequence[int]) -> float:
    """n! / (x_1! ... x_k!) * p_1^x_1 ... p_k^x_k, evaluated in log space."""
    return math.exp(multinomial_logpmf(model, x))


@dataclass(frozen=True)
class MultinomialMoments:
    mean: np.ndarray
    var: np.ndarray
    cov: np.ndarray
    corr: np.ndarray  # NaN where an outcome has zero variance


def multinomial_moments(model: MultinomialModel) -> MultinomialMoments:
    """E = n p_i, Var = n p_i (1 - p_i), Cov = -n p_i p_j, and the implied correlations."""
    p = np.asarray(model.p)
    n = float(model.n)
    mean = n * p
    cov = -n * np.outer(p, p)
    var = n * p * (1.0 - p)
    np.fill_diagonal(cov, var)
    sd = np.sqrt(var)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / np.outer(sd, sd)
    undefined = sd == 0
    corr[undefined, :] = np.nan
    corr[:, undefined] = np.nan
    np.fill_diagonal(corr, np.where(undefined, np.nan, 1.0))
    return MultinomialMoments(mean, var, cov, corr)
