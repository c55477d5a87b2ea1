"""Least-squares polynomial fit via the normal equations on a centered, scaled abscissa."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

_SS_TOL = 1e-12


@dataclass(frozen=True)
class PolyFit:
    degree: int
    coefficients: tuple[float, ...]  # ascending powers of x
    r2: float
    ss_res: float
    center: float
    scale: float
    scaled_coefficients: tuple[float, ...]  # ascending powers of (x - center) / scale

    def __call__(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.scale
        return np.polynomial.polynomial.polyval(u, self.scaled_coefficients)


def polyfit(xs: Sequence[float], ys: Sequence[float], degree: int) -> PolyFit:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d and of equal length")
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if np.unique(x).size < degree + 1:
        raise ValueError(f"degree {degree} needs at least {degree + 1} distinct x values")

    center = float(x.mean())
    spread = float(np.max(np.abs(x - center)))
    scale = spread if spread > 0 else 1.0
    u = (x - center) / scale
    V = np.vander(u, degree + 1, increasing=True)
    try:
        c = np.linalg.solve(V.T @ V, V.T @ y)
    except np.linalg.LinAlgError:
        raise ValueError("normal equations are singular") from None

    # expand sum_j c_j ((x - m)/s)^j into ascending powers of x
    coef = np.zeros(degree + 1)
    for j, cj in enumerate(c):
        for i in range(j + 1):
            coef[i] += cj * comb(j, i) * (-center) ** (j - i) / scale**j

    resid = y - V @ c
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        r2 = 1.0 if ss_res <= _SS_TOL else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return PolyFit(degree, tuple(coef.tolist()), r2, ss_res, center, scale, tuple(c.tolist()))
