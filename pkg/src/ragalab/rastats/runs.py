"""Median-based runs test for randomness of an arrival sequence."""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass
from typing import Sequence

Z_CRITICAL_5PCT = 1.96


class TiePolicy(str, enum.Enum):
    ASSIGN_L = "AssignL"
    ASSIGN_M = "AssignM"
    DROP = "Drop"


@dataclass(frozen=True)
class RunTestResult:
    n: int
    U: int
    E_U: float
    Var_U: float
    Z: float
    median: float | None = None
    labels: str = ""

    @property
    def significant(self) -> bool:
        return abs(self.Z) >= Z_CRITICAL_5PCT

    @classmethod
    def from_counts(cls, n: int, U: int, **extra) -> "RunTestResult":
        """E(U) = (n+2)/2, Var(U) = (n/4)(n-2)/(n-1), Z = (U - E)/sqrt(Var)."""
        if n < 2:
            raise ValueError(f"runs test needs n >= 2, got {n}")
        if not 1 <= U <= n:
            raise ValueError(f"run count must lie in [1, n], got U={U}, n={n}")
        e_u = (n + 2) / 2.0
        var_u = (n / 4.0) * ((n - 2) / (n - 1))
        # n == 2 gives Var = 0; U is then forced to 2, so Z is 0 by convention
        z = (U - e_u) / math.sqrt(var_u) if var_u > 0 else 0.0
        return cls(n, U, e_u, var_u, z, **extra)


def count_runs(labels: Sequence) -> int:
    if not labels:
        return 0
    return 1 + sum(1 for a, b in zip(labels, labels[1:]) if a != b)


def label_sequence(codes: Sequence[float], tie_policy: TiePolicy | str = TiePolicy.ASSIGN_L) -> tuple[str, float]:
    """L/M string relative to the median, and the median itself."""
    policy = TiePolicy(tie_policy)
    if not codes:
        raise ValueError("empty sequence")
    med = statistics.median(codes)
    out = []
    for c in codes:
        if c < med:
            out.append("L")
        elif c > med:
            out.append("M")
        elif policy is TiePolicy.ASSIGN_L:
            out.append("L")
        elif policy is TiePolicy.ASSIGN_M:
            out.append("M")
    return "".join(out), med


def run_test(codes: Sequence[float], tie_policy: TiePolicy | str = TiePolicy.ASSIGN_L) -> RunTestResult:
    """Runs test on observations in arrival order.

    Observations below the median are written L, above M; ties go to L, to M,
    or are dropped (which reduces n).
    """
    labels, med = label_sequence(codes, tie_policy)
    if len(labels) < 2:
        raise ValueError("sequence is degenerate after tie handling (fewer than 2 labels)")
    return RunTestResult.from_counts(len(labels), count_runs(labels), median=float(med), labels=labels)


def run_test_labels(labels: str) -> RunTestResult:
    """Runs test on an already-labelled L/M string."""
    if set(labels) - {"L", "M"}:
        raise ValueError("labels must consist of L and M")
    return RunTestResult.from_counts(len(labels), count_runs(labels), labels=labels)
