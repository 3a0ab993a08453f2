"""Campaign error statistics: RMSE, median, and rank-sum significance.

The two-sample test uses mid-ranks for ties, exact enumeration of rank
splits for small samples (n + m <= 12) and a tie-corrected normal
approximation otherwise. Scenarios whose error sample tests significantly
worse than the best scenario (smallest RMSE) are flagged.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

EXACT_LIMIT = 12
P_THRESHOLD = 0.01


def rmse(errors: Sequence[float]) -> float:
    if not errors:
        raise ValueError("empty sample")
    return math.sqrt(sum(e * e for e in errors) / len(errors))


def median(errors: Sequence[float]) -> float:
    if not errors:
        raise ValueError("empty sample")
    return float(statistics.median(errors))


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float], method: str = "auto") -> float:
    """Two-sided rank-sum p-value.

    method "auto" enumerates all C(n+m, n) rank splits when
    n + m <= EXACT_LIMIT and falls back to the tie-corrected normal
    approximation otherwise; "exact" and "normal" force one route.
    """
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    n, m = len(a), len(b)
    total = n + m
    ranks = _midranks(list(a) + list(b))
    w = sum(ranks[:n])
    if method == "exact" or (method == "auto" and total <= EXACT_LIMIT):
        count_le = count_ge = n_splits = 0
        eps = 1e-9
        for combo in combinations(range(total), n):
            s = sum(ranks[i] for i in combo)
            n_splits += 1
            if s <= w + eps:
                count_le += 1
            if s >= w - eps:
                count_ge += 1
        return min(1.0, 2.0 * min(count_le, count_ge) / n_splits)
    mu = n * (total + 1) / 2.0
    tie_term = 0.0
    seen = sorted(ranks)
    i = 0
    while i < len(seen):
        j = i
        while j + 1 < len(seen) and seen[j + 1] == seen[i]:
            j += 1
        t = j - i + 1
        tie_term += t ** 3 - t
        i = j + 1
    var = n * m / 12.0 * ((total + 1) - tie_term / (total * (total - 1)))
    if var <= 0:
        return 1.0  # every observation tied
    z = max(abs(w - mu) - 0.5, 0.0) / math.sqrt(var)  # continuity-corrected
    return math.erfc(z / math.sqrt(2.0))


@dataclass
class ScenarioErrors:
    scenario: str
    errors: list[float]
    rmse: float
    median: float
    significantly_worse: bool = False
    p_value: float = 1.0


@dataclass
class ErrorReport:
    rows: list[ScenarioErrors] = field(default_factory=list)

    def best(self) -> ScenarioErrors:
        return min(self.rows, key=lambda r: r.rmse)


def build_report(error_lists: dict[str, list[float]]) -> ErrorReport:
    rows = [
        ScenarioErrors(scenario=s, errors=list(errs), rmse=rmse(errs), median=median(errs))
        for s, errs in error_lists.items()
    ]
    return ErrorReport(rows)


def mark_significance(report: ErrorReport, threshold: float = P_THRESHOLD) -> ErrorReport:
    """Flag every scenario whose errors rank significantly above the best row's."""
    if len(report.rows) < 2:
        raise ValueError("need at least two scenarios to compare")
    best = report.best()
    for row in report.rows:
        if row is best:
            row.significantly_worse = False
            row.p_value = 1.0
            continue
        row.p_value = wilcoxon_rank_sum(row.errors, best.errors)
        row.significantly_worse = row.p_value < threshold
    return report


def render_table(report: ErrorReport) -> str:
    """Human-readable error table with a trailing marker on flagged rows."""
    n_ue = max(len(r.errors) for r in report.rows)
    header = ["Scenario"] + [f"UE{i + 1}" for i in range(n_ue)] + ["RMSE", "Median"]
    lines = ["  ".join(f"{h:>8}" for h in header)]
    for row in report.rows:
        cells = [f"{row.scenario:>8}"]
        cells += [f"{e:8.2f}" for e in row.errors]
        cells += ["".rjust(8)] * (n_ue - len(row.errors))
        mark = " ↓" if row.significantly_worse else ""
        cells.append(f"{row.rmse:8.2f}{mark}")
        cells.append(f"{row.median:8.2f}")
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"
