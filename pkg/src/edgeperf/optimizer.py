"""Exhaustive solvers for the two latency/precision trade-off problems.

* P1: maximise precision subject to ``t_total <= 1000 / target_fps``.
  Ties go to lower latency, then smaller n, then smaller q.
* P2: minimise ``t_total`` subject to ``precision >= f_min``.
  Ties go to higher precision, then smaller n, then smaller q.

The decision grid has at most 16 x 91 points, so every point is evaluated
and the result is the exact optimum. Points are flattened n-major
(ascending n, then ascending q), so "first index wins" implements the
n/q part of both tie-breaks.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .measurements import N_MAX, N_MIN, N_STEP, Q_MAX, Q_MIN, check_encoding_rate, check_nn_size
from .models import SystemModel, evaluate_arrays

SWEEP_COLUMNS = ("threshold", "feasible", "n", "q", "precision", "t_total_ms", "fps")
PROBLEMS = ("p1", "p2")


@dataclass(frozen=True)
class DecisionDomain:
    n_values: tuple[int, ...] = tuple(range(N_MIN, N_MAX + 1, N_STEP))
    q_values: tuple[int, ...] = tuple(range(Q_MIN, Q_MAX + 1))

    def __post_init__(self):
        n_values = tuple(sorted(set(self.n_values)))
        q_values = tuple(sorted(set(self.q_values)))
        if not n_values or not q_values:
            raise ValueError("decision domain must be non-empty")
        for n in n_values:
            check_nn_size(n)
        for q in q_values:
            check_encoding_rate(q)
        object.__setattr__(self, "n_values", n_values)
        object.__setattr__(self, "q_values", q_values)

    @property
    def size(self) -> int:
        return len(self.n_values) * len(self.q_values)

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        """``(n, q)`` arrays of every point, n-major."""
        nn, qq = np.meshgrid(self.n_values, self.q_values, indexing="ij")
        return nn.ravel(), qq.ravel()


@dataclass(frozen=True)
class SolveResult:
    feasible: bool
    n: int | None = None
    q: int | None = None
    precision: float | None = None
    t_total_ms: float | None = None
    fps: float | None = None


INFEASIBLE = SolveResult(False)


@dataclass(frozen=True)
class ParetoPoint:
    threshold: float
    result: SolveResult


@dataclass(frozen=True)
class _Evaluated:
    n: np.ndarray
    q: np.ndarray
    total: np.ndarray
    precision: np.ndarray

    def result(self, idx: int) -> SolveResult:
        if idx < 0:
            return INFEASIBLE
        total = float(self.total[idx])
        return SolveResult(
            feasible=True,
            n=int(self.n[idx]),
            q=int(self.q[idx]),
            precision=float(self.precision[idx]),
            t_total_ms=total,
            fps=1000.0 / total,
        )


def _evaluate(sm: SystemModel, domain: DecisionDomain) -> _Evaluated:
    n, q = domain.flat()
    total, precision = evaluate_arrays(sm, n, q)
    return _Evaluated(n, q, total, precision)


def fps_to_budget(target_fps: float) -> float:
    if not (math.isfinite(target_fps) and target_fps > 0):
        raise ValueError(f"target fps must be positive and finite, got {target_fps!r}")
    return 1000.0 / target_fps


def _check_floor(f_min: float) -> float:
    if math.isnan(f_min):
        raise ValueError("f_min must not be NaN")
    return float(f_min)


def _check_increasing(values: Sequence[float], what: str) -> list[float]:
    values = [float(v) for v in values]
    for a, b in zip(values, values[1:]):
        if not b > a:
            raise ValueError(f"{what} must be strictly increasing; got {a!r} then {b!r}")
    return values


def solve_p1(sm: SystemModel, domain: DecisionDomain | None = None, target_fps: float = 30.0) -> SolveResult:
    ev = _evaluate(sm, domain or DecisionDomain())
    idx = kernels.select_p1(ev.total, ev.precision, [fps_to_budget(target_fps)])
    return ev.result(int(idx[0]))


def solve_p2(sm: SystemModel, domain: DecisionDomain | None = None, f_min: float = 0.0) -> SolveResult:
    ev = _evaluate(sm, domain or DecisionDomain())
    idx = kernels.select_p2(ev.total, ev.precision, [_check_floor(f_min)])
    return ev.result(int(idx[0]))


def pareto_sweep_p1(sm: SystemModel, domain: DecisionDomain | None, fps_values: Sequence[float]) -> list[ParetoPoint]:
    fps_values = _check_increasing(fps_values, "fps thresholds")
    ev = _evaluate(sm, domain or DecisionDomain())
    idx = kernels.select_p1(ev.total, ev.precision, [fps_to_budget(f) for f in fps_values])
    return [ParetoPoint(f, ev.result(int(i))) for f, i in zip(fps_values, idx)]


def pareto_sweep_p2(sm: SystemModel, domain: DecisionDomain | None, f_values: Sequence[float]) -> list[ParetoPoint]:
    f_values = _check_increasing(f_values, "precision thresholds")
    ev = _evaluate(sm, domain or DecisionDomain())
    idx = kernels.select_p2(ev.total, ev.precision, [_check_floor(f) for f in f_values])
    return [ParetoPoint(f, ev.result(int(i))) for f, i in zip(f_values, idx)]


def pareto_sweep(sm: SystemModel, domain: DecisionDomain | None, problem: str, thresholds: Sequence[float]):
    if problem == "p1":
        return pareto_sweep_p1(sm, domain, thresholds)
    if problem == "p2":
        return pareto_sweep_p2(sm, domain, thresholds)
    raise ValueError(f"problem must be one of {PROBLEMS}, got {problem!r}")


def feasibility_frontier(sm: SystemModel, domain: DecisionDomain | None, problem: str) -> float:
    """Largest threshold that still has a feasible point.

    For P1 that is the frame rate of the fastest configuration; for P2 the
    best attainable precision.
    """
    ev = _evaluate(sm, domain or DecisionDomain())
    if problem == "p1":
        return 1000.0 / float(ev.total.min())
    if problem == "p2":
        return float(ev.precision.max())
    raise ValueError(f"problem must be one of {PROBLEMS}, got {problem!r}")


# -- profile comparison ------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    threshold: float
    optimized: SolveResult
    vanilla: SolveResult
    absolute_gap: float | None
    relative_gap: float | None


@dataclass(frozen=True)
class ComparisonReport:
    problem: str
    optimized_name: str
    vanilla_name: str
    rows: list[ComparisonRow] = field(default_factory=list)
    optimized_frontier: float = 0.0
    vanilla_frontier: float = 0.0
    optimized_sweep_frontier: float | None = None
    vanilla_sweep_frontier: float | None = None

    @property
    def metric(self) -> str:
        return "precision" if self.problem == "p1" else "fps"

    def row_at(self, threshold: float) -> ComparisonRow:
        for row in self.rows:
            if row.threshold == threshold:
                return row
        raise KeyError(threshold)


def _gap(problem: str, opt: SolveResult, van: SolveResult) -> tuple[float | None, float | None]:
    if not (opt.feasible and van.feasible):
        return None, None
    a, b = (opt.precision, van.precision) if problem == "p1" else (opt.fps, van.fps)
    diff = a - b
    if diff == 0:
        return 0.0, 0.0
    return diff, (diff / b if b != 0 else math.copysign(math.inf, diff))


def _sweep_frontier(points: list[ParetoPoint]) -> float | None:
    feasible = [p.threshold for p in points if p.result.feasible]
    return max(feasible) if feasible else None


def compare_profiles(
    sm_optimized: SystemModel,
    sm_vanilla: SystemModel,
    domain: DecisionDomain | None,
    problem: str,
    thresholds: Sequence[float],
) -> ComparisonReport:
    """Run the same sweep on both models and report per-threshold gaps.

    Gaps are optimized minus vanilla (precision for P1, fps for P2); the
    relative gap divides by the vanilla value. Gaps are ``None`` unless both
    profiles are feasible at that threshold.
    """
    domain = domain or DecisionDomain()
    opt = pareto_sweep(sm_optimized, domain, problem, thresholds)
    van = pareto_sweep(sm_vanilla, domain, problem, thresholds)
    rows = []
    for po, pv in zip(opt, van):
        absolute, relative = _gap(problem, po.result, pv.result)
        rows.append(ComparisonRow(po.threshold, po.result, pv.result, absolute, relative))
    return ComparisonReport(
        problem=problem,
        optimized_name=sm_optimized.profile_name,
        vanilla_name=sm_vanilla.profile_name,
        rows=rows,
        optimized_frontier=feasibility_frontier(sm_optimized, domain, problem),
        vanilla_frontier=feasibility_frontier(sm_vanilla, domain, problem),
        optimized_sweep_frontier=_sweep_frontier(opt),
        vanilla_sweep_frontier=_sweep_frontier(van),
    )


# -- CSV export --------------------------------------------------------------

def fmt9(x: float | None) -> str:
    return "" if x is None else format(float(x), ".9g")


def result_row(threshold: float, r: SolveResult) -> list[str]:
    if not r.feasible:
        return [fmt9(threshold), "false", "", "", "", "", ""]
    return [fmt9(threshold), "true", str(r.n), str(r.q), fmt9(r.precision), fmt9(r.t_total_ms), fmt9(r.fps)]


def _writer(header: Sequence[str]) -> tuple[io.StringIO, csv.writer]:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    return buf, csv.writer(buf, lineterminator="\n")


def dumps_sweep(points: Sequence[ParetoPoint], header: Sequence[str] = ()) -> str:
    buf, w = _writer(header)
    w.writerow(SWEEP_COLUMNS)
    for p in points:
        w.writerow(result_row(p.threshold, p.result))
    return buf.getvalue()


def dumps_comparison(report: ComparisonReport, header: Sequence[str] = ()) -> str:
    """Two rows per threshold (optimized first) with a leading ``profile`` column."""
    buf, w = _writer(header)
    w.writerow(("profile", *SWEEP_COLUMNS))
    for row in report.rows:
        w.writerow([report.optimized_name, *result_row(row.threshold, row.optimized)])
        w.writerow([report.vanilla_name, *result_row(row.threshold, row.vanilla)])
    return buf.getvalue()


def loads_sweep(text: str) -> list[dict[str, str]]:
    """Parse a sweep or comparison CSV into row dicts, skipping ``#`` lines."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return list(csv.DictReader(lines))


__all__ = [
    "ComparisonReport",
    "ComparisonRow",
    "DecisionDomain",
    "ParetoPoint",
    "SWEEP_COLUMNS",
    "SolveResult",
    "compare_profiles",
    "dumps_comparison",
    "dumps_sweep",
    "feasibility_frontier",
    "fps_to_budget",
    "loads_sweep",
    "pareto_sweep",
    "pareto_sweep_p1",
    "pareto_sweep_p2",
    "solve_p1",
    "solve_p2",
]
