"""Energy-region boundaries: profile sweeps, convexity and inclusion checks.

Energies are reported as average powers E_k / T (watts) so that regions for
different charging durations can be compared directly.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .model import EnergyProfile, SystemParams, Trajectory, harvested_power
from .p2 import SolverDiagnostic, fair_hover_position, solve_p2
from .planner import solve_p1

__all__ = [
    "Regime",
    "RegionPoint",
    "RegionBoundary",
    "ConvexityReport",
    "InclusionReport",
    "sweep",
    "check_convexity",
    "check_inclusion",
    "pointwise_gap",
    "upper_envelope",
    "best_static_hover",
    "solve_point",
    "static_profile_sweep",
    "resolve_threads",
    "DEFAULT_N_ALPHA",
    "DEFAULT_N_STATIC",
]

DEFAULT_N_ALPHA = 101
DEFAULT_N_STATIC = 401
SLACK_W = 1e-9
THREADS_ENV = "WPT_TRAJOPT_THREADS"


class Regime(str, enum.Enum):
    P2 = "p2"
    P1 = "p1"
    STATIC = "static"


@dataclass(frozen=True)
class RegionPoint:
    alpha1: float
    e1_avg: float
    e2_avg: float
    solver: Regime
    trajectory: Optional[Trajectory] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def trajectory_json(self) -> str:
        if self.trajectory is None:
            return ""
        return json.dumps(self.trajectory.to_dict(), separators=(",", ":"))


@dataclass(frozen=True)
class RegionBoundary:
    points: tuple[RegionPoint, ...]
    params: SystemParams
    solver: Regime
    failures: tuple[RegionPoint, ...] = field(default=())

    def e1(self) -> np.ndarray:
        return np.array([p.e1_avg for p in self.points])

    def e2(self) -> np.ndarray:
        return np.array([p.e2_avg for p in self.points])

    def mirrored(self) -> "RegionBoundary":
        pts = tuple(
            RegionPoint(1.0 - p.alpha1, p.e2_avg, p.e1_avg, p.solver,
                        p.trajectory.mirrored() if p.trajectory else None, p.error)
            for p in reversed(self.points)
        )
        return RegionBoundary(pts, self.params, self.solver, self.failures)

    def check_monotone(self, tol: float = SLACK_W) -> bool:
        e1, e2 = self.e1(), self.e2()
        return bool(np.all(np.diff(e1) >= -tol) and np.all(np.diff(e2) <= tol))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha1", "e1_avg_W", "e2_avg_W", "solver", "trajectory_json"])
        for p in sorted(self.points + self.failures, key=lambda q: q.alpha1):
            if p.ok:
                w.writerow([f"{p.alpha1:.17g}", f"{p.e1_avg:.17g}", f"{p.e2_avg:.17g}",
                            p.solver.value, p.trajectory_json()])
            else:
                w.writerow([f"{p.alpha1:.17g}", "nan", "nan", p.solver.value,
                            json.dumps({"error": p.error})])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "solver": self.solver.value,
            "params": self.params.to_dict(),
            "points": [
                {
                    "alpha1": p.alpha1,
                    "e1_avg_W": p.e1_avg,
                    "e2_avg_W": p.e2_avg,
                    "trajectory": p.trajectory.to_dict() if p.trajectory else None,
                }
                for p in self.points
            ],
            "failures": [{"alpha1": p.alpha1, "error": p.error} for p in self.failures],
        }


def resolve_threads(requested: Optional[int] = None) -> int:
    """Worker count: explicit value, else $WPT_TRAJOPT_THREADS, else 1. 0 means all cores."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        requested = int(raw) if raw else 1
    if requested < 0:
        raise ValueError(f"thread count must be >= 0, got {requested}")
    if requested == 0:
        return os.cpu_count() or 1
    return requested


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sweep(params: SystemParams, solver: Regime | str, n_alpha: int = DEFAULT_N_ALPHA,
          n_static: int = DEFAULT_N_STATIC, threads: Optional[int] = None) -> RegionBoundary:
    """Trace a region boundary.

    ``p2`` and ``p1`` solve at alpha1 = 0, 1/(n-1), ..., 1. ``static`` sweeps
    the hover position over [-D/2, D/2] instead and reports the induced
    pairs; its alpha1 is the induced share E1 / (E1 + E2).
    """
    solver = Regime(solver)
    if n_alpha < 3:
        raise ValueError("n_alpha must be >= 3")
    T = params.T

    if solver is Regime.STATIC:
        if n_static < 3:
            raise ValueError("n_static must be >= 3")
        xs = np.linspace(params.D / 2, -params.D / 2, n_static)
        pts = []
        for x in xs:
            q1 = float(harvested_power(params, x, 1))
            q2 = float(harvested_power(params, x, 2))
            pts.append(RegionPoint(q1 / (q1 + q2), q1, q2, solver, Trajectory.hover(float(x), T)))
        return RegionBoundary(tuple(pts), params, solver)

    solve = solve_p2 if solver is Regime.P2 else solve_p1

    def one(a1: float) -> RegionPoint:
        try:
            sol = solve(params, EnergyProfile.from_alpha1(a1))
        except SolverDiagnostic as exc:
            return RegionPoint(a1, float("nan"), float("nan"), solver, None, str(exc))
        e = sol.energies
        return RegionPoint(a1, e.e1 / T, e.e2 / T, solver, sol.trajectory)

    alphas = [float(a) for a in np.linspace(0.0, 1.0, n_alpha)]
    results = _map(one, alphas, resolve_threads(threads))
    ok = tuple(p for p in results if p.ok)
    bad = tuple(p for p in results if not p.ok)
    return RegionBoundary(ok, params, solver, bad)


@dataclass(frozen=True)
class ConvexityReport:
    concave: bool
    max_violation: float
    n_points: int
    tol: float


def _dedupe(e1: np.ndarray, e2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(e1, kind="stable")
    e1, e2 = e1[order], e2[order]
    scale = max(float(np.max(np.abs(e1))), 1e-300)
    keep = [0]
    for i in range(1, len(e1)):
        if e1[i] - e1[keep[-1]] > 1e-12 * scale:
            keep.append(i)
        elif e2[i] > e2[keep[-1]]:
            keep[-1] = i
    return e1[keep], e2[keep]


def check_convexity(boundary: RegionBoundary, tol: float = 1e-9) -> ConvexityReport:
    """Is e2 a concave function of e1 along the boundary?

    Uses the chord slopes s_i between consecutive distinct points; the
    boundary is concave when every increment s_{i+1} - s_i is <= ``tol``.
    The reported violation is the largest increment (dimensionless).
    """
    if len(boundary.points) < 3:
        raise ValueError("need at least 3 points")
    e1, e2 = _dedupe(boundary.e1(), boundary.e2())
    if len(e1) < 3:
        return ConvexityReport(True, 0.0, len(e1), tol)
    slopes = np.diff(e2) / np.diff(e1)
    worst = float(np.max(np.diff(slopes)))
    return ConvexityReport(worst <= tol, max(worst, 0.0), len(e1), tol)


def upper_envelope(e1: np.ndarray, e2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Upper concave envelope of the down-closure of the given points."""
    top = float(np.max(e2))
    right = float(np.max(e1))
    pts = sorted(set(zip(e1.tolist(), e2.tolist())) | {(0.0, top), (right, 0.0)})
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (ax, ay), (bx, by) = hull[-2], hull[-1]
            # Drop b if it lies on or below the chord a -> p.
            if (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    hx = np.array([h[0] for h in hull])
    hy = np.array([h[1] for h in hull])
    # Only the non-increasing part bounds the comprehensive region.
    k = int(np.argmax(hy))
    hx, hy = hx[k:], hy[k:]
    if hx[0] > 0:
        hx = np.concatenate([[0.0], hx])
        hy = np.concatenate([[hy[0]], hy])
    return hx, hy


@dataclass(frozen=True)
class InclusionReport:
    included: bool
    max_deficit: float
    violations: tuple[tuple[float, float, float, float], ...]
    slack: float


def best_static_hover(params: SystemParams, profile: EnergyProfile) -> float:
    """Single hover position maximizing min_k E_k / alpha_k.

    The fair hover meets the split exactly when it exists. Otherwise one
    constraint is slack everywhere and the better endpoint wins.
    """
    x = fair_hover_position(params, profile)
    if x is not None:
        return x

    def score(x: float) -> float:
        return profile.objective(harvested_power(params, x, 1), harvested_power(params, x, 2))

    return max((params.x1, params.x2), key=score)


def solve_point(params: SystemParams, regime: Regime | str, alpha1: float) -> Optional[tuple[float, float]]:
    """Average-power pair of ``regime`` at one energy profile, or None on a solver diagnostic."""
    regime = Regime(regime)
    profile = EnergyProfile.from_alpha1(min(max(alpha1, 0.0), 1.0))
    T = params.T
    if regime is Regime.STATIC:
        x = best_static_hover(params, profile)
        return float(harvested_power(params, x, 1)), float(harvested_power(params, x, 2))
    solve = solve_p2 if regime is Regime.P2 else solve_p1
    try:
        e = solve(params, profile).energies
    except SolverDiagnostic:
        return None
    return e.e1 / T, e.e2 / T


def static_profile_sweep(params: SystemParams, n_alpha: int = DEFAULT_N_ALPHA) -> RegionBoundary:
    """Best single hover per profile on the same alpha grid as the p1/p2 sweeps."""
    pts = []
    for a1 in np.linspace(0.0, 1.0, n_alpha):
        x = best_static_hover(params, EnergyProfile.from_alpha1(float(a1)))
        pts.append(RegionPoint(float(a1), float(harvested_power(params, x, 1)),
                               float(harvested_power(params, x, 2)), Regime.STATIC,
                               Trajectory.hover(x, params.T)))
    return RegionBoundary(tuple(pts), params, Regime.STATIC)


def check_inclusion(inner: RegionBoundary, outer: RegionBoundary, slack: float = SLACK_W,
                    refine: bool = True) -> InclusionReport:
    """Is every inner point dominated by the outer region's concave envelope?

    A sampled concave boundary lies above its own chords, so an inner point
    sitting on the true outer curve between two samples can look uncovered.
    With ``refine`` such a point is re-tested after adding the outer regime's
    own solution at the inner point's energy share E1 / (E1 + E2).

    Violations are reported as (alpha1, e1_avg, e2_avg, deficit) with the
    deficit in watts.
    """
    e1o, e2o = outer.e1(), outer.e2()
    hx, hy = upper_envelope(e1o, e2o)

    def deficit(p: RegionPoint, hx: np.ndarray, hy: np.ndarray) -> float:
        right = float(hx[-1])
        if p.e1_avg > right:
            return p.e1_avg - right
        return p.e2_avg - float(np.interp(p.e1_avg, hx, hy))

    violations = []
    worst = 0.0
    for p in inner.points:
        d = deficit(p, hx, hy)
        if d > slack and refine:
            extra = solve_point(outer.params, outer.solver, p.e1_avg / (p.e1_avg + p.e2_avg))
            if extra is not None:
                rx, ry = upper_envelope(np.append(e1o, extra[0]), np.append(e2o, extra[1]))
                d = deficit(p, rx, ry)
        worst = max(worst, d)
        if d > slack:
            violations.append((p.alpha1, p.e1_avg, p.e2_avg, d))
    return InclusionReport(not violations, worst, tuple(violations), slack)


def pointwise_gap(a: RegionBoundary, b: RegionBoundary) -> float:
    """Largest |difference| in average power between points with the same alpha1."""
    bmap = {round(p.alpha1, 12): p for p in b.points}
    worst = 0.0
    for p in a.points:
        q = bmap.get(round(p.alpha1, 12))
        if q is None:
            raise ValueError(f"alpha1={p.alpha1} missing from the second boundary")
        worst = max(worst, abs(p.e1_avg - q.e1_avg), abs(p.e2_avg - q.e2_avg))
    return worst
