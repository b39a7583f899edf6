"""Speed-constrained trajectory design (hover-fly-hover).

Three cases:

* The unconstrained optimum is a single hover (separation below threshold,
  or unequal optimal dual weights). A hover never violates the speed limit,
  so it is optimal here too.
* Equal split above threshold: hover at -x, fly to +x at full speed, hover
  at +x, with x = min(xi, V*T/2). This is optimal.
* Any other split in the time-sharing regime: search hover positions
  x1 <= x2 in [-xi, xi]; the first hover time follows from the fairness
  condition. This is a heuristic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .model import (
    EnergyPair,
    EnergyProfile,
    Fly,
    Hover,
    SystemParams,
    Trajectory,
    harvested_power,
    max_speed_feasible,
)
from .p2 import P2Solution, SolverDiagnostic, fair_hover_position, solve_p2
from .psi import symmetric_optimum

__all__ = [
    "Exactness",
    "HoverFlyHoverPlan",
    "P1Solution",
    "PlannerError",
    "plan_energy",
    "solve_p1",
    "GRID_POINTS",
    "REFINE_POINTS",
]

GRID_POINTS = 201
REFINE_POINTS = 11


class Exactness(str, enum.Enum):
    OPTIMAL = "optimal"
    HEURISTIC = "heuristic"


class PlannerError(SolverDiagnostic):
    """No fair hover-fly-hover plan was found; ``candidate`` is the closest miss."""


@dataclass(frozen=True)
class HoverFlyHoverPlan:
    x_hat1: float
    x_hat2: float
    t_hat: float

    def flight_time(self, params: SystemParams) -> float:
        if self.x_hat2 == self.x_hat1:
            return 0.0
        return (self.x_hat2 - self.x_hat1) / params.V

    def last_hover(self, params: SystemParams) -> float:
        return params.T - self.t_hat - self.flight_time(params)

    def check(self, params: SystemParams, xi: Optional[float] = None) -> None:
        tol = 1e-9 * max(params.T, 1.0)
        if self.x_hat2 < self.x_hat1:
            raise ValueError("x_hat2 must not be left of x_hat1")
        if self.t_hat < -tol or self.last_hover(params) < -tol:
            raise ValueError(f"plan does not fit in T={params.T}: {self}")
        if xi is not None:
            slack = 1e-9 * max(params.D, 1.0)
            if not (-xi - slack <= self.x_hat1 and self.x_hat2 <= xi + slack):
                raise ValueError(f"plan leaves [-xi, xi] = [{-xi}, {xi}]: {self}")

    def to_trajectory(self, params: SystemParams) -> Trajectory:
        segs = [Hover(self.x_hat1, max(self.t_hat, 0.0))]
        if self.x_hat2 > self.x_hat1:
            segs.append(Fly(self.x_hat1, self.x_hat2, params.V))
        segs.append(Hover(self.x_hat2, max(self.last_hover(params), 0.0)))
        segs = [s for s in segs if s.duration > 0]
        if not segs:
            segs = [Hover(self.x_hat1, 0.0)]
        return Trajectory(segs)

    def to_dict(self) -> dict[str, float]:
        return {"x_hat1": self.x_hat1, "x_hat2": self.x_hat2, "t_hat": self.t_hat}


@dataclass(frozen=True)
class P1Solution:
    trajectory: Trajectory
    energies: EnergyPair
    objective: float
    exactness: Exactness
    plan: Optional[HoverFlyHoverPlan] = None
    p2: Optional[P2Solution] = None


def plan_energy(params: SystemParams, plan: HoverFlyHoverPlan, k: int) -> float:
    """Energy (J) delivered to ER ``k`` by a hover-fly-hover plan."""
    xk = params.er_position(k)
    H = params.H
    q_first = harvested_power(params, plan.x_hat1, k)
    q_last = harvested_power(params, plan.x_hat2, k)
    hover = plan.t_hat * q_first + plan.last_hover(params) * q_last
    if plan.x_hat2 == plan.x_hat1:
        return hover
    flight = params.gain / (params.V * H) * (
        math.atan((plan.x_hat2 - xk) / H) - math.atan((plan.x_hat1 - xk) / H)
    )
    return hover + flight


def _from_p2(sol: P2Solution, profile: EnergyProfile) -> P1Solution:
    return P1Solution(sol.trajectory, sol.energies, sol.objective, Exactness.OPTIMAL, None, sol)


def _symmetric_plan(params: SystemParams, xi: float) -> HoverFlyHoverPlan:
    V, T = params.V, params.T
    if V == 0:
        return HoverFlyHoverPlan(0.0, 0.0, T)
    x = min(xi, V * T / 2)
    return HoverFlyHoverPlan(-x, x, max(T / 2 - x / V, 0.0))


def _search(params: SystemParams, profile: EnergyProfile, xi: float):
    """Coarse grid over [-xi, xi]^2 plus one local refinement pass."""
    gain, H, T, V = params.gain, params.H, params.T, params.V
    args = (gain, H, params.x1, params.x2, T, V, profile.alpha1, profile.alpha2)
    grid = np.linspace(-xi, xi, GRID_POINTS)
    i, j, t, total = kernels.hfh_search(grid, grid, *args)
    best = None if i < 0 else (float(grid[i]), float(grid[j]), t, total)

    # A single hover with the exact energy split always exists in this regime;
    # the grid diagonal almost never hits it exactly.
    xs = fair_hover_position(params, profile)
    if xs is not None and -xi <= xs <= xi:
        static = (xs, xs, 0.0, T * (harvested_power(params, xs, 1) + harvested_power(params, xs, 2)))
        if best is None or static[3] > best[3]:
            best = static
    if best is None:
        return None

    h = grid[1] - grid[0]
    offsets = np.linspace(-h / 2, h / 2, REFINE_POINTS)
    r1 = np.clip(best[0] + offsets, -xi, xi)
    r2 = np.clip(best[1] + offsets, -xi, xi)
    ri, rj, rt, rtotal = kernels.hfh_search(r1, r2, *args)
    if ri >= 0 and rtotal > best[3]:
        best = (float(r1[ri]), float(r2[rj]), rt, rtotal)
    return best


def _closest_miss(params: SystemParams, profile: EnergyProfile, xi: float) -> HoverFlyHoverPlan:
    """Plan on the coarse grid whose energy split is nearest to the profile."""
    grid = np.linspace(-xi, xi, 41)
    best, best_err = None, math.inf
    for a in grid:
        for b in grid[grid >= a]:
            plan = HoverFlyHoverPlan(float(a), float(b), 0.0)
            tf = plan.flight_time(params)
            if tf > params.T:
                continue
            for t in (0.0, params.T - tf):
                cand = HoverFlyHoverPlan(float(a), float(b), t)
                e1, e2 = plan_energy(params, cand, 1), plan_energy(params, cand, 2)
                err = abs(e1 / (e1 + e2) - profile.alpha1)
                if err < best_err:
                    best, best_err = cand, err
    return best


def solve_p1(params: SystemParams, profile: EnergyProfile) -> P1Solution:
    """Best found speed-feasible trajectory for the energy profile."""
    p2 = solve_p2(params, profile)
    if not params.speed_bounded:
        return _from_p2(p2, profile)
    sym = symmetric_optimum(params)
    # A single-position optimum is speed-feasible and hence optimal.
    if sym.xi is None or not p2.time_sharing or max_speed_feasible(params, p2.trajectory):
        return _from_p2(p2, profile)

    xi = sym.xi
    if profile.is_equal_split:
        plan = _symmetric_plan(params, xi)
        exactness = Exactness.OPTIMAL
    else:
        if params.V == 0:
            best = None
            xs = fair_hover_position(params, profile)
            if xs is not None:
                best = (xs, xs, 0.0, 0.0)
        else:
            best = _search(params, profile, xi)
        if best is None:
            raise PlannerError(
                f"no fair hover-fly-hover plan for alpha=({profile.alpha1}, {profile.alpha2})",
                candidate=_closest_miss(params, profile, xi),
            )
        plan = HoverFlyHoverPlan(best[0], best[1], best[2])
        exactness = Exactness.HEURISTIC

    traj = plan.to_trajectory(params)
    energies = EnergyPair(plan_energy(params, plan, 1), plan_energy(params, plan, 2))
    return P1Solution(traj, energies, profile.objective(energies.e1, energies.e2), exactness, plan, p2)
