"""Brute-force cross-checks for the closed forms and solvers.

None of these reuse the maximization or integration code they check: the
power law is re-evaluated inline and every search is exhaustive or a
textbook method (dense grid, trapezoid rule, 2-D ellipsoid method, DP).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import EnergyPair, EnergyProfile, SystemParams, Trajectory

__all__ = [
    "DpConfig",
    "DpResult",
    "EllipsoidResult",
    "grid_max_psi",
    "quadrature_energy",
    "ellipsoid_dual",
    "static_benchmark",
    "static_hover_grid",
    "dp_p1",
    "DEFAULT_GRID_POINTS",
    "DEFAULT_QUAD_STEPS",
]

DEFAULT_GRID_POINTS = 100_001
DEFAULT_QUAD_STEPS = 100_000
DP_LEVELS = 256


def _power(params: SystemParams, x, xk: float):
    return params.eta * params.beta0 * params.P / ((x - xk) ** 2 + params.H ** 2)


def grid_max_psi(params: SystemParams, lambda1: float, lambda2: float,
                 n_points: int = DEFAULT_GRID_POINTS) -> tuple[float, float]:
    """Argmax and max of l1*Q_1 + l2*Q_2 over a uniform grid on [-D/2, D/2]."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    D = params.D
    x = np.linspace(-D / 2, D / 2, n_points)
    values = lambda1 * _power(params, x, -D / 2) + lambda2 * _power(params, x, D / 2)
    i = int(np.argmax(values))
    return float(x[i]), float(values[i])


def quadrature_energy(params: SystemParams, traj: Trajectory, k: int,
                      n_steps: int = DEFAULT_QUAD_STEPS) -> float:
    """Composite trapezoid integral of Q_k(x(t)) over the trajectory's span."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if k not in (1, 2):
        raise ValueError(f"ER index must be 1 or 2, got {k!r}")
    span = traj.duration
    if span == 0:
        return 0.0
    t = np.linspace(0.0, span, n_steps + 1)
    xk = -params.D / 2 if k == 1 else params.D / 2
    q = _power(params, traj.position_at(t), xk)
    h = span / n_steps
    return float(h * (q.sum() - 0.5 * (q[0] + q[-1])))


@dataclass(frozen=True)
class EllipsoidResult:
    lambda1: float
    lambda2: float
    value: float
    iterations: int
    converged: bool


def _dual_on_line(params: SystemParams, l1: float, l2: float, n_points: int) -> tuple[float, float]:
    x, v = grid_max_psi(params, l1, l2, n_points)
    return params.T * v, x


def ellipsoid_dual(params: SystemParams, profile: EnergyProfile, max_iters: int = 400,
                   tol: float = 1e-10, n_points: int = 4_001) -> EllipsoidResult:
    """Minimize the dual over {l >= 0, alpha . l = 1} with the ellipsoid method.

    The equality is split into two inequalities with subgradients -alpha and
    +alpha; lambda_k >= 0 contributes -e_k. An objective cut uses
    s0 = [T Q_1(x*), T Q_2(x*)] at a grid maximizer x*. The iterate is
    treated as on the line when |alpha . l - 1| <= 1e-6; the reported point
    is the best such iterate projected onto the line.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    a = np.array([profile.alpha1, profile.alpha2])
    inv = [1.0 / ak for ak in a if ak > 0]
    radius = 2.0 * max(inv)
    center = np.array([1.0, 1.0])
    shape = np.eye(2) * radius ** 2
    n = 2.0
    best = (math.inf, 1.0, 1.0)
    T = params.T
    D = params.D
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        l1, l2 = center
        resid = a @ center - 1.0
        if l1 < 0:
            g = np.array([-1.0, 0.0])
        elif l2 < 0:
            g = np.array([0.0, -1.0])
        elif resid < -1e-6:
            g = -a
        elif resid > 1e-6:
            g = a
        else:
            # Project onto the line before evaluating; off it the dual is +inf.
            p = center - resid * a / (a @ a)
            p = np.maximum(p, 0.0)
            value, xstar = _dual_on_line(params, p[0], p[1], n_points)
            if value < best[0]:
                best = (value, float(p[0]), float(p[1]))
            g = np.array([T * _power(params, xstar, -D / 2), T * _power(params, xstar, D / 2)])
        gPg = float(g @ shape @ g)
        if gPg <= 0:
            converged = True
            break
        gt = g / math.sqrt(gPg)
        Pg = shape @ gt
        center = center - Pg / (n + 1)
        shape = n * n / (n * n - 1) * (shape - 2.0 / (n + 1) * np.outer(Pg, Pg))
        # Stop once the ellipsoid is small along the objective direction.
        if math.sqrt(gPg) <= tol * max(best[0], 1e-300) and math.isfinite(best[0]):
            converged = True
            break
    if not converged:
        warnings.warn(f"ellipsoid_dual stopped after {it} iterations", RuntimeWarning, stacklevel=2)
    if not math.isfinite(best[0]):
        p = center - (a @ center - 1.0) * a / (a @ a)
        p = np.maximum(p, 0.0)
        value, _ = _dual_on_line(params, p[0], p[1], n_points)
        best = (value, float(p[0]), float(p[1]))
    return EllipsoidResult(best[1], best[2], best[0], it, converged)


def static_hover_grid(params: SystemParams, n_positions: int) -> np.ndarray:
    if n_positions < 2:
        raise ValueError("n_positions must be >= 2")
    return np.linspace(-params.D / 2, params.D / 2, n_positions)


def static_benchmark(params: SystemParams, profile: EnergyProfile,
                     n_positions: int = DEFAULT_GRID_POINTS) -> tuple[float, EnergyPair]:
    """Best single hover for the profile on a uniform position grid.

    A lone hover rarely hits the target split exactly, so the score is the
    max-min value min_k E_k / alpha_k (the largest E with E_k >= alpha_k E).
    """
    x = static_hover_grid(params, n_positions)
    T, D = params.T, params.D
    e1 = T * _power(params, x, -D / 2)
    e2 = T * _power(params, x, D / 2)
    scores = []
    if profile.alpha1 > 0:
        scores.append(e1 / profile.alpha1)
    if profile.alpha2 > 0:
        scores.append(e2 / profile.alpha2)
    score = np.minimum.reduce(scores)
    i = int(np.argmax(score))
    return float(x[i]), EnergyPair(float(e1[i]), float(e2[i]))


@dataclass(frozen=True)
class DpConfig:
    dx: float = 0.05
    dt: float = 0.005
    levels: int = DP_LEVELS

    def __post_init__(self) -> None:
        if not (self.dx > 0 and self.dt > 0):
            raise ValueError(f"dx and dt must be > 0, got dx={self.dx}, dt={self.dt}")
        if self.levels < 1:
            raise ValueError("levels must be >= 1")


@dataclass(frozen=True)
class DpResult:
    energies: EnergyPair
    objective: float
    path: list[float]
    reach: int
    degenerate: bool


def dp_p1(params: SystemParams, profile: EnergyProfile, cfg: DpConfig = DpConfig()) -> DpResult:
    """Discretized speed-constrained optimum by dynamic programming.

    Time is cut into round(T/dt) equal steps and the UAV holds one grid
    position per step, moving at most
    floor(V*dt/dx) cells between steps. Because the problem has two
    objectives, each (step, position) state keeps a frontier: the best E1 for
    each of ``cfg.levels`` E2 bins spanning [0, T * max Q_2].
    """
    D, T = params.D, params.T
    n_pos = max(int(round(D / cfg.dx)) + 1, 1) if D > 0 else 1
    x = np.linspace(-D / 2, D / 2, n_pos) if n_pos > 1 else np.array([0.0])
    dx = x[1] - x[0] if n_pos > 1 else math.inf
    n_steps = max(int(round(T / cfg.dt)), 1)
    dt = T / n_steps
    if not params.speed_bounded:
        reach = n_pos
    else:
        reach = int(math.floor(params.V * dt / dx + 1e-9)) if n_pos > 1 else 0
        reach = min(reach, n_pos)
    degenerate = False
    if reach == 0 and params.speed_bounded and params.V > 0 and n_pos > 1:
        warnings.warn(
            f"dp grid too coarse for any movement (V*dt={params.V * dt:g} < dx={dx:g}); "
            "falling back to a static search",
            RuntimeWarning,
            stacklevel=2,
        )
        degenerate = True

    q1 = _power(params, x, -D / 2)
    q2 = _power(params, x, D / 2)
    width = T * params.eta * params.beta0 * params.P / params.H ** 2 / cfg.levels
    # Guard the top bin against round-off pushing E2 to exactly the upper bound.
    width *= 1.0 + 1e-12
    e1, e2, parents = kernels.dp_frontier(q1, q2, n_steps, reach, cfg.levels, width, dt)

    valid = e1 >= 0
    score = np.full(e1.shape, -np.inf)
    parts = []
    if profile.alpha1 > 0:
        parts.append(np.where(valid, e1, 0.0) / profile.alpha1)
    if profile.alpha2 > 0:
        parts.append(np.where(valid, e2, 0.0) / profile.alpha2)
    score[valid] = np.minimum.reduce(parts)[valid]
    flat = int(np.argmax(score))
    p, lvl = divmod(flat, cfg.levels)
    pair = EnergyPair(float(e1[p, lvl]), float(e2[p, lvl]))
    best = float(score[p, lvl])

    path = [0.0] * n_steps
    for step in range(n_steps - 1, -1, -1):
        path[step] = float(x[p])
        if step:
            prev = int(parents[step, p, lvl])
            p, lvl = divmod(prev, cfg.levels)
    return DpResult(pair, best, path, reach, degenerate)
