"""Speed-unconstrained trajectory design via Lagrange duality.

Without the speed limit the problem separates in time: for dual weights on
the feasible line alpha1*l1 + alpha2*l2 = 1 the Lagrangian is maximized by
parking the UAV at a maximizer of psi = l1*Q_1 + l2*Q_2 for the whole
period, so the dual function is T * max psi. It is convex along the line
and is minimized here by golden-section search over l1.

The primal solution is a single hover when the optimal weights differ (the
maximizer is unique) and a time-shared pair of hovers at -xi and +xi when
they coincide above the separation threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import EnergyPair, EnergyProfile, Hover, SystemParams, Trajectory, harvested_power
from .psi import PsiMaxResult, maximize_psi, symmetric_optimum

__all__ = [
    "DualPoint",
    "P2Solution",
    "SolverDiagnostic",
    "dual_function",
    "subgradient",
    "solve_dual",
    "solve_p2",
    "fair_hover_position",
]

GOLDEN_MAX_ITERS = 200
GOLDEN_TOL = 1e-12
# Dual weights closer than this (relative to their sum) count as equal.
LAMBDA_EQ_RTOL = 1e-6
FAIRNESS_RTOL = 1e-6
# Subgradient polish: half-width of the bracket (times 1/alpha1), stop width, cap.
POLISH_BRACKET = 1e-5
POLISH_TOL = 1e-14
POLISH_ITERS = 64

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class SolverDiagnostic(RuntimeError):
    """A solver reached a state it cannot turn into a valid answer."""

    def __init__(self, message: str, candidate=None):
        super().__init__(message)
        self.candidate = candidate


@dataclass(frozen=True)
class DualPoint:
    lambda1: float
    lambda2: float

    def __post_init__(self) -> None:
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError(f"dual point must be >= 0, got ({self.lambda1}, {self.lambda2})")

    @classmethod
    def on_line(cls, profile: EnergyProfile, lambda1: float) -> "DualPoint":
        """Point of the line alpha . lambda = 1 with the given lambda1 (needs alpha2 > 0)."""
        lambda2 = (1.0 - profile.alpha1 * lambda1) / profile.alpha2
        return cls(lambda1, max(lambda2, 0.0))

    def residual(self, profile: EnergyProfile) -> float:
        return profile.alpha1 * self.lambda1 + profile.alpha2 * self.lambda2 - 1.0

    @property
    def balanced(self) -> bool:
        return abs(self.lambda1 - self.lambda2) <= LAMBDA_EQ_RTOL * (self.lambda1 + self.lambda2)

    def to_dict(self) -> dict[str, float]:
        return {"lambda1": self.lambda1, "lambda2": self.lambda2}


@dataclass(frozen=True)
class P2Solution:
    trajectory: Trajectory
    energies: EnergyPair
    dual: DualPoint
    dual_value: float
    objective: float
    tau: Optional[float] = None

    @property
    def time_sharing(self) -> bool:
        return self.tau is not None


def dual_function(params: SystemParams, dp: DualPoint) -> tuple[float, PsiMaxResult]:
    """Dual value T * max psi at ``dp`` and the maximizers that attain it."""
    res = maximize_psi(params, dp.lambda1, dp.lambda2)
    return params.T * res.value, res


def subgradient(params: SystemParams, dp: DualPoint, maximizer: float) -> np.ndarray:
    """[T Q_1(x*), T Q_2(x*)]; the E-subproblem is taken at E* = 0."""
    T = params.T
    return np.array([T * harvested_power(params, maximizer, 1), T * harvested_power(params, maximizer, 2)])


def _golden_min(f, a: float, b: float, tol: float, max_iters: int) -> tuple[float, float]:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iters):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _line_slopes(params: SystemParams, profile: EnergyProfile, u: float) -> tuple[float, float]:
    """One-sided derivatives of the dual along u = lambda1 on the line.

    Each maximizer x* gives the slope T * (Q_1(x*) - (alpha1/alpha2) Q_2(x*));
    with two maximizers the smaller one is the left derivative.
    """
    _, res = dual_function(params, DualPoint.on_line(profile, u))
    r = profile.alpha1 / profile.alpha2
    slopes = [params.T * (harvested_power(params, x, 1) - r * harvested_power(params, x, 2))
              for x in res.maximizers]
    return min(slopes), max(slopes)


def _polish(params: SystemParams, profile: EnergyProfile, u: float, hi: float) -> float:
    """Bisect on the subgradient sign near the golden-section estimate.

    Golden section compares function values and stalls near sqrt(eps) on a
    smooth minimum; the slope sign keeps resolving down to round-off.
    """
    width = POLISH_BRACKET * hi
    lo_u, hi_u = max(u - width, 0.0), min(u + width, hi)
    if lo_u > 0 and _line_slopes(params, profile, lo_u)[1] > 0:
        return u
    if hi_u < hi and _line_slopes(params, profile, hi_u)[0] < 0:
        return u
    for _ in range(POLISH_ITERS):
        if hi_u - lo_u <= POLISH_TOL * hi:
            break
        mid = 0.5 * (lo_u + hi_u)
        left, right = _line_slopes(params, profile, mid)
        if left > 0:
            hi_u = mid
        elif right < 0:
            lo_u = mid
        else:
            return mid  # zero is a subgradient: mid is a minimizer
    return 0.5 * (lo_u + hi_u)


def _degenerate_side(profile: EnergyProfile) -> int:
    """1 or 2 if the whole profile sits on that ER, else 0.

    A weight whose reciprocal overflows counts as zero: the dual segment
    would run out to an unrepresentable multiplier.
    """
    a1, a2 = profile.alpha1, profile.alpha2
    if a2 == 0.0 or not math.isfinite(1.0 / a2):
        return 1
    if a1 == 0.0 or not math.isfinite(1.0 / a1):
        return 2
    return 0


def solve_dual(params: SystemParams, profile: EnergyProfile) -> DualPoint:
    """Minimize the dual function along the feasible segment of the line.

    A zero weight turns the segment into a ray on which the dual is monotone
    in the free weight, so the minimizer is forced: lambda = e_k / alpha_k.
    """
    a1, a2 = profile.alpha1, profile.alpha2
    side = _degenerate_side(profile)
    if side == 1:
        return DualPoint(1.0 / a1, 0.0)
    if side == 2:
        return DualPoint(0.0, 1.0 / a2)

    def f(u: float) -> float:
        return dual_function(params, DualPoint.on_line(profile, u))[0]

    hi = 1.0 / a1
    u, _ = _golden_min(f, 0.0, hi, GOLDEN_TOL, GOLDEN_MAX_ITERS)
    u = _polish(params, profile, u, hi)
    fu = f(u)
    # The minimum may sit on either end of the segment.
    for end in (0.0, hi):
        fe = f(end)
        if fe <= fu:
            u, fu = end, fe
    # Snap onto the equal-weight kink if it is within tolerance; the dual is
    # non-differentiable there and the search only brackets it.
    if abs(u - 1.0) <= LAMBDA_EQ_RTOL and f(1.0) <= fu:
        u = 1.0
    if u == hi:
        return DualPoint(hi, 0.0)
    return DualPoint.on_line(profile, u)


def fair_hover_position(params: SystemParams, profile: EnergyProfile) -> Optional[float]:
    """Hover position in [-D/2, D/2] with Q_1/Q_2 = alpha1/alpha2, if any.

    Q_1/Q_2 = d2/d1 so the condition alpha2*d2 = alpha1*d1 is a quadratic
    in x. The root inside the interval is unique because Q_1/Q_2 is
    strictly decreasing there.
    """
    a1, a2 = profile.alpha1, profile.alpha2
    D, H2 = params.D, params.H**2
    # alpha2*((x - D/2)^2 + H^2) - alpha1*((x + D/2)^2 + H^2) = A x^2 + B x + C
    A = a2 - a1
    B = -D * (a2 + a1)
    C = (a2 - a1) * (D**2 / 4 + H2)
    if abs(A) < 1e-15:
        roots = [-C / B] if B != 0 else []
    else:
        disc = B * B - 4 * A * C
        if disc < 0:
            return None
        sq = math.sqrt(disc)
        # Numerically stable pair of roots.
        q = -0.5 * (B + math.copysign(sq, B))
        roots = [q / A, C / q] if q != 0 else [0.0]
    lo, hi = -D / 2, D / 2
    slack = 1e-12 * max(D, 1.0)
    inside = [min(max(r, lo), hi) for r in roots if lo - slack <= r <= hi + slack]
    return inside[0] if inside else None


def _single_hover(params: SystemParams, profile: EnergyProfile, x: float, dp: DualPoint, value: float) -> P2Solution:
    traj = Trajectory.hover(x, params.T)
    e = EnergyPair(params.T * harvested_power(params, x, 1), params.T * harvested_power(params, x, 2))
    return P2Solution(traj, e, dp, value, profile.objective(e.e1, e.e2))


def solve_p2(params: SystemParams, profile: EnergyProfile) -> P2Solution:
    """Pareto-optimal energies and trajectory without the speed limit."""
    a1, a2 = profile.alpha1, profile.alpha2
    D = params.D
    side = _degenerate_side(profile)
    if side:
        x = -D / 2 if side == 1 else D / 2
        dp = solve_dual(params, profile)
        value, _ = dual_function(params, dp)
        return _single_hover(params, profile, x, dp, value)

    dp = solve_dual(params, profile)
    value, res = dual_function(params, dp)
    sym = symmetric_optimum(params)

    if dp.balanced and sym.xi is not None:
        xi = sym.xi
        q1m, q1p = harvested_power(params, -xi, 1), harvested_power(params, xi, 1)
        q2m, q2p = harvested_power(params, -xi, 2), harvested_power(params, xi, 2)
        T = params.T
        # a2*(tau*q1m + (T - tau)*q1p) = a1*(tau*q2m + (T - tau)*q2p)
        den = a2 * (q1m - q1p) - a1 * (q2m - q2p)
        tau = T * (a1 * q2p - a2 * q1p) / den
        if -1e-9 * T <= tau <= T * (1 + 1e-9):
            tau = min(max(tau, 0.0), T)
            segs = [Hover(-xi, tau), Hover(xi, T - tau)]
            traj = Trajectory([s for s in segs if s.duration > 0])
            e1 = tau * q1m + (T - tau) * q1p
            e2 = tau * q2m + (T - tau) * q2p
            sol = P2Solution(traj, EnergyPair(e1, e2), dp, value, profile.objective(e1, e2), tau)
            _check_fairness(sol, profile)
            return sol
        # tau outside [0, T]: the optimum is a single hover just beyond +-xi
        # and the weights only look equal within tolerance. Fall through.

    x = fair_hover_position(params, profile)
    if x is None:
        # No hover splits the energy as asked: one ER constraint is slack
        # and the dual maximizer (an endpoint hover) is optimal.
        return _single_hover(params, profile, res.x, dp, value)
    sol = _single_hover(params, profile, x, dp, value)
    _check_fairness(sol, profile)
    return sol


def _check_fairness(sol: P2Solution, profile: EnergyProfile) -> None:
    e = sol.energies
    total = e.total
    for k in (1, 2):
        if abs(e[k] - profile[k] * total) > FAIRNESS_RTOL * total:
            raise SolverDiagnostic(
                f"energy split ({e.e1:.6e}, {e.e2:.6e}) misses profile "
                f"({profile.alpha1}, {profile.alpha2})",
                candidate=sol,
            )
