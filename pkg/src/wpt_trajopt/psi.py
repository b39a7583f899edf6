"""Maximization of the weighted instantaneous power.

For dual weights (l1, l2) the per-instant subproblem is

    max_x  psi(x) = l1 * Q_1(x) + l2 * Q_2(x)

over x in [-D/2, D/2]. psi' has the sign of minus a degree-5 polynomial

    N(x) = l1 (2x + D) d2(x)^2 + l2 (2x - D) d1(x)^2,   d_k(x) = (x - x_k)^2 + H^2

so there are at most five stationary points. They are isolated by a sign
scan of N followed by bisection, and compared with the two endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import SystemParams, harvested_power

__all__ = [
    "PsiMaxResult",
    "SymmetricOptimum",
    "psi",
    "psi_numerator",
    "stationary_points",
    "symmetric_optimum",
    "maximize_psi",
]

SCAN_POINTS = 2048
# Candidates closer than this (times max(D, 1)) are the same point.
MERGE_TOL = 1e-9
# Candidates whose psi agrees with the best to this relative gap are co-optimal.
TIE_RTOL = 1e-10


@dataclass(frozen=True)
class PsiMaxResult:
    maximizers: tuple[float, ...]
    value: float

    @property
    def unique(self) -> bool:
        return len(self.maximizers) == 1

    @property
    def x(self) -> float:
        """The first (leftmost) maximizer."""
        return self.maximizers[0]


@dataclass(frozen=True)
class SymmetricOptimum:
    threshold: float
    xi: Optional[float]


def _check_weights(lambda1: float, lambda2: float) -> None:
    if not (lambda1 >= 0 and lambda2 >= 0 and math.isfinite(lambda1) and math.isfinite(lambda2)):
        raise ValueError(f"dual weights must be finite and >= 0, got ({lambda1}, {lambda2})")


def psi(params: SystemParams, lambda1: float, lambda2: float, x):
    _check_weights(lambda1, lambda2)
    return lambda1 * harvested_power(params, x, 1) + lambda2 * harvested_power(params, x, 2)


def psi_numerator(params: SystemParams, lambda1: float, lambda2: float, x):
    """Quintic N(x); psi'(x) = -gain * N(x) / (d1(x)^2 d2(x)^2)."""
    D, H2 = params.D, params.H**2
    d1 = (x + D / 2) ** 2 + H2
    d2 = (x - D / 2) ** 2 + H2
    # Large weights may overflow to +-inf; only the sign is used downstream.
    with np.errstate(over="ignore"):
        return lambda1 * (2 * x + D) * d2**2 + lambda2 * (2 * x - D) * d1**2


def symmetric_optimum(params: SystemParams) -> SymmetricOptimum:
    """Maximizers +-xi of psi for equal weights, when D exceeds 2H/sqrt(3).

    xi**2 is the positive root of y**2 + 2(D^2/4 + H^2) y - 3D^4/16 + H^4 - H^2 D^2/2,
    the quartic factor of psi' for equal weights.
    """
    D, H = params.D, params.H
    threshold = params.threshold
    if D <= threshold:
        return SymmetricOptimum(threshold, None)
    a = D**2 / 4 + H**2
    # sqrt(D^4/4 + H^2 D^2) - a, rewritten to avoid cancellation near the threshold.
    disc = math.sqrt(D**4 / 4 + H**2 * D**2)
    y = (disc**2 - a**2) / (disc + a)
    if y <= 0:
        return SymmetricOptimum(threshold, None)
    return SymmetricOptimum(threshold, math.sqrt(y))


def _bisect(f, a: float, b: float, fa: float, tol: float) -> float:
    while b - a > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def stationary_points(
    params: SystemParams, lambda1: float, lambda2: float, n_scan: int = SCAN_POINTS
) -> list[float]:
    """Interior zeros of psi' on [-D/2, D/2], found by sign scan + bisection."""
    D = params.D
    if D == 0:
        return []
    grid = np.linspace(-D / 2, D / 2, n_scan)
    vals = psi_numerator(params, lambda1, lambda2, grid)
    tol = 1e-12 * D + 1e-15

    def f(x: float) -> float:
        return float(psi_numerator(params, lambda1, lambda2, x))

    roots: list[float] = grid[1:-1][vals[1:-1] == 0.0].tolist()
    signs = np.sign(vals)
    for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
        roots.append(_bisect(f, float(grid[i]), float(grid[i + 1]), float(vals[i]), tol))
    return sorted(roots)


def _same_peak(params: SystemParams, lambda1: float, lambda2: float, a: float, b: float,
               merge: float, best: float) -> bool:
    """Are two co-optimal candidates the same peak (no valley between them)?"""
    if b - a <= merge:
        return True
    mid = float(psi(params, lambda1, lambda2, 0.5 * (a + b)))
    return best - mid <= TIE_RTOL * best


def maximize_psi(params: SystemParams, lambda1: float, lambda2: float) -> PsiMaxResult:
    """All global maximizers of psi over [-D/2, D/2], in increasing order."""
    _check_weights(lambda1, lambda2)
    if lambda1 + lambda2 <= 0:
        raise ValueError("at least one dual weight must be positive")
    D = params.D
    if D == 0:
        return PsiMaxResult((0.0,), float(psi(params, lambda1, lambda2, 0.0)))

    located = [-D / 2, D / 2] + stationary_points(params, lambda1, lambda2)
    # The equal-weight stationary points are known in closed form; including
    # them keeps a tiny xi (D just above threshold) from hiding inside one
    # scan cell.
    sym = symmetric_optimum(params)
    hints = [0.0] + ([-sym.xi, sym.xi] if sym.xi is not None else [])
    candidates = [(x, True) for x in located] + [(x, False) for x in hints]

    values = [float(psi(params, lambda1, lambda2, x)) for x, _ in candidates]
    best = max(values)
    tied = sorted((c for c, v in zip(candidates, values) if best - v <= TIE_RTOL * best),
                  key=lambda c: c[0])

    merge = MERGE_TOL * max(D, 1.0)
    groups: list[list[tuple[float, bool]]] = []
    for c in tied:
        if groups and _same_peak(params, lambda1, lambda2, groups[-1][-1][0], c[0], merge, best):
            groups[-1].append(c)
        else:
            groups.append([c])
    maximizers = []
    for g in groups:
        # On a flat top psi cannot rank candidates below round-off, so a
        # bisected root or an endpoint beats a hint; then the higher psi wins.
        maximizers.append(max(g, key=lambda c: (c[1], float(psi(params, lambda1, lambda2, c[0]))))[0])
    if len(maximizers) > 2:
        # Only the outermost pair can tie for two ERs; anything else is
        # round-off on a nearly flat plateau.
        maximizers = [maximizers[0], maximizers[-1]]
    return PsiMaxResult(tuple(maximizers), best)
