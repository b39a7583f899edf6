"""Shared constants and the property-test decorator."""

from __future__ import annotations

import math

from hypothesis import HealthCheck, seed, settings

from wpt_trajopt.model import SystemParams

# One seed for every randomized test so failures reproduce exactly.
PROPERTY_SEED = 20261018
PROPERTY_EXAMPLES = 100

GAIN = 0.5 * 1e-3 * 10.0
# Frozen from an independent 50-digit mpmath evaluation at H=5, D=8, T=1, V=10.
XI_D8 = 3.197654437155896
PSI_MAX_D8 = 2.600781059358212e-4
HFH_PER_ER_D8 = 1.2732939912698e-4
HFH_HOVER_D8 = 0.18023455628441
P2_PER_ER_D8 = 1.300390529679106e-4
STATIC_PER_ER_D8 = GAIN / 41.0
FLY_E2_D8 = 8.04543371043478e-05


def prop(**overrides):
    """Apply the shared hypothesis settings and seed (use above ``@given``)."""
    kw = dict(max_examples=PROPERTY_EXAMPLES, deadline=None, database=None,
              suppress_health_check=[HealthCheck.too_slow])
    kw.update(overrides)

    def deco(fn):
        return seed(PROPERTY_SEED)(settings(**kw)(fn))

    return deco


def d8(**kw) -> SystemParams:
    return SystemParams(D=8.0, **kw)


def d5(**kw) -> SystemParams:
    return SystemParams(D=5.0, **kw)


def rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def isclose(a: float, b: float, rtol: float) -> bool:
    return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)
