import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from helpers import GAIN, PSI_MAX_D8, XI_D8, d5, d8, prop, rel
from wpt_trajopt.model import SystemParams, harvested_power
from wpt_trajopt.oracle import grid_max_psi
from wpt_trajopt.psi import (
    maximize_psi,
    psi,
    psi_numerator,
    stationary_points,
    symmetric_optimum,
)


def test_psi_examples():
    p = d8()
    assert psi(p, 1.0, 1.0, 0.0) == pytest.approx(2 * GAIN / 41, rel=1e-14)
    for x in (-4.0, -1.3, 0.0, 2.2):
        assert psi(p, 1.0, 0.0, x) == harvested_power(p, x, 1)
        assert psi(p, 1.0, 1.0, x) == pytest.approx(psi(p, 1.0, 1.0, -x), rel=1e-14)
    with pytest.raises(ValueError):
        psi(p, -1.0, 1.0, 0.0)


def test_numerator_sign_matches_derivative():
    # psi' = -gain * N / (d1^2 d2^2): check the sign against a central difference.
    p = d8()
    for l1, l2 in ((1.0, 1.0), (0.7, 0.3), (0.2, 1.5)):
        for x in np.linspace(-3.9, 3.9, 27):
            h = 1e-6
            deriv = (psi(p, l1, l2, x + h) - psi(p, l1, l2, x - h)) / (2 * h)
            n = psi_numerator(p, l1, l2, x)
            if abs(deriv) > 1e-12:
                assert np.sign(deriv) == -np.sign(n)


class TestSymmetricOptimum:
    def test_d8(self):
        s = symmetric_optimum(d8())
        assert s.threshold == pytest.approx(5.7735, abs=1e-4)
        assert s.xi == pytest.approx(XI_D8, rel=1e-12)
        assert s.xi == pytest.approx(math.sqrt(math.sqrt(2624) - 41), rel=1e-12)

    def test_below_threshold(self):
        s = symmetric_optimum(d5())
        assert s.xi is None and s.threshold == pytest.approx(5.7735, abs=1e-4)

    def test_at_threshold(self):
        p = SystemParams(D=10 / math.sqrt(3))
        assert symmetric_optimum(p).xi is None

    def test_quartic_root(self):
        p = d8()
        y = XI_D8 ** 2
        D, H = p.D, p.H
        quartic = y * y + 2 * (D * D / 4 + H * H) * y - 3 * D ** 4 / 16 + H ** 4 - H * H * D * D / 2
        assert abs(quartic) < 1e-9

    @pytest.mark.property
    @prop()
    @given(st.floats(0.5, 20), st.floats(1.01, 10))
    def test_xi_inside_half_gap(self, H, ratio):
        D = ratio * 2 * H / math.sqrt(3)
        xi = symmetric_optimum(SystemParams(H=H, D=D)).xi
        assert xi is not None and 0 < xi < D / 2

    def test_xi_continuous_at_threshold(self):
        th = 10 / math.sqrt(3)
        xi = symmetric_optimum(SystemParams(D=th * (1 + 1e-8))).xi
        assert xi is not None and xi < 1e-2


class TestMaximizePsi:
    def test_equal_weights_d8(self):
        r = maximize_psi(d8(), 1.0, 1.0)
        assert len(r.maximizers) == 2
        assert r.maximizers[0] == pytest.approx(-XI_D8, abs=1e-9)
        assert r.maximizers[1] == pytest.approx(XI_D8, abs=1e-9)
        assert r.value == pytest.approx(PSI_MAX_D8, rel=1e-10)

    def test_equal_weights_d5(self):
        r = maximize_psi(d5(), 1.0, 1.0)
        assert r.unique and r.x == pytest.approx(0.0, abs=1e-9)
        assert r.value == pytest.approx(3.2e-4, rel=1e-12)

    @pytest.mark.parametrize("D", [0.0, 3.0, 8.0, 20.0])
    def test_single_user(self, D):
        p = SystemParams(D=D)
        r = maximize_psi(p, 1.0, 0.0)
        assert r.maximizers == (-D / 2,)
        assert r.value == pytest.approx(GAIN / 25, rel=1e-14)

    def test_rejects_zero_weights(self):
        with pytest.raises(ValueError):
            maximize_psi(d8(), 0.0, 0.0)

    def test_unequal_weights_unique(self):
        r = maximize_psi(d8(), 0.7, 0.3)
        assert r.unique and -4.0 <= r.x <= -XI_D8

    @pytest.mark.property
    @prop()
    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.2, 20.0), st.floats(1.0, 10.0))
    def test_matches_grid_oracle(self, l1, l2, D, H):
        assume(l1 + l2 > 1e-3)
        p = SystemParams(H=H, D=D)
        r = maximize_psi(p, l1, l2)
        xg, vg = grid_max_psi(p, l1, l2, 100_000)
        assert rel(r.value, vg) <= 1e-8
        assert r.value >= vg * (1 - 1e-14)
        near = min(abs(xg - x) for x in r.maximizers)
        # Away from a maximizer the grid point must be a near-tie of another one.
        if near > 1e-3:
            assert rel(float(psi(p, l1, l2, xg)), r.value) <= 1e-8

    @pytest.mark.property
    @prop()
    @given(st.floats(0.01, 5.0), st.floats(0.2, 20.0), st.floats(1.0, 10.0))
    def test_equal_weight_symmetry(self, lam, D, H):
        r = maximize_psi(SystemParams(H=H, D=D), lam, lam)
        xs = r.maximizers
        assert xs[0] == pytest.approx(-xs[-1], abs=1e-8 * max(D, 1))
        assert list(xs) == sorted(xs)
        assert all(-D / 2 <= x <= D / 2 for x in xs)

    @pytest.mark.property
    @prop()
    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.2, 20.0), st.floats(1.0, 10.0))
    def test_containment_and_stationary_bound(self, l1, l2, D, H):
        assume(abs(l1 - l2) > 1e-6 and l1 + l2 > 1e-3)
        p = SystemParams(H=H, D=D)
        r = maximize_psi(p, l1, l2)
        assert 1 <= len(r.maximizers) <= 2
        tol = 1e-9 * max(D, 1)
        if l1 > l2:
            assert all(x <= tol for x in r.maximizers)
        else:
            assert all(x >= -tol for x in r.maximizers)
        for x in stationary_points(p, l1, l2):
            assert psi(p, l1, l2, x) <= r.value * (1 + 1e-12)
        if len(r.maximizers) == 2:
            a, b = (float(psi(p, l1, l2, x)) for x in r.maximizers)
            assert rel(a, b) <= 1e-10

    def test_zero_separation(self):
        r = maximize_psi(SystemParams(D=0.0), 0.3, 0.7)
        assert r.maximizers == (0.0,)
