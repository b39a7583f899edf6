import ast
import math
import pathlib

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import FLY_E2_D8, GAIN, HFH_PER_ER_D8, PSI_MAX_D8, XI_D8, d5, d8, prop, rel
from wpt_trajopt import oracle
from wpt_trajopt.model import (
    EnergyProfile,
    Fly,
    Hover,
    SystemParams,
    Trajectory,
    harvested_power,
    trajectory_energy,
)
from wpt_trajopt.oracle import (
    DpConfig,
    dp_p1,
    ellipsoid_dual,
    grid_max_psi,
    quadrature_energy,
    static_benchmark,
)
from wpt_trajopt.p2 import dual_function, solve_dual
from wpt_trajopt.planner import solve_p1

HALF = EnergyProfile.from_alpha1(0.5)


class TestGridMaxPsi:
    def test_symmetric(self):
        x, v = grid_max_psi(d8(), 1.0, 1.0, 100_000)
        assert abs(abs(x) - XI_D8) <= 1e-3
        assert rel(v, PSI_MAX_D8) <= 1e-8

    def test_single_user_endpoint(self):
        assert grid_max_psi(d8(), 1.0, 0.0) == (-4.0, pytest.approx(GAIN / 25, rel=1e-14))

    def test_two_points(self):
        x, v = grid_max_psi(d8(), 0.2, 0.9, 2)
        assert x == 4.0 and v == pytest.approx(0.9 * GAIN / 25 + 0.2 * GAIN / 89, rel=1e-14)
        with pytest.raises(ValueError):
            grid_max_psi(d8(), 1.0, 1.0, 1)


class TestQuadrature:
    def test_hover_exact(self):
        # A continuous hover-only trajectory has a constant integrand.
        traj = Trajectory([Hover(0.7, 0.25), Hover(0.7, 0.75)])
        for n in (1, 3, 50, 1000):
            assert rel(quadrature_energy(d8(), traj, 2, n), trajectory_energy(d8(), traj, 2)) <= 1e-14

    def test_fly_closed_form(self):
        traj = Trajectory([Fly(-XI_D8, XI_D8, 10.0)])
        p = d8(T=traj.duration)
        assert rel(quadrature_energy(p, traj, 2, 100_000), FLY_E2_D8) <= 1e-8

    def test_single_step_bracket(self):
        traj = Trajectory([Fly(-XI_D8, XI_D8, 10.0)])
        p = d8(T=traj.duration)
        xs = np.linspace(-XI_D8, XI_D8, 10_001)
        q = harvested_power(p, xs, 2)
        coarse = quadrature_energy(p, traj, 2, 1)
        assert abs(coarse - FLY_E2_D8) <= (q.max() - q.min()) * traj.duration

    def test_second_order(self):
        traj = Trajectory([Fly(-3.0, 3.5, 10.0)])
        p = d8(T=traj.duration)
        exact = trajectory_energy(p, traj, 1)
        errs = [abs(quadrature_energy(p, traj, 1, n) - exact) for n in (50, 100, 200, 400)]
        for a, b in zip(errs, errs[1:]):
            assert a / b >= 3.5

    def test_validation(self):
        with pytest.raises(ValueError):
            quadrature_energy(d8(), Trajectory.hover(0, 1), 1, 0)
        with pytest.raises(ValueError):
            quadrature_energy(d8(), Trajectory.hover(0, 1), 3)
        assert quadrature_energy(d8(), Trajectory(), 1) == 0.0


class TestEllipsoid:
    def test_symmetric(self):
        r = ellipsoid_dual(d8(), HALF)
        assert r.converged
        assert r.lambda1 == pytest.approx(1.0, abs=1e-4)
        assert r.lambda2 == pytest.approx(1.0, abs=1e-4)

    @pytest.mark.parametrize("a1", [0.2, 0.7, 0.8, 0.95])
    def test_matches_solve_dual(self, a1):
        p, a = d8(), EnergyProfile.from_alpha1(a1)
        r = ellipsoid_dual(p, a)
        exact = dual_function(p, solve_dual(p, a))[0]
        assert rel(r.value, exact) <= 1e-4
        assert abs(a.alpha1 * r.lambda1 + a.alpha2 * r.lambda2 - 1) <= 1e-9

    def test_ray_case(self):
        r = ellipsoid_dual(d8(), EnergyProfile.from_alpha1(1.0))
        assert r.lambda1 == pytest.approx(1.0, abs=1e-9)

    def test_max_iters_warns(self):
        with pytest.warns(RuntimeWarning, match="stopped"):
            r = ellipsoid_dual(d8(), EnergyProfile.from_alpha1(0.8), max_iters=1)
        assert not r.converged and r.iterations == 1
        assert math.isfinite(r.value)
        with pytest.raises(ValueError):
            ellipsoid_dual(d8(), HALF, max_iters=0)


class TestStaticBenchmark:
    def test_symmetric(self):
        x, e = static_benchmark(d8(), HALF)
        assert x == pytest.approx(0.0, abs=1e-12)
        assert e.e1 == pytest.approx(GAIN / 41, rel=1e-12)
        assert e.e2 == pytest.approx(1.2195e-4, rel=1e-4)

    def test_single_user(self):
        x, e = static_benchmark(d8(), EnergyProfile.from_alpha1(1.0))
        assert x == -4.0

    def test_below_threshold_is_optimal(self):
        x, e = static_benchmark(d5(), HALF)
        assert e.e1 == pytest.approx(1.6e-4, rel=1e-12)
        assert e.e1 == pytest.approx(solve_p1(d5(), HALF).energies.e1, rel=1e-9)

    @pytest.mark.property
    @prop()
    @given(st.floats(0.0, 1.0), st.floats(0.5, 16.0))
    def test_max_min_score(self, a1, D):
        p, a = SystemParams(D=D), EnergyProfile.from_alpha1(a1)
        x, e = static_benchmark(p, a, 401)
        best = a.objective(e.e1, e.e2)
        for y in oracle.static_hover_grid(p, 401)[::7]:
            q = [p.T * harvested_power(p, y, k) for k in (1, 2)]
            assert a.objective(*q) <= best * (1 + 1e-12)


class TestDp:
    def test_symmetric_branch_b(self):
        r = dp_p1(d8(), HALF)
        assert rel(r.energies.total, 2 * HFH_PER_ER_D8) <= 0.01
        assert len(r.path) == 200 and not r.degenerate

    def test_zero_speed_is_static(self):
        p, a = d8(V=0.0), EnergyProfile.from_alpha1(0.7)
        r = dp_p1(p, a)
        x, e = static_benchmark(p, a, 161)
        assert set(r.path) == {x}
        assert rel(r.energies.e1, e.e1) <= 1e-12 and rel(r.energies.e2, e.e2) <= 1e-12

    def test_single_step(self):
        r = dp_p1(d8(), HALF, DpConfig(dt=1.0))
        assert r.path == [0.0]
        assert r.energies.e1 == pytest.approx(GAIN / 41, rel=1e-12)

    def test_coarse_grid_warns(self):
        with pytest.warns(RuntimeWarning, match="too coarse"):
            r = dp_p1(d8(), HALF, DpConfig(dx=4.0))
        assert r.degenerate and r.reach == 0

    @pytest.mark.parametrize("kw", [dict(dx=0.0), dict(dt=-1.0), dict(levels=0)])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            DpConfig(**kw)

    def test_sandwich_with_planner(self):
        for a1 in (0.5, 0.6, 0.7):
            a = EnergyProfile.from_alpha1(a1)
            dp = dp_p1(d8(), a, DpConfig(dx=0.1, dt=0.01))
            plan = solve_p1(d8(), a).energies.total
            assert dp.energies.total <= plan * 1.02
            assert plan <= dp.energies.total * 1.02

    def test_deterministic(self):
        a = EnergyProfile.from_alpha1(0.65)
        cfg = DpConfig(dx=0.1, dt=0.01)
        assert dp_p1(d8(), a, cfg) == dp_p1(d8(), a, cfg)


def test_oracle_is_independent():
    src = pathlib.Path(oracle.__file__).read_text()
    imported = set()
    for node in ast.walk(ast.parse(src)):
        if isinstance(node, ast.ImportFrom):
            imported.add(node.module or "")
            imported.update(a.name for a in node.names)
    assert not imported & {"psi", "p2", "planner", "region"}
    assert not any(m.endswith((".psi", ".p2", ".planner")) for m in imported)
