import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import FLY_E2_D8, GAIN, XI_D8, d5, d8, prop, rel
from wpt_trajopt.model import (
    UNBOUNDED,
    EnergyPair,
    EnergyProfile,
    Fly,
    Hover,
    SystemParams,
    Trajectory,
    dbm_to_watts,
    harvested_power,
    max_speed_feasible,
    segment_energy,
    trajectory_energies,
    trajectory_energy,
)
from wpt_trajopt.oracle import quadrature_energy

finite = dict(allow_nan=False, allow_infinity=False)


class TestSystemParams:
    def test_defaults(self):
        p = SystemParams()
        assert (p.H, p.P, p.eta, p.beta0, p.T) == (5.0, 10.0, 0.5, 1e-3, 1.0)
        assert p.gain == pytest.approx(GAIN, rel=1e-15)

    def test_er_positions_derived(self):
        p = d8()
        assert (p.x1, p.x2) == (-4.0, 4.0)
        assert p.with_(D=5.0).x2 == 2.5
        with pytest.raises(ValueError):
            p.er_position(3)

    @pytest.mark.parametrize("field,value", [
        ("H", 0.0), ("H", -1.0), ("P", 0.0), ("eta", 1.0), ("eta", 0.0),
        ("beta0", 0.0), ("T", 0.0), ("D", -0.1), ("V", -1.0), ("H", math.nan),
    ])
    def test_rejects_invalid(self, field, value):
        with pytest.raises(ValueError):
            SystemParams(**{field: value})

    def test_unbounded_speed_is_distinct_state(self):
        p = SystemParams(V=UNBOUNDED)
        assert not p.speed_bounded
        assert SystemParams(V=1e300).speed_bounded
        with pytest.raises(TypeError):
            SystemParams(V="fast")

    def test_threshold(self):
        assert SystemParams(H=5.0).threshold == pytest.approx(10 / math.sqrt(3), rel=1e-15)

    def test_config_round_trip(self):
        cfg = {"H_m": 5, "D_m": 8, "P_dBm": 40, "eta": 0.5, "beta0_dB": -30, "T_s": 1, "V_mps": "inf"}
        p = SystemParams.from_config(cfg)
        assert p.P == pytest.approx(10.0, rel=1e-12)
        assert p.beta0 == pytest.approx(1e-3, rel=1e-12)
        assert not p.speed_bounded
        q = SystemParams.from_config(p.to_config())
        assert q.P == pytest.approx(p.P, rel=1e-12) and q.D == p.D and not q.speed_bounded

    def test_config_errors_name_the_key(self):
        with pytest.raises(KeyError):
            SystemParams.from_config({"Dm": 3})
        with pytest.raises(ValueError, match="D_m"):
            SystemParams.from_config({"D_m": -1})
        with pytest.raises(TypeError, match="H_m"):
            SystemParams.from_config({"H_m": "tall"})
        with pytest.raises(ValueError, match="V_mps"):
            SystemParams.from_config({"V_mps": "fast"})

    def test_dbm(self):
        assert dbm_to_watts(40.0) == pytest.approx(10.0, rel=1e-15)


class TestEnergyProfile:
    def test_normalized(self):
        a = EnergyProfile(2.0, 6.0)
        assert (a.alpha1, a.alpha2) == (0.25, 0.75)
        assert a.alpha1 + a.alpha2 == 1.0

    @pytest.mark.parametrize("a1,a2", [(-0.1, 1.0), (0.0, 0.0), (math.nan, 1.0)])
    def test_rejects(self, a1, a2):
        with pytest.raises(ValueError):
            EnergyProfile(a1, a2)

    def test_objective_is_max_min(self):
        a = EnergyProfile.from_alpha1(0.25)
        assert a.objective(1.0, 3.0) == pytest.approx(4.0)
        # ER 1 is short, so it caps the total at 0.5 / 0.25.
        assert a.objective(0.5, 3.0) == pytest.approx(2.0)
        assert EnergyProfile.from_alpha1(1.0).objective(2.0, 7.0) == 2.0

    @pytest.mark.property
    @prop()
    @given(st.floats(0.0, 1.0))
    def test_alpha_sum_exact(self, a1):
        a = EnergyProfile.from_alpha1(a1)
        assert a.alpha1 + a.alpha2 == 1.0
        assert a.swapped().alpha1 == pytest.approx(a.alpha2, abs=1e-15)


class TestHarvestedPower:
    def test_examples(self):
        p = d5()
        assert harvested_power(p, 0.0, 1) == pytest.approx(1.6e-4, rel=1e-12)
        assert harvested_power(p, -2.5, 1) == pytest.approx(2.0e-4, rel=1e-12)

    def test_bad_index(self):
        with pytest.raises(ValueError):
            harvested_power(d5(), 0.0, 0)

    def test_vectorized(self):
        x = np.linspace(-4, 4, 9)
        q = harvested_power(d8(), x, 1)
        assert q.shape == x.shape and np.all(q > 0)

    @pytest.mark.property
    @prop()
    @given(st.floats(-50, 50, **finite), st.floats(0, 40, **finite), st.floats(0.1, 30, **finite))
    def test_mirror_symmetry(self, x, D, H):
        p = SystemParams(H=H, D=D)
        for k, j in ((1, 2), (2, 1)):
            assert rel(harvested_power(p, x, k), harvested_power(p, -x, j)) <= 1e-12

    @pytest.mark.property
    @prop()
    @given(st.floats(0, 20, **finite), st.floats(0, 20, **finite), st.sampled_from([1, 2]),
           st.floats(0.5, 20, **finite))
    def test_decreasing_in_distance(self, r1, r2, k, D):
        if abs(r1 - r2) < 1e-9:
            return
        p = SystemParams(D=D)
        xk = p.er_position(k)
        near, far = sorted((r1, r2))
        assert harvested_power(p, xk + near, k) > harvested_power(p, xk - far, k)


class TestTrajectoryEnergy:
    def test_hover(self):
        assert trajectory_energy(d5(), Trajectory.hover(0.0, 1.0), 1) == pytest.approx(1.6e-4, rel=1e-12)

    def test_fly_closed_form(self):
        traj = Trajectory([Fly(-XI_D8, XI_D8, 10.0)])
        assert trajectory_energy(d8(), traj, 2) == pytest.approx(FLY_E2_D8, rel=1e-12)

    def test_fly_direction_irrelevant(self):
        p = d8()
        a = segment_energy(p, Fly(-1.0, 3.0, 5.0), 1)
        b = segment_energy(p, Fly(3.0, -1.0, 5.0), 1)
        assert a == pytest.approx(b, rel=1e-14)

    def test_empty(self):
        assert trajectory_energy(d8(), Trajectory(), 1) == 0.0
        assert trajectory_energies(d8(), Trajectory()).total == 0.0

    @pytest.mark.property
    @prop()
    @given(st.lists(st.tuples(st.booleans(), st.floats(-4, 4), st.floats(-4, 4), st.floats(0.1, 20)),
                    min_size=1, max_size=6),
           st.integers(0, 6), st.sampled_from([1, 2]))
    def test_additive_over_concatenation(self, raw, cut, k):
        p = d8()
        segs = [Hover(a, s / 10) if hover else Fly(a, b, s) for hover, a, b, s in raw]
        cut = min(cut, len(segs))
        whole = trajectory_energy(p, Trajectory(segs), k)
        parts = trajectory_energy(p, Trajectory(segs[:cut]), k) + trajectory_energy(p, Trajectory(segs[cut:]), k)
        assert whole == pytest.approx(parts, rel=1e-12, abs=1e-20)

    @pytest.mark.property
    @prop()
    @given(st.floats(-6, 6), st.floats(-6, 6), st.floats(0.5, 30), st.sampled_from([1, 2]))
    def test_fly_matches_quadrature(self, a, b, speed, k):
        if abs(a - b) < 1e-3:
            return
        p = SystemParams(D=8.0, T=abs(b - a) / speed)
        traj = Trajectory([Fly(a, b, speed)])
        assert rel(quadrature_energy(p, traj, k, 100_000), trajectory_energy(p, traj, k)) <= 1e-8


class TestSpeedFeasibility:
    def test_examples(self):
        p0 = d8(V=0.0)
        assert max_speed_feasible(p0, Trajectory.hover(1.0, 1.0))
        assert max_speed_feasible(p0, Trajectory([Hover(1.0, 0.5), Hover(1.0, 0.5)]))
        assert not max_speed_feasible(p0, Trajectory([Hover(-1.0, 0.5), Hover(1.0, 0.5)]))
        p = d8(V=10.0)
        assert max_speed_feasible(p, Trajectory([Fly(0.0, 1.0, 10.0)]))
        assert not max_speed_feasible(p, Trajectory([Fly(0.0, 1.0, 10.1)]))
        assert max_speed_feasible(d8(V=UNBOUNDED), Trajectory([Hover(-1, 0.5), Hover(1, 0.5)]))

    def test_validate(self):
        p = d8()
        Trajectory([Hover(-1.0, 0.4), Fly(-1.0, 1.0, 10.0), Hover(1.0, 0.4)]).validate(p)
        with pytest.raises(ValueError, match="sum"):
            Trajectory.hover(0.0, 0.5).validate(p)
        with pytest.raises(ValueError, match="discontinuous"):
            Trajectory([Hover(-1.0, 0.5), Hover(1.0, 0.5)]).validate(p)
        Trajectory([Hover(-1.0, 0.5), Hover(1.0, 0.5)]).validate(p, allow_jumps=True)
        with pytest.raises(ValueError, match="exceeds"):
            Trajectory([Fly(-4.0, 4.0, 16.0), Hover(4.0, 0.5)]).validate(p)


class TestTrajectory:
    def test_segment_validation(self):
        with pytest.raises(ValueError):
            Hover(0.0, -1.0)
        with pytest.raises(ValueError):
            Fly(0.0, 1.0, 0.0)
        assert Fly(0.0, 3.0, 2.0).duration == 1.5

    def test_position_at(self):
        traj = Trajectory([Hover(-1.0, 0.5), Fly(-1.0, 1.0, 4.0), Hover(1.0, 0.0)])
        x = traj.position_at([0.0, 0.25, 0.5, 0.75, 1.0, 5.0])
        assert np.allclose(x, [-1.0, -1.0, -1.0, 0.0, 1.0, 1.0])

    def test_position_at_jump_takes_later_segment(self):
        traj = Trajectory([Hover(-2.0, 0.5), Hover(2.0, 0.5)])
        assert traj.position_at(0.5) == 2.0

    def test_serialization_round_trip(self):
        traj = Trajectory([Hover(-1.0, 0.25), Fly(-1.0, 2.0, 6.0), Hover(2.0, 0.25)])
        assert Trajectory.from_dict(traj.to_dict()) == traj
        with pytest.raises(ValueError):
            Trajectory.from_dict([{"type": "teleport"}])

    def test_mirror_and_occupation(self):
        traj = Trajectory([Hover(-1.0, 0.3), Hover(2.0, 0.7)])
        m = traj.mirrored()
        assert m.to_dict()[0]["x"] == 1.0
        assert m.occupation() == {1.0: 0.3, -2.0: 0.7}

    def test_immutable(self):
        with pytest.raises(AttributeError):
            Trajectory().segments = ()

    def test_energy_pair(self):
        e = EnergyPair(1.0, 2.0)
        assert e.total == 3.0 and e[2] == 2.0
        with pytest.raises(ValueError):
            EnergyPair(-1.0, 0.0)
