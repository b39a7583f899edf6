"""Physical scenario, harvested-power law and piecewise trajectories.

Two energy receivers (ERs) sit on the ground at x1 = -D/2 and x2 = +D/2.
The UAV flies at fixed altitude H along the line through them and radiates
a constant power P. Under line-of-sight free-space path loss the power
harvested by ER k when the UAV is above ground position x is

    Q_k(x) = eta * beta0 * P / ((x - x_k)**2 + H**2)

Trajectories are sequences of hover and constant-speed fly segments, which
keeps energy evaluation exact: a hover contributes duration * Q_k and a
straight flight integrates to an arctan difference.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Any, Iterable, Sequence, Union

import numpy as np

__all__ = [
    "SpeedLimit",
    "UNBOUNDED",
    "SystemParams",
    "EnergyProfile",
    "EnergyPair",
    "Hover",
    "Fly",
    "Trajectory",
    "harvested_power",
    "segment_energy",
    "trajectory_energy",
    "trajectory_energies",
    "max_speed_feasible",
    "dbm_to_watts",
    "db_to_linear",
]

# Relative slack used when checking that segment durations add up to T.
_DURATION_RTOL = 1e-9


class SpeedLimit(enum.Enum):
    """Marker for a UAV without a maximum-speed constraint."""

    UNBOUNDED = "inf"

    def __repr__(self) -> str:
        return "UNBOUNDED"


UNBOUNDED = SpeedLimit.UNBOUNDED

Speed = Union[float, SpeedLimit]


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def db_to_linear(gain_db: float) -> float:
    return 10.0 ** (gain_db / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """Scenario geometry, radio parameters, charging duration and speed limit.

    ``V`` is either a non-negative float or :data:`UNBOUNDED`.
    """

    H: float = 5.0
    D: float = 8.0
    P: float = 10.0
    eta: float = 0.5
    beta0: float = 1e-3
    T: float = 1.0
    V: Speed = 10.0

    def __post_init__(self) -> None:
        for name in ("H", "P", "beta0", "T"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not (0.0 < self.eta < 1.0):
            raise ValueError(f"eta must lie in (0, 1), got {self.eta!r}")
        if not (math.isfinite(self.D) and self.D >= 0):
            raise ValueError(f"D must be finite and >= 0, got {self.D!r}")
        if isinstance(self.V, SpeedLimit):
            return
        if isinstance(self.V, bool) or not isinstance(self.V, (int, float)):
            raise TypeError(f"V must be a float or UNBOUNDED, got {self.V!r}")
        if not (math.isfinite(self.V) and self.V >= 0):
            raise ValueError(
                f"V must be finite and >= 0 (use UNBOUNDED for no limit), got {self.V!r}"
            )
        object.__setattr__(self, "V", float(self.V))

    @property
    def x1(self) -> float:
        return -self.D / 2.0

    @property
    def x2(self) -> float:
        return self.D / 2.0

    def er_position(self, k: int) -> float:
        if k == 1:
            return self.x1
        if k == 2:
            return self.x2
        raise ValueError(f"ER index must be 1 or 2, got {k!r}")

    @property
    def gain(self) -> float:
        """eta * beta0 * P, the numerator of the harvested-power law."""
        return self.eta * self.beta0 * self.P

    @property
    def speed_bounded(self) -> bool:
        return not isinstance(self.V, SpeedLimit)

    @property
    def threshold(self) -> float:
        """ER separation 2H/sqrt(3) above which a midpoint hover is no longer optimal."""
        return 2.0 * self.H / math.sqrt(3.0)

    def with_(self, **changes: Any) -> "SystemParams":
        return replace(self, **changes)

    # -- config (de)serialization -------------------------------------------

    def to_config(self) -> dict[str, Any]:
        """Config-file form: dBm / dB units, ``"inf"`` for an unbounded V."""
        return {
            "H_m": self.H,
            "D_m": self.D,
            "P_dBm": 10.0 * math.log10(self.P) + 30.0,
            "eta": self.eta,
            "beta0_dB": 10.0 * math.log10(self.beta0),
            "T_s": self.T,
            "V_mps": "inf" if not self.speed_bounded else self.V,
        }

    def to_dict(self) -> dict[str, Any]:
        """Linear-unit snapshot used in manifests and outputs."""
        return {
            "H": self.H,
            "D": self.D,
            "P": self.P,
            "eta": self.eta,
            "beta0": self.beta0,
            "T": self.T,
            "V": "inf" if not self.speed_bounded else self.V,
        }

    @classmethod
    def from_config(cls, cfg: dict[str, Any]) -> "SystemParams":
        """Build from a config mapping. Missing keys take the defaults.

        Raises ``KeyError`` for unknown keys and ``ValueError``/``TypeError``
        for bad values; the message names the offending key.
        """
        known = {"H_m", "D_m", "P_dBm", "eta", "beta0_dB", "T_s", "V_mps"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise KeyError(unknown[0])
        kwargs: dict[str, Any] = {}
        simple = {"H_m": "H", "D_m": "D", "eta": "eta", "T_s": "T"}
        for key, name in simple.items():
            if key in cfg:
                kwargs[name] = _as_number(key, cfg[key])
        if "P_dBm" in cfg:
            kwargs["P"] = dbm_to_watts(_as_number("P_dBm", cfg["P_dBm"]))
        if "beta0_dB" in cfg:
            kwargs["beta0"] = db_to_linear(_as_number("beta0_dB", cfg["beta0_dB"]))
        if "V_mps" in cfg:
            v = cfg["V_mps"]
            if isinstance(v, str):
                if v.strip().lower() not in ("inf", "infinity", "unbounded"):
                    raise ValueError(f"V_mps: expected a number or \"inf\", got {v!r}")
                kwargs["V"] = UNBOUNDED
            else:
                v = _as_number("V_mps", v)
                kwargs["V"] = UNBOUNDED if math.isinf(v) else v
        try:
            return cls(**kwargs)
        except (ValueError, TypeError) as exc:
            raise ValueError(_config_key_for(str(exc)) + str(exc)) from exc


def _as_number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"{key}: expected a number, got {value!r}")
    return float(value)


_FIELD_TO_KEY = {"H": "H_m", "D": "D_m", "P": "P_dBm", "eta": "eta",
                 "beta0": "beta0_dB", "T": "T_s", "V": "V_mps"}


def _config_key_for(message: str) -> str:
    name = message.split(" ", 1)[0]
    key = _FIELD_TO_KEY.get(name)
    return f"{key}: " if key else ""


@dataclass(frozen=True)
class EnergyProfile:
    """Target split (alpha1, alpha2) of the total energy between the ERs.

    Weights are normalized on construction so they sum to one exactly.
    """

    alpha1: float
    alpha2: float

    def __post_init__(self) -> None:
        a1, a2 = float(self.alpha1), float(self.alpha2)
        if not (math.isfinite(a1) and math.isfinite(a2)) or a1 < 0 or a2 < 0:
            raise ValueError(f"energy profile weights must be >= 0, got ({a1}, {a2})")
        s = a1 + a2
        if s <= 0:
            raise ValueError("energy profile weights must not both be zero")
        a1 = a1 / s
        object.__setattr__(self, "alpha1", a1)
        object.__setattr__(self, "alpha2", 1.0 - a1)

    @classmethod
    def from_alpha1(cls, alpha1: float) -> "EnergyProfile":
        if not 0.0 <= alpha1 <= 1.0:
            raise ValueError(f"alpha1 must lie in [0, 1], got {alpha1!r}")
        return cls(alpha1, 1.0 - alpha1)

    def __getitem__(self, k: int) -> float:
        if k == 1:
            return self.alpha1
        if k == 2:
            return self.alpha2
        raise IndexError(k)

    @property
    def is_equal_split(self) -> bool:
        return abs(self.alpha1 - 0.5) <= 1e-12

    def swapped(self) -> "EnergyProfile":
        return EnergyProfile(self.alpha2, self.alpha1)

    def objective(self, e1: float, e2: float) -> float:
        """Largest total E with e_k >= alpha_k * E for both ERs.

        Equals e1 + e2 when the pair splits exactly as the profile asks.
        """
        candidates = [e / a for e, a in ((e1, self.alpha1), (e2, self.alpha2)) if a > 0]
        return min(candidates)


@dataclass(frozen=True)
class EnergyPair:
    e1: float
    e2: float

    def __post_init__(self) -> None:
        if self.e1 < 0 or self.e2 < 0:
            raise ValueError(f"energies must be >= 0, got ({self.e1}, {self.e2})")

    @property
    def total(self) -> float:
        return self.e1 + self.e2

    def __getitem__(self, k: int) -> float:
        if k == 1:
            return self.e1
        if k == 2:
            return self.e2
        raise IndexError(k)

    def to_dict(self) -> dict[str, float]:
        return {"e1_J": self.e1, "e2_J": self.e2, "total_J": self.total}


# -- trajectories ------------------------------------------------------------


@dataclass(frozen=True)
class Hover:
    x: float
    duration: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ValueError(f"hover duration must be >= 0, got {self.duration!r}")

    @property
    def x_start(self) -> float:
        return self.x

    @property
    def x_end(self) -> float:
        return self.x

    def position(self, t: np.ndarray) -> np.ndarray:
        return np.full_like(t, self.x, dtype=float)

    def mirrored(self) -> "Hover":
        return Hover(-self.x, self.duration)

    def to_dict(self) -> dict[str, Any]:
        return {"type": "hover", "x": self.x, "duration": self.duration}


@dataclass(frozen=True)
class Fly:
    x_start: float
    x_end: float
    speed: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.speed) and self.speed > 0):
            raise ValueError(f"fly speed must be > 0, got {self.speed!r}")

    @property
    def duration(self) -> float:
        return abs(self.x_end - self.x_start) / self.speed

    def position(self, t: np.ndarray) -> np.ndarray:
        direction = math.copysign(1.0, self.x_end - self.x_start)
        return self.x_start + direction * self.speed * np.clip(t, 0.0, self.duration)

    def mirrored(self) -> "Fly":
        return Fly(-self.x_start, -self.x_end, self.speed)

    def to_dict(self) -> dict[str, Any]:
        return {"type": "fly", "x_start": self.x_start, "x_end": self.x_end, "speed": self.speed}


Segment = Union[Hover, Fly]


class Trajectory:
    """An ordered, immutable list of hover / fly segments starting at t = 0."""

    __slots__ = ("segments",)
    segments: tuple[Segment, ...]

    def __init__(self, segments: Iterable[Segment] = ()) -> None:
        object.__setattr__(self, "segments", tuple(segments))

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("Trajectory is immutable")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Trajectory) and self.segments == other.segments

    def __hash__(self) -> int:
        return hash(self.segments)

    def __repr__(self) -> str:
        return f"Trajectory({list(self.segments)!r})"

    def __iter__(self):
        return iter(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    @classmethod
    def hover(cls, x: float, duration: float) -> "Trajectory":
        return cls([Hover(x, duration)])

    @property
    def duration(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    def jumps(self, atol: float = 1e-9) -> list[tuple[float, float]]:
        """Positional discontinuities (from, to) between consecutive segments."""
        out = []
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.x_end - b.x_start) > atol:
                out.append((a.x_end, b.x_start))
        return out

    @property
    def is_continuous(self) -> bool:
        return not self.jumps()

    def positions(self) -> list[float]:
        """Distinct hover positions in order of appearance."""
        out: list[float] = []
        for s in self.segments:
            for x in (s.x_start, s.x_end):
                if not out or abs(out[-1] - x) > 1e-12:
                    out.append(x)
        return out

    def boundaries(self) -> list[tuple[float, float, float]]:
        """(t, x_before, x_after) at t = 0, each segment boundary, and t = end."""
        out = []
        t = 0.0
        prev = self.segments[0].x_start if self.segments else 0.0
        for s in self.segments:
            out.append((t, prev, s.x_start))
            t += s.duration
            prev = s.x_end
        out.append((t, prev, prev))
        return out

    def position_at(self, t: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
        """Position at time(s) t; at a jump the later segment wins."""
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        if not self.segments:
            out.fill(np.nan)
            return out
        start = 0.0
        assigned = np.zeros(t.shape, dtype=bool)
        for s in self.segments:
            end = start + s.duration
            mask = (~assigned) & (t < end)
            out[mask] = s.position(t[mask] - start)
            assigned |= mask
            start = end
        last = self.segments[-1]
        out[~assigned] = last.x_end
        return out

    def mirrored(self) -> "Trajectory":
        return Trajectory(s.mirrored() for s in self.segments)

    def occupation(self, ndigits: int = 9) -> dict[float, float]:
        """Total hover time per position (rounded key); fly segments ignored."""
        occ: dict[float, float] = {}
        for s in self.segments:
            if isinstance(s, Hover) and s.duration > 0:
                key = round(s.x, ndigits) + 0.0
                occ[key] = occ.get(key, 0.0) + s.duration
        return occ

    def validate(self, params: SystemParams, *, allow_jumps: bool = False) -> None:
        """Check duration == T, continuity and the speed limit.

        Raises ``ValueError`` describing the first violated invariant.
        """
        total = self.duration
        if abs(total - params.T) > _DURATION_RTOL * max(params.T, 1.0):
            raise ValueError(f"segment durations sum to {total!r}, expected T={params.T!r}")
        if not allow_jumps and self.jumps():
            raise ValueError(f"trajectory is discontinuous: {self.jumps()}")
        if params.speed_bounded:
            for s in self.segments:
                if isinstance(s, Fly) and s.speed > params.V:
                    raise ValueError(f"fly speed {s.speed} exceeds V={params.V}")

    def to_dict(self) -> list[dict[str, Any]]:
        return [s.to_dict() for s in self.segments]

    @classmethod
    def from_dict(cls, data: Sequence[dict[str, Any]]) -> "Trajectory":
        segs: list[Segment] = []
        for item in data:
            kind = item.get("type")
            if kind == "hover":
                segs.append(Hover(float(item["x"]), float(item["duration"])))
            elif kind == "fly":
                segs.append(Fly(float(item["x_start"]), float(item["x_end"]), float(item["speed"])))
            else:
                raise ValueError(f"unknown segment type {kind!r}")
        return cls(segs)


# -- energy ------------------------------------------------------------------


def harvested_power(params: SystemParams, x, k: int):
    """Instantaneous power (W) at ER ``k`` with the UAV above ``x``.

    Accepts scalars or numpy arrays for ``x``.
    """
    xk = params.er_position(k)
    return params.gain / ((x - xk) ** 2 + params.H**2)


def segment_energy(params: SystemParams, seg: Segment, k: int) -> float:
    if isinstance(seg, Hover):
        return seg.duration * harvested_power(params, seg.x, k)
    xk = params.er_position(k)
    H = params.H
    sweep = math.atan((seg.x_end - xk) / H) - math.atan((seg.x_start - xk) / H)
    return params.gain / (seg.speed * H) * abs(sweep)


def trajectory_energy(params: SystemParams, traj: Trajectory, k: int) -> float:
    """Exact energy (J) harvested by ER ``k`` along ``traj``."""
    params.er_position(k)
    return math.fsum(segment_energy(params, s, k) for s in traj.segments)


def trajectory_energies(params: SystemParams, traj: Trajectory) -> EnergyPair:
    return EnergyPair(trajectory_energy(params, traj, 1), trajectory_energy(params, traj, 2))


def max_speed_feasible(params: SystemParams, traj: Trajectory) -> bool:
    """True iff every fly segment respects V and there is no positional jump.

    A jump is an instantaneous move and is only admissible without a speed
    limit.
    """
    if not params.speed_bounded:
        return True
    if traj.jumps():
        return False
    return all(s.speed <= params.V for s in traj.segments if isinstance(s, Fly))
