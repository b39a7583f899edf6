"""Trajectory design for a UAV-mounted wireless power transmitter serving two ground receivers."""

from .kernels import BACKEND
from .model import (
    UNBOUNDED,
    EnergyPair,
    EnergyProfile,
    Fly,
    Hover,
    SpeedLimit,
    SystemParams,
    Trajectory,
    harvested_power,
    max_speed_feasible,
    segment_energy,
    trajectory_energies,
    trajectory_energy,
)
from .p2 import DualPoint, P2Solution, SolverDiagnostic, solve_dual, solve_p2
from .planner import Exactness, HoverFlyHoverPlan, P1Solution, PlannerError, solve_p1
from .psi import maximize_psi, symmetric_optimum
from .region import Regime, RegionBoundary, check_convexity, check_inclusion, sweep

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "UNBOUNDED",
    "DualPoint",
    "EnergyPair",
    "EnergyProfile",
    "Exactness",
    "Fly",
    "Hover",
    "HoverFlyHoverPlan",
    "P1Solution",
    "P2Solution",
    "PlannerError",
    "Regime",
    "RegionBoundary",
    "SolverDiagnostic",
    "SpeedLimit",
    "SystemParams",
    "Trajectory",
    "check_convexity",
    "check_inclusion",
    "harvested_power",
    "max_speed_feasible",
    "maximize_psi",
    "segment_energy",
    "solve_dual",
    "solve_p1",
    "solve_p2",
    "sweep",
    "symmetric_optimum",
    "trajectory_energies",
    "trajectory_energy",
    "__version__",
]
