"""Command-line front end.

Subcommands::

    wpt-trajopt solve CONFIG --alpha1 A --solver {p1,p2,static} --out FILE
    wpt-trajopt region CONFIG --solvers p2,p1,static --n-alpha N --out-dir DIR
    wpt-trajopt verify CONFIG --suite {psi,duality,quadrature,dp,all}
    wpt-trajopt power-vs-distance CONFIG --d-min A --d-max B --n N --out FILE

CONFIG is a JSON scenario file; parameter flags (``--D-m 8`` etc.) override
it. Every data file is accompanied by exactly one manifest. Data files are
deterministic; only the manifest carries wall-clock information.

Exit codes: 0 ok, 1 verification failure, 2 usage or invalid config,
3 solver diagnostic.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__, kernels
from .model import EnergyPair, EnergyProfile, SystemParams, Trajectory, harvested_power, trajectory_energies
from .oracle import DpConfig, dp_p1, ellipsoid_dual, grid_max_psi, quadrature_energy, static_benchmark
from .p2 import SolverDiagnostic, dual_function, solve_dual, solve_p2
from .planner import solve_p1
from .psi import maximize_psi, symmetric_optimum
from .region import (
    DEFAULT_N_ALPHA,
    DEFAULT_N_STATIC,
    best_static_hover,
    check_convexity,
    check_inclusion,
    pointwise_gap,
    solve_point,
    static_profile_sweep,
    sweep,
)

__all__ = ["main", "RunManifest", "ConfigError", "load_config", "EXIT_OK", "EXIT_VERIFY",
           "EXIT_USAGE", "EXIT_SOLVER"]

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3

# Parameter override flags: option name -> config key.
_PARAM_FLAGS = {
    "H_m": "H_m",
    "D_m": "D_m",
    "P_dBm": "P_dBm",
    "eta": "eta",
    "beta0_dB": "beta0_dB",
    "T_s": "T_s",
    "V_mps": "V_mps",
}


class ConfigError(Exception):
    """Invalid scenario file; the message is anchored to a file line."""


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _key_line(text: str, key: str) -> int:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def load_config(path: Path, overrides: Optional[dict[str, Any]] = None) -> SystemParams:
    """Parse and validate a scenario file; ``overrides`` win over its keys."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}:1: config must be a JSON object")
    merged = dict(cfg)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return SystemParams.from_config(merged)
    except KeyError as exc:
        key = exc.args[0]
        raise ConfigError(f"{path}:{_key_line(text, key)}: unknown key {key!r}") from exc
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        key = msg.split(":", 1)[0]
        if overrides and overrides.get(key) is not None:
            raise ConfigError(f"--{key.replace('_', '-')}: {msg}") from exc
        line = _key_line(text, key) if key in _PARAM_FLAGS else 1
        raise ConfigError(f"{path}:{line}: {msg}") from exc


@dataclass
class RunManifest:
    command: str
    params: dict[str, Any]
    options: dict[str, Any]
    outputs: list[str] = field(default_factory=list)
    wall_clock_s: float = 0.0
    version: str = __version__
    backend: str = kernels.BACKEND
    seed: Optional[int] = None
    started: float = field(default_factory=time.perf_counter, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "params": self.params,
            "options": self.options,
            "outputs": self.outputs,
            "wall_clock_s": self.wall_clock_s,
            "version": self.version,
            "backend": self.backend,
            "seed": self.seed,
        }

    def write(self, path: Path) -> None:
        self.wall_clock_s = time.perf_counter() - self.started
        path.write_text(_dump(self.to_dict()))


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


# ---------------------------------------------------------------- solve


def solve_static(params: SystemParams, profile: EnergyProfile) -> tuple[float, EnergyPair]:
    """Best single hover under the profile: grid search, polished by the exact optimum."""
    x, pair = static_benchmark(params, profile)
    xs = best_static_hover(params, profile)
    cand = EnergyPair(params.T * harvested_power(params, xs, 1),
                      params.T * harvested_power(params, xs, 2))
    if profile.objective(cand.e1, cand.e2) >= profile.objective(pair.e1, pair.e2):
        x, pair = xs, cand
    return x, pair


def solve_outcome(params: SystemParams, alpha1: float, solver: str) -> dict[str, Any]:
    profile = EnergyProfile.from_alpha1(alpha1)
    out: dict[str, Any] = {"solver": solver, "alpha1": alpha1, "params": params.to_dict()}
    dual = None
    extra: dict[str, Any] = {}
    if solver == "p2":
        sol = solve_p2(params, profile)
        traj, e = sol.trajectory, sol.energies
        dual = sol.dual.to_dict()
        extra = {"dual_value_J": sol.dual_value, "tau_s": sol.tau}
    elif solver == "p1":
        sol1 = solve_p1(params, profile)
        traj, e = sol1.trajectory, sol1.energies
        if sol1.p2 is not None:
            dual = sol1.p2.dual.to_dict()
        extra = {"exactness": sol1.exactness.value,
                 "plan": sol1.plan.to_dict() if sol1.plan else None}
    else:
        x, e = solve_static(params, profile)
        traj = Trajectory.hover(x, params.T)
    out.update({
        "trajectory": traj.to_dict(),
        "energies": {"E1_J": e.e1, "E2_J": e.e2, "total_J": e.total},
        "objective_J": profile.objective(e.e1, e.e2),
        "dual": dual,
    })
    out.update(extra)
    return out


def cmd_solve(args: argparse.Namespace, params: SystemParams, manifest: RunManifest) -> int:
    if not 0.0 <= args.alpha1 <= 1.0:
        raise UsageError(f"--alpha1 must lie in [0, 1], got {args.alpha1}")
    outcome = solve_outcome(params, args.alpha1, args.solver)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(_dump(outcome))
    manifest.outputs.append(str(out))
    manifest.write(_manifest_path(out))
    e = outcome["energies"]
    print(f"{args.solver}: E1={e['E1_J']:.6e} J  E2={e['E2_J']:.6e} J  -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------- region


def region_report(params: SystemParams, boundaries: dict[str, Any],
                  n_alpha: int = DEFAULT_N_ALPHA) -> dict[str, Any]:
    """Convexity of each boundary, the inclusion chain and the regime-equivalence verdict.

    Envelope dominance only runs from the smaller regime to the larger one:
    the concave envelope of the static locus already spans the time-sharing
    region, so the reverse test says nothing. Equivalence and strictness are
    judged pointwise instead, with every regime solved on the same profiles.
    """
    report: dict[str, Any] = {"params": params.to_dict(), "convexity": {}, "inclusion": {}}
    for name, b in boundaries.items():
        c = check_convexity(b)
        report["convexity"][name] = {"concave": c.concave, "max_violation": c.max_violation,
                                     "n_points": c.n_points}
    order = [s for s in ("static", "p1", "p2") if s in boundaries]
    for i, inner in enumerate(order):
        for outer in order[i + 1:]:
            r = check_inclusion(boundaries[inner], boundaries[outer])
            report["inclusion"][f"{inner}_in_{outer}"] = {
                "included": r.included,
                "max_deficit_W": r.max_deficit,
                "n_violations": len(r.violations),
            }
    report["chain"] = order
    report["chain_holds"] = all(v["included"] for v in report["inclusion"].values())

    # Pointwise comparison on a shared alpha grid.
    shared = {name: static_profile_sweep(params, n_alpha) if name == "static" else boundaries[name]
              for name in order}
    gaps: dict[str, Optional[float]] = {}
    for i, a in enumerate(order):
        for b in order[i + 1:]:
            try:
                gaps[f"{a}_vs_{b}"] = pointwise_gap(shared[a], shared[b])
            except ValueError:
                gaps[f"{a}_vs_{b}"] = None  # a failed point leaves the grids misaligned
    report["pointwise_gap_W"] = gaps
    report["equivalent"] = bool(len(order) > 1 and all(g is not None and g <= 1e-9 for g in gaps.values()))

    vals = {}
    for name in order:
        e1, e2 = solve_point(params, name, 0.5) or (math.nan, math.nan)
        vals[name] = min(e1, e2)
    report["equal_split_W"] = vals
    report["strict_chain"] = bool(len(order) > 1 and all(
        vals[b] - vals[a] > 1e-9 for a, b in zip(order, order[1:])))
    return report


def cmd_region(args: argparse.Namespace, params: SystemParams, manifest: RunManifest) -> int:
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    bad = [s for s in solvers if s not in ("p1", "p2", "static")]
    if bad or not solvers:
        raise UsageError(f"--solvers: unknown solver(s) {bad or solvers}; choose from p1,p2,static")
    if args.n_alpha < 3:
        raise UsageError("--n-alpha must be >= 3")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    boundaries = {}
    for s in dict.fromkeys(solvers):
        b = sweep(params, s, n_alpha=args.n_alpha, n_static=args.n_static, threads=args.threads)
        boundaries[s] = b
        path = out_dir / f"region_{s}.csv"
        path.write_text(b.to_csv())
        manifest.outputs.append(str(path))
        if b.failures:
            print(f"warning: {len(b.failures)} {s} point(s) failed", file=sys.stderr)
    report = region_report(params, boundaries, args.n_alpha)
    rpath = out_dir / "report.json"
    rpath.write_text(_dump(report))
    manifest.outputs.append(str(rpath))
    manifest.write(out_dir / "manifest.json")
    print(f"regimes equivalent: {report['equivalent']}  strict chain: {report['strict_chain']}")
    for name, c in report["convexity"].items():
        print(f"  {name:6s} concave={c['concave']}  max_violation={c['max_violation']:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------- verify


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    measured: float
    tolerance: float
    passed: bool
    note: str = ""


def _check(suite: str, name: str, measured: float, tol: float, note: str = "") -> Check:
    return Check(suite, name, measured, tol, bool(measured <= tol), note)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def suite_psi(params: SystemParams, args: argparse.Namespace, rng: np.random.Generator) -> list[Check]:
    checks = []
    res = maximize_psi(params, 1.0, 1.0)
    xg, vg = grid_max_psi(params, 1.0, 1.0)
    sym = symmetric_optimum(params)
    if sym.xi is not None:
        pos_gap = min(abs(abs(xg) - sym.xi), abs(xg - res.x))
        checks.append(_check("psi", "xi vs grid argmax [m]", abs(abs(xg) - sym.xi), 1e-3))
    else:
        pos_gap = min(abs(xg - x) for x in res.maximizers)
        checks.append(_check("psi", "argmax vs grid [m]", pos_gap, 1e-3, "below threshold"))
    checks.append(_check("psi", "max value vs grid [rel]", _rel(res.value, vg), 1e-8))
    worst_v = 0.0
    for _ in range(args.draws):
        l1, l2 = rng.uniform(0.0, 1.0, 2) + 1e-3
        r = maximize_psi(params, float(l1), float(l2))
        _, v = grid_max_psi(params, float(l1), float(l2), 20_001)
        # The closed form must never lose to the grid.
        worst_v = max(worst_v, (v - r.value) / v)
    checks.append(_check("psi", f"random weights, grid excess [rel] ({args.draws} draws)", worst_v, 1e-12))
    return checks


def _alpha_grid(n: int, rng: np.random.Generator, draws: int) -> list[float]:
    return [float(a) for a in np.linspace(0.0, 1.0, n)] + [float(a) for a in rng.uniform(0, 1, draws)]


def suite_duality(params: SystemParams, args: argparse.Namespace, rng: np.random.Generator) -> list[Check]:
    worst = 0.0
    alphas = _alpha_grid(101, rng, args.draws)
    for a in alphas:
        sol = solve_p2(params, EnergyProfile.from_alpha1(a))
        worst = max(worst, _rel(sol.dual_value, sol.objective))
    checks = [_check("duality", f"|dual - primal| / primal ({len(alphas)} profiles)", worst, 1e-6)]
    worst_e = 0.0
    for a in np.linspace(0.05, 0.95, 10):
        profile = EnergyProfile.from_alpha1(float(a))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            ell = ellipsoid_dual(params, profile)
        ref, _ = dual_function(params, solve_dual(params, profile))
        worst_e = max(worst_e, _rel(ell.value, ref))
    checks.append(_check("duality", "ellipsoid vs golden-section dual [rel]", worst_e, 1e-4))
    return checks


def suite_quadrature(params: SystemParams, args: argparse.Namespace, rng: np.random.Generator) -> list[Check]:
    worst = 0.0
    cases = [0.5, 0.7, 0.3] + [float(a) for a in rng.uniform(0.05, 0.95, min(args.draws, 10))]
    for a in cases:
        profile = EnergyProfile.from_alpha1(a)
        for traj in (solve_p1(params, profile).trajectory, solve_p2(params, profile).trajectory):
            for k, e in enumerate(trajectory_energies(params, traj), start=1):
                worst = max(worst, _rel(quadrature_energy(params, traj, k), e))
    return [_check("quadrature", f"closed form vs trapezoid [rel] ({len(cases)} profiles)", worst, 1e-6)]


def suite_dp(params: SystemParams, args: argparse.Namespace, rng: np.random.Generator) -> list[Check]:
    profile = EnergyProfile.from_alpha1(args.dp_alpha1)
    cfg = DpConfig(dx=args.dx, dt=args.dt)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        dp = dp_p1(params, profile, cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    p1 = solve_p1(params, profile)
    if dp.degenerate:
        # The grid cannot move, so the DP is a static search and only a lower bound.
        excess = max(dp.objective - p1.objective, 0.0) / p1.objective
        return [_check("dp", "degenerate dp (static) above planner [rel]", excess, 0.02,
                       "grid too coarse for motion")]
    gap = _rel(dp.energies.total, p1.energies.total)
    return [_check("dp", f"dp vs planner total energy [rel] (alpha1={args.dp_alpha1})", gap, 0.02)]


SUITES: dict[str, Callable] = {
    "psi": suite_psi,
    "duality": suite_duality,
    "quadrature": suite_quadrature,
    "dp": suite_dp,
}


def cmd_verify(args: argparse.Namespace, params: SystemParams, manifest: RunManifest) -> int:
    rng = np.random.default_rng(args.seed)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    checks: list[Check] = []
    for name in names:
        checks.extend(SUITES[name](params, args, rng))
    width = max(len(c.name) for c in checks)
    print(f"{'suite':10s} {'check':{width}s} {'measured':>12s} {'tolerance':>10s}  result")
    for c in checks:
        flag = "PASS" if c.passed else "FAIL"
        note = f"  ({c.note})" if c.note else ""
        print(f"{c.suite:10s} {c.name:{width}s} {c.measured:12.3e} {c.tolerance:10.1e}  {flag}{note}")
    failed = [c for c in checks if not c.passed]
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(_dump({"checks": [c.__dict__ for c in checks], "passed": not failed}))
        manifest.outputs.append(str(out))
        manifest.write(_manifest_path(out))
    for c in failed:
        print(f"FAILED: {c.suite}: {c.name}: {c.measured:.3e} > {c.tolerance:.1e}", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------- power vs distance


def power_vs_distance_rows(params: SystemParams, d_values: Sequence[float]) -> list[tuple[float, float, float, float]]:
    """(D, static, p1, p2) common average power per ER at the equal split."""
    half = EnergyProfile.from_alpha1(0.5)
    rows = []
    for D in d_values:
        p = params.with_(D=float(D))
        _, es = solve_static(p, half)
        e1 = solve_p1(p, half).energies
        e2 = solve_p2(p, half).energies
        rows.append((float(D), min(es.e1, es.e2) / p.T, min(e1.e1, e1.e2) / p.T, min(e2.e1, e2.e2) / p.T))
    return rows


def cmd_power_vs_distance(args: argparse.Namespace, params: SystemParams, manifest: RunManifest) -> int:
    if not (0.0 <= args.d_min < args.d_max) or not math.isfinite(args.d_max):
        raise UsageError(f"need 0 <= --d-min < --d-max, got {args.d_min}, {args.d_max}")
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    rows = power_vs_distance_rows(params, np.linspace(args.d_min, args.d_max, args.n))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["D_m", "static_W", "p1_W", "p2_W"])
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(buf.getvalue())
    manifest.outputs.append(str(out))
    manifest.write(_manifest_path(out))
    print(f"{len(rows)} rows -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wpt-trajopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("config", type=Path, help="scenario JSON file")
        g = p.add_argument_group("parameter overrides (win over the config file)")
        for key in ("H_m", "D_m", "P_dBm", "eta", "beta0_dB", "T_s"):
            g.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float, default=None)
        g.add_argument("--V-mps", dest="V_mps", type=_speed, default=None, help='m/s or "inf"')
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for sweeps (default $WPT_TRAJOPT_THREADS or 1; 0 = all cores)")

    p = sub.add_parser("solve", help="solve one energy profile")
    common(p)
    p.add_argument("--alpha1", type=float, required=True)
    p.add_argument("--solver", choices=["p1", "p2", "static"], default="p1")
    p.add_argument("--out", required=True)

    p = sub.add_parser("region", help="sweep region boundaries and compare them")
    common(p)
    p.add_argument("--solvers", default="p2,p1,static", help="comma-separated subset of p1,p2,static")
    p.add_argument("--n-alpha", type=int, default=DEFAULT_N_ALPHA)
    p.add_argument("--n-static", type=int, default=DEFAULT_N_STATIC)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("verify", help="cross-check solvers against brute-force oracles")
    common(p)
    p.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=20, help="random extra cases per suite")
    p.add_argument("--dx", type=float, default=DpConfig.dx)
    p.add_argument("--dt", type=float, default=DpConfig.dt)
    p.add_argument("--dp-alpha1", type=float, default=0.5)
    p.add_argument("--out", default=None, help="optional JSON report")

    p = sub.add_parser("power-vs-distance", help="equal-split power against ER separation")
    common(p)
    p.add_argument("--d-min", type=float, required=True)
    p.add_argument("--d-max", type=float, required=True)
    p.add_argument("--n", type=int, default=31)
    p.add_argument("--out", required=True)
    return parser


def _speed(text: str) -> Any:
    if text.strip().lower() in ("inf", "infinity", "unbounded"):
        return "inf"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'inf', got {text!r}") from None


COMMANDS = {
    "solve": cmd_solve,
    "region": cmd_region,
    "verify": cmd_verify,
    "power-vs-distance": cmd_power_vs_distance,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    overrides = {key: getattr(args, key) for key in _PARAM_FLAGS}
    options = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
               if k not in _PARAM_FLAGS and k != "command"}
    try:
        params = load_config(args.config, overrides)
        manifest = RunManifest(args.command, params.to_dict(), options, seed=getattr(args, "seed", None))
        code = COMMANDS[args.command](args, params, manifest)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverDiagnostic as exc:
        print(f"solver diagnostic: {exc}", file=sys.stderr)
        if exc.candidate is not None:
            print(f"closest candidate: {exc.candidate}", file=sys.stderr)
        return EXIT_SOLVER
    return code


if __name__ == "__main__":
    sys.exit(main())
