"""Compare the compiled and numpy kernel backends on the two hot loops.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is timed on the problem sizes used by the planner and the DP
oracle at the default scenario (D = 8 m, alpha1 = 0.7). Outputs are also
checked for agreement so a speedup never hides a divergence.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from wpt_trajopt.kernels import available_backends
from wpt_trajopt.model import SystemParams
from wpt_trajopt.planner import GRID_POINTS
from wpt_trajopt.psi import symmetric_optimum


def _time(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    p = SystemParams()
    xi = symmetric_optimum(p).xi
    grid = np.linspace(-xi, xi, GRID_POINTS)
    hfh_args = (grid, grid, p.gain, p.H, p.x1, p.x2, p.T, p.V, 0.7, 0.3)

    dx, dt, levels = 0.05, 0.005, 256
    x = np.linspace(-p.D / 2, p.D / 2, int(round(p.D / dx)) + 1)
    q1 = p.gain / ((x - p.x1) ** 2 + p.H ** 2)
    q2 = p.gain / ((x - p.x2) ** 2 + p.H ** 2)
    n_steps = int(round(p.T / dt))
    reach = int(math.floor(p.V * dt / (x[1] - x[0]) + 1e-9))
    width = p.T * p.gain / p.H ** 2 / levels * (1 + 1e-12)
    dp_args = (q1, q2, n_steps, reach, levels, width, dt)

    backends = available_backends()
    rows, outputs = [], {}
    for name, mod in backends.items():
        t_hfh = _time(lambda: mod.hfh_search(*hfh_args), args.repeat)
        t_dp = _time(lambda: mod.dp_frontier(*dp_args), args.repeat)
        outputs[name] = (mod.hfh_search(*hfh_args), mod.dp_frontier(*dp_args)[:2])
        rows.append((name, t_hfh, t_dp))

    print(f"{'backend':8s} {'hfh_search [ms]':>16s} {'dp_frontier [ms]':>17s}")
    for name, a, b in rows:
        print(f"{name:8s} {a * 1e3:16.2f} {b * 1e3:17.2f}")
    if "cython" in outputs:
        py, cy = outputs["python"], outputs["cython"]
        same = py[0][:2] == cy[0][:2] and all(np.array_equal(u, v) for u, v in zip(py[1], cy[1]))
        ref = dict((r[0], r[1:]) for r in rows)
        print(f"speedup: hfh x{ref['python'][0] / ref['cython'][0]:.1f}, "
              f"dp x{ref['python'][1] / ref['cython'][1]:.1f}; outputs identical: {same}")
    else:
        print("compiled backend not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
