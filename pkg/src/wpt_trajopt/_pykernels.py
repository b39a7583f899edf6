"""Pure numpy kernels, used when the compiled extension is unavailable.

The compiled twins in ``_ckernels.pyx`` must give bit-identical results,
including tie-breaking.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def hfh_search(x1s, x2s, gain, H, er1, er2, T, V, alpha1, alpha2):
    """Best fair hover-fly-hover plan over the pairs (x1s[i], x2s[j]), x2 >= x1.

    For a pair the first hover time t enters both ER energies affinely, so
    the fairness condition alpha2*E1 = alpha1*E2 fixes t. Pairs whose t
    falls outside [0, T - flight time] are discarded. Returns
    ``(i, j, t, total)`` for the best pair (ties go to the smallest i, then
    j) or ``(-1, -1, nan, -inf)`` if no pair is feasible.
    """
    x1 = np.asarray(x1s, dtype=float)[:, None]
    x2 = np.asarray(x2s, dtype=float)[None, :]
    H2 = H * H
    tf = (x2 - x1) / V
    q11 = gain / ((x1 - er1) ** 2 + H2)
    q21 = gain / ((x1 - er2) ** 2 + H2)
    q12 = gain / ((x2 - er1) ** 2 + H2)
    q22 = gain / ((x2 - er2) ** 2 + H2)
    c = gain / (V * H)
    f1 = c * (np.arctan((x2 - er1) / H) - np.arctan((x1 - er1) / H))
    f2 = c * (np.arctan((x2 - er2) / H) - np.arctan((x1 - er2) / H))
    a1 = q11 - q12
    a2 = q21 - q22
    b1 = (T - tf) * q12 + f1
    b2 = (T - tf) * q22 + f2
    den = alpha2 * a1 - alpha1 * a2
    num = alpha1 * b2 - alpha2 * b1
    scale = np.abs(alpha2 * b1) + np.abs(alpha1 * b2)
    degenerate = np.abs(den) * T <= 1e-12 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(degenerate, 0.0, num / np.where(degenerate, 1.0, den))
    ok_deg = np.abs(num) <= 1e-9 * scale
    window = T - tf
    slack = 1e-12 * T
    feasible = (x2 >= x1) & (window >= -slack) & (t >= -slack) & (t <= window + slack)
    feasible &= np.where(degenerate, ok_deg, True)
    t = np.clip(t, 0.0, np.maximum(window, 0.0))
    total = (a1 + a2) * t + b1 + b2
    total = np.where(feasible, total, -np.inf)
    flat = int(np.argmax(total))
    i, j = divmod(flat, total.shape[1])
    if not np.isfinite(total[i, j]):
        return -1, -1, float("nan"), float("-inf")
    return i, j, float(t[i, j]), float(total[i, j])


def dp_frontier(q1, q2, n_steps, reach, n_levels, level_width, dt):
    """Bi-objective DP over (step, position) with a quantized E2 frontier.

    State (p, l) at a step keeps the largest E1 among paths ending at
    position p whose E2 falls in bin l, together with that path's exact E2.
    Empty states hold E1 = -1. ``parents[s, p, l]`` is the flat index
    ``src * n_levels + level`` of the predecessor at step s - 1 (-1 at s = 0).
    Among equal E1 the smallest predecessor index wins.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    n_pos = q1.shape[0]
    L = n_levels
    parents = np.full((n_steps, n_pos, L), -1, dtype=np.int32)
    e1 = np.full((n_pos, L), -1.0)
    e2 = np.zeros((n_pos, L))
    lvl0 = np.minimum((dt * q2 / level_width).astype(np.int64), L - 1)
    e1[np.arange(n_pos), lvl0] = dt * q1
    e2[np.arange(n_pos), lvl0] = dt * q2

    src_idx = np.arange(n_pos)
    for step in range(1, n_steps):
        cand_tgt, cand_e1, cand_e2, cand_par = [], [], [], []
        for m in range(-reach, reach + 1):
            tgt = src_idx - m  # source = target + m
            ok = (tgt >= 0) & (tgt < n_pos)
            src = src_idx[ok]
            tgt = tgt[ok]
            valid = e1[src] >= 0.0
            s_rows, levels = np.nonzero(valid)
            s = src[s_rows]
            p = tgt[s_rows]
            ne1 = e1[s, levels] + dt * q1[p]
            ne2 = e2[s, levels] + dt * q2[p]
            nl = np.minimum((ne2 / level_width).astype(np.int64), L - 1)
            cand_tgt.append(p * L + nl)
            cand_e1.append(ne1)
            cand_e2.append(ne2)
            cand_par.append(s * L + levels)
        tgt_flat = np.concatenate(cand_tgt)
        ce1 = np.concatenate(cand_e1)
        ce2 = np.concatenate(cand_e2)
        cpar = np.concatenate(cand_par)
        # Per target: largest E1, then smallest parent index.
        order = np.lexsort((cpar, -ce1, tgt_flat))
        tgt_sorted = tgt_flat[order]
        first = np.ones(order.shape[0], dtype=bool)
        first[1:] = tgt_sorted[1:] != tgt_sorted[:-1]
        win = order[first]
        e1 = np.full((n_pos, L), -1.0)
        e2 = np.zeros((n_pos, L))
        flat_e1 = e1.reshape(-1)
        flat_e2 = e2.reshape(-1)
        flat_e1[tgt_flat[win]] = ce1[win]
        flat_e2[tgt_flat[win]] = ce2[win]
        parents[step].reshape(-1)[tgt_flat[win]] = cpar[win]
    return e1, e2, parents
