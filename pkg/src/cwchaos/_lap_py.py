"""Pure-Python dense linear assignment kernel (numpy-vectorized scans).

Shortest-augmenting-path algorithm with dual potentials, O(n^3): one
Dijkstra-style search per row, growing the matching by one augmenting path
each time.  Same algorithm as the compiled kernel in ``_lap.pyx``; this
implementation vectorizes the per-column relaxation scan with numpy and is
the import-time fallback when the extension is unavailable.
"""

from __future__ import annotations

import numpy as np


def solve(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum-cost perfect matching of a square cost matrix.

    Returns (col4row, total): column assigned to each row, and the total
    cost of the optimal assignment.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    n, m = cost.shape
    if n != m:
        raise ValueError("cost matrix must be square")
    if not np.isfinite(cost).all():
        raise ValueError("cost matrix must be finite")

    u = np.zeros(n)
    v = np.zeros(n)
    col4row = np.full(n, -1, dtype=np.intp)
    row4col = np.full(n, -1, dtype=np.intp)

    for cur_row in range(n):
        shortest = np.full(n, np.inf)
        path = np.full(n, -1, dtype=np.intp)
        scanned_rows = np.zeros(n, dtype=bool)
        scanned_cols = np.zeros(n, dtype=bool)
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink == -1:
            scanned_rows[i] = True
            free = ~scanned_cols
            reduced = min_val + cost[i, free] - u[i] - v[free]
            better = reduced < shortest[free]
            if better.any():
                sf = shortest[free]
                sf[better] = reduced[better]
                shortest[free] = sf
                pf = path[free]
                pf[better] = i
                path[free] = pf
            free_idx = np.nonzero(free)[0]
            j = free_idx[np.argmin(shortest[free_idx])]
            min_val = shortest[j]
            scanned_cols[j] = True
            if row4col[j] == -1:
                sink = j
            else:
                i = row4col[j]

        u[cur_row] += min_val
        other = scanned_rows.copy()
        other[cur_row] = False
        ridx = np.nonzero(other)[0]
        u[ridx] += min_val - shortest[col4row[ridx]]
        cidx = np.nonzero(scanned_cols)[0]
        v[cidx] -= min_val - shortest[cidx]

        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            col4row[i], j = j, col4row[i]
            if i == cur_row:
                break

    total = float(cost[np.arange(n), col4row].sum())
    return col4row, total
