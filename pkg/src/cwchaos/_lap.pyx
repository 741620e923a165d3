# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled dense linear assignment kernel.

Shortest-augmenting-path with dual potentials, O(n^3); mirrors the
pure-Python kernel in ``_lap_py.py`` with straight C loops.
"""

import numpy as np

cdef double INF = float("inf")


def solve(cost_in):
    """Minimum-cost perfect matching; returns (col4row, total)."""
    cost_arr = np.ascontiguousarray(cost_in, dtype=np.float64)
    if cost_arr.ndim != 2 or cost_arr.shape[0] != cost_arr.shape[1]:
        raise ValueError("cost matrix must be square")
    if not np.isfinite(cost_arr).all():
        raise ValueError("cost matrix must be finite")

    cdef double[:, ::1] cost = cost_arr
    cdef Py_ssize_t n = cost.shape[0]

    u_arr = np.zeros(n)
    v_arr = np.zeros(n)
    shortest_arr = np.empty(n)
    col4row_arr = np.full(n, -1, dtype=np.intp)
    row4col_arr = np.full(n, -1, dtype=np.intp)
    path_arr = np.full(n, -1, dtype=np.intp)
    sr_arr = np.zeros(n, dtype=np.uint8)
    sc_arr = np.zeros(n, dtype=np.uint8)

    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef double[::1] shortest = shortest_arr
    cdef Py_ssize_t[::1] col4row = col4row_arr
    cdef Py_ssize_t[::1] row4col = row4col_arr
    cdef Py_ssize_t[::1] path = path_arr
    cdef unsigned char[::1] sr = sr_arr
    cdef unsigned char[::1] sc = sc_arr

    cdef Py_ssize_t cur_row, i, j, sink, jmin, tmp
    cdef double min_val, r, best
    cdef double total = 0.0

    for cur_row in range(n):
        for j in range(n):
            shortest[j] = INF
            path[j] = -1
            sr[j] = 0
            sc[j] = 0
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink == -1:
            sr[i] = 1
            jmin = -1
            best = INF
            for j in range(n):
                if sc[j]:
                    continue
                r = min_val + cost[i, j] - u[i] - v[j]
                if r < shortest[j]:
                    shortest[j] = r
                    path[j] = i
                if shortest[j] < best:
                    best = shortest[j]
                    jmin = j
            j = jmin
            min_val = shortest[j]
            sc[j] = 1
            if row4col[j] == -1:
                sink = j
            else:
                i = row4col[j]

        u[cur_row] = u[cur_row] + min_val
        for i in range(n):
            if sr[i] and i != cur_row:
                u[i] = u[i] + (min_val - shortest[col4row[i]])
        for j in range(n):
            if sc[j]:
                v[j] = v[j] - (min_val - shortest[j])

        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            tmp = col4row[i]
            col4row[i] = j
            j = tmp
            if i == cur_row:
                break

    for i in range(n):
        total += cost[i, col4row[i]]
    return col4row_arr, total
