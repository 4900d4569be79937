# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Grid-search kernel, compiled twin of astar_py.

Identical cost model, neighbor order, and (f, cell index) tie-breaking, so it
returns exactly the same path as the pure-Python implementation.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef double SQRT2 = sqrt(2.0)

cdef int[8] STEP_R = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] STEP_C = [-1, 0, 1, -1, 1, -1, 0, 1]


cdef inline double _octile(Py_ssize_t dr, Py_ssize_t dc):
    if dr < 0:
        dr = -dr
    if dc < 0:
        dc = -dc
    cdef Py_ssize_t lo = dr if dr < dc else dc
    return (dr + dc) + (SQRT2 - 2.0) * lo


cdef inline bint _heap_less(double f1, Py_ssize_t i1, double f2, Py_ssize_t i2):
    if f1 != f2:
        return f1 < f2
    return i1 < i2


def astar_grid(occupied, start, goal):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] occ = np.ascontiguousarray(occupied, dtype=np.uint8)
    cdef Py_ssize_t rows = occ.shape[0]
    cdef Py_ssize_t cols = occ.shape[1]
    cdef Py_ssize_t sr = start[0], sc = start[1], gr = goal[0], gc = goal[1]
    if occ[sr, sc] or occ[gr, gc]:
        raise ValueError("start and goal must lie in free cells")
    if sr == gr and sc == gc:
        return [(sr, sc)]

    cdef Py_ssize_t n = rows * cols
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_score = np.full(n, np.inf, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] came_from = np.full(n, -1, dtype=np.int64)
    cdef double[::1] g = g_score
    cdef cnp.int64_t[::1] parent = came_from

    # Binary heap of (f, cell index, g at push), lazy deletion.
    cdef Py_ssize_t cap = 256
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hf_arr = np.empty(cap, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hi_arr = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hg_arr = np.empty(cap, dtype=np.float64)
    cdef double[::1] hf = hf_arr
    cdef cnp.int64_t[::1] hi = hi_arr
    cdef double[::1] hg = hg_arr
    cdef Py_ssize_t size = 0

    cdef Py_ssize_t start_idx = sr * cols + sc
    cdef Py_ssize_t goal_idx = gr * cols + gc
    cdef Py_ssize_t idx, nidx, pos, child, left, right, k, r, c, nr, nc
    cdef int s
    cdef double cur_g, cand, f, nf, ng
    cdef bint found = False

    g[start_idx] = 0.0
    hf[0] = _octile(sr - gr, sc - gc)
    hi[0] = start_idx
    hg[0] = 0.0
    size = 1

    while size > 0:
        # pop root
        f = hf[0]
        idx = hi[0]
        cur_g = hg[0]
        size -= 1
        hf[0] = hf[size]
        hi[0] = hi[size]
        hg[0] = hg[size]
        pos = 0
        while True:
            left = 2 * pos + 1
            right = left + 1
            child = pos
            if left < size and _heap_less(hf[left], hi[left], hf[child], hi[child]):
                child = left
            if right < size and _heap_less(hf[right], hi[right], hf[child], hi[child]):
                child = right
            if child == pos:
                break
            hf[pos], hf[child] = hf[child], hf[pos]
            hi[pos], hi[child] = hi[child], hi[pos]
            hg[pos], hg[child] = hg[child], hg[pos]
            pos = child

        if cur_g > g[idx]:
            continue
        if idx == goal_idx:
            found = True
            break
        r = idx // cols
        c = idx - r * cols
        for s in range(8):
            nr = r + STEP_R[s]
            nc = c + STEP_C[s]
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols or occ[nr, nc]:
                continue
            if STEP_R[s] != 0 and STEP_C[s] != 0 and (occ[r + STEP_R[s], c] or occ[r, c + STEP_C[s]]):
                continue
            cand = cur_g + (SQRT2 if (STEP_R[s] != 0 and STEP_C[s] != 0) else 1.0)
            nidx = nr * cols + nc
            if cand < g[nidx]:
                g[nidx] = cand
                parent[nidx] = idx
                if size == cap:
                    cap *= 2
                    hf_arr = np.resize(hf_arr, cap)
                    hi_arr = np.resize(hi_arr, cap)
                    hg_arr = np.resize(hg_arr, cap)
                    hf = hf_arr
                    hi = hi_arr
                    hg = hg_arr
                # push (sift up)
                nf = cand + _octile(nr - gr, nc - gc)
                pos = size
                size += 1
                hf[pos] = nf
                hi[pos] = nidx
                hg[pos] = cand
                while pos > 0:
                    k = (pos - 1) // 2
                    if _heap_less(hf[pos], hi[pos], hf[k], hi[k]):
                        hf[pos], hf[k] = hf[k], hf[pos]
                        hi[pos], hi[k] = hi[k], hi[pos]
                        hg[pos], hg[k] = hg[k], hg[pos]
                        pos = k
                    else:
                        break

    if not found:
        return None
    path = [(gr, gc)]
    idx = goal_idx
    while idx != start_idx:
        idx = parent[idx]
        path.append((idx // cols, idx % cols))
    path.reverse()
    return path
