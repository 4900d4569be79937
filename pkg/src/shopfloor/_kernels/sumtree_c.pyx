# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Sum-tree kernel, compiled twin of sumtree_py. Same API, same semantics."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef class SumTree:
    cdef public Py_ssize_t capacity
    cdef Py_ssize_t _n_leaves
    cdef int _depth
    cdef double[::1] _nodes
    cdef object _nodes_arr

    def __init__(self, Py_ssize_t capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        cdef Py_ssize_t n = 1
        cdef int depth = 0
        while n < capacity:
            n *= 2
            depth += 1
        self._n_leaves = n
        self._depth = depth
        self._nodes_arr = np.zeros(2 * n - 1, dtype=np.float64)
        self._nodes = self._nodes_arr

    @property
    def total(self):
        return float(self._nodes[0])

    def leaf_values(self):
        return np.asarray(self._nodes_arr[self._n_leaves - 1 : self._n_leaves - 1 + self.capacity]).copy()

    def update(self, indices, values):
        cdef cnp.ndarray[cnp.int64_t, ndim=1] idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        cdef cnp.ndarray[cnp.float64_t, ndim=1] val = np.atleast_1d(np.asarray(values, dtype=np.float64))
        cdef double[::1] nodes = self._nodes
        cdef Py_ssize_t base = self._n_leaves - 1
        cdef Py_ssize_t i, pos
        for i in range(idx.shape[0]):
            if idx[i] < 0 or idx[i] >= self.capacity:
                raise IndexError("leaf index out of range")
            pos = base + idx[i]
            nodes[pos] = val[i]
            while pos > 0:
                pos = (pos - 1) // 2
                nodes[pos] = nodes[2 * pos + 1] + nodes[2 * pos + 2]

    def find(self, prefixes):
        cdef cnp.ndarray[cnp.float64_t, ndim=1] pref = np.atleast_1d(np.asarray(prefixes, dtype=np.float64))
        cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(pref.shape[0], dtype=np.int64)
        cdef double[::1] nodes = self._nodes
        cdef Py_ssize_t n_inner = self._n_leaves - 1
        cdef Py_ssize_t i, pos, left
        cdef double p, left_sum
        for i in range(pref.shape[0]):
            p = pref[i]
            pos = 0
            while pos < n_inner:
                left = 2 * pos + 1
                left_sum = nodes[left]
                if p < left_sum:
                    pos = left
                else:
                    p -= left_sum
                    pos = left + 1
            out[i] = pos - n_inner
        return out
