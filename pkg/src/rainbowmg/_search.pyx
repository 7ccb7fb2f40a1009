# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled branch-and-bound kernel.

Semantics must match ``_search_py`` exactly (same traversal order, same
node counts) so the two backends are interchangeable.
"""
from libc.stdlib cimport calloc, free, malloc
from libc.string cimport memcpy

import time

STATUS_COMPLETED = 0
STATUS_TARGET = 1
STATUS_NODES = 2
STATUS_TIME = 3


cdef class _Search:
    cdef int[:] starts
    cdef int[:] ea
    cdef int[:] eb
    cdef int n
    cdef char *used
    cdef int *cur
    cdef int *best
    cdef int best_size
    cdef long long nodes
    cdef long long node_limit
    cdef double deadline
    cdef int target
    cdef int status

    def __cinit__(self, int[:] starts, int[:] ea, int[:] eb, int n_colours,
                  int vertex_count, long long node_limit, double time_limit,
                  int target):
        self.starts = starts
        self.ea = ea
        self.eb = eb
        self.n = n_colours
        self.used = <char *> calloc(max(vertex_count, 1), sizeof(char))
        self.cur = <int *> malloc(max(n_colours, 1) * sizeof(int))
        self.best = <int *> malloc(max(n_colours, 1) * sizeof(int))
        cdef int i
        for i in range(n_colours):
            self.cur[i] = -1
            self.best[i] = -1
        self.best_size = 0
        self.nodes = 0
        self.node_limit = node_limit
        self.deadline = time.monotonic() + time_limit if time_limit else 0.0
        self.target = target
        self.status = STATUS_COMPLETED

    def __dealloc__(self):
        free(self.used)
        free(self.cur)
        free(self.best)

    cdef void dfs(self, int ci, int size):
        cdef int k, a, b
        self.nodes += 1
        if self.node_limit and self.nodes > self.node_limit:
            self.status = STATUS_NODES
            return
        if (self.deadline != 0.0 and (self.nodes & 0x0FFF) == 0
                and time.monotonic() > self.deadline):
            self.status = STATUS_TIME
            return
        if ci == self.n:
            return
        if size + (self.n - ci) <= self.best_size:
            return
        for k in range(self.starts[ci], self.starts[ci + 1]):
            a = self.ea[k]
            b = self.eb[k]
            if self.used[a] or self.used[b]:
                continue
            self.used[a] = 1
            self.used[b] = 1
            self.cur[ci] = k
            if size + 1 > self.best_size:
                self.best_size = size + 1
                memcpy(self.best, self.cur, self.n * sizeof(int))
                if self.target and self.best_size >= self.target:
                    self.status = STATUS_TARGET
                    self.used[a] = 0
                    self.used[b] = 0
                    self.cur[ci] = -1
                    return
            self.dfs(ci + 1, size + 1)
            self.used[a] = 0
            self.used[b] = 0
            self.cur[ci] = -1
            if self.status != STATUS_COMPLETED:
                return
        self.dfs(ci + 1, size)

    def run(self):
        self.dfs(0, 0)
        cdef int i
        return (self.status, self.nodes, self.best_size,
                [self.best[i] for i in range(self.n)])


def run_search(starts, ea, eb, int n_colours, int vertex_count,
               long long node_limit=0, double time_limit=0.0, int target=0):
    """Same contract as ``_search_py.run_search``."""
    import numpy as np
    starts = np.ascontiguousarray(starts, dtype=np.int32)
    ea = np.ascontiguousarray(ea, dtype=np.int32)
    eb = np.ascontiguousarray(eb, dtype=np.int32)
    if ea.shape[0] == 0:
        ea = np.zeros(1, dtype=np.int32)
        eb = np.zeros(1, dtype=np.int32)
    s = _Search(starts, ea, eb, n_colours, vertex_count,
                node_limit, time_limit, target)
    return s.run()
