"""Pure-Python branch-and-bound kernel.

Fallback used when the compiled extension is unavailable.  Must explore
exactly the same tree as ``_search.pyx``: depth-first over colours in
ascending order, at each level trying every disjoint edge in canonical
order and then the skip branch, pruning when the remaining colours cannot
beat the incumbent.
"""
from __future__ import annotations

import sys
import time

STATUS_COMPLETED = 0
STATUS_TARGET = 1
STATUS_NODES = 2
STATUS_TIME = 3

_TIME_CHECK_MASK = 0x0FFF


class _Search:
    def __init__(self, starts, ea, eb, n_colours, vertex_count,
                 node_limit, time_limit, target):
        self.starts = list(map(int, starts))
        self.ea = list(map(int, ea))
        self.eb = list(map(int, eb))
        self.n = n_colours
        self.used = bytearray(vertex_count)
        self.cur = [-1] * n_colours
        self.best = [-1] * n_colours
        self.best_size = 0
        self.nodes = 0
        self.node_limit = node_limit
        self.deadline = time.monotonic() + time_limit if time_limit else 0.0
        self.target = target
        self.status = STATUS_COMPLETED

    def dfs(self, ci, size):
        self.nodes += 1
        if self.node_limit and self.nodes > self.node_limit:
            self.status = STATUS_NODES
            return
        if (self.deadline and (self.nodes & _TIME_CHECK_MASK) == 0
                and time.monotonic() > self.deadline):
            self.status = STATUS_TIME
            return
        if ci == self.n:
            return
        if size + (self.n - ci) <= self.best_size:
            return
        used = self.used
        for k in range(self.starts[ci], self.starts[ci + 1]):
            a = self.ea[k]
            b = self.eb[k]
            if used[a] or used[b]:
                continue
            used[a] = used[b] = 1
            self.cur[ci] = k
            if size + 1 > self.best_size:
                self.best_size = size + 1
                self.best = self.cur.copy()
                if self.target and self.best_size >= self.target:
                    self.status = STATUS_TARGET
                    used[a] = used[b] = 0
                    self.cur[ci] = -1
                    return
            self.dfs(ci + 1, size + 1)
            used[a] = used[b] = 0
            self.cur[ci] = -1
            if self.status != STATUS_COMPLETED:
                return
        self.dfs(ci + 1, size)


def run_search(starts, ea, eb, n_colours, vertex_count,
               node_limit=0, time_limit=0.0, target=0):
    """Returns (status, nodes, best_size, best_choice).

    ``best_choice[c]`` is the index of the edge chosen for colour ``c``
    in the incumbent, or -1 when the colour is unused.
    """
    limit = sys.getrecursionlimit()
    if n_colours + 100 > limit:
        sys.setrecursionlimit(n_colours + 200)
    s = _Search(starts, ea, eb, n_colours, vertex_count,
                node_limit, time_limit, target)
    s.dfs(0, 0)
    return s.status, s.nodes, s.best_size, list(s.best)
