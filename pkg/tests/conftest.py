"""Shared fixtures and independent brute-force oracles.

The oracles deliberately avoid the library's packed representations and
search kernels: they recompute everything from clique lists by definition,
so agreement is meaningful evidence.
"""
from __future__ import annotations

import itertools

import numpy as np
import pytest

from rainbowmg.core import Instance, pair
from rainbowmg.generators import RandomSpec, gen_random

# one line per acceptance criterion, echoed after the run
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# oracle: edges and matchings by definition


def all_coloured_edges(inst: Instance) -> list[tuple[tuple[int, int], int]]:
    out = []
    for cc in inst.classes:
        for p in cc.edge_pairs():
            out.append((p, cc.colour))
    return out


def oracle_verify_rainbow(inst: Instance, pairs, colours) -> bool:
    if len(pairs) != len(colours) or len(set(colours)) != len(colours):
        return False
    verts = [v for p in pairs for v in p]
    if len(set(verts)) != len(verts):
        return False
    for p, c in zip(pairs, colours):
        if not (0 <= c < inst.n):
            return False
        if pair(*p) not in inst.classes[c].edge_pairs():
            return False
    return True


def oracle_max_rainbow(inst: Instance) -> int:
    """Maximum rainbow matching size by plain recursion over colours (no
    pruning beyond feasibility)."""
    per_colour = [cc.edge_pairs() for cc in inst.classes]

    def rec(c: int, used: frozenset[int]) -> int:
        if c == inst.n:
            return 0
        best = rec(c + 1, used)
        for a, b in per_colour[c]:
            if a not in used and b not in used:
                best = max(best, 1 + rec(c + 1, used | {a, b}))
        return best

    return rec(0, frozenset())


def oracle_bipartite_max(adj: dict[int, set[int]]) -> int:
    """Maximum bipartite matching size by exhaustive recursion."""
    lefts = sorted(adj)

    def rec(i: int, taken: frozenset[int]) -> int:
        if i == len(lefts):
            return 0
        best = rec(i + 1, taken)
        for u in adj[lefts[i]]:
            if u not in taken:
                best = max(best, 1 + rec(i + 1, taken | {u}))
        return best

    return rec(0, frozenset())


def oracle_horn_census(inst: Instance, M, C):
    """All horn certificates by the O(|M| * edges^2) definition."""
    pairs = [pair(*p) for p in M]
    vm = {v for p in pairs for v in p}
    edges = [(p, c) for p, c in all_coloured_edges(inst) if c in set(C)]
    certs = set()
    for a, b in pairs:
        for e1, c1 in edges:
            for e2, c2 in edges:
                if a not in e1 or b not in e2:
                    continue
                z1 = e1[0] if e1[1] == a else e1[1]
                z2 = e2[0] if e2[1] == b else e2[1]
                if z1 in vm or z2 in vm or z1 == z2:
                    continue
                certs.add(((a, b), e1, e2, c1, c2))
    return certs


def oracle_max_partial_transversal(cells) -> int:
    """Maximum partial transversal of a Latin square by recursion over
    rows (distinct columns, distinct symbols; rows may be skipped)."""
    n = len(cells)

    def rec(row: int, cols: frozenset[int], syms: frozenset[int]) -> int:
        if row == n:
            return 0
        best = rec(row + 1, cols, syms)
        for j in range(n):
            s = cells[row][j]
            if j not in cols and s not in syms:
                best = max(best, 1 + rec(row + 1, cols | {j}, syms | {s}))
        return best

    return rec(0, frozenset(), frozenset())


def oracle_constrained_h_matching(M, A, H) -> int:
    """Maximum number of disjoint H-edges with one endpoint in
    V(M) - A - m(A) and the other in A or outside V(M)."""
    partner = {}
    for a, b in M:
        partner[a] = b
        partner[b] = a
    vm = set(partner)
    A = set(A)
    mA = {partner[a] for a in A}
    inner = vm - A - mA
    edges = []
    for p in H.edge_pairs():
        u, w = p
        for x, y in ((u, w), (w, u)):
            if x in inner and (y in A or y not in vm):
                edges.append(p)
                break

    def rec(i: int, used: frozenset[int]) -> int:
        if i == len(edges):
            return 0
        best = rec(i + 1, used)
        a, b = edges[i]
        if a not in used and b not in used:
            best = max(best, 1 + rec(i + 1, used | {a, b}))
        return best

    return rec(0, frozenset())


# ---------------------------------------------------------------------------
# corpus fixtures


def small_random_instances(count, seed, n_range=(3, 6), capped=True):
    """Deterministic batch of small fuzz instances."""
    rng = np.random.default_rng(seed)
    out = []
    attempts = 0
    while len(out) < count and attempts < count * 10:
        attempts += 1
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        v = int(rng.integers(2, 3 * n + 2))
        mm = int(rng.integers(1, n + 1)) if capped else n
        tf = float(rng.random())
        spec = RandomSpec(n=n, v=v, max_multiplicity=mm,
                          seed=int(rng.integers(2**32)),
                          triangle_fraction=tf)
        try:
            out.append(gen_random(spec))
        except Exception:
            continue
    return out


@pytest.fixture(scope="session")
def fuzz_corpus():
    return small_random_instances(40, seed=20260823)
