"""Rainbow-matching solvers and proof-guided moves.

The exhaustive maximiser is a depth-first branch-and-bound over colours in
ascending order (edge order canonical, skip branch last, trivial
remaining-colours bound); the hot loop lives in the compiled kernel with a
pure-Python fallback.  The local moves mirror the arguments used in the
underlying extremal analysis: greedy extension, colour switching and horn
augmentation.
"""
from __future__ import annotations

import json
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernel
from .core import (
    Instance,
    Pair,
    RainbowMatching,
    is_maximal,
    pair,
    verify_rainbow,
)

REASON_OPTIMAL = "proved-optimal"
REASON_TARGET = "target-reached"
REASON_BUDGET = "budget-exhausted"


@dataclass(frozen=True)
class SolverBudget:
    node_limit: int = 0  # 0 = unlimited
    time_limit: float = 0.0  # seconds, 0 = unlimited
    target: int = 0  # early exit at this size, 0 = none

    def __post_init__(self):
        if self.node_limit < 0 or self.time_limit < 0 or self.target < 0:
            raise ValueError("budget limits must be non-negative")


@dataclass
class SolveResult:
    best: RainbowMatching
    optimal: bool
    nodes_explored: int
    reason: str

    def size(self) -> int:
        return self.best.size()

    def to_dict(self) -> dict:
        d = self.best.to_dict()
        return {
            "size": self.best.size(),
            "optimal": self.optimal,
            "nodes": self.nodes_explored,
            "reason": self.reason,
            "pairs": d["pairs"],
            "colours": d["colours"],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":")) + "\n"


class PreconditionError(ValueError):
    """A stated hypothesis of a constructive lemma does not hold."""


# ---------------------------------------------------------------------------
# greedy


def greedy_extend(
    inst: Instance,
    start: Optional[RainbowMatching] = None,
    excluded: frozenset[int] = frozenset(),
) -> RainbowMatching:
    """Extend ``start`` to a maximal rainbow matching.

    Unused colours are processed in ascending id; for each, the first
    canonical-order edge disjoint from the current matching is taken.
    Covering vertices only shrinks later options, so one ascending pass
    already yields a maximal matching.
    """
    start = start if start is not None else RainbowMatching.empty()
    ok, why = verify_rainbow(inst, start)
    if not ok:
        raise ValueError(f"invalid start matching: {why}")
    pairs = list(start.pairs)
    colours = list(start.colours)
    used = start.vertex_set()
    have = start.colour_set()
    packed = inst.packed()
    if len(packed.pa) >= 65536:
        return _greedy_vector(inst, packed, pairs, colours, used, have, excluded)
    for c in range(inst.n):
        if c in have:
            continue
        for a, b in inst.iter_sorted_edges(c):
            if a in used or b in used or a in excluded or b in excluded:
                continue
            pairs.append((a, b))
            colours.append(c)
            used.add(a)
            used.add(b)
            break
    return RainbowMatching(pairs, colours)


def _greedy_vector(inst, packed, pairs, colours, used, have, excluded):
    """Same pass and same edge choices as the scalar loop, with the
    per-colour scan done as one array operation."""
    blocked = np.zeros(inst.vertex_count, dtype=bool)
    for v in used:
        blocked[v] = True
    for v in excluded:
        blocked[v] = True
    pa, pb, estart = packed.pa, packed.pb, packed.estart
    for c in range(inst.n):
        if c in have:
            continue
        lo, hi = int(estart[c]), int(estart[c + 1])
        if lo == hi:
            continue
        ok = ~(blocked[pa[lo:hi]] | blocked[pb[lo:hi]])
        k = int(np.argmax(ok))
        if not ok[k]:
            continue
        a, b = int(pa[lo + k]), int(pb[lo + k])
        pairs.append((a, b))
        colours.append(c)
        blocked[a] = blocked[b] = True
    return RainbowMatching(pairs, colours)


# ---------------------------------------------------------------------------
# exhaustive search


def exact_max(inst: Instance, budget: Optional[SolverBudget] = None) -> SolveResult:
    """Maximum rainbow matching by branch and bound.

    ``optimal`` is set iff the search tree was exhausted within budget (a
    size-n incumbent is also optimal by definition).
    """
    budget = budget or SolverBudget()
    packed = inst.packed()
    status, nodes, best_size, choice = kernel.run_search(
        packed.estart, packed.pa, packed.pb, inst.n, inst.vertex_count,
        node_limit=budget.node_limit, time_limit=budget.time_limit,
        target=budget.target,
    )
    pairs: list[Pair] = []
    colours: list[int] = []
    for c, k in enumerate(choice):
        if k >= 0:
            pairs.append((int(packed.pa[k]), int(packed.pb[k])))
            colours.append(c)
    best = RainbowMatching(pairs, colours)
    assert best.size() == best_size
    optimal = status == kernel.STATUS_COMPLETED or best_size == inst.n
    if status == kernel.STATUS_COMPLETED:
        reason = REASON_OPTIMAL
    elif status == kernel.STATUS_TARGET:
        reason = REASON_TARGET
    else:
        reason = REASON_BUDGET
    return SolveResult(best, optimal, nodes, reason)


# ---------------------------------------------------------------------------
# colour switching


def _matching_key(rm: RainbowMatching):
    return tuple(sorted(zip(rm.pairs, rm.colours)))


def colour_switch(inst: Instance, M: RainbowMatching, c: int) -> list[RainbowMatching]:
    """All same-size matchings obtained by removing one edge of ``M`` and
    inserting a disjoint ``c``-coloured edge that touches it.

    ``c`` must be unused and ``M`` maximal (then every ``c``-edge touches
    ``V(M)``, so the enumeration below is exhaustive).
    """
    if c in M.colour_set():
        raise ValueError(f"colour {c} already used by the matching")
    mx, wit = is_maximal(inst, M)
    if not mx:
        raise ValueError(f"matching not maximal: can extend with {wit}")
    owner: dict[int, int] = {}
    for i, p in enumerate(M.pairs):
        owner[p[0]] = i
        owner[p[1]] = i
    out: list[RainbowMatching] = []
    seen = set()
    for a, b in inst.iter_sorted_edges(c):
        touched = {owner.get(a), owner.get(b)} - {None}
        if len(touched) != 1:
            continue  # disjoint (impossible for maximal M) or touches two edges
        i = touched.pop()
        pairs = M.pairs[:i] + M.pairs[i + 1 :] + [(a, b)]
        colours = M.colours[:i] + M.colours[i + 1 :] + [c]
        rm = RainbowMatching(pairs, colours).sorted_by_colour()
        key = _matching_key(rm)
        if key not in seen:
            seen.add(key)
            out.append(rm)
    return out


def steer_to_colour_set(
    inst: Instance,
    M: RainbowMatching,
    C_good: set[int],
    budget: Optional[SolverBudget] = None,
) -> SolveResult:
    """Breadth-first walk over colour switches towards a maximal matching
    of the same size whose unused colours all lie in ``C_good``."""
    budget = budget or SolverBudget()
    mx, wit = is_maximal(inst, M)
    if not mx:
        raise ValueError(f"matching not maximal: can extend with {wit}")
    C_good = set(C_good)
    deadline = time.monotonic() + budget.time_limit if budget.time_limit else 0.0
    all_colours = set(range(inst.n))

    def compliant(rm: RainbowMatching) -> bool:
        return (all_colours - rm.colour_set()) <= C_good

    if compliant(M):
        return SolveResult(M, False, 0, REASON_TARGET)
    nodes = 0
    visited = {_matching_key(M)}
    queue = deque([M])
    while queue:
        cur = queue.popleft()
        bad_unused = sorted(all_colours - cur.colour_set() - C_good)
        for c in bad_unused:
            for nxt in colour_switch(inst, cur, c):
                nodes += 1
                if budget.node_limit and nodes > budget.node_limit:
                    return SolveResult(M, False, nodes, REASON_BUDGET)
                if deadline and time.monotonic() > deadline:
                    return SolveResult(M, False, nodes, REASON_BUDGET)
                key = _matching_key(nxt)
                if key in visited:
                    continue
                visited.add(key)
                if compliant(nxt):
                    return SolveResult(nxt, False, nodes, REASON_TARGET)
                if is_maximal(inst, nxt)[0]:
                    queue.append(nxt)
    return SolveResult(M, False, nodes, REASON_BUDGET)


# ---------------------------------------------------------------------------
# auxiliary matchings


@dataclass
class AuxiliaryMatching:
    """Matching from unmatched vertices into V(M), one edge per touched
    M-edge, each repeated in >= t unused colours.

    All lists are aligned with ``m_indices`` (ascending indices into M).
    For touched edge ``e``: ``x[i]`` is e's endpoint met by N, ``m_x[i]``
    its partner in M, ``v[i]`` its partner in N, ``colours[i]`` the colour
    of e (so ``colours`` as a set is C_N), ``witnesses[i]`` the unused
    colours repeating the N-pair.
    """

    t: int
    m_indices: list[int] = field(default_factory=list)
    x: list[int] = field(default_factory=list)
    v: list[int] = field(default_factory=list)
    m_x: list[int] = field(default_factory=list)
    colours: list[int] = field(default_factory=list)
    witnesses: list[list[int]] = field(default_factory=list)

    def size(self) -> int:
        return len(self.m_indices)

    def n_pairs(self) -> list[Pair]:
        return [pair(a, b) for a, b in zip(self.x, self.v)]

    def colour_set(self) -> set[int]:
        return set(self.colours)


def _repeated_unused(inst: Instance, p: Pair, unused: list[int]) -> list[int]:
    return [c for c in unused if inst.has_pair(c, p)]


def find_aux_matching(inst: Instance, M: RainbowMatching, t: int) -> AuxiliaryMatching:
    """Maximum-size t-auxiliary matching for M via augmenting paths.

    Candidate graph: left nodes are M-edges, right nodes are vertices
    outside V(M); (e, u) is present when some pair between them is an edge
    in >= t unused colours.
    """
    if t < 1:
        raise ValueError("threshold t must be >= 1")
    ok, why = verify_rainbow(inst, M)
    if not ok:
        raise ValueError(f"invalid rainbow matching: {why}")
    unused = sorted(set(range(inst.n)) - M.colour_set())
    owner: dict[int, int] = {}
    for i, p in enumerate(M.pairs):
        owner[p[0]] = i
        owner[p[1]] = i
    vm = set(owner)

    # pair -> colours of unused classes containing it, for pairs crossing
    # the V(M) boundary
    cross: dict[Pair, list[int]] = defaultdict(list)
    for c in unused:
        for a, b in inst.iter_sorted_edges(c):
            if (a in vm) != (b in vm):
                cross[(a, b)].append(c)
    # adjacency: M-edge index -> outside vertex -> best (x, witness)
    adj: dict[int, dict[int, tuple[int, list[int]]]] = defaultdict(dict)
    for (a, b), cols in cross.items():
        if len(cols) < t:
            continue
        x, u = (a, b) if a in vm else (b, a)
        i = owner[x]
        cur = adj[i].get(u)
        if cur is None or x < cur[0]:
            adj[i][u] = (x, cols)

    match_right: dict[int, int] = {}  # outside vertex -> M-edge index

    def augment(i: int, banned: set[int]) -> bool:
        for u in sorted(adj[i]):
            if u in banned:
                continue
            banned.add(u)
            if u not in match_right or augment(match_right[u], banned):
                match_right[u] = i
                return True
        return False

    for i in sorted(adj):
        augment(i, set())

    aux = AuxiliaryMatching(t=t)
    for u, i in sorted(match_right.items(), key=lambda kv: kv[1]):
        x, wit = adj[i][u]
        p = M.pairs[i]
        aux.m_indices.append(i)
        aux.x.append(x)
        aux.v.append(u)
        aux.m_x.append(p[1] if p[0] == x else p[0])
        aux.colours.append(M.colours[i])
        aux.witnesses.append(sorted(wit))
    return aux


# ---------------------------------------------------------------------------
# triangle extraction (constructive form of the clique-splitting lemma)


def extract_matching_triangles(M, A, H, s: int):
    """Constructive matching extraction from a clique-union colour class.

    ``M``: list of vertex-disjoint pairs; ``A``: subset of V(M) with
    A and m(A) disjoint; ``H``: a ColourClass whose cliques have no edge
    inside A together with the unmatched vertices, covering at least
    2|M| + s vertices.  Returns ``s`` disjoint H-edges, each with one
    endpoint in V(M) minus (A and m(A)) and the other in A or outside
    V(M).  For each H-vertex outside S := V(M) minus A, the edge to its
    lowest-indexed clique-mate in S is taken; edges meeting m(A) are
    discarded.
    """
    if s < 1:
        raise ValueError("target size s must be >= 1")
    partner: dict[int, int] = {}
    for a, b in M:
        if a in partner or b in partner or a == b:
            raise PreconditionError(f"M is not a matching at pair ({a}, {b})")
        partner[a] = b
        partner[b] = a
    vm = set(partner)
    A = set(A)
    if not A <= vm:
        raise PreconditionError(f"A contains non-matched vertices {sorted(A - vm)}")
    mA = {partner[a] for a in A}
    if A & mA:
        raise PreconditionError(
            f"A intersects m(A) at {sorted(A & mA)}"
        )
    if H.cover() < 2 * len(M) + s:
        raise PreconditionError(
            f"H covers {H.cover()} vertices, below 2|M|+s = {2 * len(M) + s}"
        )
    S = vm - A
    candidates: list[tuple[int, Pair]] = []
    for q in H.cliques:
        inside = sorted(v for v in q if v in S)
        outside = sorted(v for v in q if v not in S)
        if len(outside) >= 2:
            raise PreconditionError(
                f"H-edge ({outside[0]}, {outside[1]}) contained in "
                "A together with the unmatched vertices"
            )
        for u in outside:
            candidates.append((u, pair(u, inside[0])))
    candidates.sort()
    result = [p for _, p in candidates if p[0] not in mA and p[1] not in mA]
    if len(result) < s:
        # the construction guarantees >= s edges whenever the hypotheses
        # hold, so reaching this line means a hypothesis check is missing
        raise PreconditionError(
            f"only {len(result)} admissible edges found, need {s}"
        )
    return result[:s]


# ---------------------------------------------------------------------------
# horn augmentation


def _outside_attachments(inst, owner, colours, excluded):
    """(M-edge index, endpoint) -> [(outside vertex, colour), ...] for all
    edges of the given colours leaving V(M)."""
    att: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
    for c in sorted(colours):
        for a, b in inst.iter_sorted_edges(c):
            a_in, b_in = a in owner, b in owner
            if a_in and not b_in and b not in excluded:
                att[owner[a]].append((b, c))
            elif b_in and not a_in and a not in excluded:
                att[owner[b]].append((a, c))
    return att


def horn_augment(
    inst: Instance,
    M: RainbowMatching,
    excluded: frozenset[int] = frozenset(),
) -> Optional[RainbowMatching]:
    """Replace one M-edge by two disjoint unused-colour edges hanging off
    its endpoints (a rainbow horn), growing the matching by one.

    Requires a maximal matching; returns None when no horn exists.  A
    maximal-but-not-maximum matching can well carry a horn, which is what
    makes this useful as a local-search escape move.
    """
    mx, wit = is_maximal(inst, M, excluded)
    if not mx:
        raise ValueError(
            f"matching not maximal: simpler extension {wit} exists"
        )
    unused = sorted(set(range(inst.n)) - M.colour_set())
    if not unused or not M.pairs:
        return None
    owner: dict[int, tuple[int, int]] = {}
    for i, (a, b) in enumerate(M.pairs):
        owner[a] = (i, 0)
        owner[b] = (i, 1)
    att = _outside_attachments(inst, owner, unused, excluded)
    for i, (a, b) in enumerate(M.pairs):
        side_a = att.get((i, 0), ())
        side_b = att.get((i, 1), ())
        for z1, c1 in side_a:
            for z2, c2 in side_b:
                if z1 == z2 or c1 == c2:
                    continue
                pairs = M.pairs[:i] + M.pairs[i + 1 :] + [pair(a, z1), pair(b, z2)]
                colours = M.colours[:i] + M.colours[i + 1 :] + [c1, c2]
                return RainbowMatching(pairs, colours).sorted_by_colour()
    return None


# ---------------------------------------------------------------------------
# local search


_WALK_CAP = 256  # switch-walk states per improvement round


def local_search(
    inst: Instance,
    budget: Optional[SolverBudget] = None,
    excluded: frozenset[int] = frozenset(),
) -> SolveResult:
    """Greedy start, then alternate horn augmentation with bounded
    colour-switch walks to escape maximal-but-suboptimal matchings."""
    budget = budget or SolverBudget()
    deadline = time.monotonic() + budget.time_limit if budget.time_limit else 0.0
    target = budget.target or inst.n
    nodes = 0

    def out_of_budget() -> bool:
        if budget.node_limit and nodes > budget.node_limit:
            return True
        return bool(deadline) and time.monotonic() > deadline

    best = greedy_extend(inst, None, excluded)
    nodes += 1
    while best.size() < target and not out_of_budget():
        aug = horn_augment(inst, best, excluded)
        nodes += 1
        if aug is not None:
            best = greedy_extend(inst, aug, excluded)
            continue
        found = None
        visited = {_matching_key(best)}
        queue = deque([best])
        walk = 0
        while queue and walk < _WALK_CAP and found is None and not out_of_budget():
            cur = queue.popleft()
            for c in sorted(set(range(inst.n)) - cur.colour_set()):
                for nxt in _switch_restricted(inst, cur, c, excluded):
                    nodes += 1
                    walk += 1
                    key = _matching_key(nxt)
                    if key in visited:
                        continue
                    visited.add(key)
                    mx, _ = is_maximal(inst, nxt, excluded)
                    if not mx:
                        found = greedy_extend(inst, nxt, excluded)
                        break
                    aug = horn_augment(inst, nxt, excluded)
                    if aug is not None:
                        found = greedy_extend(inst, aug, excluded)
                        break
                    if walk < _WALK_CAP:
                        queue.append(nxt)
                if found is not None or walk >= _WALK_CAP:
                    break
        if found is None:
            break
        best = found
    ok, why = verify_rainbow(inst, best)
    assert ok, why
    optimal = best.size() == inst.n
    # stalled local optima are reported as exhausted improvement budget
    reason = REASON_TARGET if best.size() >= target else REASON_BUDGET
    return SolveResult(best, optimal, nodes, reason)


def _switch_restricted(inst, M, c, excluded):
    """colour_switch without the validation rescan, honouring excluded
    vertices; callers guarantee maximality of M."""
    owner: dict[int, int] = {}
    for i, p in enumerate(M.pairs):
        owner[p[0]] = i
        owner[p[1]] = i
    out = []
    seen = set()
    for a, b in inst.iter_sorted_edges(c):
        if a in excluded or b in excluded:
            continue
        touched = {owner.get(a), owner.get(b)} - {None}
        if len(touched) != 1:
            continue
        i = touched.pop()
        pairs = M.pairs[:i] + M.pairs[i + 1 :] + [(a, b)]
        colours = M.colours[:i] + M.colours[i + 1 :] + [c]
        rm = RainbowMatching(pairs, colours).sorted_by_colour()
        key = _matching_key(rm)
        if key not in seen:
            seen.add(key)
            out.append(rm)
    return out
