"""Named constructions and seeded random ensembles.

All constructors are pure: identical arguments (and seed) give byte-identical
canonical serializations.  Randomness comes from numpy's PCG64 stream seeded
through a SeedSequence; the algorithm identifier is exported as
``RNG_ALGORITHM`` and recorded in reports.
"""
from __future__ import annotations

import gc
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ColourClass, Instance, InstanceError, canonical, pair

RNG_ALGORITHM = "pcg64"


def rng_for(*seed_path: int) -> np.random.Generator:
    """Seeded, splittable generator: each distinct integer path is an
    independent stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(seed_path))))


def derive_seed(master: int, index: int) -> int:
    """64-bit child seed for trial ``index`` of a master seed."""
    return int(np.random.SeedSequence([master, index]).generate_state(1, np.uint64)[0])


class InfeasibleSpecError(ValueError):
    """The requested random ensemble cannot satisfy its own constraints."""


# ---------------------------------------------------------------------------
# extremal constructions


def gen_triangle_extremal(n: int) -> Instance:
    """n-1 disjoint triangles, every triangle repeated in all n colours.

    Each colour covers 3(n-1) vertices and no rainbow matching of size n
    exists (at most one edge per triangle).
    """
    if n < 2:
        raise ValueError("need at least 2 colours")
    triangles = [(3 * i, 3 * i + 1, 3 * i + 2) for i in range(n - 1)]
    classes = [ColourClass(c, list(triangles)) for c in range(n)]
    return canonical(Instance(n, 3 * (n - 1), classes, normalized=True))


def gen_double_k4() -> Instance:
    """Two disjoint properly 3-edge-coloured K4's (vertices 0-3 and 4-7).

    Each colour class is two disjoint perfect matchings covering all 8
    vertices; the largest rainbow matching has size 2.
    """
    decomposition = [
        [(0, 1), (2, 3)],
        [(0, 2), (1, 3)],
        [(0, 3), (1, 2)],
    ]
    classes = []
    for c, mates in enumerate(decomposition):
        cliques = [p for p in mates] + [(a + 4, b + 4) for a, b in mates]
        classes.append(ColourClass(c, cliques))
    return canonical(Instance(3, 8, classes, normalized=True))


# ---------------------------------------------------------------------------
# Latin squares


@dataclass(frozen=True)
class LatinSquare:
    cells: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.cells)

    def check(self) -> list[str]:
        n = self.order
        bad = []
        for i, row in enumerate(self.cells):
            if len(row) != n:
                bad.append(f"row {i}: expected {n} entries, got {len(row)}")
            elif sorted(row) != list(range(n)):
                bad.append(f"row {i}: not a permutation of 0..{n - 1}")
        for j in range(n):
            col = [row[j] for row in self.cells if len(row) == n]
            if len(col) == n and sorted(col) != list(range(n)):
                bad.append(f"column {j}: not a permutation of 0..{n - 1}")
        return bad


def cyclic_square(n: int) -> LatinSquare:
    return LatinSquare(tuple(tuple((i + j) % n for j in range(n)) for i in range(n)))


def parse_latin(text: str) -> LatinSquare:
    """Parse whitespace-separated rows.  Symbols may be 0- or 1-based;
    1-based input is shifted down with a notice on stderr."""
    rows = []
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append(tuple(int(tok) for tok in line.split()))
        except ValueError as exc:
            raise InstanceError(f"line {ln}: non-integer symbol") from exc
    if not rows:
        raise InstanceError("empty Latin square file")
    n = len(rows)
    symbols = {s for row in rows for s in row}
    if symbols == set(range(1, n + 1)):
        print("note: 1-based symbols detected, normalizing to 0-based",
              file=sys.stderr)
        rows = [tuple(s - 1 for s in row) for row in rows]
    sq = LatinSquare(tuple(rows))
    bad = sq.check()
    if bad:
        raise InstanceError("invalid Latin square: " + "; ".join(bad[:3]))
    return sq


def gen_latin_bridge(square: LatinSquare, c: int = 0) -> Instance:
    """K_{n,n} coloured by the square's symbols, plus c/2 disjoint stars
    with one edge per colour.

    Rows are vertices 0..n-1, columns n..2n-1; star k occupies the block
    starting at 2n + k(n+1) (center first, then one leaf per colour).
    Every pair has multiplicity at most 1 and each colour covers 2n + c
    vertices.
    """
    bad = square.check()
    if bad:
        raise InstanceError("invalid Latin square: " + bad[0])
    if c < 0 or c % 2 != 0:
        raise ValueError("c must be even and non-negative")
    n = square.order
    cliques_by_colour: dict[int, list[tuple[int, ...]]] = {s: [] for s in range(n)}
    for i, row in enumerate(square.cells):
        for j, s in enumerate(row):
            cliques_by_colour[s].append((i, n + j))
    for k in range(c // 2):
        center = 2 * n + k * (n + 1)
        for s in range(n):
            cliques_by_colour[s].append((center, center + 1 + s))
    classes = [ColourClass(s, cliques_by_colour[s]) for s in range(n)]
    vertex_count = 2 * n + (c // 2) * (n + 1)
    return canonical(Instance(n, vertex_count, classes, normalized=True))


# ---------------------------------------------------------------------------
# random ensembles


@dataclass(frozen=True)
class RandomSpec:
    n: int
    v: int
    max_multiplicity: int
    seed: int
    triangle_fraction: float = 0.5
    vertex_count: Optional[int] = None  # default: v + max(3, v // 3)

    def pool_size(self) -> int:
        if self.vertex_count is not None:
            return self.vertex_count
        return self.v + max(3, self.v // 3)

    def check(self) -> None:
        if self.n < 1:
            raise InfeasibleSpecError("need at least one colour")
        if self.v < 2:
            raise InfeasibleSpecError("each colour needs one non-trivial clique")
        if not (1 <= self.max_multiplicity):
            raise InfeasibleSpecError("max_multiplicity must be >= 1")
        if not (0.0 <= self.triangle_fraction <= 1.0):
            raise InfeasibleSpecError("triangle_fraction must lie in [0, 1]")
        if self.pool_size() < self.v:
            raise InfeasibleSpecError(
                f"vertex budget {self.pool_size()} below cover target {self.v}"
            )


_CLIQUE_TRIES = 200
_COLOUR_TRIES = 60


def gen_random(spec: RandomSpec) -> Instance:
    """Rejection-sampled instance: every colour covers >= spec.v vertices,
    every pair has multiplicity <= spec.max_multiplicity.

    Raises :class:`InfeasibleSpecError` when the retry budget runs out,
    naming the conflicting constraint.
    """
    spec.check()
    if spec.max_multiplicity >= spec.n:
        return _gen_random_uncapped(spec)
    return _gen_random_capped(spec)


def _gen_random_uncapped(spec: RandomSpec) -> Instance:
    """No multiplicity bookkeeping needed, so clique sizes and vertices
    come straight from vectorised draws; scales to thousands of colours.

    For large colour counts the flat array form is assembled alongside the
    clique lists (each colour's edge chunk is sorted locally, so no global
    sort over 10^7+ edges is ever needed).
    """
    rng = rng_for(spec.seed)
    nverts = spec.pool_size()
    big = spec.n > 256
    kmax = spec.v // 2 + 1  # enough size->=2 cliques to reach the cover
    idx3 = np.arange(3)
    idx2 = np.arange(2)
    classes = []
    tri_parts: list[np.ndarray] = []
    edg_parts: list[np.ndarray] = []
    pa_parts: list[np.ndarray] = []
    pb_parts: list[np.ndarray] = []
    # bulk tuple creation; periodic cycle collections would rescan the
    # growing heap and dominate the runtime at n in the thousands
    gc_was_enabled = gc.isenabled()
    if big:
        gc.disable()
    try:
        _fill_uncapped(spec, rng, nverts, big, kmax, idx3, idx2, classes,
                       tri_parts, edg_parts, pa_parts, pb_parts)
    finally:
        if big and gc_was_enabled:
            gc.enable()
    inst = Instance(spec.n, nverts, classes, normalized=True)
    if not big:
        return canonical(inst)
    inst._packed = _pack_from_parts(inst, tri_parts, edg_parts,
                                    pa_parts, pb_parts)
    return inst


def _fill_uncapped(spec, rng, nverts, big, kmax, idx3, idx2, classes,
                   tri_parts, edg_parts, pa_parts, pb_parts):
    for c in range(spec.n):
        perm = rng.permutation(nverts)
        sizes = np.where(rng.random(kmax) < spec.triangle_fraction, 3, 2)
        cum = np.cumsum(sizes)
        m = int(np.searchsorted(cum, spec.v))  # first clique reaching v
        sizes = sizes[: m + 1]
        verts = perm[: int(cum[m])]
        is3 = sizes == 3
        offs = cum[: m + 1] - sizes
        tri = verts[offs[is3, None] + idx3].astype(np.int32)
        edg = verts[offs[~is3, None] + idx2].astype(np.int32)
        tri.sort(axis=1)
        edg.sort(axis=1)
        classes.append(ColourClass(
            c, list(map(tuple, tri.tolist())) + list(map(tuple, edg.tolist()))
        ))
        if big:
            tri_parts.append(tri)
            edg_parts.append(edg)
            pa = np.concatenate([tri[:, 0], tri[:, 0], tri[:, 1], edg[:, 0]])
            pb = np.concatenate([tri[:, 1], tri[:, 2], tri[:, 2], edg[:, 1]])
            order = np.argsort(pa.astype(np.int64) * nverts + pb)
            pa_parts.append(pa[order])
            pb_parts.append(pb[order])


def _pack_from_parts(inst, tri_parts, edg_parts, pa_parts, pb_parts):
    from .core import PackedInstance

    tri = np.concatenate(tri_parts) if tri_parts else np.empty((0, 3), np.int32)
    edg = np.concatenate(edg_parts) if edg_parts else np.empty((0, 2), np.int32)
    tric = np.repeat(np.arange(inst.n, dtype=np.int32),
                     [len(t) for t in tri_parts])
    edgc = np.repeat(np.arange(inst.n, dtype=np.int32),
                     [len(e) for e in edg_parts])
    pa = np.concatenate(pa_parts)
    pb = np.concatenate(pb_parts)
    estart = np.concatenate(
        ([0], np.cumsum([len(p) for p in pa_parts], dtype=np.int64)))
    return PackedInstance(inst, tri, tric, edg, edgc, pa, pb, estart)


def _gen_random_capped(spec: RandomSpec) -> Instance:
    rng = rng_for(spec.seed)
    nverts = spec.pool_size()
    mult: dict[tuple[int, int], int] = {}
    classes = []
    for c in range(spec.n):
        for attempt in range(_COLOUR_TRIES):
            result = _sample_colour(spec, rng, nverts, mult)
            if result is not None:
                cliques, added = result
                for p in added:
                    mult[p] = mult.get(p, 0) + 1
                classes.append(ColourClass(c, cliques))
                break
        else:
            raise InfeasibleSpecError(
                f"colour {c}: could not reach cover {spec.v} under "
                f"multiplicity cap {spec.max_multiplicity} with "
                f"{nverts} vertices ({_COLOUR_TRIES} rebuilds exhausted)"
            )
    return canonical(Instance(spec.n, nverts, classes, normalized=True))


def _sample_colour(spec, rng, nverts, mult):
    """One attempt at building a colour class; returns (cliques, pairs)
    or None when the per-clique retry budget is exhausted."""
    free = list(range(nverts))
    cliques: list[tuple[int, ...]] = []
    added: list[tuple[int, int]] = []
    cover = 0
    while cover < spec.v:
        placed = False
        for _ in range(_CLIQUE_TRIES):
            take = 3 if (spec.v - cover >= 3
                         and rng.random() < spec.triangle_fraction) else 2
            if len(free) < take:
                return None
            idx = rng.choice(len(free), size=take, replace=False)
            q = tuple(sorted(free[i] for i in idx))
            ps = [pair(q[i], q[j]) for i in range(take) for j in range(i + 1, take)]
            if all(mult.get(p, 0) < spec.max_multiplicity for p in ps):
                cliques.append(q)
                added.extend(ps)
                for u in sorted(idx, reverse=True):
                    free.pop(u)
                cover += take
                placed = True
                break
        if not placed:
            return None
    return cliques, added
