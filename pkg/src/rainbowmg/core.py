"""Instance model for edge-coloured clique-union multigraphs.

An instance has ``n`` colours; the edge set of each colour is the union of
pairwise vertex-disjoint cliques of size >= 2.  Edges are never stored
explicitly: a pair is an edge of colour ``c`` exactly when both endpoints
lie in one clique of that colour's class.  Vertices are dense ints in
``[0, vertex_count)``; isolated vertices are allowed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

Pair = tuple[int, int]


class InstanceError(ValueError):
    """Raised when an instance file or structure cannot be accepted."""


def pair(a: int, b: int) -> Pair:
    """Canonical unordered pair: (min, max)."""
    if a == b:
        raise ValueError(f"degenerate pair ({a}, {a})")
    return (a, b) if a < b else (b, a)


@dataclass
class ColourClass:
    colour: int
    cliques: list[tuple[int, ...]]

    def cover(self) -> int:
        """Total number of vertices covered by this colour."""
        return sum(len(q) for q in self.cliques)

    def vertices(self) -> set[int]:
        return {v for q in self.cliques for v in q}

    def edge_pairs(self) -> list[Pair]:
        """All pairs inside cliques, canonical, sorted."""
        out = []
        for q in self.cliques:
            for i in range(len(q)):
                for j in range(i + 1, len(q)):
                    out.append(pair(q[i], q[j]))
        out.sort()
        return out


@dataclass
class Instance:
    n: int
    vertex_count: int
    classes: list[ColourClass]
    normalized: bool = False
    # lazy caches; treat instances as immutable after construction
    _membership: Optional[list[dict[int, int]]] = field(
        default=None, repr=False, compare=False
    )
    _packed: Optional["PackedInstance"] = field(
        default=None, repr=False, compare=False
    )

    def colour_cover(self, c: int) -> int:
        return self.classes[c].cover()

    def min_cover(self) -> int:
        return min((cc.cover() for cc in self.classes), default=0)

    def clique_of(self, c: int, v: int) -> Optional[int]:
        """Index of the clique of colour ``c`` containing ``v``, if any."""
        if self._membership is None:
            self._membership = [None] * self.n  # type: ignore[list-item]
        m = self._membership[c]
        if m is None:
            m = {}
            for qi, q in enumerate(self.classes[c].cliques):
                for v_ in q:
                    m[v_] = qi
            self._membership[c] = m
        return m.get(v)

    def has_pair(self, c: int, p: Pair) -> bool:
        """True iff ``p`` is an edge of colour ``c``."""
        if self._packed is not None:  # binary search beats dict building
            a, b = p if p[0] < p[1] else (p[1], p[0])
            return self._packed.has_pair(c, a, b)
        qa = self.clique_of(c, p[0])
        return qa is not None and qa == self.clique_of(c, p[1])

    def packed(self) -> "PackedInstance":
        if self._packed is None:
            self._packed = PackedInstance.from_instance(self)
        return self._packed

    def iter_sorted_edges(self, c: int) -> Iterator[Pair]:
        """Edges of colour ``c`` in canonical (a, b) order.

        Backed by the packed arrays so that repeated scans over large
        instances stay cheap.
        """
        return self.packed().iter_colour_edges(c)


class PackedInstance:
    """Flat array view of an instance for vectorised statistics and for
    cheap canonical-order edge scans.

    ``tri``/``edg`` hold the size-3 and size-2 cliques row-wise (larger
    cliques are expanded into their pairs only, so pack after
    :func:`normalize` when exact clique damage matters).  ``pa``/``pb``
    hold every edge, sorted by (colour, a, b); ``estart`` slices them per
    colour.
    """

    def __init__(self, inst: Instance, tri, tri_col, edg, edg_col, pa, pb, estart):
        self.n = inst.n
        self.vertex_count = inst.vertex_count
        self.tri = tri
        self.tri_col = tri_col
        self.edg = edg
        self.edg_col = edg_col
        self.pa = pa
        self.pb = pb
        self.estart = estart

    @classmethod
    def from_instance(cls, inst: Instance) -> "PackedInstance":
        tri_flat: list[int] = []
        tri_col: list[int] = []
        edg_flat: list[int] = []
        edg_col: list[int] = []
        # big instances are generated normalized, so the python-level loop
        # below only ever sees cliques of size 2 or 3 there
        for cc in inst.classes:
            c = cc.colour
            for q in cc.cliques:
                if len(q) == 3:
                    tri_flat.extend(q)
                    tri_col.append(c)
                elif len(q) == 2:
                    edg_flat.extend(q)
                    edg_col.append(c)
                else:
                    for i in range(len(q)):
                        for j in range(i + 1, len(q)):
                            edg_flat.append(q[i])
                            edg_flat.append(q[j])
                            edg_col.append(c)
        tri = np.array(tri_flat, dtype=np.int32).reshape(-1, 3)
        tri.sort(axis=1)
        tric = np.array(tri_col, dtype=np.int32)
        edg = np.array(edg_flat, dtype=np.int32).reshape(-1, 2)
        edg.sort(axis=1)
        edgc = np.array(edg_col, dtype=np.int32)

        # every edge: 3 per triangle, 1 per stored pair
        pa = np.concatenate([tri[:, 0], tri[:, 0], tri[:, 1], edg[:, 0]])
        pb = np.concatenate([tri[:, 1], tri[:, 2], tri[:, 2], edg[:, 1]])
        pc = np.concatenate([tric, tric, tric, edgc])
        order = np.lexsort((pb, pa, pc))
        pa, pb, pc = pa[order], pb[order], pc[order]
        estart = np.searchsorted(pc, np.arange(inst.n + 1))
        return cls(inst, tri, tric, edg, edgc, pa, pb, estart)

    def iter_colour_edges(self, c: int) -> Iterator[Pair]:
        lo, hi = int(self.estart[c]), int(self.estart[c + 1])
        pa, pb = self.pa, self.pb
        for k in range(lo, hi):
            yield (int(pa[k]), int(pb[k]))

    def colour_edge_arrays(self, c: int):
        lo, hi = int(self.estart[c]), int(self.estart[c + 1])
        return self.pa[lo:hi], self.pb[lo:hi]

    def has_pair(self, c: int, a: int, b: int) -> bool:
        """Membership of the canonical pair (a < b) in colour ``c`` by
        binary search on the (colour, a, b)-sorted edge arrays."""
        lo, hi = int(self.estart[c]), int(self.estart[c + 1])
        pa, pb = self.pa[lo:hi], self.pb[lo:hi]
        l = int(np.searchsorted(pa, a, "left"))
        r = int(np.searchsorted(pa, a, "right"))
        if l == r:
            return False
        j = l + int(np.searchsorted(pb[l:r], b, "left"))
        return j < r and int(pb[j]) == b


@dataclass
class RainbowMatching:
    """Vertex-disjoint pairs with an injective colour assignment."""

    pairs: list[Pair]
    colours: list[int]

    @classmethod
    def empty(cls) -> "RainbowMatching":
        return cls([], [])

    def size(self) -> int:
        return len(self.pairs)

    def vertex_set(self) -> set[int]:
        return {v for p in self.pairs for v in p}

    def colour_set(self) -> set[int]:
        return set(self.colours)

    def sorted_by_colour(self) -> "RainbowMatching":
        order = sorted(range(len(self.pairs)), key=lambda i: self.colours[i])
        return RainbowMatching(
            [self.pairs[i] for i in order], [self.colours[i] for i in order]
        )

    def to_dict(self) -> dict:
        rm = self.sorted_by_colour()
        return {"pairs": [list(p) for p in rm.pairs], "colours": rm.colours}

    @classmethod
    def from_dict(cls, d: dict) -> "RainbowMatching":
        pairs = [pair(int(p[0]), int(p[1])) for p in d["pairs"]]
        colours = [int(c) for c in d["colours"]]
        if len(pairs) != len(colours):
            raise InstanceError("pairs and colours differ in length")
        return cls(pairs, colours)


# ---------------------------------------------------------------------------
# validation / normalization


def validate(inst: Instance) -> list[str]:
    """Check every structural invariant.  Returns a list of violations,
    empty iff the instance is valid.  Violations are data, not errors.
    """
    report: list[str] = []
    if inst.n < 0 or inst.vertex_count < 0:
        report.append("negative n or vertex_count")
        return report
    if len(inst.classes) != inst.n:
        report.append(f"expected {inst.n} colour classes, found {len(inst.classes)}")
        return report
    for idx, cc in enumerate(inst.classes):
        if cc.colour != idx:
            report.append(f"colour {idx}: class carries colour id {cc.colour}")
        seen: dict[int, int] = {}
        for qi, q in enumerate(cc.cliques):
            if len(q) < 2:
                report.append(f"colour {idx}, clique {qi}: trivial clique {tuple(q)}")
            if len(set(q)) != len(q):
                report.append(f"colour {idx}, clique {qi}: duplicate vertex")
            for v in q:
                if not (0 <= v < inst.vertex_count):
                    report.append(
                        f"colour {idx}, clique {qi}: vertex {v} out of range"
                    )
                elif v in seen:
                    report.append(
                        f"overlapping cliques in colour {idx}: "
                        f"vertex {v} in cliques {seen[v]} and {qi}"
                    )
                else:
                    seen[v] = qi
            if inst.normalized and len(q) not in (2, 3):
                report.append(
                    f"colour {idx}, clique {qi}: size {len(q)} in normalized instance"
                )
    return report


def normalize(inst: Instance) -> Instance:
    """Split every clique into disjoint edges plus at most one triangle
    covering the same vertices.

    Odd cliques keep their three lowest vertices as the triangle; the rest
    is paired in ascending order.  Deterministic and idempotent.
    """
    bad = validate(inst)
    if bad:
        raise InstanceError("cannot normalize invalid instance: " + bad[0])
    classes = []
    for cc in inst.classes:
        cliques: list[tuple[int, ...]] = []
        for q in cc.cliques:
            q = tuple(sorted(q))
            if len(q) <= 3:
                cliques.append(q)
                continue
            if len(q) % 2 == 1:
                cliques.append(q[:3])
                q = q[3:]
            for i in range(0, len(q), 2):
                cliques.append(q[i : i + 2])
        classes.append(ColourClass(cc.colour, cliques))
    return canonical(Instance(inst.n, inst.vertex_count, classes, normalized=True))


def canonical(inst: Instance) -> Instance:
    """Structurally canonical copy: vertices ascending inside cliques,
    cliques sorted, classes in colour order."""
    classes = [
        ColourClass(cc.colour, sorted(tuple(sorted(q)) for q in cc.cliques))
        for cc in sorted(inst.classes, key=lambda cc: cc.colour)
    ]
    return Instance(inst.n, inst.vertex_count, classes, normalized=inst.normalized)


def structurally_equal(a: Instance, b: Instance) -> bool:
    ca, cb = canonical(a), canonical(b)
    return (
        ca.n == cb.n
        and ca.vertex_count == cb.vertex_count
        and all(
            x.colour == y.colour and x.cliques == y.cliques
            for x, y in zip(ca.classes, cb.classes)
        )
    )


# ---------------------------------------------------------------------------
# queries


def pair_multiplicity(inst: Instance, p: Pair) -> int:
    """Number of colours whose class contains ``p`` inside one clique."""
    a, b = p
    if not (0 <= a < inst.vertex_count and 0 <= b < inst.vertex_count):
        raise ValueError(f"vertex id out of range in pair {p}")
    return sum(1 for c in range(inst.n) if inst.has_pair(c, p))


def edges_between(
    inst: Instance,
    X: Iterable[int],
    Y: Iterable[int],
    colours: Optional[Iterable[int]] = None,
) -> list[tuple[Pair, int]]:
    """Coloured pairs with one endpoint in X and the other in Y.

    Order is deterministic: by colour, then canonical pair.
    """
    X, Y = set(X), set(Y)
    if colours is None:
        colours = range(inst.n)
    out: list[tuple[Pair, int]] = []
    for c in sorted(set(colours)):
        hits = []
        for q in inst.classes[c].cliques:
            for i in range(len(q)):
                for j in range(i + 1, len(q)):
                    u, w = q[i], q[j]
                    if (u in X and w in Y) or (w in X and u in Y):
                        hits.append(pair(u, w))
        hits.sort()
        out.extend((p, c) for p in hits)
    return out


def verify_rainbow(
    inst: Instance, rm: RainbowMatching
) -> tuple[bool, Optional[str]]:
    """Definitional check of a rainbow matching against an instance.

    Returns (True, None) or (False, first violation).
    """
    if len(rm.pairs) != len(rm.colours):
        return False, "pairs and colours differ in length"
    seen_v: set[int] = set()
    seen_c: set[int] = set()
    for p, c in zip(rm.pairs, rm.colours):
        if p[0] == p[1]:
            return False, f"degenerate pair {p}"
        if p[0] in seen_v or p[1] in seen_v:
            return False, f"pair {p} not vertex-disjoint"
        seen_v.update(p)
        if c in seen_c:
            return False, f"duplicate colour {c}"
        if not (0 <= c < inst.n):
            return False, f"colour {c} out of range"
        seen_c.add(c)
        if not inst.has_pair(c, pair(*p)):
            return False, f"pair {p} not in colour class {c}"
    return True, None


def is_maximal(
    inst: Instance,
    rm: RainbowMatching,
    excluded: frozenset[int] = frozenset(),
) -> tuple[bool, Optional[tuple[Pair, int]]]:
    """True iff no unused-colour edge is disjoint from the matching.

    On failure, returns a witness (pair, colour).  ``excluded`` restricts
    the instance to vertices outside that set (used by the sampling
    experiment); it does not affect the matching itself.
    """
    ok, why = verify_rainbow(inst, rm)
    if not ok:
        raise ValueError(f"invalid rainbow matching: {why}")
    used_v = rm.vertex_set()
    used_c = rm.colour_set()
    for c in range(inst.n):
        if c in used_c:
            continue
        for a, b in inst.iter_sorted_edges(c):
            if a in used_v or b in used_v or a in excluded or b in excluded:
                continue
            return False, ((a, b), c)
    return True, None


# ---------------------------------------------------------------------------
# serialization

_JSON_KW = {"sort_keys": True, "separators": (",", ":")}


def to_dict(inst: Instance) -> dict:
    c = canonical(inst)
    return {
        "n": c.n,
        "vertex_count": c.vertex_count,
        "normalized": c.normalized,
        "classes": [
            {"colour": cc.colour, "cliques": [list(q) for q in cc.cliques]}
            for cc in c.classes
        ],
    }


def dumps(inst: Instance) -> str:
    """Canonical serialization: byte equality implies structural equality."""
    return json.dumps(to_dict(inst), **_JSON_KW) + "\n"


def dump(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(inst))


def _expect(cond: bool, where: str, what: str) -> None:
    if not cond:
        raise InstanceError(f"{where}: {what}")


def from_dict(d: object, strict: bool = True) -> Instance:
    """Parse an instance structure, reporting positional errors."""
    _expect(isinstance(d, dict), "$", "expected object")
    assert isinstance(d, dict)
    for key in ("n", "vertex_count", "classes"):
        _expect(key in d, "$", f"missing field '{key}'")
    _expect(isinstance(d["n"], int), "n", "expected integer")
    _expect(isinstance(d["vertex_count"], int), "vertex_count", "expected integer")
    _expect(isinstance(d["classes"], list), "classes", "expected array")
    classes = []
    for ci, entry in enumerate(d["classes"]):
        where = f"classes[{ci}]"
        _expect(isinstance(entry, dict), where, "expected object")
        _expect("colour" in entry and "cliques" in entry, where,
                "missing 'colour' or 'cliques'")
        _expect(isinstance(entry["colour"], int), f"{where}.colour",
                "expected integer")
        _expect(isinstance(entry["cliques"], list), f"{where}.cliques",
                "expected array")
        cliques = []
        for qi, q in enumerate(entry["cliques"]):
            qwhere = f"{where}.cliques[{qi}]"
            _expect(isinstance(q, list), qwhere, "expected array of vertices")
            for vi, v in enumerate(q):
                _expect(isinstance(v, int), f"{qwhere}[{vi}]", "expected integer")
            cliques.append(tuple(q))
        classes.append(ColourClass(entry["colour"], cliques))
    inst = Instance(
        d["n"], d["vertex_count"], classes, normalized=bool(d.get("normalized", False))
    )
    if strict:
        bad = validate(inst)
        if bad:
            raise InstanceError("invalid instance: " + "; ".join(bad[:5]))
    return inst


def loads(text: str, strict: bool = True) -> Instance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return from_dict(d, strict=strict)


def load(path, strict: bool = True) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read(), strict=strict)
