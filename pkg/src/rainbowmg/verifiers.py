"""Executable property checks for the structural lemmas, plus the sampling
experiment and the conjecture stress harness.

The lemma checks are hypothesis-to-conclusion audits: they can report a
vacuous pass, a pass, or a VIOLATION.  The audited statements are theorems
for matchings certified to be of maximum size, so a violation always means
an implementation bug, never new mathematics.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import core
from .core import Instance, Pair, RainbowMatching, pair
from .generators import (
    RNG_ALGORITHM,
    RandomSpec,
    derive_seed,
    gen_random,
    gen_triangle_extremal,
    rng_for,
)
from .solvers import (
    AuxiliaryMatching,
    SolverBudget,
    exact_max,
    find_aux_matching,
    local_search,
)

_JSON_KW = {"sort_keys": True, "separators": (",", ":")}


def _pairs_of(M) -> list[Pair]:
    return list(M.pairs) if isinstance(M, RainbowMatching) else [pair(*p) for p in M]


# ---------------------------------------------------------------------------
# horns


@dataclass(frozen=True)
class HornCertificate:
    """Edge ``e`` of a matching with two disjoint witness edges into the
    unmatched vertices; a c-horn when both witnesses share colour c, a
    rainbow horn when the colours differ."""

    e: Pair
    e1: Pair
    e2: Pair
    c1: int
    c2: int

    @property
    def kind(self) -> str:
        return "c-horn" if self.c1 == self.c2 else "rainbow-horn"


@dataclass
class HornCensus:
    matching: list[Pair]
    colours: list[int]
    certificates: list[HornCertificate]

    def c_horn_edges(self, c: int) -> set[Pair]:
        return {h.e for h in self.certificates if h.c1 == c and h.c2 == c}

    def counts(self) -> dict[tuple[Pair, int], int]:
        """Number of certificate configurations per (edge, colour)."""
        out: dict[tuple[Pair, int], int] = {}
        for h in self.certificates:
            if h.c1 == h.c2:
                key = (h.e, h.c1)
                out[key] = out.get(key, 0) + 1
        return out

    def rainbow_certs(self) -> list[HornCertificate]:
        return [h for h in self.certificates if h.c1 != h.c2]


def horn_census(inst: Instance, M, C: Iterable[int]) -> HornCensus:
    """Exhaustive, deterministic enumeration of horn certificates of the
    matching for the given colour set."""
    pairs = _pairs_of(M)
    colours = sorted(set(C))
    vm = {v for p in pairs for v in p}
    if len(vm) != 2 * len(pairs):
        raise ValueError("M is not a matching")
    # attachments: vertex of V(M) -> [(outside vertex, colour)]
    att: dict[int, list[tuple[int, int]]] = {v: [] for v in vm}
    for c in colours:
        for a, b in inst.iter_sorted_edges(c):
            if a in vm and b not in vm:
                att[a].append((b, c))
            elif b in vm and a not in vm:
                att[b].append((a, c))
    certs: list[HornCertificate] = []
    for a, b in pairs:
        for z1, c1 in att[a]:
            for z2, c2 in att[b]:
                if z1 != z2:
                    certs.append(
                        HornCertificate((a, b), pair(a, z1), pair(b, z2), c1, c2)
                    )
    return HornCensus(pairs, colours, certs)


@dataclass
class LemmaVerdict:
    name: str
    hypothesis_holds: bool
    conclusion_holds: Optional[bool]
    details: str = ""

    @property
    def violation(self) -> bool:
        return self.hypothesis_holds and self.conclusion_holds is False

    @property
    def outcome(self) -> str:
        if not self.hypothesis_holds:
            return "vacuous-pass"
        return "VIOLATION" if self.violation else "pass"


def check_horn_counting(inst: Instance, N, C: Iterable[int], k: int) -> LemmaVerdict:
    """If every colour of C yields >= k c-horns in N and k|C| > 2|N|, a
    C-rainbow horn must exist in N."""
    pairs = _pairs_of(N)
    C = sorted(set(C))
    census = horn_census(inst, pairs, C)
    per_colour = {c: len(census.c_horn_edges(c)) for c in C}
    hyp = all(v >= k for v in per_colour.values()) and k * len(C) > 2 * len(pairs)
    if not hyp:
        return LemmaVerdict(
            "horn-counting", False, None,
            f"per-colour horns {per_colour}, k|C|={k * len(C)}, 2|N|={2 * len(pairs)}",
        )
    concl = bool(census.rainbow_certs())
    return LemmaVerdict(
        "horn-counting", True, concl,
        "" if concl else "no rainbow horn despite counting hypothesis",
    )


def check_observation_horn(
    inst: Instance, M, e: Pair, C: Iterable[int]
) -> LemmaVerdict:
    """A matching edge that is a c-horn for two colours of a 3-colour set
    and sees the third colour must be a rainbow horn for that set."""
    C = sorted(set(C))
    if len(C) != 3:
        raise ValueError("C must contain exactly three colours")
    pairs = _pairs_of(M)
    e = pair(*e)
    if e not in pairs:
        raise ValueError(f"edge {e} not in the matching")
    census = horn_census(inst, pairs, C)
    vm = {v for p in pairs for v in p}
    horn_cols = [c for c in C if e in census.c_horn_edges(c)]
    hyp = False
    if len(horn_cols) >= 2:
        third = [c for c in C if c not in horn_cols[:2]]
        for c in (third if len(horn_cols) == 2 else C):
            for a, b in inst.iter_sorted_edges(c):
                touches_e = a in e or b in e
                other = b if a in e else a
                if touches_e and other not in vm:
                    hyp = True
                    break
            if hyp:
                break
    if not hyp:
        return LemmaVerdict("observation-horn", False, None,
                            f"horn colours at {e}: {horn_cols}")
    concl = any(h.e == e for h in census.rainbow_certs())
    return LemmaVerdict(
        "observation-horn", True, concl,
        "" if concl else f"edge {e} should be a rainbow horn for {C}",
    )


# ---------------------------------------------------------------------------
# auxiliary matching validation


@dataclass
class AuditReport:
    violations: list[tuple[str, str]] = field(default_factory=list)
    audit_ran: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def implementation_bug(self) -> bool:
        return any(clause.startswith("audit:") for clause, _ in self.violations)

    def add(self, clause: str, detail: str) -> None:
        self.violations.append((clause, detail))


def validate_aux(
    inst: Instance,
    M: RainbowMatching,
    aux: AuxiliaryMatching,
    certified_optimal: bool = False,
) -> AuditReport:
    """Check every structural invariant of an auxiliary matching; when M
    is certified maximum and t >= 5, additionally audit the local
    consequences that are theorems in that regime (clauses prefixed
    ``audit:`` — any breach is an implementation bug)."""
    rep = AuditReport()
    ok, why = core.verify_rainbow(inst, M)
    if not ok:
        rep.add("matching", f"invalid rainbow matching: {why}")
        return rep
    k = aux.size()
    if not (len(aux.x) == len(aux.v) == len(aux.m_x)
            == len(aux.colours) == len(aux.witnesses) == k):
        rep.add("shape", "aligned lists differ in length")
        return rep
    vm = M.vertex_set()
    used_colours = M.colour_set()
    if len(set(aux.m_indices)) != k:
        rep.add("shared M-edge", "two N-edges touch the same M-edge")
    xs, vs = set(aux.x), set(aux.v)
    if len(xs) != k or len(vs) != k or xs & vs:
        rep.add("matching-N", "N-pairs are not vertex-disjoint")
    for i in range(k):
        mi = aux.m_indices[i]
        if not (0 <= mi < M.size()):
            rep.add("index", f"M-edge index {mi} out of range")
            continue
        e = M.pairs[mi]
        if aux.x[i] not in e:
            rep.add("x-map", f"x={aux.x[i]} not an endpoint of {e}")
        if aux.m_x[i] != (e[1] if e[0] == aux.x[i] else e[0]):
            rep.add("m-map", f"m(x) inconsistent for {e}")
        if aux.v[i] in vm:
            rep.add("v-outside", f"v={aux.v[i]} lies in V(M)")
        if aux.colours[i] != M.colours[mi]:
            rep.add("colour-map", f"colour of M-edge {e} misrecorded")
        wit = aux.witnesses[i]
        if len(wit) < aux.t:
            rep.add("witness-count",
                    f"N-edge ({aux.x[i]},{aux.v[i]}) repeated in only "
                    f"{len(wit)} unused colours, need {aux.t}")
        p = pair(aux.x[i], aux.v[i])
        for c in wit:
            if c in used_colours:
                rep.add("witness colour used by M", f"colour {c} on {p}")
            elif not inst.has_pair(c, p):
                rep.add("witness-edge", f"{p} is not {c}-coloured")
    if len(set(aux.colours)) != k:
        rep.add("C_N", "|C_N| != |N|")

    if certified_optimal and aux.t >= 5 and rep.ok:
        _audit_maximal_consequences(inst, M, aux, rep)
        rep.audit_ran = True
    return rep


def _audit_maximal_consequences(inst, M, aux, rep):
    """For maximum M: no C0+C_N edge disjoint from N + (M minus M_N), no
    rainbow horn there, and constrained edges at each v_e."""
    touched = set(aux.m_indices)
    K = [pair(x, v) for x, v in zip(aux.x, aux.v)]
    K += [p for i, p in enumerate(M.pairs) if i not in touched]
    VK = {v for p in K for v in p}
    C0 = set(range(inst.n)) - M.colour_set()
    CC = sorted(C0 | aux.colour_set())
    for c in CC:
        for a, b in inst.iter_sorted_edges(c):
            if a not in VK and b not in VK:
                rep.add("audit:disjoint-edge",
                        f"{c}-coloured edge ({a},{b}) disjoint from N+(M-M_N)")
                return
    census = horn_census(inst, K, CC)
    rb = census.rainbow_certs()
    if rb:
        h = rb[0]
        rep.add("audit:rainbow-horn",
                f"rainbow horn at {h.e} with colours ({h.c1},{h.c2})")
        return
    vn = set(aux.x) | set(aux.v)
    v_rest = {v for i, p in enumerate(M.pairs) if i not in touched for v in p}
    by_v = {v: i for i, v in enumerate(aux.v)}
    for c in CC:
        for a, b in inst.iter_sorted_edges(c):
            for ve, z in ((a, b), (b, a)):
                i = by_v.get(ve)
                if i is None or z in vn or z in v_rest:
                    continue
                if z != aux.m_x[i] and c != aux.colours[i]:
                    rep.add(
                        "audit:v-edge",
                        f"{c}-coloured edge ({ve},{z}) at v_e escapes both "
                        f"m(x_e)={aux.m_x[i]} and colour {aux.colours[i]}",
                    )
                    return


def compute_N_alpha(
    inst: Instance, aux: AuxiliaryMatching, alpha: float
) -> list[int]:
    """Indices i of N-edges whose pair (v_e, m(x_e)) is repeated in at
    most alpha*|C_N| colours of C_N."""
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")
    cn = aux.colour_set()
    bound = alpha * len(cn)
    out = []
    for i in range(aux.size()):
        p = pair(aux.v[i], aux.m_x[i])
        reps = sum(1 for c in cn if inst.has_pair(c, p))
        if reps <= bound:
            out.append(i)
    return out


# ---------------------------------------------------------------------------
# concentration bound


def chernoff_bound(expectation: float, k: float, eps: float) -> float:
    """Upper bound 2*exp(-eps^2 E / (3 k^2)) on the probability that a sum
    of independent [0, k]-valued variables deviates from its mean E by
    more than eps*E."""
    if expectation < 0:
        raise ValueError("expectation must be non-negative")
    if k <= 0:
        raise ValueError("summand bound k must be positive")
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    return 2.0 * math.exp(-(eps * eps) * expectation / (3.0 * k * k))


# ---------------------------------------------------------------------------
# sampling experiment


@dataclass
class SamplingReport:
    n: int
    p: float
    seed: int
    rng_algorithm: str
    sample: list[int]
    e_c_S: list[int]
    v_c_S: list[int]
    survivor_cover: list[int]
    conservative_cover: list[int]
    sqrt_n: float
    cover_floor: float
    low_edge_colours: int
    damaged_colours: int
    solved_size: int
    completed_colours: int
    combined_size: int
    full: bool

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), **_JSON_KW) + "\n"


def sampling_experiment(
    inst: Instance,
    seed: int,
    solve_budget: Optional[SolverBudget] = None,
) -> SamplingReport:
    """Sample each vertex independently with p = 2 n^(-1/4); count the
    per-colour edges and vertices inside the sample, the exact surviving
    cover outside it (and the conservative three-vertices-per-hit bound),
    then solve the unsampled graph and greedily complete inside the sample.
    """
    n = inst.n
    p = 2.0 * n ** -0.25
    rng = rng_for(seed)
    in_s = rng.random(inst.vertex_count) < p
    sample = [int(v) for v in np.flatnonzero(in_s)]

    packed = inst.packed()

    def _per_colour(values, starts):
        # per-colour sums of an array that is sorted by colour; int32
        # cumsum is safe up to 2^31 clique slots
        cs = np.concatenate(([0], np.cumsum(values, dtype=np.int32)))
        return (cs[starts[1:]] - cs[starts[:-1]]).astype(np.int64)

    both = in_s[packed.pa] & in_s[packed.pb]
    e_c = _per_colour(both, packed.estart)

    tstart = np.searchsorted(packed.tri_col, np.arange(n + 1))
    gstart = np.searchsorted(packed.edg_col, np.arange(n + 1))
    th = in_s[packed.tri].sum(axis=1, dtype=np.int32)
    eh = in_s[packed.edg].sum(axis=1, dtype=np.int32)
    v_c = _per_colour(th, tstart) + _per_colour(eh, gstart)
    surv = (_per_colour(np.where(th <= 1, 3 - th, 0), tstart)
            + _per_colour(np.where(eh == 0, 2, 0), gstart))

    if inst.normalized:  # cover is clique-size arithmetic on the packed form
        covers = 3 * np.diff(tstart) + 2 * np.diff(gstart)
    else:
        covers = np.array([cc.cover() for cc in inst.classes], dtype=np.int64)
    conservative = np.maximum(covers - 3 * v_c, 0)
    sqrt_n = math.sqrt(n)
    min_cover = int(covers.min()) if n else 0
    cover_floor = (1.0 - 6.0 * p) * min_cover
    low_edge = int(np.count_nonzero(e_c <= sqrt_n))
    damaged = int(np.count_nonzero(surv < cover_floor))

    excluded = frozenset(sample)
    budget = solve_budget or SolverBudget(time_limit=5.0)
    result = local_search(inst, budget, excluded=excluded)
    M = result.best
    used_v = M.vertex_set()
    used_c = M.colour_set()
    completed = 0
    sset = set(sample)
    nvs: set[int] = set()
    for c in range(n):
        if c in used_c:
            continue
        for a, b in inst.iter_sorted_edges(c):
            if a in sset and b in sset and a not in nvs and b not in nvs:
                nvs.add(a)
                nvs.add(b)
                completed += 1
                break
    combined = M.size() + completed
    return SamplingReport(
        n=n, p=p, seed=seed, rng_algorithm=RNG_ALGORITHM, sample=sample,
        e_c_S=[int(x) for x in e_c], v_c_S=[int(x) for x in v_c],
        survivor_cover=[int(x) for x in surv],
        conservative_cover=[int(x) for x in conservative],
        sqrt_n=sqrt_n, cover_floor=cover_floor,
        low_edge_colours=low_edge, damaged_colours=damaged,
        solved_size=M.size(), completed_colours=completed,
        combined_size=combined, full=combined == n,
    )


# ---------------------------------------------------------------------------
# conjecture stress harness


@dataclass
class StressReport:
    n: int
    v: int
    max_multiplicity: int
    seed: int
    rng_algorithm: str
    trials: int
    successes: int
    failures: list[dict] = field(default_factory=list)

    @property
    def counterexample_candidates(self) -> list[dict]:
        return [f for f in self.failures if f.get("candidate")]

    def to_dict(self) -> dict:
        return {
            "n": self.n, "v": self.v,
            "max_multiplicity": self.max_multiplicity,
            "seed": self.seed, "rng_algorithm": self.rng_algorithm,
            "trials": self.trials, "successes": self.successes,
            "failures": sorted(self.failures, key=lambda f: f["trial"]),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), **_JSON_KW) + "\n"


def _stress_trial(args) -> dict:
    (n, v, max_mult, triangle_fraction, master_seed, trial,
     node_limit, time_limit) = args
    if trial < 0:  # planted extremal instance
        inst = gen_triangle_extremal(n)
        child = None
    else:
        child = derive_seed(master_seed, trial)
        inst = gen_random(RandomSpec(
            n=n, v=v, max_multiplicity=max_mult, seed=child,
            triangle_fraction=triangle_fraction,
        ))
    res = exact_max(inst, SolverBudget(
        node_limit=node_limit, time_limit=time_limit, target=n))
    out = {
        "trial": trial,
        "seed": child,
        "size": res.size(),
        "optimal": res.optimal,
        "reason": res.reason,
        "nodes": res.nodes_explored,
    }
    if res.size() < n:
        out["failure"] = {
            "instance": core.dumps(inst).strip(),
            "certificate": res.to_dict(),
        }
    return out


def stress_conjecture(
    n: int,
    v: int,
    trials: int,
    max_multiplicity: int,
    seed: int,
    triangle_fraction: float = 0.5,
    jobs: int = 1,
    replay_dir: Optional[str] = None,
    include_extremal: bool = False,
    node_limit: int = 5_000_000,
    time_limit: float = 0.0,
) -> StressReport:
    """Seeded random trials of the size-n rainbow matching question.

    Every failing trial is persisted (a proved-optimal failure is a
    counterexample candidate and scientifically valuable; never lose one).
    Deterministic given the master seed, independent of job count.
    """
    indices = list(range(trials))
    if include_extremal:
        indices = [-1] + indices
    argset = [
        (n, v, max_multiplicity, triangle_fraction, seed, i,
         node_limit, time_limit)
        for i in indices
    ]
    if jobs > 1 and len(argset) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_stress_trial, argset, chunksize=8))
    else:
        results = [_stress_trial(a) for a in argset]
    results.sort(key=lambda r: r["trial"])

    report = StressReport(
        n=n, v=v, max_multiplicity=max_multiplicity, seed=seed,
        rng_algorithm=RNG_ALGORITHM, trials=len(results), successes=0,
    )
    for r in results:
        if "failure" not in r:
            report.successes += 1
            continue
        entry = {
            "trial": r["trial"],
            "seed": r["seed"],
            "candidate": bool(r["optimal"]),
            "instance": r["failure"]["instance"],
            "certificate": r["failure"]["certificate"],
        }
        report.failures.append(entry)
        if replay_dir:
            os.makedirs(replay_dir, exist_ok=True)
            name = f"replay-n{n}-v{v}-trial{r['trial']}.json"
            payload = {
                "spec": {
                    "n": n, "v": v, "max_multiplicity": max_multiplicity,
                    "triangle_fraction": triangle_fraction,
                    "rng_algorithm": RNG_ALGORITHM,
                },
                "seed": r["seed"],
                "instance": json.loads(entry["instance"]),
                "certificate": entry["certificate"],
            }
            with open(os.path.join(replay_dir, name), "w") as fh:
                fh.write(json.dumps(payload, **_JSON_KW) + "\n")
    return report


# ---------------------------------------------------------------------------
# bundled audit used by the CLI


def lemma_audit(inst: Instance, t_values: Sequence[int] = (5, 7, 9)) -> dict:
    """Horn census + counting check + auxiliary-matching validation on a
    maximum matching of the instance.  Returns a summary dict; the CLI
    maps ``bug`` to exit code 1."""
    res = exact_max(inst, SolverBudget(node_limit=2_000_000))
    M = res.best
    C0 = sorted(set(range(inst.n)) - M.colour_set())
    verdicts: list[LemmaVerdict] = []
    verdicts.append(check_horn_counting(inst, M.pairs, C0, k=1))
    if len(C0) >= 3 and M.pairs:
        for e in M.pairs:
            verdicts.append(check_observation_horn(inst, M.pairs, e, C0[:3]))
    aux_reports = []
    for t in t_values:
        aux = find_aux_matching(inst, M, t)
        rep = validate_aux(inst, M, aux, certified_optimal=res.optimal)
        aux_reports.append((t, aux.size(), rep))
    bug = any(v.violation for v in verdicts) or any(
        not rep.ok for _, _, rep in aux_reports
    )
    return {
        "matching_size": M.size(),
        "optimal": res.optimal,
        "verdicts": [
            {"name": v.name, "outcome": v.outcome, "details": v.details}
            for v in verdicts
        ],
        "aux": [
            {"t": t, "size": sz, "ok": rep.ok, "audited": rep.audit_ran,
             "violations": rep.violations}
            for t, sz, rep in aux_reports
        ],
        "bug": bug,
    }
