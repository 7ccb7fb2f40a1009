"""Acceptance gate: ten exactly-checkable criteria.

Each test appends one PASS/FAIL line to the terminal summary (see
conftest.pytest_terminal_summary) and then asserts, so a red criterion is
both visible in the report and fails the suite.
"""
from __future__ import annotations

import time

import numpy as np
import pytest

from rainbowmg.cli import main as cli_main
from rainbowmg.core import ColourClass, pair
from rainbowmg.generators import (
    RandomSpec,
    cyclic_square,
    derive_seed,
    gen_double_k4,
    gen_latin_bridge,
    gen_random,
    gen_triangle_extremal,
)
from rainbowmg.solvers import (
    SolverBudget,
    exact_max,
    extract_matching_triangles,
    find_aux_matching,
    greedy_extend,
)
from rainbowmg.verifiers import (
    check_horn_counting,
    check_observation_horn,
    horn_census,
    sampling_experiment,
    stress_conjecture,
    validate_aux,
)

from conftest import (
    acceptance_lines,
    oracle_bipartite_max,
    oracle_constrained_h_matching,
    oracle_horn_census,
    oracle_max_partial_transversal,
    small_random_instances,
)


def report(num: int, name: str, ok: bool, detail: str) -> None:
    line = f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    acceptance_lines.append(line)
    assert ok, line


# ---------------------------------------------------------------------------


def test_criterion_01_extremal_lower_bound():
    t0 = time.perf_counter()
    ok = True
    sizes = []
    for n in range(2, 9):
        res = exact_max(gen_triangle_extremal(n))
        sizes.append(res.size())
        ok = ok and res.optimal and res.size() == n - 1
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 10.0
    report(1, "extremal lower bound n-1 for n=2..8", ok,
           f"sizes={sizes}, {elapsed:.2f}s")


def test_criterion_02_double_k4():
    t0 = time.perf_counter()
    res = exact_max(gen_double_k4())
    elapsed = time.perf_counter() - t0
    ok = res.optimal and res.size() == 2 and elapsed < 1.0
    report(2, "double-K4 optimum 2", ok,
           f"size={res.size()}, {elapsed:.2f}s")


def test_criterion_03_greedy_guarantee():
    t0 = time.perf_counter()
    trials = 0
    failures = 0
    for n in range(4, 8):
        for i in range(125):
            spec = RandomSpec(n=n, v=4 * n - 3, max_multiplicity=n,
                              seed=derive_seed(301, 1000 * n + i))
            inst = gen_random(spec)
            assert inst.min_cover() >= 4 * n - 3
            trials += 1
            if greedy_extend(inst).size() != n:
                failures += 1
    elapsed = time.perf_counter() - t0
    ok = trials >= 500 and failures == 0 and elapsed < 30.0
    report(3, "greedy reaches n at cover >= 4n-3", ok,
           f"{trials} trials, {failures} failures, {elapsed:.2f}s")


def test_criterion_04_conjecture_stress(tmp_path):
    t0 = time.perf_counter()
    total = 0
    failing = []
    for n in (4, 5, 6):
        rep = stress_conjecture(
            n=n, v=3 * n - 2, trials=200, max_multiplicity=n,
            seed=400 + n, replay_dir=str(tmp_path / f"replays-n{n}"))
        total += rep.trials
        failing.extend(rep.failures)
    # exit-code contract: a planted sub-threshold failure is flagged with 2
    code = cli_main(["stress", "--n", "4", "--v", "9", "--trials", "1",
                     "--seed", "1", "--include-extremal",
                     "--out", str(tmp_path / "planted.json")])
    elapsed = time.perf_counter() - t0
    ok = total == 600 and not failing and code == 2 and elapsed < 300.0
    report(4, "600 (n,3n-2) stress trials all reach n", ok,
           f"{total} trials, {len(failing)} failures, "
           f"planted exit={code}, {elapsed:.2f}s")


def _fuzz_extract_case(rng):
    k = int(rng.integers(1, 7))
    verts = list(range(2 * k))
    rng.shuffle(verts)
    M = [tuple(sorted(verts[2 * i: 2 * i + 2])) for i in range(k)]
    a_edges = [e for e in M if rng.random() < 0.4]
    A = {e[int(rng.integers(2))] for e in a_edges}
    S = sorted(set(verts) - A)
    rng.shuffle(S)
    cliques = []
    nxt = 100  # fresh outside vertices
    a_left = sorted(A)
    pos = 0
    while pos < len(S):
        take2 = pos + 1 < len(S) and rng.random() < 0.6
        group = S[pos: pos + 2] if take2 else S[pos: pos + 1]
        pos += len(group)
        attach = rng.random() < (0.9 if len(group) == 1 else 0.5)
        if len(group) == 1 and not attach:
            continue  # a lone S-vertex cannot form a clique
        if attach:
            if a_left and rng.random() < 0.3:
                group = group + [a_left.pop()]
            else:
                group = group + [nxt]
                nxt += 1
        cliques.append(tuple(group))
    H = ColourClass(0, cliques)
    s_max = H.cover() - 2 * k
    if s_max < 1:
        return None
    s = int(rng.integers(1, s_max + 1))
    return M, A, H, s


def test_criterion_05_triangle_extraction_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    done = 0
    bad = []
    while done < 300:
        case = _fuzz_extract_case(rng)
        if case is None:
            continue
        M, A, H, s = case
        out = extract_matching_triangles(M, A, H, s)
        done += 1
        partner = {a: b for a, b in M} | {b: a for a, b in M}
        mA = {partner[a] for a in A}
        S = set(partner) - A
        flat = [v for p in out for v in p]
        valid = (
            len(out) == s
            and len(set(flat)) == len(flat)
            and all(p in H.edge_pairs() for p in out)
            and all(not set(p) & mA for p in out)
            and all(len(set(p) & (S - mA)) >= 1 for p in out)
            and oracle_constrained_h_matching(M, A, H) >= s
        )
        if not valid:
            bad.append((M, A, H.cliques, s, out))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30.0
    report(5, "constructive extraction matches brute force (300 cases)", ok,
           f"{done} cases, {len(bad)} bad, {elapsed:.2f}s")


def _census_corpus():
    for n in range(2, 7):
        yield gen_triangle_extremal(n)
    yield gen_double_k4()
    yield gen_latin_bridge(cyclic_square(2), 0)
    yield gen_latin_bridge(cyclic_square(2), 2)
    yield gen_latin_bridge(cyclic_square(3), 0)
    for inst in small_random_instances(25, seed=606):
        if inst.vertex_count <= 24:
            yield inst


def test_criterion_06_horn_machinery():
    t0 = time.perf_counter()
    checked = 0
    mismatches = 0
    violations = 0
    for inst in _census_corpus():
        res = exact_max(inst)
        for M in (res.best, greedy_extend(inst)):
            C0 = sorted(set(range(inst.n)) - M.colour_set())
            for C in (set(C0), set(range(inst.n))):
                census = horn_census(inst, M, C)
                ours = {(h.e, h.e1, h.e2, h.c1, h.c2)
                        for h in census.certificates}
                if ours != oracle_horn_census(inst, M.pairs, C):
                    mismatches += 1
                checked += 1
            for k in (1, 2):
                if check_horn_counting(inst, M, C0, k).violation:
                    violations += 1
            if len(C0) >= 3:
                for e in M.pairs:
                    if check_observation_horn(inst, M, e,
                                              set(C0[:3])).violation:
                        violations += 1
    elapsed = time.perf_counter() - t0
    ok = checked > 0 and mismatches == 0 and violations == 0 and elapsed < 30.0
    report(6, "horn census == brute force, zero lemma violations", ok,
           f"{checked} censuses, {mismatches} mismatches, "
           f"{violations} violations, {elapsed:.2f}s")


def _candidate_adjacency(inst, M, t):
    unused = set(range(inst.n)) - M.colour_set()
    vm = M.vertex_set()
    adj = {i: set() for i in range(M.size())}
    for i, e in enumerate(M.pairs):
        for u in range(inst.vertex_count):
            if u in vm:
                continue
            for x in e:
                reps = sum(1 for c in unused if inst.has_pair(c, pair(x, u)))
                if reps >= t:
                    adj[i].add(u)
    return adj


def test_criterion_07_auxiliary_matchings():
    t0 = time.perf_counter()
    oracle_checked = 0
    oracle_bad = 0
    for inst in small_random_instances(30, seed=707):
        if inst.vertex_count > 20:
            continue
        M = greedy_extend(inst)
        for t in (1, 2, 3):
            aux = find_aux_matching(inst, M, t)
            if aux.size() != oracle_bipartite_max(
                    _candidate_adjacency(inst, M, t)):
                oracle_bad += 1
            oracle_checked += 1
    audits = 0
    audit_bad = 0
    instances = small_random_instances(125, seed=708)
    for inst in instances:
        res = exact_max(inst)
        for t in (1, 3, 5, 7):
            aux = find_aux_matching(inst, res.best, t)
            rep = validate_aux(inst, res.best, aux,
                               certified_optimal=res.optimal)
            audits += 1
            if not rep.ok:
                audit_bad += 1
    elapsed = time.perf_counter() - t0
    ok = (oracle_checked >= 30 and oracle_bad == 0
          and audits >= 500 and audit_bad == 0 and elapsed < 60.0)
    report(7, "aux matchings: bipartite oracle + 500 audited cases", ok,
           f"{oracle_checked} oracle checks ({oracle_bad} bad), "
           f"{audits} audits ({audit_bad} bad), {elapsed:.2f}s")


def test_criterion_08_latin_bridge():
    t0 = time.perf_counter()
    results = {}
    ok = True
    for order, expect in ((2, 1), (3, 3), (5, 5)):
        sq = cyclic_square(order)
        res = exact_max(gen_latin_bridge(sq, 0))
        brute = oracle_max_partial_transversal(sq.cells)
        results[order] = (res.size(), brute)
        ok = ok and res.optimal and res.size() == brute == expect
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 5.0
    report(8, "Latin transversals via rainbow reduction", ok,
           f"(size, brute) by order: {results}, {elapsed:.2f}s")


def test_criterion_10_determinism(tmp_path):
    t0 = time.perf_counter()
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        inst = d / "g.inst"
        solved = d / "solve.json"
        assert cli_main(["generate", "random", "--n", "5", "--v", "13",
                         "--max-mult", "5", "--seed", "77",
                         "--out", str(inst)]) == 0
        assert cli_main(["solve", str(inst), "--method", "exact",
                         "--out", str(solved)]) == 0
        assert cli_main(["verify", str(inst), str(solved)]) == 0
        stress_out = d / "stress.json"
        jobs = "1" if run == "a" else "4"
        assert cli_main(["stress", "--n", "4", "--v", "10", "--trials", "10",
                         "--seed", "5", "--jobs", jobs,
                         "--out", str(stress_out)]) == 0
        outputs.append(inst.read_bytes() + solved.read_bytes()
                       + stress_out.read_bytes())
    elapsed = time.perf_counter() - t0
    ok = outputs[0] == outputs[1] and elapsed < 60.0
    report(10, "seeded pipelines byte-reproducible across runs and jobs", ok,
           f"{len(outputs[0])} bytes compared, {elapsed:.2f}s")


@pytest.mark.slow
def test_criterion_09_sampling_experiment():
    t0 = time.perf_counter()
    n = 4096
    inst = gen_random(RandomSpec(n=n, v=3 * n - 2, max_multiplicity=n,
                                 seed=909))
    runs = 50
    low_total = 0
    p_ok = True
    for run in range(runs):
        rep = sampling_experiment(inst, derive_seed(910, run),
                                  solve_budget=SolverBudget(time_limit=3.0))
        p_ok = p_ok and rep.p == 0.25 and rep.sqrt_n == 64.0
        low_total += rep.low_edge_colours
    rate = low_total / (runs * n)
    elapsed = time.perf_counter() - t0
    ok = p_ok and rate <= 0.05 and elapsed < 300.0
    report(9, "sampling: p=0.25, e_c(S) > sqrt(n) in >= 95% of colour-runs",
           ok, f"{low_total} low colour-runs of {runs * n} "
           f"(rate {rate:.5f}), {elapsed:.1f}s")
