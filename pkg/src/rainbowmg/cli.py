"""Command-line interface: one binary, subcommands for generating,
solving, verifying, stressing, sampling and Latin-square workflows.

Exit codes: 0 success / all checks pass, 1 parse failure or verification
failure (implementation bug), 2 conjecture-counterexample candidate,
3 solver budget exhausted.  Randomized commands require an explicit
--seed so that every pipeline is reproducible bit-for-bit.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import core, generators, solvers, verifiers
from .core import Instance, InstanceError, RainbowMatching
from .solvers import REASON_BUDGET, SolverBudget

_JSON_KW = {"sort_keys": True, "separators": (",", ":")}


def _max_multiplicity(inst: Instance) -> int:
    p = inst.packed()
    if len(p.pa) == 0:
        return 0
    keys = p.pa.astype(np.int64) * inst.vertex_count + p.pb
    _, counts = np.unique(keys, return_counts=True)
    return int(counts.max())


def _load_instance(path: str) -> Instance:
    try:
        return core.load(path)
    except FileNotFoundError:
        print(f"error: no such file: {path}", file=sys.stderr)
        raise SystemExit(1)
    except InstanceError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    kind = args.kind
    try:
        if kind == "triangle-extremal":
            inst = generators.gen_triangle_extremal(args.n)
        elif kind == "double-k4":
            inst = generators.gen_double_k4()
        elif kind == "latin-bridge":
            with open(args.square, encoding="utf-8") as fh:
                square = generators.parse_latin(fh.read())
            inst = generators.gen_latin_bridge(square, args.c)
        else:  # random
            inst = generators.gen_random(generators.RandomSpec(
                n=args.n, v=args.v, max_multiplicity=args.max_mult,
                seed=args.seed, triangle_fraction=args.triangle_fraction,
            ))
    except (ValueError, InstanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        core.dump(inst, args.out)
    else:
        sys.stdout.write(core.dumps(inst))
    print(
        f"n={inst.n} vertex_count={inst.vertex_count} "
        f"min_cover={inst.min_cover()} max_multiplicity={_max_multiplicity(inst)}",
        file=sys.stderr if not args.out else sys.stdout,
    )
    return 0


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    budget = SolverBudget(
        node_limit=args.node_limit, time_limit=args.time_limit,
        target=args.target,
    )
    if args.method == "greedy":
        rm = solvers.greedy_extend(inst)
        result = solvers.SolveResult(
            rm, rm.size() == inst.n, 0,
            solvers.REASON_TARGET if rm.size() >= (args.target or inst.n)
            else REASON_BUDGET,
        )
    elif args.method == "exact":
        result = solvers.exact_max(inst, budget)
    else:
        result = solvers.local_search(inst, budget)
    text = result.dumps()
    sys.stdout.write(text)
    if args.out:
        _emit(text, args.out)
    reached = args.target and result.size() >= args.target
    return 0 if (result.optimal or reached) else 3


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    if args.lemmas:
        audit = verifiers.lemma_audit(inst)
        sys.stdout.write(json.dumps(audit, **_JSON_KW) + "\n")
        return 1 if audit["bug"] else 0
    if not args.matching:
        print("error: need a matching file or --lemmas", file=sys.stderr)
        return 1
    try:
        with open(args.matching, encoding="utf-8") as fh:
            rm = RainbowMatching.from_dict(json.load(fh))
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {args.matching}: {exc}", file=sys.stderr)
        return 1
    ok, why = core.verify_rainbow(inst, rm)
    if not ok:
        print(f"valid=false: {why}")
        return 1
    mx, wit = core.is_maximal(inst, rm)
    if mx:
        print("valid=true maximal=true")
        return 0
    print(f"valid=true maximal=false extension={wit}")
    return 1


# ---------------------------------------------------------------------------
# stress


def cmd_stress(args) -> int:
    try:
        report = verifiers.stress_conjecture(
            n=args.n, v=args.v, trials=args.trials,
            max_multiplicity=args.max_mult, seed=args.seed,
            triangle_fraction=args.triangle_fraction, jobs=args.jobs,
            replay_dir=args.replay_dir,
            include_extremal=args.include_extremal,
        )
    except generators.InfeasibleSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(report.dumps(), args.out)
    print(
        f"trials={report.trials} successes={report.successes} "
        f"failures={len(report.failures)} "
        f"candidates={len(report.counterexample_candidates)}",
        file=sys.stderr,
    )
    return 2 if report.failures else 0


# ---------------------------------------------------------------------------
# sample


def cmd_sample(args) -> int:
    inst = _load_instance(args.instance)
    low_rates = []
    for run in range(args.runs):
        run_seed = (generators.derive_seed(args.seed, run)
                    if args.runs > 1 else args.seed)
        report = verifiers.sampling_experiment(inst, run_seed)
        low_rates.append(report.low_edge_colours / max(inst.n, 1))
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            path = os.path.join(args.out_dir, f"sample-run{run}.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(report.dumps())
        else:
            sys.stdout.write(report.dumps())
    # per-colour Chernoff estimate for the low-edge event, summed over
    # colours (asymptotic bound; the comparison is reported, not enforced)
    p = 2.0 * inst.n ** -0.25
    sqrt_n = math.sqrt(inst.n)
    packed = inst.packed()
    edge_counts = np.diff(packed.estart)
    predicted = 0.0
    for m_c in edge_counts:
        expect = p * p * float(m_c)
        if expect <= 0:
            predicted += 1.0
            continue
        eps = 1.0 - sqrt_n / expect
        if eps <= 0:
            predicted += 1.0
        elif eps < 1:
            predicted += min(1.0, verifiers.chernoff_bound(expect, 3.0, eps))
    mean_rate = sum(low_rates) / len(low_rates) if low_rates else 0.0
    print(
        f"runs={args.runs} p={p} mean_low_edge_rate={mean_rate:.6f} "
        f"chernoff_predicted_low_colours={predicted:.6f}",
        file=sys.stderr,
    )
    return 0


# ---------------------------------------------------------------------------
# latin


def cmd_latin(args) -> int:
    try:
        with open(args.square, encoding="utf-8") as fh:
            square = generators.parse_latin(fh.read())
        inst = generators.gen_latin_bridge(square, args.c)
    except (OSError, ValueError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    n = square.order
    if args.out:
        core.dump(inst, args.out)
    if not args.solve:
        print(f"order={n} c={args.c} vertex_count={inst.vertex_count} "
              f"min_cover={inst.min_cover()}")
        return 0
    result = solvers.exact_max(inst)
    rm = result.best.sorted_by_colour()
    triples = []
    stars = []
    for (a, b), s in zip(rm.pairs, rm.colours):
        if b < 2 * n:
            triples.append({"row": a, "column": b - n, "symbol": s})
        else:
            k = (min(a, b) - 2 * n) // (n + 1)
            stars.append({"star": k, "symbol": s})
    report = {
        "order": n,
        "c": args.c,
        "size": rm.size(),
        "optimal": result.optimal,
        "transversal": triples,
        "star_edges": stars,
    }
    sys.stdout.write(json.dumps(report, **_JSON_KW) + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rainbowmg",
        description="Rainbow matchings in clique-union edge-coloured multigraphs",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a named or random instance")
    g.add_argument("kind", choices=[
        "triangle-extremal", "double-k4", "latin-bridge", "random"])
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--v", type=int, default=10)
    g.add_argument("--max-mult", type=int, default=4)
    g.add_argument("--seed", type=int)
    g.add_argument("--triangle-fraction", type=float, default=0.5)
    g.add_argument("--square", help="Latin square file (latin-bridge)")
    g.add_argument("--c", type=int, default=0,
                   help="extra per-colour cover via stars (latin-bridge)")
    g.add_argument("--out")
    g.set_defaults(fn=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--method", choices=["greedy", "exact", "local"],
                   default="exact")
    s.add_argument("--target", type=int, default=0)
    s.add_argument("--node-limit", type=int, default=0)
    s.add_argument("--time-limit", type=float, default=0.0)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_solve)

    v = sub.add_parser("verify", help="check a matching or run lemma audits")
    v.add_argument("instance")
    v.add_argument("matching", nargs="?")
    v.add_argument("--lemmas", action="store_true")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(fn=cmd_verify)

    st = sub.add_parser("stress", help="seeded random trials of the size-n question")
    st.add_argument("--n", type=int, required=True)
    st.add_argument("--v", type=int, required=True)
    st.add_argument("--trials", type=int, required=True)
    st.add_argument("--max-mult", type=int, default=0,
                    help="pair multiplicity cap (default: uncapped)")
    st.add_argument("--seed", type=int, required=True)
    st.add_argument("--triangle-fraction", type=float, default=0.5)
    st.add_argument("--jobs", type=int, default=1)
    st.add_argument("--replay-dir")
    st.add_argument("--include-extremal", action="store_true")
    st.add_argument("--out")
    st.set_defaults(fn=cmd_stress)

    sa = sub.add_parser("sample", help="vertex-sampling experiment")
    sa.add_argument("instance")
    sa.add_argument("--seed", type=int, required=True)
    sa.add_argument("--runs", type=int, default=1)
    sa.add_argument("--out-dir")
    sa.set_defaults(fn=cmd_sample)

    la = sub.add_parser("latin", help="transversals via the rainbow reduction")
    la.add_argument("square")
    la.add_argument("--c", type=int, default=0)
    la.add_argument("--solve", action="store_true")
    la.add_argument("--out")
    la.set_defaults(fn=cmd_latin)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "generate" and args.kind == "random" and args.seed is None:
        ap.error("generate random requires --seed")
    if args.command == "stress" and args.max_mult == 0:
        args.max_mult = args.n  # uncapped
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
