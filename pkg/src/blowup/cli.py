"""Command-line entry point: ``blowup {gen,embed,verify,certify,bench}``.

Exit codes: 0 verified success, 1 algorithmic failure, 2 usage or format error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys
import time
from fractions import Fraction
from pathlib import Path

from .batch import run_batched
from .embedder import Embedder, verify_embedding
from .errors import BlowupError, FormatError, GenerationFailure, InvariantError
from .graph import density
from .instances import (
    PatternGraph,
    assemble_instance,
    cluster_graph_named,
    gen_bounded_tree_pattern,
    gen_hamiltonian_path_pattern,
    gen_matching_pattern,
    gen_power_ham_cycle_pattern,
    gen_square_ham_cycle_pattern,
    random_restrictions,
)
from .io import dumps, instance_to_dict, load_embedding, load_instance, save_embedding
from .regularity import EXACT_LIMIT, certify_regular, is_regular_exact, is_super_regular
from .rng import generation_seeds

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _colour(text: str, code: str, stream) -> str:
    if os.environ.get("NO_COLOR") or not getattr(stream, "isatty", lambda: False)():
        return text
    return f"\033[{code}m{text}\033[0m"


def _status(ok: bool, stream=sys.stdout) -> str:
    return _colour("ok", "32", stream) if ok else _colour("FAIL", "31", stream)


def _fraction(text: str) -> Fraction:
    try:
        f = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc
    return f


# ---------------------------------------------------------------- patterns


def default_r_graph(pattern: str) -> str:
    if pattern == "sqhamcycle":
        return "triangle"
    if pattern.startswith("powhamcycle:"):
        return f"K{int(pattern.split(':', 1)[1]) + 1}"
    return "K2"


def make_pattern(name: str, n: int, seed, max_degree: int = 3) -> PatternGraph:
    if name == "matching":
        return gen_matching_pattern(n)
    if name == "hampath":
        return gen_hamiltonian_path_pattern(n)
    if name == "sqhamcycle":
        return gen_square_ham_cycle_pattern(n)
    if name.startswith("powhamcycle:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"bad power in {name!r}") from exc
        return gen_power_ham_cycle_pattern(n, k)
    if name == "tree":
        return gen_bounded_tree_pattern(n, max_degree, seed)
    raise UsageError(f"unknown pattern {name!r}")


def build_instance(pattern: str, n: int, delta, seed: int, r_graph: str | None = None,
                   max_degree: int = 3, restrict: int = 0, restrict_size: int | None = None):
    """Everything ``gen`` does short of writing the file."""
    try:
        cg = cluster_graph_named(r_graph or default_r_graph(pattern))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    seeds = generation_seeds(seed, len(cg.edges))
    pat = make_pattern(pattern, n, seeds["pattern"], max_degree)
    if pat.r != cg.r:
        raise UsageError(f"pattern {pattern!r} needs r = {pat.r} clusters, R has {cg.r}")
    pat.validate(cg)
    inst = assemble_instance(cg, n, delta, pat, seed=seed)
    if restrict:
        size = restrict_size if restrict_size is not None else -(-3 * n // 10)
        inst.restrictions = random_restrictions(pat, inst.host, restrict, size, seeds["restrictions"])
        inst.validate()
    inst.seed_lineage.update({"pattern": pattern, "r_graph": r_graph or default_r_graph(pattern)})
    return inst


# ---------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    inst = build_instance(args.pattern, args.N, args.delta, args.seed, args.r_graph,
                          args.max_degree, args.restrict, args.restrict_size)
    text = dumps(instance_to_dict(inst))
    if args.out:
        Path(args.out).write_text(text)
        out = sys.stdout
    else:
        sys.stdout.write(text)
        out = sys.stderr
    p = inst.params
    clamped = []
    if p.d1 * inst.n_per_cluster < 1:
        clamped.append("buffer-count")
    if p.d2 * inst.pattern.order < 1:
        clamped.append("T1")
    print(f"n={inst.pattern.order} e(G)={inst.host.graph.num_edges()} Delta(H)={inst.pattern.max_degree} "
          f"r={inst.r} N={inst.n_per_cluster}", file=out)
    print("cascade " + " ".join(f"{k}={v}" for k, v in p.to_dict().items()), file=out)
    print(f"clamped: {', '.join(clamped) or 'none'}", file=out)
    return EXIT_OK


def _instance_seed(inst, override):
    if override is not None:
        return override
    return inst.seed_lineage.get("seed") or 0


def cmd_embed(args) -> int:
    inst = load_instance(args.input)
    seed = _instance_seed(inst, args.seed)
    emb = Embedder(inst, seed, check=args.check)
    if args.mode == "batched":
        phi, _rl, rep = run_batched(inst, args.alpha, args.tail, seed, embedder=emb)
    else:
        phi, rep = emb.run()
    report = rep.to_dict()
    if not args.audit:
        report.pop("audits", None)
    if args.report:
        Path(args.report).write_text(dumps(report))
    if phi is None:
        f = rep.failure
        print(f"embed {_status(False)}: {f['kind']} at t={f['t']} ({f['message']})")
        if args.dump_state_on_failure and emb.state is not None:
            Path(args.dump_state_on_failure).write_text(dumps(emb.state.to_dict(inst.params)))
        return EXIT_FAIL
    if args.out_embedding:
        save_embedding(phi, args.out_embedding)
    else:
        print(json.dumps(phi))
    print(f"embed {_status(True)}: n={len(phi)} mode={rep.mode} T0={rep.T0} T={rep.T} "
          f"warnings={len(rep.warnings)}", file=sys.stderr if not args.out_embedding else sys.stdout)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = load_instance(args.input)
    phi = load_embedding(args.embedding)
    ver = verify_embedding(inst, phi)
    for line in ver.violations:
        print(line)
    print(f"verify {_status(ver.ok)}")
    return EXIT_OK if ver.ok else EXIT_FAIL


def cmd_certify(args) -> int:
    inst = load_instance(args.input)
    i, j = args.pair
    if not inst.host.cluster_graph.has_edge(i, j):
        raise UsageError(f"({i}, {j}) is not an edge of the cluster graph")
    pair = inst.host.pair(i, j)
    eps = args.eps
    delta = args.delta if args.delta is not None else density(pair)
    d = density(pair)
    print(f"pair ({i},{j}) {pair.size_a}x{pair.size_b} density={d} ({float(d):.4f}) eps={eps}")
    if pair.size_a <= args.exact_limit and pair.size_b <= args.exact_limit:
        v = is_regular_exact(pair, eps, args.exact_limit)
        print(f"exact: regular={v.regular}")
        if v.witness is not None:
            w = v.witness
            print(f"witness: X={w.x.to_list()} Y={w.y.to_list()} deviation={w.deviation} ({float(w.deviation):.4f})")
    else:
        c = certify_regular(pair, eps)
        print(f"certificate: passes={c.passes} conclusive={c.conclusive} implied_eps={c.implied_eps:.4f}")
        print(f"gershgorin={float(c.gershgorin):.6g} frobenius_sq={float(c.frobenius_sq):.6g} "
              f"threshold={float(c.threshold):.6g}")
    sr = is_super_regular(pair, eps, delta, args.exact_limit)
    print(f"min-degree at delta={delta}: failing_a={len(sr.failing_a)} failing_b={len(sr.failing_b)} "
          f"min_deg_a={int(pair.degrees_a().min())} min_deg_b={int(pair.degrees_b().min())}")
    print(f"super-regular={sr.super_regular} conclusive={sr.conclusive} method={sr.method}")
    return EXIT_OK


BENCH_FIELDS = ["N", "n", "trials", "success_rate", "median_seconds", "median_phase1", "median_phase2",
                "audit_warnings"]


def bench_rows(sizes, delta, pattern: str, trials: int, seed: int, mode: str = "sequential"):
    for n_local in sizes:
        ok = 0
        total, p1, p2 = [], [], []
        warnings = 0
        for k in range(trials):
            s = seed + k
            inst = build_instance(pattern, n_local, delta, s)
            t0 = time.perf_counter()
            if mode == "batched":
                phi, _rl, rep = run_batched(inst, seed=s)
            else:
                phi, rep = Embedder(inst, s).run()
            total.append(time.perf_counter() - t0)
            p1.append(rep.phase1_seconds)
            p2.append(rep.phase2_seconds)
            warnings += len(rep.warnings)
            ok += phi is not None
        yield {
            "N": n_local,
            "n": inst.pattern.order,
            "trials": trials,
            "success_rate": ok / trials,
            "median_seconds": round(statistics.median(total), 6),
            "median_phase1": round(statistics.median(p1), 6),
            "median_phase2": round(statistics.median(p2), 6),
            "audit_warnings": warnings,
        }


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s]
    except ValueError as exc:
        raise UsageError(f"bad --sizes {args.sizes!r}") from exc
    if not sizes or any(s < 1 for s in sizes) or args.trials < 1:
        raise UsageError("sizes and trials must be positive")
    w = csv.DictWriter(sys.stdout, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in bench_rows(sizes, args.delta, args.pattern, args.trials, args.seed, args.mode):
        w.writerow(row)
        sys.stdout.flush()
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blowup", description="Embed bounded-degree graphs into super-regular blow-ups.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate and write an instance")
    g.add_argument("--r-graph", default=None, help="K2, triangle, K<r> or C<r> (default: what the pattern needs)")
    g.add_argument("--pattern", required=True, help="matching | hampath | sqhamcycle | powhamcycle:k | tree")
    g.add_argument("--N", type=int, required=True, help="vertices per cluster")
    g.add_argument("--delta", type=_fraction, required=True, help="pair density, e.g. 1/2 or 0.5")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-degree", type=int, default=3, help="degree cap for --pattern tree")
    g.add_argument("--restrict", type=int, default=0, help="restricted pattern vertices per cluster")
    g.add_argument("--restrict-size", type=int, default=None, help="size of each C_x (default ceil(0.3 N))")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("embed", help="run the embedding algorithm")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--mode", choices=["sequential", "batched"], default="sequential")
    e.add_argument("--alpha", type=_fraction, default=None, help="batch fraction (batched mode)")
    e.add_argument("--tail", type=int, default=None, help="sequential tail threshold (batched mode)")
    e.add_argument("--seed", type=int, default=None, help="override the instance seed")
    e.add_argument("--audit", action="store_true", help="keep audit snapshots in the report")
    e.add_argument("--check", action="store_true", help="assert every invariant after every step")
    e.add_argument("--dump-state-on-failure", default=None)
    e.add_argument("--out-embedding", default=None)
    e.add_argument("--report", default=None, help="write the run report as JSON")
    e.set_defaults(func=cmd_embed)

    v = sub.add_parser("verify", help="check an embedding against an instance")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--embedding", required=True)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("certify", help="regularity report for one cluster pair")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--pair", type=int, nargs=2, required=True, metavar=("I", "J"))
    c.add_argument("--eps", type=_fraction, required=True)
    c.add_argument("--delta", type=_fraction, default=None, help="min-degree fraction (default: pair density)")
    c.add_argument("--exact-limit", type=int, default=EXACT_LIMIT)
    c.set_defaults(func=cmd_certify)

    b = sub.add_parser("bench", help="CSV of success rate and timings per size")
    b.add_argument("--sizes", required=True, help="comma-separated N values")
    b.add_argument("--delta", type=_fraction, default=Fraction(1, 2))
    b.add_argument("--pattern", default="hampath")
    b.add_argument("--trials", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--mode", choices=["sequential", "batched"], default="sequential")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"error: invariant {exc.invariant} violated: {exc.detail}", file=sys.stderr)
        return EXIT_USAGE
    except GenerationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except BlowupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
