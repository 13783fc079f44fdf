"""Command-line front end.

Subcommands read Graph/Skeleton/report JSON from standard input and write a
single JSON document to standard output, so they compose in shell pipelines.
Exit codes separate science from plumbing: 0 a check passed or an object was
produced, 1 a check ran fine and failed (counterexamples are results), 2 a
usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .core import Graph, GraphError, PatternGraph
from .fatminor import (FatEmbedding, LiftError, find_fat_minor, lift_embedding,
                       max_fatness, starving_minor_experiment,
                       verify_fat_embedding)
from .generators import GenSpec, gen, gen_hammer, gen_pattern
from .props import (edge_bottleneck_check, fat_bottleneck_check,
                    quasi_tree_pipeline)
from .report import AnalysisReport, input_hash
from .skeleton import (Skeleton, SkeletonParams, build_skeleton,
                       check_distance_expansion, check_no_edge_disjointness,
                       check_skeleton_facts, compose_skeleton, quotient_dot,
                       verify_composition_identity, verify_natural_map_qi)

OK, FAILED, USAGE = 0, 1, 2


def _read_stdin() -> str:
    data = sys.stdin.read()
    if not data.strip():
        raise GraphError("expected JSON on standard input")
    return data


def _emit(obj, raw: str = "") -> None:
    if raw:
        sys.stdout.write(raw)
        return
    if hasattr(obj, "to_json"):
        sys.stdout.write(obj.to_json() + "\n")
    else:
        sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _report_out(rep: AnalysisReport, source_text: str, seed) -> int:
    obj = rep.to_json_obj()
    obj["provenance"] = {"input_hash": input_hash(source_text),
                         "version": __version__, "seed": seed}
    sys.stdout.write(json.dumps(obj, sort_keys=True, default=str) + "\n")
    return OK if rep.holds else FAILED


def _load_graph(text: str, root=None) -> Graph:
    obj = json.loads(text)
    if "base" in obj:  # a skeleton document: act on its base graph
        obj = obj["base"]
    g = Graph.from_json_obj(obj)
    if root is not None:
        g = g.with_root(root)
    return g


def _load_skeleton(text: str) -> Skeleton:
    return Skeleton.from_json_obj(json.loads(text))


def cmd_gen(args) -> int:
    if args.spec:
        obj = json.loads(_read_stdin())
        fields = {f for f in GenSpec.__dataclass_fields__}
        spec = GenSpec(**{k: v for k, v in obj.items() if k in fields})
        _emit(gen(spec))
        return OK
    if args.family == "pattern":
        _emit({"pattern": gen_pattern(args.pattern).to_json_obj()})
        return OK
    spec = GenSpec(family=args.family, n=args.n, rows=args.rows, cols=args.cols,
                   p=args.p, chord_len=args.chord_len, chord_count=args.chord_count,
                   lam=getattr(args, "lambda"), k=args.k, dist=args.dist,
                   seed=args.seed)
    g = gen(spec)
    if args.root is not None:
        g = g.with_root(args.root)
    _emit(g)
    return OK


def cmd_skeleton(args) -> int:
    text = _read_stdin()
    g = _load_graph(text, args.root)
    if g.root is None:
        g = g.with_root(0)
    s = build_skeleton(g, SkeletonParams(getattr(args, "lambda"), args.k))
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(quotient_dot(s))
    _emit(s)
    return OK


def cmd_compose(args) -> int:
    text = _read_stdin()
    s = _load_skeleton(text)
    inner, induced = compose_skeleton(s, args.n, args.k2)
    obj = inner.to_json_obj()
    obj["induced_block_of"] = list(induced)
    _emit(obj)
    return OK


def cmd_check(args) -> int:
    text = _read_stdin()
    if args.composition is not None:
        g = _load_graph(text)
        if g.root is None:
            g = g.with_root(0)
        rep = verify_composition_identity(g, getattr(args, "lambda"), args.k,
                                          args.composition)
        return _report_out(rep, text, args.seed)
    s = _load_skeleton(text)
    if args.facts:
        rep = check_skeleton_facts(s)
    elif args.qi:
        rep = verify_natural_map_qi(s, seed=args.seed)
    elif args.lemma_bound:
        rep = check_no_edge_disjointness(s)
    elif args.expansion is not None:
        rep = check_distance_expansion(s, args.expansion)
    else:
        raise GraphError("pick one of --facts/--qi/--lemma9/--expansion/--composition")
    return _report_out(rep, text, args.seed)


def cmd_bottleneck(args) -> int:
    text = _read_stdin()
    g = _load_graph(text)
    if args.edge:
        rep = edge_bottleneck_check(g, args.n, args.mode, seed=args.seed)
    elif args.fat:
        rep = fat_bottleneck_check(g, args.m, args.n, args.mode, seed=args.seed)
    else:
        raise GraphError("pick --edge or --fat")
    return _report_out(rep, text, args.seed)


def cmd_quasitree(args) -> int:
    text = _read_stdin()
    g = _load_graph(text)
    if g.root is None:
        g = g.with_root(0)
    rep = quasi_tree_pipeline(g, args.m)
    return _report_out(rep, text, args.seed)


def cmd_minor(args) -> int:
    text = _read_stdin()
    g = _load_graph(text)
    h = PatternGraph.by_name(args.pattern)
    if args.max_fatness is not None:
        best = max_fatness(g, h, args.max_fatness, mode=args.mode,
                           budget=args.budget, seed=args.seed,
                           strictness=args.strictness)
        rep = AnalysisReport(
            check="max_fatness", holds=best is not None,
            params={"pattern": args.pattern, "upper": args.max_fatness,
                    "strictness": args.strictness},
            mode=args.mode, seed=args.seed,
            details={"max_fatness": best,
                     "bound_kind": "exact" if args.mode == "exhaustive" else "lower"})
        return _report_out(rep, text, args.seed)
    emb = find_fat_minor(g, h, args.m, mode=args.mode, budget=args.budget,
                         seed=args.seed, strictness=args.strictness)
    rep = AnalysisReport(
        check="fat_minor_search", holds=emb is not None,
        params={"pattern": args.pattern, "m": args.m,
                "strictness": args.strictness},
        mode=args.mode, seed=args.seed,
        witness={} if emb is None else {"embedding": emb.to_json_obj()})
    return _report_out(rep, text, args.seed)


def cmd_verify_embedding(args) -> int:
    text = _read_stdin()
    obj = json.loads(text)
    g = Graph.from_json_obj(obj["graph"])
    emb = FatEmbedding.from_json_obj(obj["embedding"])
    rep = verify_fat_embedding(g, emb, strictness=args.strictness)
    return _report_out(rep, text, args.seed)


def cmd_lift(args) -> int:
    text = _read_stdin()
    obj = json.loads(text)
    s = Skeleton.from_json_obj(obj["skeleton"])
    emb = FatEmbedding.from_json_obj(obj["embedding"])
    try:
        lifted = lift_embedding(s, emb, args.ball, args.target)
    except LiftError as exc:
        rep = AnalysisReport(check="lift", holds=False,
                             params={"ball_radius": args.ball},
                             witness={"error": str(exc)})
        return _report_out(rep, text, args.seed)
    check = verify_fat_embedding(s.base, lifted)
    rep = AnalysisReport(
        check="lift", holds=check.holds,
        params={"ball_radius": args.ball, "target_fatness": lifted.fatness},
        witness={"embedding": lifted.to_json_obj(),
                 "verification": check.witness})
    return _report_out(rep, text, args.seed)


def _hammer_instance(task) -> dict:
    lam, k, budget, seed = task
    g = gen_hammer(lam, k, 4 * lam)
    s = build_skeleton(g, SkeletonParams(lam, k))
    h = PatternGraph.theta(3)
    fat_base = max_fatness(g, h, 5, mode="heuristic", budget=budget, seed=seed)
    found_q = find_fat_minor(s.quotient, h, 2, mode="exhaustive")
    return {"lambda": lam, "k": k, "dist": 4 * lam,
            "base_max_fatness_lower": fat_base,
            "quotient_2fat_found": found_q is not None}


def cmd_experiment(args) -> int:
    if args.hammer_sweep:
        tasks = [(lam, k, args.budget, args.seed) for lam, k in ((1, 1), (2, 2))]
        if args.jobs > 1:
            import multiprocessing
            with multiprocessing.Pool(args.jobs) as pool:
                instances = pool.map(_hammer_instance, tasks)
        else:
            instances = [_hammer_instance(t) for t in tasks]
        holds = all(inst["quotient_2fat_found"] for inst in instances)
        rep = AnalysisReport(check="hammer_sweep", holds=holds,
                             mode="experiment", seed=args.seed,
                             details={"instances": instances})
        return _report_out(rep, "", args.seed)

    text = _read_stdin()
    g = _load_graph(text)
    if g.root is None:
        g = g.with_root(0)
    h = PatternGraph.by_name(args.pattern)
    if args.starving:
        rep = starving_minor_experiment(g, h, args.iterations,
                                        budget=args.budget, seed=args.seed)
        return _report_out(rep, text, args.seed)
    if args.mm_reduce is not None:
        m = args.mm_reduce
        base = find_fat_minor(g, h, m, mode=args.mode, budget=args.budget,
                              seed=args.seed)
        s = build_skeleton(g, SkeletonParams(m, m))
        q3 = find_fat_minor(s.quotient, h, 3, mode=args.mode,
                            budget=args.budget, seed=args.seed)
        holds = base is not None or q3 is None  # no m-fat in base => no 3-fat in quotient
        rep = AnalysisReport(
            check="mm_reduce", holds=holds,
            params={"m": m, "pattern": args.pattern}, mode=args.mode,
            seed=args.seed,
            details={"base_m_fat_found": base is not None,
                     "quotient_3fat_found": q3 is not None})
        return _report_out(rep, text, args.seed)
    raise GraphError("pick --starving/--mm-reduce/--hammer-sweep")


def cmd_export(args) -> int:
    text = _read_stdin()
    if args.dot:
        s = _load_skeleton(text)
        _emit(None, raw=quotient_dot(s))
        return OK
    obj = json.loads(text)
    _emit(obj)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coarsegraph",
                                description=__doc__.splitlines()[0])
    p.add_argument("--seed", dest="seed_global", type=int, default=None,
                   help="global RNG seed")
    p.add_argument("--jobs", dest="jobs_global", type=int, default=None,
                   help="worker processes for sweeps (checks are deterministic)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--jobs", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    g = add("gen", help="generate a graph family member")
    g.add_argument("--spec", action="store_true",
                   help="read a GenSpec JSON object from standard input")
    g.add_argument("--family", default="path",
                   choices=["path", "cycle", "grid", "star", "random_tree",
                            "quasi_tree", "gnp_connected", "hammer", "pattern"])
    g.add_argument("--n", type=int, default=0)
    g.add_argument("--rows", type=int, default=0)
    g.add_argument("--cols", type=int, default=0)
    g.add_argument("--p", type=float, default=0.05)
    g.add_argument("--chord-len", type=int, default=4)
    g.add_argument("--chord-count", type=int, default=0)
    g.add_argument("--lambda", dest="lambda", type=int, default=1)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--dist", type=int, default=0)
    g.add_argument("--pattern", default="theta3")
    g.add_argument("--root", type=int, default=None)
    g.set_defaults(fn=cmd_gen)

    s = add("skeleton", help="build a (lambda, k) skeleton")
    s.add_argument("--lambda", dest="lambda", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--root", type=int, default=None)
    s.add_argument("--dot", default="", help="also write a DOT file here")
    s.set_defaults(fn=cmd_skeleton)

    c = add("compose", help="skeleton of a skeleton")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k2", type=int, required=True)
    c.set_defaults(fn=cmd_compose)

    ck = add("check", help="verify skeleton properties")
    ck.add_argument("--facts", action="store_true")
    ck.add_argument("--qi", action="store_true")
    ck.add_argument("--lemma9", dest="lemma_bound", action="store_true")
    ck.add_argument("--expansion", type=int, default=None, metavar="N")
    ck.add_argument("--composition", type=int, default=None, metavar="N")
    ck.add_argument("--lambda", dest="lambda", type=int, default=1)
    ck.add_argument("--k", type=int, default=1)
    ck.set_defaults(fn=cmd_check)

    b = add("bottleneck", help="edge or fat bottleneck decision")
    b.add_argument("--edge", action="store_true")
    b.add_argument("--fat", action="store_true")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--m", type=int, default=1)
    b.add_argument("--mode", default="exhaustive",
                   choices=["exhaustive", "vertex-pairs", "sampled"])
    b.set_defaults(fn=cmd_bottleneck)

    q = add("quasitree", help="fixed-scale tree test")
    q.add_argument("--m", type=int, required=True)
    q.set_defaults(fn=cmd_quasitree)

    mn = add("minor", help="fat pattern-minor search")
    mn.add_argument("--pattern", required=True)
    mn.add_argument("--m", type=int, default=0)
    mn.add_argument("--mode", default="exhaustive",
                    choices=["exhaustive", "heuristic"])
    mn.add_argument("--budget", type=int, default=200_000)
    mn.add_argument("--max-fatness", type=int, default=None, metavar="U")
    mn.add_argument("--strictness", default="zoned", choices=["zoned", "lenient"])
    mn.set_defaults(fn=cmd_minor)

    ve = add("verify-embedding",
                        help="check a third-party embedding certificate")
    ve.add_argument("--strictness", default="zoned", choices=["zoned", "lenient"])
    ve.set_defaults(fn=cmd_verify_embedding)

    lf = add("lift", help="pull a quotient embedding back to the base")
    lf.add_argument("--ball", type=int, required=True)
    lf.add_argument("--target", type=int, default=None)
    lf.set_defaults(fn=cmd_lift)

    ex = add("experiment", help="multi-stage experiment suites")
    ex.add_argument("--starving", action="store_true")
    ex.add_argument("--iterations", type=int, default=2)
    ex.add_argument("--mm-reduce", type=int, default=None, metavar="M")
    ex.add_argument("--hammer-sweep", action="store_true")
    ex.add_argument("--pattern", default="theta3")
    ex.add_argument("--mode", default="heuristic",
                    choices=["exhaustive", "heuristic"])
    ex.add_argument("--budget", type=int, default=60_000)
    ex.set_defaults(fn=cmd_experiment)

    xp = add("export", help="re-emit as DOT or canonical JSON")
    xp.add_argument("--dot", action="store_true")
    xp.add_argument("--json", action="store_true")
    xp.set_defaults(fn=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    seed = args.seed if getattr(args, "seed", None) is not None \
        else (args.seed_global if args.seed_global is not None else 0)
    args.seed = seed
    args.jobs = args.jobs if getattr(args, "jobs", None) is not None \
        else (args.jobs_global if args.jobs_global is not None else 1)
    try:
        return args.fn(args)
    except (GraphError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    raise SystemExit(main())
