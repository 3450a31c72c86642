"""Command-line front end.

Every report is a JSON object on stdout that echoes the tool version, the
parameters and the seed, so rerunning the echoed command reproduces it
byte for byte. Exit codes: 0 ok, 1 error, 2 unsolvable, 3 check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib.metadata import PackageNotFoundError, version

from .automaton import analyze_components, build_automaton_rooted, build_automaton_unrooted
from .certificate import BudgetExceeded, Certificate, certificate_from_dict, search_certificate, verify_certificate
from .depth import classify, pruning_constant
from .harness import ALGORITHMS, FailureSetup, estimate_failure, make_algorithm, resolve_locality
from .instances import (
    Schedule,
    build_chunk_instance,
    build_lb_rooted,
    build_lb_unrooted,
    chunk_node_count,
    choice_count,
    lb_rooted_size,
    lb_unrooted_size,
    sample_schedule_rooted,
    sample_schedule_unrooted,
)
from .problem import ProblemError, ProblemSyntaxError, RootedProblem, load_problem
from .solve import check_rooted, check_unrooted
from .trees import DELTA_ARY, T, T_STAR, Tree, complete_tree

EXIT_OK, EXIT_ERROR, EXIT_UNSOLVABLE, EXIT_CHECK_FAIL = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "0+unknown"


def _params(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def _report(args, body: dict) -> dict:
    return {"tool": "treelcl", "version": _version(), "command": args.command,
            "params": _params(args), "seed": str(args.seed), **body}


def _emit(args, obj: dict):
    text = json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write(path, text: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _locality(text: str):
    text = text.strip()
    if text == "n":
        return "n"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("locality must be an integer or 'n'") from None
    if value < 0:
        raise argparse.ArgumentTypeError("locality must be >= 0")
    return value


# --- commands ----------------------------------------------------------------------

def cmd_classify(args) -> int:
    p = load_problem(args.problem, normalize=args.normalize)
    rep = classify(p, max_depth=args.max_depth, max_sigma=args.max_sigma,
                   expansion_cap=args.expansion_cap, cross_check=not args.no_cross_check)
    _emit(args, _report(args, rep.to_dict()))
    return EXIT_UNSOLVABLE if rep.depth.is_zero else EXIT_OK


def cmd_certificate(args) -> int:
    p = load_problem(args.problem, normalize=args.normalize)
    if not isinstance(p, RootedProblem):
        raise UsageError("certificates are defined for rooted problems")
    if args.verify:
        cert = certificate_from_dict(_read_json(args.verify), p)
        verdict = verify_certificate(p, cert)
        _emit(args, _report(args, verdict.to_dict()))
        return EXIT_OK if verdict.ok else EXIT_CHECK_FAIL
    try:
        found = search_certificate(p, max_depth=args.max_depth, max_sigma=args.max_sigma,
                                   min_depth=args.min_depth, expansion_cap=args.expansion_cap)
    except BudgetExceeded as exc:
        _emit(args, _report(args, {"status": "BUDGET_EXCEEDED", "detail": str(exc)}))
        return EXIT_OK
    if isinstance(found, Certificate):
        body = {"status": "FOUND", "certificate": found.to_dict(p.labels)}
    else:
        body = found.to_dict()
    _emit(args, _report(args, body))
    return EXIT_OK


def _depth_param(args, name: str) -> int:
    value = getattr(args, name)
    if value is not None:
        return value
    if args.problem is None:
        raise UsageError(f"give --{name} or --problem to derive it")
    return pruning_constant(load_problem(args.problem))


def cmd_gen(args) -> int:
    body: dict = {"generator": args.kind}
    sched = None
    if args.kind == "rooted-lb":
        beta = _depth_param(args, "beta")
        g = build_lb_rooted(args.delta, beta, args.k, args.t)
        expected = lb_rooted_size(args.delta, beta, args.k, args.t)
        sched = sample_schedule_rooted(g, args.t, args.seed)
    elif args.kind == "unrooted-lb":
        if args.delta < 3:
            raise UsageError("unrooted lower-bound instances need delta >= 3")
        gamma = _depth_param(args, "gamma")
        g = build_lb_unrooted(args.delta, gamma, args.k, args.t)
        expected = lb_unrooted_size(args.delta, gamma, args.k, args.t)
        sched = sample_schedule_unrooted(g, args.t, args.seed)
    elif args.kind == "chunks":
        inst = build_chunk_instance(args.sigma, args.delta, args.d, (args.b, args.u, args.chunk),
                                    check_depth=not args.no_depth_check)
        g = inst.tree
        base = chunk_node_count(args.sigma, args.delta, args.d)
        expected = base - (args.delta ** args.d if args.b == 0 else 0)
        body["formula_node_count"] = base
        body["instance_count"] = choice_count(args.sigma, args.delta, args.d)
        body["instance_count_below_n"] = body["instance_count"] < base
    else:
        g = complete_tree(args.delta, args.depth, args.shape)
        expected = g.n
    body["nodes"] = g.n
    body["expected_nodes"] = expected
    body["count_matches"] = g.n == expected
    if args.out:
        _write(args.out, g.to_json())
    if sched is not None:
        body["u_nodes"] = [list(x) for x in sched.u_nodes]
        body["d_samples"] = [list(x) for x in sched.d_samples]
        if args.schedule_out:
            _write(args.schedule_out, sched.to_json())
    _emit(args, _report(args, body))
    return EXIT_OK if g.n == expected else EXIT_ERROR


def _load_tree(path) -> Tree:
    return Tree.from_dict(_read_json(path))


def _check_consistent(p, g: Tree):
    if (g.kind == "rooted") != isinstance(p, RootedProblem):
        raise UsageError(f"problem is {p.kind} but the tree is {g.kind}")
    delta = g.meta.get("delta")
    if delta is not None and delta != p.delta:
        raise UsageError(f"problem has delta {p.delta} but the instance was built for delta {delta}")


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    p = load_problem(args.problem)
    g = _load_tree(args.tree)
    _check_consistent(p, g)
    kwargs = {}
    if args.commit:
        if args.algorithm != "fixed-commitment":
            raise UsageError("--commit applies to fixed-commitment only")
        kwargs["commit"] = args.commit.split(",")
    alg = make_algorithm(args.algorithm, **kwargs)
    if args.schedule:
        fixed = Schedule.from_dict(_read_json(args.schedule))

        def sampler(seed, fixed=fixed):
            return fixed.order
    else:
        t = g.meta.get("t")
        gen = g.meta.get("generator")
        if gen not in ("rooted-lb", "unrooted-lb"):
            raise UsageError("--sample needs a lower-bound instance; pass --schedule otherwise")
        sample = sample_schedule_rooted if gen == "rooted-lb" else sample_schedule_unrooted

        def sampler(seed):
            return sample(g, t, seed).order
    locality = args.locality if args.locality is not None else g.meta.get("t", 1)
    resolve_locality(locality, g.n)
    est = estimate_failure(FailureSetup(g, p, alg, locality, sampler), args.trials, args.seed)
    _emit(args, _report(args, {"algorithm": args.algorithm, "locality": str(locality), **est.to_dict()}))
    return EXIT_OK


def _read_labeling(obj, p, g: Tree):
    if g.kind == "rooted":
        raw = obj.get("labels")
        if not isinstance(raw, list):
            raise UsageError("rooted labeling file needs a 'labels' list")
        out = []
        for x in raw:
            out.append(None if x is None else p.label_id(x))
        return out
    raw = obj.get("half_edges")
    if not isinstance(raw, list):
        raise UsageError("unrooted labeling file needs a 'half_edges' list of [v, u, label]")
    return {(int(v), int(u)): p.label_id(x) for v, u, x in raw}


def cmd_check(args) -> int:
    p = load_problem(args.problem)
    g = _load_tree(args.tree)
    _check_consistent(p, g)
    lab = _read_labeling(_read_json(args.labeling), p, g)
    verdict = check_rooted(g, lab, p) if g.kind == "rooted" else check_unrooted(g, lab, p)
    _emit(args, _report(args, verdict.to_dict()))
    return EXIT_OK if verdict.ok else EXIT_CHECK_FAIL


def cmd_export_automaton(args) -> int:
    p = load_problem(args.problem)
    a = build_automaton_rooted(p) if isinstance(p, RootedProblem) else build_automaton_unrooted(p)
    if args.format == "dot":
        text = a.to_dot()
        if args.output:
            _write(args.output, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    comps = []
    for c in analyze_components(a):
        comps.append({"states": sorted(a.state_name(a.index(s)) for s in c.states),
                      "period": c.period, "flexible": c.flexible})
    body = {
        "states": [a.state_name(i) for i in range(len(a))],
        "edges": [[a.state_name(i), a.state_name(j)] for i in range(len(a)) for j in sorted(a.edges[i])],
        "components": comps,
    }
    _emit(args, _report(args, body))
    return EXIT_OK


# --- parser -------------------------------------------------------------------------

def _add_bounds(sp, min_depth: bool = False):
    sp.add_argument("--max-depth", type=int, default=6, help="largest certificate depth searched")
    sp.add_argument("--max-sigma", type=int, default=None, help="largest certificate label set")
    sp.add_argument("--expansion-cap", type=int, default=10**7, help="certificate search budget")
    if min_depth:
        sp.add_argument("--min-depth", type=int, default=2)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treelcl", description="Locality classification of LCL problems on regular trees.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    common.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", parents=[common], help="depth and locality class of a problem")
    sp.add_argument("problem")
    sp.add_argument("--normalize", action="store_true", help="drop duplicate entries with a warning")
    sp.add_argument("--no-cross-check", action="store_true", help="skip the certificate search for finite depth")
    _add_bounds(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("certificate", parents=[common], help="search for or verify a coprime certificate")
    sp.add_argument("problem")
    sp.add_argument("--verify", metavar="CERT", help="verify this certificate file instead of searching")
    sp.add_argument("--normalize", action="store_true")
    _add_bounds(sp, min_depth=True)
    sp.set_defaults(func=cmd_certificate)

    sp = sub.add_parser("gen", help="generate an instance")
    gsub = sp.add_subparsers(dest="kind", required=True)
    for kind in ("rooted-lb", "unrooted-lb"):
        g = gsub.add_parser(kind, parents=[common])
        g.add_argument("--delta", type=int, required=True)
        g.add_argument("--k", type=int, required=True)
        g.add_argument("--t", type=int, required=True)
        g.add_argument("--beta" if kind == "rooted-lb" else "--gamma", type=int, default=None)
        g.add_argument("--problem", default=None, help="derive the pruning constant from this problem")
        g.add_argument("--out", default=None, help="tree JSON path")
        g.add_argument("--schedule-out", default=None, help="sampled schedule JSON path")
    g = gsub.add_parser("chunks", parents=[common])
    for name in ("sigma", "delta", "d", "b", "u", "chunk"):
        g.add_argument(f"--{name}", type=int, required=True)
    g.add_argument("--no-depth-check", action="store_true", help="allow d <= log_delta(2|Sigma|)")
    g.add_argument("--out", default=None)
    g = gsub.add_parser("complete-tree", parents=[common])
    g.add_argument("--delta", type=int, required=True)
    g.add_argument("--depth", type=int, required=True)
    g.add_argument("--shape", choices=(DELTA_ARY, T, T_STAR), default=DELTA_ARY)
    g.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("simulate", parents=[common], help="estimate the failure probability of an online algorithm")
    sp.add_argument("problem")
    sp.add_argument("tree")
    how = sp.add_mutually_exclusive_group()
    how.add_argument("--schedule", default=None, help="fixed reveal order (JSON)")
    how.add_argument("--sample", action="store_true", help="sample adversarial schedules (default)")
    sp.add_argument("--algorithm", required=True, choices=sorted(ALGORITHMS))
    sp.add_argument("--commit", default=None, help="comma-separated labels for fixed-commitment")
    sp.add_argument("--locality", type=_locality, default=None, help="integer or 'n' (default: the instance's t)")
    sp.add_argument("--trials", type=int, default=100)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("check", parents=[common], help="verify a labeling")
    sp.add_argument("problem")
    sp.add_argument("tree")
    sp.add_argument("labeling")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("export-automaton", parents=[common], help="print the automaton of a problem")
    sp.add_argument("problem")
    sp.add_argument("--format", choices=("json", "dot"), default="json")
    sp.set_defaults(func=cmd_export_automaton)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"treelcl: usage error: {exc}", file=sys.stderr)
    except ProblemSyntaxError as exc:
        print(f"treelcl: {args.problem}: {exc}", file=sys.stderr)
    except (ProblemError, ValueError, KeyError, OSError) as exc:
        print(f"treelcl: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
