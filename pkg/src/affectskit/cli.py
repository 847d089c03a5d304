"""Command line driver.  Every command reads JSON files and prints a JSON report.

Exit status: 0 success, 1 recipe mismatch, 2 validation or schema error, 3 cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import affects_engine as ae
from .core_model import ModelError, post_intervention_distribution, solve_observed_distribution
from .embedding import COMPAT_MODES, DEFAULT_SEARCH_CAP, check_embedding, iter_embeddings
from .independence import CHILDREN, DESCENDANTS, compatibility_report, d_separated
from .inference_rules import infer_causes, verify_rules_on_model
from .io import dump_json, load_affects, load_embedding, load_model, load_poset
from .loop_analysis import (DEFAULT_CHAIN_CAP, DEFAULT_RESOLUTION_CAP, CapExceeded, build_loop_graph,
                            build_potential_cause_graph, detect_acl, find_affects_chains_and_classify)
from .poset import classify_poset, generate_minkowski_grid, order_query
from .recipes import RECIPES, run_recipe

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_CAP = 0, 1, 2, 3


def _names(text: Optional[str]) -> List[str]:
    return [n for n in (text or "").split(",") if n]


def _relation(args) -> ae.AffectsRelation:
    return ae.AffectsRelation(frozenset(_names(args.x)), frozenset(_names(args.y)), frozenset(_names(args.z)),
                              frozenset(_names(args.w)))


def _do(pairs: List[str]) -> dict:
    out = {}
    for item in pairs:
        name, sep, value = item.partition("=")
        if not sep or not value.lstrip("-").isdigit():
            raise ae.ValidationError(f"--do expects NAME=VALUE, got {item!r}")
        out[name] = int(value)
    return out


def _evaluator(args) -> ae.AffectsEvaluator:
    return ae.AffectsEvaluator(load_model(args.model), args.zero_context)


# ---- command handlers: each returns (report, exit status) ----

def cmd_model_solve(args):
    return solve_observed_distribution(load_model(args.model)).to_dict(), EXIT_OK


def cmd_model_intervene(args):
    return post_intervention_distribution(load_model(args.model), _do(args.do)).to_dict(), EXIT_OK


def cmd_indep_dsep(args):
    structure = load_model(args.model).structure
    sep = d_separated(structure, _names(args.x), _names(args.y), _names(args.z), args.collider_rule)
    return {"x": _names(args.x), "y": _names(args.y), "z": _names(args.z), "d_separated": sep,
            "collider_rule": args.collider_rule}, EXIT_OK


def cmd_indep_compat(args):
    model = load_model(args.model)
    rep = compatibility_report(model.structure, solve_observed_distribution(model), args.mode, args.collider_rule)
    return rep.to_dict(), EXIT_OK


def cmd_affects_enumerate(args):
    return ae.enumerate_affects(_evaluator(args), args.max).to_dict(), EXIT_OK


def cmd_affects_classify(args):
    ev = _evaluator(args)
    r = _relation(args)
    holds = ev.holds(r)
    out = {"relation": r.to_dict(), "text": str(r), "holds": holds}
    if holds:
        out["flags"] = ev.classify(r).to_dict()
        out["reducing_subsets"] = [sorted(s) for s in ev.reducing_subsets(r)]
    return out, EXIT_OK


def cmd_infer_causes(args):
    return {"causes": [c.to_dict() for c in infer_causes(load_affects(args.affects))]}, EXIT_OK


def cmd_infer_verify(args):
    return verify_rules_on_model(_evaluator(args), args.max).to_dict(), EXIT_OK


def _graph_output(g, fmt):
    return g.to_dot() if fmt == "dot" else g.to_dict()


def cmd_graph_pot_cause(args):
    return _graph_output(build_potential_cause_graph(load_affects(args.affects), args.extended), args.format), EXIT_OK


def cmd_graph_loop(args):
    g = build_loop_graph(build_potential_cause_graph(load_affects(args.affects), args.extended))
    return _graph_output(g, args.format), EXIT_OK


def cmd_acl_detect(args):
    return detect_acl(load_affects(args.affects), args.mode, args.extended, args.cap).to_dict(), EXIT_OK


def cmd_acl_classify(args):
    return find_affects_chains_and_classify(load_affects(args.affects), args.cap), EXIT_OK


def cmd_poset_validate(args):
    p = load_poset(args.poset)
    out = p.to_dict()
    if args.query:
        points = [_names(s) for s in args.points]
        if args.query == "covers":
            query_args = ()
        elif args.query in ("join", "meet", "future", "exclusive-future"):
            # single points, one per --points flag
            query_args = tuple(s[0] for s in points if s)
        else:
            query_args = (points[0] if points else [],)
        res = order_query(p, args.query, *query_args)
        if isinstance(res, (set, frozenset)):
            res = sorted(res)
        elif isinstance(res, list):
            res = [list(pair) for pair in res]
        out["query"] = {"kind": args.query, "points": points, "result": res}
    return out, EXIT_OK


def cmd_poset_classify(args):
    return classify_poset(load_poset(args.poset), args.k).to_dict(), EXIT_OK


def cmd_poset_grid(args):
    p = generate_minkowski_grid(args.dims, args.extent)
    return (p.to_dot() if args.format == "dot" else p.to_dict()), EXIT_OK


def cmd_embed_check(args):
    rep = check_embedding(load_affects(args.affects), load_poset(args.poset), load_embedding(args.embedding), args.mode)
    return rep.to_dict(), EXIT_OK


def cmd_embed_search(args):
    require = [args.mode] + [t for t in (args.require or "").split(",") if t]
    affects, poset = load_affects(args.affects), load_poset(args.poset)
    count = 0
    for emb in iter_embeddings(affects, poset, require, cap=args.cap):
        sys.stdout.write(json.dumps(emb.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
        count += 1
    return {"summary": {"embeddings": count, "require": require}}, EXIT_OK


def cmd_recipe_run(args):
    result = run_recipe(args.name)
    return result.to_dict(), EXIT_OK if result.ok else EXIT_MISMATCH


def cmd_recipe_list(args):
    return {"recipes": sorted(RECIPES)}, EXIT_OK


# ---- parser ----

def _add(sub, name, handler, help_text, *options):
    p = sub.add_parser(name, help=help_text)
    p.set_defaults(handler=handler)
    for opt in options:
        opt(p)
    p.add_argument("--jobs", type=int, default=1, help="worker count (work runs in this process)")
    return p


def _model(p):
    p.add_argument("--model", required=True, help="model JSON file")


def _affects(p):
    p.add_argument("--affects", required=True, help="affects-set JSON file")


def _poset(p):
    p.add_argument("--poset", required=True, help="poset JSON file")


def _max(p):
    p.add_argument("--max", type=int, default=2, help="bound on |X|, |Y|, |Z| and |W| (default 2)")


def _zero(p):
    p.add_argument("--zero-context", choices=ae.ZERO_CONTEXT_MODES, default=ae.DEFINEDNESS,
                   help="treatment of contexts with zero probability on one side")


def _xyzw(p):
    for flag in ("x", "y", "z", "w"):
        p.add_argument(f"--{flag}", default="", help=f"comma-separated names of {flag.upper()}")


def _collider(p):
    p.add_argument("--collider-rule", choices=(CHILDREN, DESCENDANTS), default=CHILDREN)


def _extended(p):
    p.add_argument("--extended", action="store_true", help="add families from indecreasable witnesses")


def _fmt(p):
    p.add_argument("--format", choices=("json", "dot"), default="json")


def _cap(default):
    def add(p):
        p.add_argument("--cap", type=int, default=default, help=f"search-space cap (default {default})")
    return add


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affectskit", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    def group(name, help_text):
        g = groups.add_parser(name, help=help_text)
        return g.add_subparsers(dest="command", required=True)

    model = group("model", "solve structural models")
    _add(model, "solve", cmd_model_solve, "observed distribution", _model)
    _add(model, "intervene", cmd_model_intervene, "post-intervention distribution", _model,
         lambda p: p.add_argument("--do", action="append", default=[], metavar="NAME=VALUE"))

    indep = group("indep", "d-separation and conditional independence")
    _add(indep, "dsep", cmd_indep_dsep, "d-separation query", _model, _xyzw, _collider)
    _add(indep, "compat", cmd_indep_compat, "d-separation compatibility", _model, _collider,
         lambda p: p.add_argument("--mode", choices=("compatible", "faithful"), default="compatible"))

    affects = group("affects", "affects relations of a model")
    _add(affects, "enumerate", cmd_affects_enumerate, "all relations within bounds", _model, _max, _zero)
    _add(affects, "classify", cmd_affects_classify, "decide and classify one relation", _model, _xyzw, _zero)

    infer = group("infer", "inference from affects relations")
    _add(infer, "causes", cmd_infer_causes, "disjunctive causes", _affects)
    _add(infer, "verify", cmd_infer_verify, "check the transformation rules on a model", _model, _max, _zero)

    graph = group("graph", "potential cause and loop graphs")
    _add(graph, "pot-cause", cmd_graph_pot_cause, "potential cause graph", _affects, _extended, _fmt)
    _add(graph, "loop", cmd_graph_loop, "loop graph", _affects, _extended, _fmt)

    acl = group("acl", "affects causal loops")
    _add(acl, "detect", cmd_acl_detect, "decide whether a loop is forced", _affects, _extended,
         _cap(DEFAULT_RESOLUTION_CAP),
         lambda p: p.add_argument("--mode", choices=("loop-graph", "oracle", "both"), default="loop-graph"))
    _add(acl, "classify", cmd_acl_classify, "affects chains and loop classes", _affects, _cap(DEFAULT_CHAIN_CAP))

    poset = group("poset", "finite partial orders")
    _add(poset, "validate", cmd_poset_validate, "validate and optionally query", _poset,
         lambda p: p.add_argument("--query", choices=("future", "exclusive-future", "support-future", "min",
                                                      "covers", "join", "meet", "span")),
         lambda p: p.add_argument("--points", action="append", default=[], help="comma-separated point set"))
    _add(poset, "classify", cmd_poset_classify, "structural properties", _poset,
         lambda p: p.add_argument("--k", type=int, default=3, help="largest point-set size checked"))
    _add(poset, "grid", cmd_poset_grid, "discrete Minkowski grid", _fmt,
         lambda p: p.add_argument("--dims", choices=("1+1", "2+1"), default="1+1"),
         lambda p: p.add_argument("--extent", type=int, default=2))

    embed = group("embed", "embeddings into posets")
    mode = lambda p: p.add_argument("--mode", choices=COMPAT_MODES, default="irreducible")
    _add(embed, "check", cmd_embed_check, "evaluate one embedding", _affects, _poset, mode,
         lambda p: p.add_argument("--embedding", required=True, help="embedding JSON file"))
    _add(embed, "search", cmd_embed_search, "enumerate embeddings as JSON lines", _affects, _poset, mode,
         _cap(DEFAULT_SEARCH_CAP),
         lambda p: p.add_argument("--require", default="",
                                  help="comma-separated: support-stable, minimum-stable, non-degenerate, "
                                       "non-trivial"))

    recipe = group("recipe", "bundled worked examples")
    _add(recipe, "run", cmd_recipe_run, "run one recipe and diff against its expected report",
         lambda p: p.add_argument("name"))
    _add(recipe, "list", cmd_recipe_list, "list recipe names")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, status = args.handler(args)
    except CapExceeded as exc:
        sys.stderr.write(f"error: cap exceeded: {exc}\n")
        return EXIT_CAP
    except (ModelError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    sys.stdout.write(report if isinstance(report, str) else dump_json(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
