"""Named worked examples: bundled inputs, a pipeline per example, and a committed expected report.

``run_recipe(name)`` builds the report and diffs it against ``data/expected/<name>.json``.
An expected file has two sections keyed by "/"-separated report paths:

* ``equals``: the value at the path must equal the given value exactly;
* ``contains``: the list at the path must contain every given item.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List

from ..affects_engine import AffectsEvaluator, AffectsSet, enumerate_affects, rel
from ..core_model import InconsistentModel, ValidationError, solve_observed_distribution
from ..embedding import check_embedding, search_embeddings
from ..inference_rules import infer_causes, verify_rules_on_model
from ..io import fraction_str, load_affects, load_embedding, load_json, load_model, load_poset
from ..loop_analysis import build_potential_cause_graph, detect_acl, find_affects_chains_and_classify
from ..poset import all_posets

DATA = Path(__file__).parent / "data"


class UnknownRecipe(ValidationError):
    pass


@dataclass
class RecipeResult:
    name: str
    report: dict
    mismatches: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {"recipe": self.name, "ok": self.ok, "mismatches": self.mismatches, "report": self.report}


def data_path(name: str) -> Path:
    return DATA / name


def _strs(items) -> List[str]:
    return [str(i) for i in items]


def _affects_listing(ev: AffectsEvaluator, bounds=2) -> AffectsSet:
    return enumerate_affects(ev, bounds)


def _holds(ev: AffectsEvaluator, *rels) -> Dict[str, bool]:
    return {str(r): ev.holds(r) for r in rels}


def _otp() -> dict:
    ev = AffectsEvaluator(load_model(data_path("otp.model.json")))
    full = _affects_listing(ev)
    return {"present": _strs(full.sorted_present()),
            "holds": _holds(ev, rel("M", "M'"), rel("K", "M'"), rel("MK", "M'")),
            "flags": {"KM⊨M'": full.present[rel("MK", "M'")].to_dict()}}


def _jamming() -> dict:
    ev = AffectsEvaluator(load_model(data_path("jamming.model.json")))
    full = _affects_listing(ev)
    return {"nodes": list(ev.names), "present": _strs(full.sorted_present()),
            "causes": _strs(infer_causes(full))}


def _ex_iv4() -> dict:
    ev = AffectsEvaluator(load_model(data_path("ex-iv4.model.json")))
    full = _affects_listing(ev)
    ho = rel("B", "D", "C")
    # the higher-order relation plus the single absence B ⊭ D, nothing else
    witness_only = AffectsSet({ho: ev.classify(ho)}, frozenset([rel("B", "D")]))
    return {"holds": _holds(ev, rel("C", "D"), rel("BC", "D"), ho, rel("B", "D")),
            "flags": {str(ho): ev.classify(ho).to_dict()},
            "causes": _strs(infer_causes(full)),
            "causes_from_witness": _strs(infer_causes(witness_only)),
            "rule_violations": verify_rules_on_model(ev, affects=full).violations}


def _ex_iv7() -> dict:
    ev = AffectsEvaluator(load_model(data_path("ex-iv7.model.json")))
    full = _affects_listing(ev)
    singles = [r for r in full.sorted_present() if len(r.x) == len(r.y) == 1 and not r.z and not r.w]
    return {"holds": _holds(ev, rel("B", "D"), rel("AC", "D"), rel("A", "D"), rel("C", "D"), rel("B", "A"),
                            rel("B", "C")),
            "single_to_single": _strs(singles)}


def _hcl() -> dict:
    model = load_model(data_path("hcl.model.json"))
    ev = AffectsEvaluator(model)
    dist = solve_observed_distribution(model)
    try:
        solve_observed_distribution(load_model(data_path("paradox.model.json")))
        paradox = "solved"
    except InconsistentModel:
        paradox = "InconsistentModel"
    return {"distribution": {",".join(f"{n}={v}" for n, v in zip(dist.scope, k)): fraction_str(p)
                             for k, p in sorted(dist.probs.items())},
            "holds": _holds(ev, rel("X", "Y"), rel("Y", "X")),
            "paradox": paradox}


def _loop_recipe(name: str) -> Callable[[], dict]:
    def run() -> dict:
        affects = load_affects(data_path(f"{name}.affects.json"))
        acl = detect_acl(affects, mode="both")
        classes = find_affects_chains_and_classify(affects)["classes"]
        return {"potential_cause_graph": _strs(build_potential_cause_graph(affects).sorted_arrows()),
                "loop_graph": _strs(acl.loop_graph.sorted_arrows()),
                "loop_nodes": sorted(acl.loop_graph.nodes),
                "acl_present": acl.acl_present, "agree": acl.agree,
                "acyclic_resolution": [list(e) for e in acl.acyclic_resolution or []],
                "classes": sorted(classes)}
    return run


def _embedding_recipe(name: str) -> Callable[[], dict]:
    def run() -> dict:
        out = _loop_recipe(name)()
        affects = load_affects(data_path(f"{name}.affects.json"))
        poset = load_poset(data_path(f"{name}.poset.json"))
        emb = load_embedding(data_path(f"{name}.embedding.json"))
        rep = check_embedding(affects, poset, emb)
        out["embedding"] = {"compat": rep.compat["irreducible"], "support_stable": rep.support_stable,
                            "minimum_stable": rep.minimum_stable, "degenerate": rep.degenerate,
                            "trivial": rep.trivial}
        return out
    return run


def _acl5() -> dict:
    out = _embedding_recipe("acl5")()
    affects = load_affects(data_path("acl5.affects.json"))
    pqrs = load_poset(data_path("acl5.poset.json"))
    chain4 = load_poset(data_path("chain4.poset.json"))
    out["non_degenerate_on_pqrs"] = len(search_embeddings(affects, pqrs, ["non-degenerate"]))
    out["support_stable_on_pqrs"] = len(search_embeddings(affects, pqrs, ["support-stable"]))
    out["support_stable_on_chain4"] = len(search_embeddings(affects, chain4, ["support-stable"]))
    out["support_stable_on_posets_up_to_5"] = sum(
        len(search_embeddings(affects, p, ["support-stable"])) for n in range(1, 6) for p in all_posets(n))
    return out


RECIPES: Dict[str, Callable[[], dict]] = {
    "otp": _otp,
    "jamming": _jamming,
    "ex-iv4": _ex_iv4,
    "ex-iv7": _ex_iv7,
    "hcl": _hcl,
    "acl3": _loop_recipe("acl3"),
    "acl5": _acl5,
    "acl6a": _loop_recipe("acl6a"),
    "acl7": _embedding_recipe("acl7"),
    "acl11": _loop_recipe("acl11"),
    "acl12": _embedding_recipe("acl12"),
    "noacl": _loop_recipe("noacl"),
}


def _lookup(report: Any, path: str):
    node = report
    for part in path.split("/"):
        if isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise KeyError(path)
    return node


def diff_report(report: dict, expected: dict) -> List[str]:
    mismatches = []
    for path, want in sorted(expected.get("equals", {}).items()):
        try:
            got = _lookup(report, path)
        except KeyError:
            mismatches.append(f"{path}: missing from report")
            continue
        if got != want:
            mismatches.append(f"{path}: expected {want!r}, got {got!r}")
    for path, items in sorted(expected.get("contains", {}).items()):
        try:
            got = _lookup(report, path)
        except KeyError:
            mismatches.append(f"{path}: missing from report")
            continue
        for item in items:
            if item not in got:
                mismatches.append(f"{path}: expected to contain {item!r}")
    return mismatches


def run_recipe(name: str) -> RecipeResult:
    if name not in RECIPES:
        raise UnknownRecipe(f"unknown recipe {name!r}; known: {', '.join(sorted(RECIPES))}")
    report = RECIPES[name]()
    expected = load_json(data_path(f"expected/{name}.json"))
    return RecipeResult(name, report, diff_report(report, expected))
