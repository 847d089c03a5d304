"""Affects relations in structural causal models, causal loops, and embeddings into partial orders."""
from .affects_engine import (AffectsEvaluator, AffectsRelation, AffectsSet, RelationFlags, affects_holds,
                             candidate_relations, classify_relation, enumerate_affects, rel)
from .core_model import (CausalStructure, InconsistentModel, JointDistribution, Mechanism, ModelError, Node,
                         StructuralModel, UnsupportedCyclicStochastic, ValidationError,
                         post_intervention_distribution, solve_observed_distribution)
from .embedding import Embedding, EmbeddingReport, check_embedding, search_embeddings
from .independence import compatibility_report, d_separated
from .inference_rules import (DisjunctiveCause, RuleId, apply_transformation_rule, infer_causes, reconstruct_edges,
                              verify_rules_on_model)
from .loop_analysis import (AclReport, CapExceeded, PotentialCauseGraph, build_loop_graph, build_potential_cause_graph,
                            detect_acl, find_affects_chains_and_classify)
from .poset import Poset, all_posets, classify_poset, generate_minkowski_grid, order_query, validate_poset

__all__ = [
    "AclReport", "AffectsEvaluator", "AffectsRelation", "AffectsSet", "CapExceeded", "CausalStructure",
    "DisjunctiveCause", "Embedding", "EmbeddingReport", "InconsistentModel", "JointDistribution", "Mechanism",
    "ModelError", "Node", "Poset", "PotentialCauseGraph", "RelationFlags", "RuleId", "StructuralModel",
    "UnsupportedCyclicStochastic", "ValidationError", "affects_holds", "all_posets", "apply_transformation_rule",
    "build_loop_graph", "build_potential_cause_graph", "candidate_relations", "check_embedding", "classify_poset",
    "classify_relation", "compatibility_report", "d_separated", "detect_acl", "enumerate_affects",
    "find_affects_chains_and_classify", "generate_minkowski_grid", "infer_causes", "order_query",
    "post_intervention_distribution", "reconstruct_edges", "rel", "search_embeddings",
    "solve_observed_distribution", "validate_poset", "verify_rules_on_model",
]
