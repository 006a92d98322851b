"""Workbench for CCS with communicating transactions: semantics, bisimulation
checking and modal logics over configurations."""

from .syntax import (
    ActName, TransName, Process, parse_process, render, check_well_formed, is_well_formed,
    free_transaction_names, apply_permutation, apply_substitution, Permutation, NameSubstitution,
)
from .reduction import (
    enumerate_action_steps, enumerate_reconfig_steps, eliminate_commits, reduction_steps,
    weak_barb,
)
from .history import (
    Configuration, ExtConfiguration, Equivalence, initial_std, initial_ext,
)
from .lts import SearchBounds, std_steps, ext_steps, cs_steps, weak_steps, canonicalize, explore
from .bisim import check_bisim, verify_relation, distinguishing_formula
from .logic import (
    parse_formula, render_formula, sat_hasco, sat_eq, sat_canco, translate_hasco_to_eq,
    translate_canco_to_hasco, translate_eq_to_canco,
)

__all__ = [
    "ActName", "TransName", "Process", "parse_process", "render", "check_well_formed",
    "is_well_formed", "free_transaction_names", "apply_permutation", "apply_substitution",
    "Permutation", "NameSubstitution", "enumerate_action_steps", "enumerate_reconfig_steps",
    "eliminate_commits", "reduction_steps", "weak_barb", "Configuration", "ExtConfiguration",
    "Equivalence", "initial_std", "initial_ext", "SearchBounds", "std_steps", "ext_steps",
    "cs_steps", "weak_steps", "canonicalize", "explore", "check_bisim", "verify_relation",
    "distinguishing_formula", "parse_formula", "render_formula", "sat_hasco", "sat_eq",
    "sat_canco", "translate_hasco_to_eq", "translate_canco_to_hasco", "translate_eq_to_canco",
]
