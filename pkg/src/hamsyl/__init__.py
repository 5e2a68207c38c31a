"""Syllogistic logics with the quantifiers ``all`` and ``not all`` inside terms.

Formulas ``forall(e, f)`` and ``exists(e, f)`` relate e-terms: literals ``p`` or
``non-p``, and the quantified terms ``all l`` (the elements identical to every
l) and ``nall l`` (its complement). The package provides parsing, finite
semantics with a bounded model search, rule-based saturation with checkable
derivations, reductio search, model construction, and hardness generators.
"""

from .syntax import (ETerm, Formula, LanguageTag, Literal, ParseError, Quantifier, Shape,
                     all_of, atom, canonicalize, exists, forall, format_formulas, member_of,
                     neg, negate, not_all_of, parse_eterm, parse_formula, parse_formulas)
from .semantics import (EntailmentResult, OracleConfig, Structure, bounded_entails,
                        bounded_model_search)
from .calculus import (RULE_SETS, SH, SH_DAGGER, SH_STAR_DAGGER, DerivationTree, ProofError,
                       RuleSet, check_proof, check_rule_validity, decide_direct, rule_set,
                       saturate)
from .refutation import (BranchBudgetExceeded, CompleteSet, ConsistentWitness, IndirectProof,
                         Refutation, decide_indirect, lindenbaum_extend)
from .modelgen import Construction, Variant, build_model_dagger, build_model_h

__version__ = "0.1.0"

__all__ = [
    "ETerm", "Formula", "LanguageTag", "Literal", "ParseError", "Quantifier", "Shape",
    "all_of", "atom", "canonicalize", "exists", "forall", "format_formulas", "member_of",
    "neg", "negate", "not_all_of", "parse_eterm", "parse_formula", "parse_formulas",
    "EntailmentResult", "OracleConfig", "Structure", "bounded_entails", "bounded_model_search",
    "RULE_SETS", "SH", "SH_DAGGER", "SH_STAR_DAGGER", "DerivationTree", "ProofError",
    "RuleSet", "check_proof", "check_rule_validity", "decide_direct", "rule_set", "saturate",
    "BranchBudgetExceeded", "CompleteSet", "ConsistentWitness", "IndirectProof", "Refutation",
    "decide_indirect", "lindenbaum_extend",
    "Construction", "Variant", "build_model_dagger", "build_model_h",
]
