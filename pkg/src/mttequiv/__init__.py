"""Equivalence checking for total deterministic separated basic macro tree
transducers relative to a deterministic top-down tree automaton."""

from .errors import (ArityError, DomainError, EmptyDomainError,
                     InternalInvariantError, MttError, ParseError,
                     ValidationError)
from .terms import BOTTOM, Kind, Symbol, TermStore
from .model import (Axiom, Dta, Evaluator, Mtt, Rule, ValidationReport,
                    dta_analyze, evaluate_axiom, evaluate_state,
                    product_annotate, rhs_decompose, trivial_dta, validate)
from .earliest import PrefixTable, compute_prefixes, earliest_transform
from .herbrand import (FALSE, TRUE, Conjunction, conj_and, conj_equiv,
                       conj_implies, eval_ground, reduce, subst)
from .equiv import PhiTable, PsiTable, Verdict, decide, phi_step, psi_step, stabilize
from .oracle import (EnumBudget, OracleResult, enumerate_inputs, oracle_decide,
                     oracle_partial_equiv, oracle_state_equiv)
from .applications import (LookaheadMtt, LookaheadRule, domain_dta, dta_equiv,
                           partial_equiv, remove_lookahead, totalize)
from .dsl import ParsedSpec, parse_spec, render_dta, render_mtt

__version__ = "0.1.0"
