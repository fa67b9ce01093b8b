"""Symbolic path sums for quantum operators: exact polynomial rewriting,
unitarity testing, and circuit synthesis."""

from .algebra import BoolPoly, Dyadic, Monomial, PhasePoly, Var, xvar, yvar
from .circuit import Circuit, Gate, parse, random_circuit, stats, to_text
from .clifford import NormalFormParts, decompose, stage_profile, synth_clifford, synth_isometry
from .extract import synthesize
from .frontends import (
    Equivalence,
    clifford_pass,
    decompile,
    parse_formula,
    qft_sum,
    taut_check,
    tseytin_encode,
    verify_equiv,
)
from .rewrite import (
    CLIFFORD,
    GENERAL,
    RuleApplication,
    classify,
    clifford_unitarity,
    is_identity,
    normal_form_clifford,
    normalize,
    rule_elim,
    rule_hh,
    rule_omega,
    rule_subst,
)
from .sums import (
    PathSum,
    compose,
    dagger,
    evaluate,
    from_json,
    gate_sum,
    identity,
    simulate,
    tensor,
    to_json,
    to_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
