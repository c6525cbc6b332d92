"""Exact algebra for side conditions of polynomial ODEs: invariant varieties,
LaSalle-type relations, symmetry-derived invariant sets and parametric QSS
case analysis, with a small RK4 layer for numerical checks."""

from .polycore import Polynomial, Q, VariableContext, gcd, squarefree_factors
from .groebner import (GREVLEX, MonomialOrder, VarietyIdeal, block_order, dimension,
                       elimination_ideal, groebner_basis, ideal_equal, membership, normal_form)
from .lie import VectorField, apply_field, bracket, lie_bracket, lie_derivative
from .invariants import (InvarianceCertificate, certify_invariance, chain_stabilize,
                         convert_differential, lasalle_relation, lasalle_search)
from .symmetry import (partial_symmetry_chain, planar_analysis, symmetry_invariant_sets,
                       verify_relation)
from .qss import NamedFunction, ParametricSystem, parametric_case_analysis, qss_conditions
from .numeric import integrate, perturbation_study, residual_monitor
from .parser import ParseError, parse_expression
from .sysfile import parse_system

__version__ = "0.1.0"
