"""Truncated power series, substitution maps and Hasse-Schmidt derivations over k[x1..xn]."""

from .algebra import GF, QQ, Derivation, Field, Poly, PolyRing, solve_in_derivation_basis
from .errors import (
    Cancelled,
    HSForgeError,
    NotAUnit,
    ParseError,
    PreconditionError,
    UniverseMismatch,
    UnsupportedGeneratingSet,
    ValidationError,
)
from .generate import GenerationProblem, canonical_hs, generate_subst, integrate, top_action_law, verify_uniqueness
from .hsderiv import HSDeriv, act, compose, d_of_phi, ell, invert, is_iterative, phi_apply, phi_upper_D
from .multiindex import CoIdeal, MultiIndex, VarSet
from .series import Series, invert_partition, invert_recursive
from .substitution import SubstMap, make_subst, validate

__version__ = "0.1.0"
