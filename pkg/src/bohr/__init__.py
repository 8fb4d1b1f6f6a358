"""Intuitionistic quantum logic of finite-dimensional systems.

Contexts of a matrix algebra form a poset; over it the Gelfand spectrum is
a Heyting algebra of monotone atom-set assignments, observables are
daseinised into it, and states pair with propositions to give upper-set
truth values.
"""
from .contexts import (
    Context,
    ContextPoset,
    UpperSet,
    build_poset,
    context_from_basis,
    context_of,
    includes,
    intersect,
    omega_elements,
    principal_up,
    trivial_context,
)
from .daseinisation import daseinise, daseinise_leq, gelfand_open, inner_outer
from .ks import find_point, verify_point
from .linalg import RationalInterval, using_tolerances
from .spectrum import SpectralOpen, pi_sigma_star
from .states import State, pair, valuation

__version__ = "0.1.0"

__all__ = [
    "Context", "ContextPoset", "RationalInterval", "SpectralOpen", "State", "UpperSet",
    "build_poset", "context_from_basis", "context_of", "daseinise", "daseinise_leq",
    "find_point", "gelfand_open", "includes", "inner_outer", "intersect", "omega_elements",
    "pair", "pi_sigma_star", "principal_up", "trivial_context", "using_tolerances",
    "valuation", "verify_point",
]
