"""Frobenius trace statistics for thin cyclic r-fold covers of the projective line over F_q."""

from .errors import *  # noqa: F401,F403
from .families import Branch, FamilySpec, ThinModel, count_family, count_from_series, enumerate_family, sample_family
from .finite_field import CycInt, extend_field, make_field
from .polynomials import Poly, PrimePoly, factor, is_irreducible
from .residue_symbols import symbol_context
from .statistics import (
    TestFunction,
    average_scaled_trace,
    density_report,
    et_term,
    mt_term,
    refined_prediction,
    verify_theorem_1_5,
)
from .traces import Curve, LPolynomial, eigenangles, l_polynomial, scaled_trace

__version__ = "0.1.0"
