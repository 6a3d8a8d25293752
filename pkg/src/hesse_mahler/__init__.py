"""Arbitrary-precision verification of Mahler measure identities for x^3 + y^3 + 1 - kxy."""

from .binforms import CMPoint, QuadForm, class_number, search_cm_points
from .hesse import regulator_det
from .lser import lvalue2, modular_form
from .mahler import DomainError, Region, in_KQ, m3, villegas_rhs
from .mpnum import DEFAULT, PrecisionContext, default_context
from .qseries import j_eval, t_eval
from .registry import run
from .reports import VerificationReport

__version__ = "0.1.0"

__all__ = [
    "CMPoint",
    "QuadForm",
    "class_number",
    "search_cm_points",
    "regulator_det",
    "lvalue2",
    "modular_form",
    "DomainError",
    "Region",
    "in_KQ",
    "m3",
    "villegas_rhs",
    "DEFAULT",
    "PrecisionContext",
    "default_context",
    "j_eval",
    "t_eval",
    "run",
    "VerificationReport",
]
