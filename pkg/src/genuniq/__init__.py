"""Numerical certificates of generic uniqueness for structured factorizations Y = A B(zeta)^T."""

from .certify import ChecklistReport, certify_generic_uniqueness, condition2_falsifier, scaling_probe
from .config import RunConfig
from .model import ColumnModel, FactorModel, Transform, eval_b, eval_r, jacobian_b, jacobian_f, jacobian_r
from .parser import parse_model, serialize_model
from .solve import empirical_uniqueness_test, match_decompositions, project_onto_range, varpro_fit

__version__ = "0.1.0"

__all__ = [
    "ChecklistReport",
    "ColumnModel",
    "FactorModel",
    "RunConfig",
    "Transform",
    "certify_generic_uniqueness",
    "condition2_falsifier",
    "empirical_uniqueness_test",
    "eval_b",
    "eval_r",
    "jacobian_b",
    "jacobian_f",
    "jacobian_r",
    "match_decompositions",
    "parse_model",
    "project_onto_range",
    "scaling_probe",
    "serialize_model",
    "varpro_fit",
]
