"""Generalized bits (Bloch-ball state spaces): transformations, constraints and circuits."""

from .analyzer import AnalysisOptions, AnalysisReport, analyze
from .bloch import BlochVector, Rotation, lift, outcome_probability
from .certificates import ExclusionCertificate, verify_certificate
from .circuits import Circuit, correlation_check, evaluate, gate_from_generator
from .constraints import first_order_null_space, local_algebra_basis
from .tensor import OperatorTensor, joint_probability

__all__ = [
    "AnalysisOptions",
    "AnalysisReport",
    "BlochVector",
    "Circuit",
    "ExclusionCertificate",
    "OperatorTensor",
    "Rotation",
    "analyze",
    "correlation_check",
    "evaluate",
    "first_order_null_space",
    "gate_from_generator",
    "joint_probability",
    "lift",
    "local_algebra_basis",
    "outcome_probability",
    "verify_certificate",
]

__version__ = "0.1.0"
