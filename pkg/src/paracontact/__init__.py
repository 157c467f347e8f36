"""Numerical verification of bi-paracontact structures on contact manifolds.

Fields are evaluated as order-two jets on polynomial charts or left-invariant
frames; identities are checked by sampling residuals at seeded points.
"""

from .bipara import BiParacontact, build_biparacontact, conjugate_structure, from_bilegendrian_pair
from .checks import Check, PreconditionError
from .connections import Connection, levi_civita
from .contact import ContactForm, Distribution, NotContactError, is_involutive, is_legendre
from .kappa_mu import KappaMuStructure, verify_kappa_mu
from .kernel import DomainError, Model, OneForm, Point, Tensor11, VectorField, bracket
from .models import BuiltinModel, ModelError, builtin, darboux, kappa_mu_frame, load_model_file, resolve
from .structures import AlmostContact, AxiomError, MetricStructure
from .suites import SuiteReport, run_suite

__all__ = [
    "AlmostContact", "AxiomError", "BiParacontact", "BuiltinModel", "Check", "Connection", "ContactForm",
    "Distribution", "DomainError", "KappaMuStructure", "MetricStructure", "Model", "ModelError",
    "NotContactError", "OneForm", "Point", "PreconditionError", "SuiteReport", "Tensor11", "VectorField",
    "bracket", "build_biparacontact", "builtin", "conjugate_structure", "darboux", "from_bilegendrian_pair",
    "is_involutive", "is_legendre", "kappa_mu_frame", "levi_civita", "load_model_file", "resolve",
    "run_suite", "verify_kappa_mu",
]
