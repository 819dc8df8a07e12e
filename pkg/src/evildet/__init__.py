"""Exact verification of the Legendre-matrix determinant formula det C = -a."""

from .matrix import IntMatrix, RatMatrix, build_chapman, det_bareiss, det_modular, det_rational
from .numtheory import OddPrime, is_prime, legendre, primes_in_class
from .quadfield import QuadElem, class_number, compute_a, fundamental_unit
from .verifier import VerificationRecord, emit_sequence, verify_prime, verify_range

__all__ = [
    "IntMatrix",
    "OddPrime",
    "QuadElem",
    "RatMatrix",
    "VerificationRecord",
    "build_chapman",
    "class_number",
    "compute_a",
    "det_bareiss",
    "det_modular",
    "det_rational",
    "emit_sequence",
    "fundamental_unit",
    "is_prime",
    "legendre",
    "primes_in_class",
    "verify_prime",
    "verify_range",
]

__version__ = "0.1.0"
