"""Exact finite-precision arithmetic for enhanced Higgs modules, their
divided-power stratifications, Higgs/group cohomology, and the formal-lambda
Galois side with its Sen limit."""

from .higgs import EnhancedHiggsModule, bk_twist_module, check_enhanced, dual, tensor, twist
from .matrices import Matrix
from .rings import (
    LaurentCoeffRing,
    PrimeConfig,
    RingElt,
    adjoin_formal_lambda,
    adjoin_zeta,
    make_base_ring,
)
from .stratification import build_stratification, check_cocycle, extract

__all__ = [
    "EnhancedHiggsModule",
    "LaurentCoeffRing",
    "Matrix",
    "PrimeConfig",
    "RingElt",
    "adjoin_formal_lambda",
    "adjoin_zeta",
    "bk_twist_module",
    "build_stratification",
    "check_cocycle",
    "check_enhanced",
    "dual",
    "extract",
    "make_base_ring",
    "tensor",
    "twist",
]

__version__ = "0.1.0"
