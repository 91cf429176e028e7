"""Splitting vector systems into bases, good decompositions, and potentials
built from Frobenius like structures."""

from .exactlin import GF, QQ, Field, SubspaceRep, rank, rref, span
from .systems import Configuration, ConfigurationError, Decomposition, System, d_H, is_basis, is_independent, mu, unit
from .packing import (ViolationCertificate, compute_A1, compute_A2_bruteforce, improve_once,
                      is_qualified_bruteforce, is_strong, split_into_bases, strong_decompose)
from .equivalence import GoodDecomposition, WalkChain, good_decompose, good_from_T1, lemma33_step, verify_chain, walk
from .potential import MockOracle, MultiIndexPolynomial, build_L, build_Q, verify_potentials

__all__ = [
    "GF", "QQ", "Field", "SubspaceRep", "rank", "rref", "span",
    "Configuration", "ConfigurationError", "Decomposition", "System", "d_H", "is_basis", "is_independent",
    "mu", "unit",
    "ViolationCertificate", "compute_A1", "compute_A2_bruteforce", "improve_once", "is_qualified_bruteforce",
    "is_strong", "split_into_bases", "strong_decompose",
    "GoodDecomposition", "WalkChain", "good_decompose", "good_from_T1", "lemma33_step", "verify_chain", "walk",
    "MockOracle", "MultiIndexPolynomial", "build_L", "build_Q", "verify_potentials",
]

__version__ = "0.1.0"
