"""Discrete orthogonal polynomials as eigenvectors of tridiagonal Hamiltonians.

The catalog lives in :mod:`jacobipoly.families`; Hamiltonian construction in
:mod:`jacobipoly.hamiltonian`; spectra, polynomial tables and the duality
and orthogonality checks in :mod:`jacobipoly.spectral`; closure, ladder
and shape-invariance identities in :mod:`jacobipoly.symmetry`; rebuilding
``B`` and ``D`` from closure data in :mod:`jacobipoly.reconstruction`; and
the grid survey in :mod:`jacobipoly.driver`.
"""
from .driver import SuiteConfig, SuiteReport, run_suite
from .families import (
    ClosureCoefficients,
    Family,
    ParameterError,
    catalog_metadata,
    custom_family,
    eval_family,
    family_ids,
    get_family,
    validate_parameters,
)
from .hamiltonian import build_hamiltonian, factorize, ground_state
from .reconstruction import UnsupportedRegime, reconstruct, roundtrip_catalog
from .spectral import build_P_table, build_Q_table, solve_spectrum, spectral_window

__version__ = "0.1.0"

__all__ = [
    "ClosureCoefficients", "Family", "ParameterError", "SuiteConfig", "SuiteReport", "UnsupportedRegime",
    "build_P_table", "build_Q_table", "build_hamiltonian", "catalog_metadata", "custom_family",
    "eval_family", "factorize", "family_ids", "get_family", "ground_state", "reconstruct",
    "roundtrip_catalog", "run_suite", "solve_spectrum", "spectral_window", "validate_parameters",
]
