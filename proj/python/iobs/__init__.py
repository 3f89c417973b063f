"""Exact integrable-observable computations (C++ core)."""

from ._iobs import (
    FluxMismatch,
    MissingCorrelator,
    TableError,
    algebra_properties,
    bernoulli_number,
    check,
    commute,
    correlator,
    fluxes,
    hodge,
    kdv,
    psi_correlator,
    verify_dilaton_identities,
)

__all__ = [
    "FluxMismatch",
    "MissingCorrelator",
    "TableError",
    "algebra_properties",
    "bernoulli_number",
    "check",
    "commute",
    "correlator",
    "fluxes",
    "hodge",
    "kdv",
    "psi_correlator",
    "verify_dilaton_identities",
]
