"""Piecewise Chebyshev approximation on octants."""

from .approx import (
    ChebCoeffs,
    ScalarField,
    cheb_approx,
    cheb_eval,
    cheb_from_values,
    cheb_nodes,
    dump_coeffs,
    load_coeffs,
    n_coeffs,
    octant_nodes,
    truncated_indices,
    truncation_estimate,
    truncation_mask,
    values_to_full,
)

__all__ = [
    "ChebCoeffs",
    "ScalarField",
    "cheb_approx",
    "cheb_eval",
    "cheb_from_values",
    "cheb_nodes",
    "dump_coeffs",
    "load_coeffs",
    "n_coeffs",
    "octant_nodes",
    "truncated_indices",
    "truncation_estimate",
    "truncation_mask",
    "values_to_full",
]
