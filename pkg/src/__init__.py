"""Poisson solver arena."""
