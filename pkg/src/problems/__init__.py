from .cases import (
    DEFAULT_SAMPLE_COUNT,
    ErrorMeasure,
    TestCase,
    exact_f,
    exact_u,
    halton_samples,
    linf_rel_error,
    measure_error,
    parse_case,
    source_function,
)

__all__ = [
    "DEFAULT_SAMPLE_COUNT",
    "ErrorMeasure",
    "TestCase",
    "exact_f",
    "exact_u",
    "halton_samples",
    "linf_rel_error",
    "measure_error",
    "parse_case",
    "source_function",
]
