"""Indefinite Sturm-Liouville problems with eigenparameter-affine boundary
conditions: validation, classification, spectra, root-vector diagnostics,
and operator certification."""

from ._kreinspec import (
    KreinspecError,
    Problem,
    canonical_text,
    classify,
    hypothesis,
    load_problem,
    parse_problem_text,
    report,
    spectrum,
    validate,
    wverify,
)

__all__ = [
    "KreinspecError",
    "Problem",
    "canonical_text",
    "classify",
    "hypothesis",
    "load_problem",
    "parse_problem_text",
    "report",
    "spectrum",
    "validate",
    "wverify",
]
