"""Property suites backing the ``verify`` command."""
from __future__ import annotations

from wdce.domain.verify.results import PropertyResult, SuiteReport
from wdce.domain.verify.suites import (
    GRAD_BOUND,
    SUITES,
    attention_suite,
    contrastive_suite,
    grad_suite,
    run_suites,
    wavelet_suite,
)

__all__ = [
    "GRAD_BOUND",
    "SUITES",
    "PropertyResult",
    "SuiteReport",
    "attention_suite",
    "contrastive_suite",
    "grad_suite",
    "run_suites",
    "wavelet_suite",
]
