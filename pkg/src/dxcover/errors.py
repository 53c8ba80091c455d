"""Exception hierarchy shared by all dxcover modules."""

from __future__ import annotations


class DiagnosisError(Exception):
    """Base class for every error raised by this package."""


class ParseError(DiagnosisError):
    """Malformed file content (bad JSON, wrong shape, unknown keys)."""


class ValidationError(DiagnosisError):
    """Inputs violate a model contract: bad ids, ranges, or structure."""


class CapExceededError(DiagnosisError):
    """An enumeration or evaluation bound was exceeded."""


class UncoverableSymptomError(DiagnosisError):
    """A positive finding has no possible cause in the knowledge base."""

    def __init__(self, symptom: str):
        super().__init__(f"positive finding {symptom!r} has no possible cause")
        self.symptom = symptom


class ImpossibleEvidenceError(DiagnosisError):
    """The evidence probability is zero (or below the clamp threshold)."""


class NumericalError(DiagnosisError):
    """A computed probability left its valid range beyond the clamp
    threshold (cancellation blowup) or an intermediate product
    over/underflowed binary64."""
