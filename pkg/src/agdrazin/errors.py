"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` and the CLI exit
code of its category: usage errors exit 1, mathematically meaningful
rejections exit 2.
"""

from __future__ import annotations


class AgdrazinError(Exception):
    """Base class for all library errors."""

    code = "ERROR"
    exit_code = 1


# ---------------------------------------------------------------------------
# usage / input errors (exit 1)


class ParseError(AgdrazinError):
    code = "PARSE_ERROR"
    exit_code = 1


class MalformedFamily(AgdrazinError):
    code = "MALFORMED_FAMILY"
    exit_code = 1


class EmptyOperator(AgdrazinError):
    code = "EMPTY_OPERATOR"
    exit_code = 1


class ShapeMismatch(AgdrazinError):
    code = "SHAPE_MISMATCH"
    exit_code = 1


class EmptySpectrum(AgdrazinError):
    """Spectra of algebra elements are never empty; raised on empty input."""

    code = "EMPTY_SPECTRUM"
    exit_code = 1


# ---------------------------------------------------------------------------
# mathematical rejections (exit 2)


class MathFailure(AgdrazinError):
    exit_code = 2


class CircleHitsSpectrum(MathFailure):
    code = "CIRCLE_HITS_SPECTRUM"


class IllConditionedSplit(MathFailure):
    code = "ILL_CONDITIONED_SPLIT"


class IndexTooLarge(MathFailure):
    code = "INDEX_TOO_LARGE"


class FamilyNotClosed(MathFailure):
    """Entrywise result leaves the representable family catalog."""

    code = "FAMILY_NOT_CLOSED"


class NotGDInvertible(MathFailure):
    code = "NOT_GD_INVERTIBLE"


class NotAGDInvertible(MathFailure):
    code = "NOT_AG_INVERTIBLE"


class CutInvalid(MathFailure):
    code = "CUT_INVALID"


class CertificateInvalid(MathFailure):
    code = "CERTIFICATE_INVALID"
