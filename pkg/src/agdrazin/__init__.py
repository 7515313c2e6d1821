"""Spectral-set calculus and generalized inverse constructions for
matrix-plus-diagonal block operators."""

from __future__ import annotations

__version__ = "0.1.0"

from .config import DEFAULT_CONFIG, DEFAULT_TOLERANCES, RunConfig, Tolerances
from .errors import (
    AgdrazinError,
    CertificateInvalid,
    CircleHitsSpectrum,
    CutInvalid,
    EmptyOperator,
    EmptySpectrum,
    FamilyNotClosed,
    IllConditionedSplit,
    IndexTooLarge,
    MalformedFamily,
    NotAGDInvertible,
    NotGDInvertible,
    ParseError,
    ShapeMismatch,
)
from .families import Cluster, Constant, Finite, Geometric, Power
from .scalars import Scalar
from .sets import (
    ClassFlags,
    SpectralSet,
    acc_of,
    affine_map,
    annulus_clear,
    classify_set,
    contains,
    derive_structure,
    sigma_ad_of,
    sigma_d_of,
    set_union,
)

__all__ = [
    "AgdrazinError",
    "CertificateInvalid",
    "CircleHitsSpectrum",
    "ClassFlags",
    "Cluster",
    "Constant",
    "CutInvalid",
    "DEFAULT_CONFIG",
    "DEFAULT_TOLERANCES",
    "EmptyOperator",
    "EmptySpectrum",
    "FamilyNotClosed",
    "Finite",
    "Geometric",
    "IllConditionedSplit",
    "IndexTooLarge",
    "MalformedFamily",
    "NotAGDInvertible",
    "NotGDInvertible",
    "ParseError",
    "Power",
    "RunConfig",
    "Scalar",
    "ShapeMismatch",
    "SpectralSet",
    "Tolerances",
    "acc_of",
    "affine_map",
    "annulus_clear",
    "classify_set",
    "contains",
    "derive_structure",
    "set_union",
    "sigma_ad_of",
    "sigma_d_of",
]
