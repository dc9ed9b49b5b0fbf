"""Quantum and classical temperature-estimation limits for two diffraction-blurred thermal sources."""

__version__ = "0.1.0"

from .equal_temp import qfi_equal, qfi_equal_series  # noqa: E402
from .gaussian_fisher import FisherMatrix, qfi_matrix, sld, weak_commutation  # noqa: E402
from .model import (  # noqa: E402
    DiffractionGeometry,
    DomainError,
    ImageState,
    SingularityError,
    SourcePair,
    build_image_state,
    derive_params,
    gaussian_overlap,
)

__all__ = [
    "DiffractionGeometry",
    "DomainError",
    "FisherMatrix",
    "ImageState",
    "SingularityError",
    "SourcePair",
    "build_image_state",
    "derive_params",
    "gaussian_overlap",
    "qfi_equal",
    "qfi_equal_series",
    "qfi_matrix",
    "sld",
    "weak_commutation",
]
