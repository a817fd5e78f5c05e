"""Linear regression from one-bit dithered quantized data."""

__version__ = "0.1.0"

from bitreg.quantize import (  # noqa: E402
    EmpiricalFixed, Fixed, OutOfRangeError, QuantizedDataset, QuantizedSample, QuantizerRange,
    Ranges, SubGaussianLogN, quantize_dataset, quantize_scalar, quantize_triplet, resolve_ranges,
)
from bitreg.moments import MomentAccumulator, MomentEstimates, estimate_moments, estimate_moments_paired  # noqa: E402
from bitreg.regress import FitResult, NotPositiveDefinite, fit_ols, fit_quantized, sandwich_covariance  # noqa: E402

__all__ = [
    "EmpiricalFixed", "Fixed", "OutOfRangeError", "QuantizedDataset", "QuantizedSample",
    "QuantizerRange", "Ranges", "SubGaussianLogN", "quantize_dataset", "quantize_scalar",
    "quantize_triplet", "resolve_ranges", "MomentAccumulator", "MomentEstimates",
    "estimate_moments", "estimate_moments_paired", "FitResult", "NotPositiveDefinite",
    "fit_ols", "fit_quantized", "sandwich_covariance",
]
