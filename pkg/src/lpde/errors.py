"""Exception hierarchy shared across the package."""


class LpdeError(Exception):
    """Base class for all package-specific errors."""


class GridSizeError(LpdeError, ValueError):
    """Grid or transform length violates a size precondition."""


class ArgumentError(LpdeError, ValueError):
    """Operation argument outside its supported range."""


class GenerationError(LpdeError, RuntimeError):
    """Data generation failed (non-positive Cole-Hopf factor, overflow, ...)."""


class BlowUpError(GenerationError):
    """Time integration produced NaN/Inf.

    Carries the failing internal step index in ``step_index``.
    """

    def __init__(self, message, step_index):
        super().__init__(message)
        self.step_index = step_index


class CatalogError(LpdeError, KeyError):
    """Unknown equation or generator id."""


class AugmentationError(LpdeError, RuntimeError):
    """Symmetry application failed."""


class AugmentationTooStrongError(AugmentationError):
    """Valid region after augmentation cannot contain the requested window."""


class CropError(LpdeError, ValueError):
    """Crop window or origin outside the field's valid region."""


class DomainError(LpdeError, ValueError):
    """Pointwise transform left its mathematical domain (e.g. log of <= 0)."""


class BatchError(LpdeError, ValueError):
    """Batch shape violates a loss precondition (e.g. N < 2)."""


class ShapeError(LpdeError, ValueError):
    """Tensor shape mismatch."""


class GraphError(LpdeError, RuntimeError):
    """Autodiff graph construction error (cycles, detached loss, ...)."""


class DivergenceError(LpdeError, RuntimeError):
    """Training loss became NaN; carries epoch/batch indices."""

    def __init__(self, message, epoch, batch):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class MetricError(LpdeError, ZeroDivisionError):
    """Metric undefined for the given inputs (zero-norm prediction)."""


class NumericError(LpdeError, RuntimeError):
    """Linear algebra failure beyond regularization."""


class DataFormatError(LpdeError, ValueError):
    """Container format violation."""


class CorruptFileError(DataFormatError):
    """Length/consistency checks failed while reading a container."""


class UnsupportedVersionError(DataFormatError):
    """Recognized magic but unsupported format version."""


class ContainerError(LpdeError, ValueError):
    """Samples incompatible with each other or with the container."""


class ConfigError(LpdeError, ValueError):
    """Invalid run/policy configuration."""
