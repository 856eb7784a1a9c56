"""Exception types shared across the toolkit."""


class EchoflagError(Exception):
    """Base class for all toolkit errors."""


class BadMagic(EchoflagError):
    """File does not start with the expected magic/version."""


class TruncatedPayload(EchoflagError):
    """File payload is shorter than the header promises."""


class DimensionOverflow(EchoflagError):
    """Header dimensions are zero or implausibly large."""


class TrimTooLarge(EchoflagError):
    """Requested top-row trim would remove every row."""


class EmptyInput(EchoflagError):
    """Operation received an empty collection."""


class InvalidConfig(EchoflagError):
    """Survey or training configuration violates its invariants."""


class MisalignedRecords(EchoflagError):
    """Bottom records of differing lengths were combined."""


class EmptySweep(EchoflagError):
    """Threshold sweep grid contains no candidates."""


class SingleClassDataset(EchoflagError):
    """Training set contains only one label value."""


class DimensionMismatch(EchoflagError):
    """Input vector length does not match the model."""


class EmptyTestSet(EchoflagError):
    """Evaluation requested on an empty test set."""


class DegenerateKernelMatrix(EchoflagError):
    """GP kernel matrix is not positive definite even with jitter."""


class PoolExhausted(EchoflagError):
    """Sampling plan asks for more pings than the pool provides."""


class ObjectiveFailure(EchoflagError):
    """Objective evaluation failed during optimization."""
