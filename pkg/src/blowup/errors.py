"""Exception hierarchy shared by all modules."""


class BlowupError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(BlowupError, ValueError):
    """An argument breaks an operation's precondition (e.g. mixed vertex universes)."""


class UndefinedDensity(BlowupError, ValueError):
    pass


class SizeLimitError(BlowupError, ValueError):
    pass


class InvariantError(BlowupError, ValueError):
    """A named structural invariant does not hold."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


class DegenerateInstance(BlowupError, ValueError):
    pass


class GenerationFailure(BlowupError, RuntimeError):
    pass


class EmbeddingFailure(BlowupError, RuntimeError):
    """Base for failures of the embedding algorithm itself."""

    kind = "embedding-failure"

    def __init__(self, message: str, t: int | None = None, vertex: int | None = None, **info):
        self.t = t
        self.vertex = vertex
        self.info = info
        super().__init__(message)


class PreprocessingError(EmbeddingFailure):
    kind = "preprocessing"


class SelectionExhausted(EmbeddingFailure):
    kind = "selection-exhausted"


class SweepFailure(EmbeddingFailure):
    kind = "sweep-failure"


class HallFailure(EmbeddingFailure):
    kind = "hall-failure"


class BatchFailure(EmbeddingFailure):
    kind = "batch-failure"


class FormatError(BlowupError, ValueError):
    """A file could not be parsed as the expected document."""
