"""Exception types shared across the package."""


class KgExplainError(Exception):
    """Base class for all package errors."""


class TripleParseError(KgExplainError):
    """A triple file line could not be parsed."""

    def __init__(self, path: str, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class NoSeedEntities(KgExplainError):
    """No KG node could be grounded in the question/answer text."""


class NumericalError(KgExplainError):
    """A non-finite value appeared during numeric computation."""


class ConfigurationError(KgExplainError):
    """Inconsistent dimensions, option counts, or client configuration."""


class TransportError(KgExplainError):
    """An external client exhausted its retries."""


class GenerationError(KgExplainError):
    """An LLM returned an unusable (e.g. empty) completion."""


class ScoreParseError(KgExplainError):
    """An evaluator response did not contain a parseable score line."""

    def __init__(self, message: str, raw_text: str):
        self.raw_text = raw_text
        super().__init__(f"{message}; raw text: {raw_text!r}")


class EvaluationError(KgExplainError):
    """Scoring an explanation failed even after a re-ask."""


class DatasetError(KgExplainError):
    """A dataset record violated the schema."""

    def __init__(self, message: str, line_no: int | None = None, field: str | None = None):
        self.line_no = line_no
        self.field = field
        prefix = ""
        if line_no is not None:
            prefix += f"line {line_no}: "
        if field is not None:
            prefix += f"field {field!r}: "
        super().__init__(prefix + message)
