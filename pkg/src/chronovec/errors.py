"""Exception hierarchy.

Everything raised deliberately by the toolkit derives from ``ChronovecError``
so callers (and the CLI) can separate data/validation failures from bugs.
"""


class ChronovecError(Exception):
    """Base class for all toolkit errors."""


class NgramParseError(ChronovecError, ValueError):
    """A corpus line could not be parsed."""

    def __init__(self, message, lineno=None, source=None):
        self.message = message
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class EmptyCorpusError(ChronovecError):
    """No records survived loading and filtering."""


class EmptyVocabularyError(ChronovecError):
    """Vocabulary thresholds removed every word."""


class PeriodError(ChronovecError, ValueError):
    """Invalid period specification or unknown period label."""


class VocabularyLookupError(ChronovecError, KeyError):
    """Word, period or (word, period) key is not present."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class TrainingDataError(ChronovecError):
    """The training pair stream is empty."""


class TrainingDivergedError(ChronovecError):
    """Loss became non-finite during training."""


class SolverError(ChronovecError):
    """An iterative solver failed to converge or diverged."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CapacityError(ChronovecError):
    """Problem size exceeds a configured safety cap."""


class AlignmentRequiredError(ChronovecError):
    """Cross-period comparison of vectors that live in unrelated spaces."""


class UndefinedCorrelationError(ChronovecError, ValueError):
    """Rank correlation is undefined (constant input)."""


class ZeroVectorError(ChronovecError, ValueError):
    """Cosine similarity requested for a zero vector."""


class ProbeWordError(ChronovecError):
    """Perturbation probe words are missing from the source period."""

    def __init__(self, words, period):
        self.words = list(words)
        self.period = period
        super().__init__(
            f"probe words absent from period {period}: {', '.join(self.words)}"
        )


class EvaluationError(ChronovecError):
    """An evaluation could not be computed (e.g. zero coverage)."""


class ConfigError(ChronovecError, ValueError):
    """Invalid or unknown configuration keys."""


class EmbeddingFormatError(ChronovecError):
    """Base class for embedding file problems."""


class VersionMismatchError(EmbeddingFormatError):
    pass


class TruncatedFileError(EmbeddingFormatError):
    pass


class DimensionMismatchError(EmbeddingFormatError):
    pass


class EmbeddingValidationError(EmbeddingFormatError):
    pass
