"""Exception types shared across the toolkit.

Exit-code mapping used by the CLI: bad flags / argument values exit 1
(plain ValueError / KeyError), malformed or unusable input data exits 2
(DataFormatError and friends), numerical failures exit 3.
"""


class CrosslexError(Exception):
    """Base class for toolkit errors."""

    exit_code = 2


class DataFormatError(CrosslexError):
    """Input bytes or layout violate an expected file format."""

    exit_code = 2


class TrainingError(CrosslexError):
    """Embedding training cannot proceed (e.g. empty corpus)."""

    exit_code = 2


class AlignmentError(CrosslexError):
    """Alignment cannot proceed (e.g. empty training lexicon)."""

    exit_code = 2


class EvaluationError(CrosslexError):
    """Retrieval evaluation cannot proceed."""

    exit_code = 2


class NumericalError(CrosslexError):
    """Non-finite values or divergence during optimization."""

    exit_code = 3
