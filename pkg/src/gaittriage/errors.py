"""Exception types raised across the toolkit."""


class GaitTriageError(Exception):
    """Base class for all toolkit errors."""


class ParseError(GaitTriageError, ValueError):
    """A file (WAV header, model document, manifest) could not be parsed."""


class UnsupportedFormat(GaitTriageError, ValueError):
    """The file is well formed but uses an encoding we do not decode."""


class EmptyInput(GaitTriageError, ValueError):
    """Input is empty or too short for the requested operation."""


class InvalidParams(GaitTriageError, ValueError):
    pass


class InvalidInput(GaitTriageError, ValueError):
    pass


class BudgetError(GaitTriageError, RuntimeError):
    """The training time budget ran out before any candidate finished."""


class ManifestError(GaitTriageError):
    """A manifest entry could not be processed.

    The offending entry id is kept on ``entry_id`` so callers can report it.
    """

    def __init__(self, entry_id, message):
        super().__init__(f"{entry_id}: {message}")
        self.entry_id = entry_id
