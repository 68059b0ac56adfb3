"""Exception hierarchy shared across the pipeline.

Every domain error derives from :class:`ForgepipeError` and carries a stable
snake_case ``code`` (derived from the class name) that the CLI emits in its
structured JSON error output.
"""

from __future__ import annotations

import re


def _snake(name: str) -> str:
    name = name.removesuffix("Error")
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


class ForgepipeError(Exception):
    """Base class for all domain errors raised by this package."""

    @property
    def code(self) -> str:
        return _snake(type(self).__name__)


# dataio
class ParseError(ForgepipeError):
    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message if line_no is None else f"line {line_no}: {message}")
        self.line_no = line_no


class InvariantError(ForgepipeError):
    pass


class BadMagicError(ForgepipeError):
    pass


class TruncatedPayloadError(ForgepipeError):
    pass


class DimOverflowError(ForgepipeError):
    pass


class NonMonotoneFramesError(ForgepipeError):
    pass


# geometry
class NonPositiveFactorError(ForgepipeError):
    pass


class DegenerateConfigurationError(ForgepipeError):
    pass


class EmptyFrameError(ForgepipeError):
    pass


# tracking
class NoFacesDetectedError(ForgepipeError):
    pass


class BadOrderingError(ForgepipeError):
    pass


class EvenWindowError(ForgepipeError):
    pass


# sampling
class TrackTooShortError(ForgepipeError):
    pass


# losses
class DimensionMismatchError(ForgepipeError):
    pass


class SpaceMismatchError(ForgepipeError):
    pass


class EmptyPositiveSetError(ForgepipeError):
    pass


# head
class WrongModalityError(ForgepipeError):
    pass


class ScoreOutOfRangeError(ForgepipeError):
    pass


class EmptyDatasetError(ForgepipeError):
    pass


# evalmetrics
class EmptyScoresError(ForgepipeError):
    pass


class SingleClassError(ForgepipeError):
    pass


class UnknownVideoIdError(ForgepipeError):
    pass


# enrichment
class MissingSourceIdError(ForgepipeError):
    pass


class RangeBeyondStreamError(ForgepipeError):
    pass
