"""Error taxonomy shared by every module.

Each error carries the HTTP status the API layer maps it to, so handlers
stay thin: they catch AnnoforgeError and translate uniformly.
"""

from __future__ import annotations


class AnnoforgeError(Exception):
    http_status = 422

    @property
    def code(self) -> str:
        return type(self).__name__


# --- geometry ---------------------------------------------------------------

class DegeneratePolygon(AnnoforgeError):
    pass


class GridMismatch(AnnoforgeError):
    pass


class SingularTransform(AnnoforgeError):
    pass


class NotConvex(AnnoforgeError):
    pass


# --- lookups ----------------------------------------------------------------

class UnknownImage(AnnoforgeError):
    http_status = 404


class UnknownLabel(AnnoforgeError):
    http_status = 404


class UnknownAnnotation(AnnoforgeError):
    http_status = 404


class UnknownFolder(AnnoforgeError):
    http_status = 404


class UnknownNode(AnnoforgeError):
    http_status = 404


class UnknownToken(AnnoforgeError):
    http_status = 404


class UnknownModel(AnnoforgeError):
    http_status = 404


class UnknownJob(AnnoforgeError):
    http_status = 404


class UnknownClass(AnnoforgeError):
    http_status = 404


# --- state machines / locking ------------------------------------------------

class IllegalTransition(AnnoforgeError):
    http_status = 409


class IllegalState(AnnoforgeError):
    http_status = 409


class LeaseExpired(AnnoforgeError):
    http_status = 409


class LockExpired(AnnoforgeError):
    http_status = 409


class DuplicateModel(AnnoforgeError):
    http_status = 409


# --- validation ----------------------------------------------------------------

class ValidationError(AnnoforgeError):
    pass


class OutOfBounds(AnnoforgeError):
    pass


class OutOfRange(AnnoforgeError):
    pass


class MissingConfigKey(AnnoforgeError):
    pass


class EmptySelection(AnnoforgeError):
    pass


class InsufficientData(AnnoforgeError):
    pass


class NoAcceptedAnnotations(AnnoforgeError):
    pass


class NoPredictions(AnnoforgeError):
    http_status = 404


class NoData(AnnoforgeError):
    http_status = 404


class UnsupportedFormat(AnnoforgeError):
    pass


class SchemaViolation(AnnoforgeError):
    pass


class MixedImages(AnnoforgeError):
    pass


# --- server / persistence -----------------------------------------------------

class ConfigError(AnnoforgeError):
    http_status = 500


class DataRootCorrupt(AnnoforgeError):
    http_status = 500


class IoFailure(AnnoforgeError):
    http_status = 500
