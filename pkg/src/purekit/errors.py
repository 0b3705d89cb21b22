"""Exception hierarchy with stable, machine-readable error names.

Every error raised by this package derives from :class:`PurekitError` and
falls into one of three categories, which the CLI maps to exit codes:

* :class:`ValidationError` -> exit code 1 (bad inputs, bad configs, malformed files)
* :class:`IoFailure`       -> exit code 2 (operating-system level I/O failures)
* :class:`NumericalError`  -> exit code 3 (degenerate or non-convergent computations)

``error.name`` is the class name and is part of the public contract; external
callers (scripts, bindings) may dispatch on it.
"""

from __future__ import annotations


class PurekitError(Exception):
    """Base class for all errors raised by purekit."""

    @property
    def name(self) -> str:
        return type(self).__name__


class ValidationError(PurekitError):
    """Invalid input data, configuration, or file contents."""


class IoFailure(PurekitError):
    """Underlying operating-system I/O failure (wraps OSError)."""


class NumericalError(PurekitError):
    """A numerical routine hit a degenerate input or failed to converge."""


# --- numerical ---------------------------------------------------------------

class RankDeficient(NumericalError):
    """A column norm fell below the rank tolerance during orthonormalization."""


class NoConvergence(NumericalError):
    """Jacobi sweeps exceeded the configured cap without converging."""


class ZeroMatrix(NumericalError):
    """Operation requires a matrix with non-negligible Frobenius norm."""


# --- configuration / argument validation -------------------------------------

class InvalidConfig(ValidationError):
    """A configuration value is out of range for the target matrix."""


class InvalidK(ValidationError):
    """Requested component count exceeds min(rows, cols)."""


class TooFewRows(ValidationError):
    """Operation needs at least two rows."""


class TooFewInstances(ValidationError):
    """Operation needs at least two instances."""


class ZeroRow(ValidationError):
    """A row with (near-)zero norm cannot enter a cosine computation."""


class NotUnitDirection(ValidationError):
    """Perturbation direction must have unit norm."""


class MissingClass(ValidationError):
    """Probe fitting needs at least two distinct classes."""


# --- metric records -----------------------------------------------------------

class EmptyRecords(ValidationError):
    """Record set is empty."""


class UnknownAttack(ValidationError):
    """No records carry the requested attack name."""


class NoAttackedExamples(ValidationError):
    """No originally-correct records to aggregate for this attack."""


class EmptyList(ValidationError):
    """Aggregation over an empty list."""


class ZeroAccuracy(ValidationError):
    """Performance drop rate is undefined at zero clean accuracy."""


class InvalidRecord(ValidationError):
    """Attack record violates its field invariants."""


# --- file formats -------------------------------------------------------------

class NpyFormatError(ValidationError):
    """Malformed NPY file."""


class BadMagic(NpyFormatError):
    """File does not start with the NPY magic string."""


class UnsupportedVersion(NpyFormatError):
    """NPY format version other than 1.0 or 2.0."""


class UnsupportedDtype(NpyFormatError):
    """Only little-endian float32/float64 payloads are accepted."""


class UnsupportedOrder(NpyFormatError):
    """Fortran-ordered payloads are rejected."""


class UnsupportedShape(NpyFormatError):
    """Only 2-D, non-empty shapes are accepted."""


class UnexpectedEof(NpyFormatError):
    """File ended before the declared payload was complete."""


class NonFinite(ValidationError):
    """Input data contains NaN or Inf."""


# --- instance batches ---------------------------------------------------------

class OverlappingOffsets(ValidationError):
    """Two instances claim the same token rows."""


class GapInOffsets(ValidationError):
    """Offsets leave token rows unclaimed; they must partition the matrix."""


class OutOfRange(ValidationError):
    """An offset refers to rows outside the token matrix, or has length < 1."""


class DuplicateId(ValidationError):
    """Instance or example identifiers must be unique."""
