"""Exception types shared across the package."""

from __future__ import annotations


class CsppatError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CsppatError):
    """A model object was constructed from structurally invalid data."""


class ScopeMismatch(CsppatError):
    """Two constraint labellings on different scopes were compared."""


class PartialAssignment(CsppatError):
    """An assignment queried as a solution does not cover every variable."""


class IncompatibleContext(CsppatError):
    """An operation received patterns whose contexts it cannot combine."""


class IllegalMerge(CsppatError):
    """A renaming identifies two variables that share a nontrivial constraint."""


class NotHomomorphic(CsppatError):
    """A renaming does not carry the source context into the target context."""


class IncomparableMerge(CsppatError):
    """A renaming collapses two entries whose truth values have no upper bound."""


class NotNegative(CsppatError):
    """A pattern required to be negative contains a positive entry."""


class NotFlat(CsppatError):
    """A pattern required to be flat carries ordering or value constraints."""


class NotConnected(CsppatError):
    """A pattern required to be connected has two or more components."""


class BadParameter(CsppatError):
    """A generator or catalog entry was given an out-of-range parameter."""


class BoundExceeded(CsppatError):
    """A computation was refused because its enumeration bound is too large."""


class SamplingExhausted(CsppatError):
    """A rejection sampler gave up after its maximum number of attempts."""


class ParseError(CsppatError):
    """Serialized input could not be decoded."""


class InternalInvariantViolation(CsppatError):
    """An internal consistency check failed; indicates a bug, not bad input."""
