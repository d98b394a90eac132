"""Exception hierarchy shared by every subsystem.

The CLI prints ``type(err).__name__`` on failure, so class names double as the
structured error identifiers.
"""

from __future__ import annotations


class HybridLedgerError(Exception):
    """Base class for all errors raised by this package."""


# crypto


class DuplicateScheme(HybridLedgerError):
    pass


class UnknownScheme(HybridLedgerError):
    pass


class KeyMismatch(HybridLedgerError):
    pass


# encoding / identity


class MalformedEncoding(HybridLedgerError):
    """Raised by every decoder; ``offset`` is the first byte that violated the format."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class SchemeMismatch(HybridLedgerError):
    pass


# ledger pipeline


class InvalidTransfer(HybridLedgerError):
    pass


class BadClientSignature(HybridLedgerError):
    pass


class InsufficientFunds(HybridLedgerError):
    pass


class PayloadTooLarge(HybridLedgerError):
    pass


class BadEndorsement(HybridLedgerError):
    pass


class EmptyBatch(HybridLedgerError):
    pass


class BadOrdererSignature(HybridLedgerError):
    pass


class ChainBreak(HybridLedgerError):
    pass


# migration


class PreconditionViolated(HybridLedgerError):
    pass


class RollbackForbidden(HybridLedgerError):
    pass


# benchmark


class ConfigInvalid(HybridLedgerError):
    pass


class ShapeMismatch(HybridLedgerError):
    pass


class IoFailure(HybridLedgerError):
    pass


# command line


class VerificationFailed(HybridLedgerError):
    """A certificate, ledger or migration check completed and said no."""
