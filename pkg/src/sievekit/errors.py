"""Exception hierarchy shared by every module."""


class SieveKitError(Exception):
    """Base class for all errors raised by sievekit."""


class DomainError(SieveKitError, ValueError):
    """An argument lies outside the range on which a formula is proved."""


class RegimeError(DomainError):
    """No explicit Mertens band applies at the requested point."""


class PreconditionError(SieveKitError, ValueError):
    """A documented precondition (table size, sieve hypothesis, ...) fails."""


class ContractError(SieveKitError, ValueError):
    """The caller violated a contract, e.g. passed an unsifted element."""


class LedgerViolation(SieveKitError):
    """A recomputed constant does not satisfy its stated direction."""

    def __init__(self, entries):
        self.entries = list(entries)
        names = ", ".join(e.name for e in self.entries)
        super().__init__(f"ledger direction violated for: {names}")


class CheckpointError(SieveKitError, OSError):
    """Reading or writing a scan checkpoint failed; the scan can be resumed."""
