"""Exception hierarchy for perc3d.

Every error raised by the package derives from Perc3dError so callers can
catch one type.  CertificationError is special: it marks a rigorous check
that ran to completion and concluded "not certified", which the CLI maps to
exit code 2 rather than the generic operational failure code 1.
"""


class Perc3dError(Exception):
    """Base class for all perc3d errors."""


class InvalidGeometryError(Perc3dError):
    """Block or rectangle dimensions violate the geometry rules."""


class DomainError(Perc3dError):
    """An argument is outside the documented domain of an operation."""


class ContractError(Perc3dError):
    """Caller passed inconsistent objects (sample/geometry mismatch etc.)."""


class OracleRefusal(Perc3dError):
    """A brute-force oracle was asked to run above its size cap."""


class InfeasiblePlanError(Perc3dError):
    """No success threshold can meet the confidence budget at this N."""


class CertificationError(Perc3dError):
    """A rigorous certificate check failed (sign pattern, failed side)."""


class NumericError(Perc3dError):
    """A floating-point diagnostic failed to converge."""


class ConfigError(Perc3dError):
    """Experiment config file is malformed or has unknown keys."""


class RecordFormatError(Perc3dError):
    """A record file line does not parse."""


class IncompleteRunError(Perc3dError):
    """A record file lacks the finalization marker."""


class TamperError(Perc3dError):
    """Record digests disagree with the config they claim to come from."""


class SeedLedgerError(Perc3dError):
    """Requested seed range collides with a finalized run in the ledger."""
