"""Exception types shared across the package."""


class InvalidConfig(ValueError):
    """A parameter or configuration value is outside its allowed range."""


class InvalidInput(ValueError):
    """An argument is structurally unusable (empty, ragged, misaligned)."""


class DomainBug(RuntimeError):
    """A domain produced something its contract forbids, e.g. an
    out-of-bounds position or measure."""


class EmptyArchive(LookupError):
    """The archive has no occupants to sample or rank."""


class OracleTooLarge(ValueError):
    """Exact enumeration was requested beyond its feasibility limits."""
