"""Exception hierarchy for maassforge.

Every error raised on purpose by the library derives from ``MaassForgeError``.
Input errors additionally derive from ``ValueError`` so callers that only
know the builtin still catch them.
"""


class MaassForgeError(Exception):
    """Base class for all maassforge errors."""


class DomainError(MaassForgeError, ValueError):
    """A mathematical input is outside the supported domain."""


class ConductorError(MaassForgeError, ValueError):
    """A requested root of unity or square root does not lie in Q(zeta_K)."""


class PrecisionShortfallError(MaassForgeError):
    """A coefficient was requested beyond the certified precision of a series."""


class ConsistencyError(MaassForgeError):
    """A computed quantity violates an identity that must hold exactly.

    Raised for non-rational mock coefficients, denominators above the
    certificate, or orbit sets that fail to tile. These signal bugs, not bad
    input.
    """


class UsageError(MaassForgeError, ValueError):
    """Command line parameters are missing or inconsistent."""
