"""Domain exceptions raised by the optimization library."""


class MioracleError(Exception):
    """Base class for every library error."""


class StructuralError(MioracleError):
    """Dimension mismatch or an argument outside its documented range."""


class QueryFormatError(StructuralError):
    """A query that is ill-formed for the ambient dimensions."""


class InfeasibleInstance(MioracleError):
    """The feasible region contains no mixed-integer point."""


class FiberGuardExceeded(MioracleError):
    """Too many integer fibers to enumerate."""


class LPCyclingError(MioracleError):
    """The simplex hit its pivot limit."""


class EmptyVersionSet(MioracleError):
    """Sampling found no mass left in the version polytope."""


class NoFeasibleFound(MioracleError):
    """The solver finished without recording a feasible point."""


class UnsupportedQueryClass(MioracleError):
    """The query form has no hereditary counterpart."""


class AdversaryInvariantError(MioracleError):
    """The adversary could not keep a consistent surviving instance."""


class ConstructionError(MioracleError):
    """A generated family failed its verification."""


class ContractViolation(MioracleError):
    """A wrapped strategy broke its query budget contract."""


class TiltError(MioracleError):
    """No halfspace through the point contains all known feasible points."""
