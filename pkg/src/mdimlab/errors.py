"""Exception taxonomy.

Three families, mapped to CLI exit codes by ``cli.main``:

* ``ValidationError``   -> exit 2 (bad inputs, caught before computation)
* ``ComputationError``  -> exit 3 (budget / horizon / instance-size failures)
* ``InvariantViolation``-> exit 4 (a hard internal invariant failed; a bug)
"""


class MdimlabError(Exception):
    """Base class for all package errors."""


class ValidationError(MdimlabError):
    pass


class ComputationError(MdimlabError):
    pass


class InvariantViolation(MdimlabError):
    pass


# -- validation errors ------------------------------------------------------

class InvalidPoint(ValidationError):
    pass


class SchemeUnsupported(ValidationError):
    pass


class WindowTooSmall(ValidationError):
    pass


class NonpositiveValue(ValidationError):
    pass


class LadderTooShort(ValidationError):
    pass


class BracketInvalid(ValidationError):
    pass


class MismatchedLadders(ValidationError):
    pass


class BasePointOutOfRange(ValidationError):
    pass


class EmptyNeighborhood(ValidationError):
    pass


class CoverIncomplete(ValidationError):
    pass


class PartitionIncomplete(ValidationError):
    pass


class MixedBoundTypes(ValidationError):
    pass


# -- computation errors -----------------------------------------------------

class HorizonExceeded(ComputationError):
    pass


class BudgetExceeded(ComputationError):
    pass


class InstanceTooLarge(ComputationError):
    pass


class PreimagesUnsupported(ComputationError):
    pass
