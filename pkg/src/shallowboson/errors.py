"""Exception types raised across the package."""


class BosonError(Exception):
    """Base class for all errors raised by shallowboson."""


class SizeMismatchError(BosonError, ValueError):
    """Operands have incompatible shapes."""


class CapacityError(BosonError, ValueError):
    """Input exceeds the desk-scale cap of an exponential-time routine."""


class DomainError(BosonError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class LayoutError(BosonError, ValueError):
    """Beamsplitter layer or circuit layout is inconsistent."""


class LabelLookupError(BosonError, KeyError):
    """A requested row or column label does not exist."""


class RedundancyError(BosonError, ValueError):
    """A node cannot be removed without changing the represented permanent.

    Raised when the node still carries a column, or owns a row that appears
    nowhere else in the tree. In the latter case the represented matrix has
    an all-zero row and its permanent is 0.
    """


class ValidationError(BosonError, ValueError):
    """A tree decomposition violates one of the axioms for its graph."""

    def __init__(self, violation):
        super().__init__(str(violation))
        self.violation = violation


class OrderingError(BosonError, RuntimeError):
    """A table was requested before the tables it depends on."""


class DegenerateDistributionError(BosonError, ValueError):
    """All weights are zero, so no outcome can be drawn.

    In the samplers this signals a prefix of probability zero.
    """


class CollisionError(BosonError, ValueError):
    """A prefix repeats an output mode; the shallow sampler is collision-free."""
