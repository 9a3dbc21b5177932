"""Exception types raised across the package."""


class TririgError(Exception):
    """Base class for all package errors."""


# graph construction / labels

class GraphError(TririgError, ValueError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class IndexOutOfRange(GraphError):
    pass


class ValueTooLarge(GraphError):
    pass


class TooLarge(GraphError):
    pass


class ParseError(GraphError):
    pass


# partition solvers

class InvalidArgs(TririgError, ValueError):
    pass


class BudgetExceeded(TririgError):
    """The search space is larger than the configured work limit."""


class SolverTimeout(TririgError):
    """A solver ran past its wall-clock budget."""


class WrongSupport(TririgError, ValueError):
    pass


class DimensionMismatch(TririgError, ValueError):
    pass


# rigidity / Henneberg steps

class TooFewNodes(TririgError, ValueError):
    pass


class InvalidNodes(TririgError, ValueError):
    pass


class MissingEdge(TririgError, ValueError):
    pass


# composition

class NotCongruent(TririgError):
    pass


class Degenerate(TririgError):
    pass


class NotRigidInput(TririgError):
    pass


class TriangleNotInPartition(TririgError):
    pass


class UnreachableSize(TririgError, ValueError):
    pass


# embedding

class DegenerateSpectrum(TririgError):
    pass


class AllDegenerate(TririgError):
    pass


# workspace

class InfeasibleConstraints(TririgError):
    pass


class DegenerateHull(TririgError):
    pass
