"""Exception hierarchy.

Every error carries a ``code`` (its class name) so the CLI can report it
in a machine-readable form.
"""


class GraphMCError(ValueError):
    """Base class for all validation and contract errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# graph construction / lookup
class DuplicateLabel(GraphMCError):
    pass


class UnknownEndpoint(GraphMCError):
    pass


class SelfLoop(GraphMCError):
    pass


class DuplicateEdge(GraphMCError):
    pass


class UnknownLabel(GraphMCError):
    pass


class EmptySubset(GraphMCError):
    pass


class ReservedCharacter(GraphMCError):
    pass


# distributions
class InvalidDistribution(GraphMCError):
    pass


class LabelMismatch(GraphMCError):
    pass


class InvalidK(GraphMCError):
    pass


class EmptyLowMassSet(GraphMCError):
    pass


# kernels
class NotConnected(GraphMCError):
    pass


class ZeroMass(GraphMCError):
    pass


class TooFewStates(GraphMCError):
    pass


class NotStochastic(GraphMCError):
    pass


# planning
class ConflictingOptions(GraphMCError):
    pass


class MissingSchedule(GraphMCError):
    pass


class WrongMode(GraphMCError):
    pass


class InvalidOverride(GraphMCError):
    pass


class KbarTooLarge(GraphMCError):
    pass


# simulation
class ScheduleExhausted(GraphMCError):
    pass


class UnknownState(GraphMCError):
    pass


class InfeasiblePlan(GraphMCError):
    """The target cannot be reached by any graph-consistent process."""


class InfeasibleFactor(InfeasiblePlan):
    pass
