"""Exception hierarchy.

Two families matter for the CLI exit codes: ``ScenarioError`` (bad
configuration, rejected before any integration starts, exit code 2) and
``GuardError`` (a numerical guard tripped mid-run, exit code 3).
Every message names the violated invariant or assumption.
"""


class UuvSimError(Exception):
    """Base class for all library errors."""


class ScenarioError(UuvSimError):
    """Scenario/configuration rejected at load or validation time."""


class DisconnectedGraph(ScenarioError):
    """Communication graph is not connected (Assumption on topology)."""


class NoPinnedVehicle(ScenarioError):
    """No vehicle has access to the reference trajectory (all b_i = 0)."""


class MissingDelta(ScenarioError):
    """An edge with positive weight has no formation offset defined."""


class NonPositiveGain(ScenarioError):
    """A gain that must be strictly positive is zero or negative."""


class NonPositiveEffectiveMass(ScenarioError):
    """An effective mass/inertia term (m - beta) is not strictly positive."""


class IndexOutOfRange(UuvSimError, IndexError):
    """Vehicle index outside the fleet."""


class EmptyLog(UuvSimError):
    """Metric extraction requested on a log with no records."""


class GuardError(UuvSimError):
    """A runtime numerical guard fired during simulation."""


class SingularAttitude(GuardError):
    """Pitch angle too close to +-pi/2; kinematics divide by cos(theta)."""


class SingularTransform(GuardError):
    """cos(theta') * cos(psi') below margin; surge control law undefined."""


class NonFinite(GuardError):
    """A state or control component became non-finite."""


class SimAbort(GuardError):
    """Wraps a guard error with run context and the partial log.

    Attributes:
        vehicle: offending vehicle index (0-based), or None.
        t: simulation time at which the guard fired.
        state: the offending vehicle's state at that time, or None.
        partial_log: SimLog with everything recorded before the abort.
        cause: the underlying GuardError.
    """

    def __init__(self, message, *, vehicle=None, t=None, state=None,
                 partial_log=None, cause=None):
        super().__init__(message)
        self.vehicle = vehicle
        self.t = t
        self.state = state
        self.partial_log = partial_log
        self.cause = cause
