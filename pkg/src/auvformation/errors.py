"""Exception and warning types shared across the simulator."""


class DimensionMismatch(ValueError):
    """An input vector or matrix has a shape inconsistent with the agent count."""


class NotLeaderConnected(ValueError):
    """No pinned agent, or part of the graph is unreachable from the pinned set.

    The grounded matrix L + B is only positive definite when every agent can
    reach the leader through the communication graph, so consensus tracking is
    ill-posed without this property.
    """


class NonPositiveInertia(ValueError):
    """Effective (rigid-body minus added-mass) inertia is not positive definite."""


class AttitudeSingularity(RuntimeError):
    """Pitch angle entered the guard band around the Euler-rate singularity.

    Carries the offending agent index (0-based) and simulation time when
    raised from inside a run.
    """

    def __init__(self, message, agent=None, time=None):
        super().__init__(message)
        self.agent = agent
        self.time = time


class DegenerateActivation(ValueError):
    """Fuzzy rule activations are not finite, so no basis vector exists."""


class InvalidExponents(ValueError):
    """Settling-bound exponents must satisfy 0 < gamma < 1 < iota."""


class GainViolation(UserWarning):
    """Switching gain does not dominate the declared disturbance bound."""


class SchemaError(ValueError):
    """Config document is structurally invalid (unknown key, wrong type).

    ``path`` is a JSON-pointer-style location of the offending key.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class ValidationError(ValueError):
    """Config document is well-formed but violates a model invariant."""
