"""
Exception hierarchy for the Swallow simulator
"""


class SwallowError(Exception):
    """Base class for every error raised by the simulator"""


class InvalidArgumentError(SwallowError, ValueError):
    """An argument is outside its documented domain"""


class NotFoundError(SwallowError, KeyError):
    """A node, link or table that should exist does not"""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep messages readable
        return str(self.args[0]) if self.args else ""


class CapacityExceededError(SwallowError):
    """A machine, memory or population limit was exceeded"""


class ConfigError(SwallowError):
    """The configuration file is missing or invalid"""


class RoutingError(SwallowError):
    """A route cannot be produced"""


class TableIncompleteError(RoutingError):
    """A switch's routing table has no usable entry for a destination"""

    def __init__(self, switch: str, detail: str):
        super().__init__(f"routing table of switch {switch} is incomplete: {detail}")
        self.switch = switch


class TrafficValidationError(SwallowError):
    """Traffic was rejected before the simulation started"""


class SimulationDeadlockError(SwallowError):
    """The event queue drained while messages were still in the network"""
