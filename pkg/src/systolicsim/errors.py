"""Exception hierarchy shared across the simulator.

Each class maps to a distinct CLI exit code (see cli.EXIT_CODES).
"""


class ConfigError(ValueError):
    """Bad architecture config: missing key, illegal value, overlapping regions."""


class TopologyError(ValueError):
    """Bad topology file or layer description."""


class SimulationError(RuntimeError):
    """A layer could not be simulated with the given architecture."""


class WorkingSetUnderflow(SimulationError):
    """A single cycle demands more distinct operand bytes than one buffer holds."""
