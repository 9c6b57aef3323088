"""Exception types shared across the package."""


class MapfError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(MapfError, ValueError):
    """A caller violated a documented precondition."""


class MapParseError(MapfError, ValueError):
    """A map or scenario file is malformed."""


class InvariantError(MapfError, AssertionError):
    """An internal consistency check failed; indicates a bug."""


class SolverTimeout(MapfError):
    """The wall-clock budget of a run was exhausted."""


class Unsolvable(MapfError):
    """Some agent has no path under the root constraints."""


class GenerationError(MapfError, ValueError):
    """A benchmark specification cannot be realised on its map."""
