"""Exception hierarchy shared across the package."""


class PafparseError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(PafparseError):
    """A configuration value or combination of values is invalid."""


class TopologyError(PafparseError):
    """A part/limb topology violates its structural constraints."""


class DegenerateSegmentError(PafparseError):
    """Two endpoints coincide where a directed segment is required."""


class DimensionMismatchError(PafparseError):
    """Grids or grid stacks that must share dimensions do not."""


class MaskRegionError(PafparseError):
    """A mask rectangle falls outside the grid it applies to."""


class InstanceTooLargeError(PafparseError):
    """A problem instance exceeds the bounds of an exhaustive solver."""


class InternalConsistencyError(PafparseError):
    """An internal invariant was violated; indicates a bug, not bad input."""


class SceneGenerationError(PafparseError):
    """Random scene placement failed to satisfy its constraints."""


class FieldFileError(PafparseError):
    """A binary map/field file is malformed, truncated, or oversized."""


class SceneFormatError(PafparseError):
    """A scene or parse-result text file is malformed."""
