"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Base class for geometric consistency failures."""


class TorsionError(GeometryError):
    """A connection that must be torsion-free is not."""


class ConventionError(GeometryError):
    """Two independent routes to the same tensor disagree.

    Raised when a dual-route consistency check (generic bracket value vs
    structure closed form, or a defining equation vs its candidate
    solution) misses its tolerance; this always indicates a sign or index
    convention bug, never legitimate numerical noise.
    """


class UnsupportedStructureError(GeometryError):
    """Structure/dimension combination outside the supported range."""


class DegenerateMetricError(GeometryError):
    """The assembled metric is singular at an evaluation point."""


class ScenarioError(ValueError):
    """A scenario file is malformed or internally inconsistent."""
