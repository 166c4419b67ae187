"""Exception types shared across the package."""


class RejectedInputError(ValueError):
    """Input is geometrically or physically degenerate (e.g. a source on a wall)."""


class ConfigurationError(ValueError):
    """A configuration value or combination of values is unusable."""


class DegenerateGeometryError(RuntimeError):
    """Anchor geometry cannot support the requested solve (e.g. parallel bearings)."""


class UndecidableError(RuntimeError):
    """Not enough usable data to make the requested decision."""


class ExtractionError(RuntimeError):
    """The path extractor returned nothing where at least one path was required."""


class NumericalError(ArithmeticError):
    """A numerical routine produced a non-finite intermediate value."""
