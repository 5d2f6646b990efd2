"""Exception taxonomy shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class GeometryError(ValueError):
    """Bad probe or grid input (non-unit direction, empty grid, ...)."""


class BandwidthError(ValueError):
    """Time profile violates the required spectral lower bound."""


class RegionError(ValueError):
    """Spectral node lies outside the admissible region."""


class AccuracyError(RuntimeError):
    """A self-reported numerical error estimate exceeds its tolerance."""
