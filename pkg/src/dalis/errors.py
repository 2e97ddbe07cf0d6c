"""Exception types raised across the package."""


class DalisError(Exception):
    pass


class InvalidGeometryError(DalisError, ValueError):
    """Two nodes share coordinates, or a distance is outside the model's domain."""


class DegenerateGeometryError(InvalidGeometryError):
    """Neighbor pair too close for a path-loss exponent estimate (d <= d0)."""


class NoDataError(DalisError, ValueError):
    """An aggregate was requested over an empty collection."""


class InsufficientAnchorsError(DalisError, ValueError):
    pass


class DegenerateAnchorsError(DalisError, ValueError):
    """Anchor positions are (numerically) collinear."""


class EncodingRangeError(DalisError, ValueError):
    pass


class MalformedBeaconError(DalisError, ValueError):
    pass


class ConfigError(DalisError, ValueError):
    pass


class InvalidParameterError(DalisError, ValueError):
    """A model parameter is outside its domain (e.g. a non-positive PLE)."""
