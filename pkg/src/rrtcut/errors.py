class SizeCapError(ValueError):
    """Requested size exceeds an enumeration or arithmetic cap."""


class StructureError(ValueError):
    """Input is not a valid tree, fragment, or trace."""


class QuadratureError(RuntimeError):
    """Numerical integration did not reach the requested accuracy."""
