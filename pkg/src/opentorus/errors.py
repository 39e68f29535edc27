"""Exception types raised by the library.

Every precondition failure maps to one of these so callers can tell a
bad input apart from a numerical-budget problem.
"""


class OpenTorusError(Exception):
    """Base class for all library errors."""


class NotUnimodular(OpenTorusError):
    """Defining matrix does not have determinant +1 or -1."""


class NotHyperbolic(OpenTorusError):
    """Defining matrix has an eigenvalue on (or numerically at) the unit circle."""


class ComplexSpectrumUnsupported(OpenTorusError):
    """Expanding eigenvalues are not real and simple; not supported."""


class DenominatorOverflow(OpenTorusError):
    """Exact-mode arithmetic would exceed the configured integer width."""


class RadiusTooLarge(OpenTorusError):
    """Ball radius exceeds the embedding bound for the torus."""


class ThickeningSwallowsHole(OpenTorusError):
    """Thickening amount is at least the hole radius."""


class GridTooCoarse(OpenTorusError):
    """Cell size too large relative to the geometry it must resolve."""


class OracleTooLarge(OpenTorusError):
    """Exact cover oracle invoked on more cells than its budget allows."""


class StencilOutOfRange(OpenTorusError):
    """Finite-difference stencil does not fit inside the sampled margin."""


class SupportDoesNotEmbed(OpenTorusError):
    """Mollifier support is too large to embed in the torus."""


class TooFewPointsAboveFloor(OpenTorusError):
    """Not enough data points above the noise floor to fit a decay rate."""


class DegenerateScales(OpenTorusError):
    """Box counts carry no scale information (constant or empty)."""


class ConfigError(OpenTorusError):
    """Experiment configuration failed validation; names the bad field."""

    def __init__(self, field_name: str, message: str):
        self.field_name = field_name
        super().__init__(f"{field_name}: {message}")
