"""Numerical toolkit for torus maps in the Dehn twist class.

The lifts studied here have the form ``F = V o H o T_k`` on the plane,

    x1 = x + k y + h(y),    y1 = y + v(x1),

with ``h`` and ``v`` trigonometric polynomials (``v`` may carry a constant
drift). The package estimates vertical rotation intervals, bounds the
displacement defects and the constants derived from them, builds
finite-horizon masks of half-cylinder-confined sets, decomposes the plane
into free bricks, and assembles replayable certificates.
"""

from .constants import ConstantsReport, compute_constants, constants_for_power
from .errors import (ConfigError, DehnRotError, EmptyMaskError, FixedPointSuspected,
                     InconclusiveError, NumericalError, PreconditionError, SpecError)
from .mapmodel import MapSpec, forward, inverse, iterate_orbit, load_map_spec, parse_map_spec
from .rotation import estimate_rotation_interval, lebesgue_rotation_number

__all__ = [
    "ConfigError", "ConstantsReport", "DehnRotError", "EmptyMaskError", "FixedPointSuspected",
    "InconclusiveError", "MapSpec", "NumericalError", "PreconditionError", "SpecError",
    "compute_constants", "constants_for_power", "estimate_rotation_interval", "forward",
    "inverse", "iterate_orbit", "lebesgue_rotation_number", "load_map_spec", "parse_map_spec",
]

__version__ = "0.1.0"
