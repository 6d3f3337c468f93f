"""Exact dyadic structure, maximal operators and weight constants on the infinite torus."""

from .basis import CubeSpec, cube_region, dyadic_cubes, fundamental_domain, locate, nonfree_count, side_exponent
from .errors import CapExceeded, ToruslabError, ValidationError
from .exact import PowerProduct
from .maximal import BasisSpec, maximal_function, weak_type_quotient_q
from .simple import SimpleFunction, WeightFn
from .torus import Arc, Box, Point, Region

__version__ = "0.1.0"

__all__ = [
    "Arc", "BasisSpec", "Box", "CapExceeded", "CubeSpec", "Point", "PowerProduct", "Region",
    "SimpleFunction", "ToruslabError", "ValidationError", "WeightFn", "cube_region", "dyadic_cubes",
    "fundamental_domain", "locate", "maximal_function", "nonfree_count", "side_exponent",
    "weak_type_quotient_q",
]
