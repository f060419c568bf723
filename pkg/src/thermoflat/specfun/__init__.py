"""Special functions and quadrature used throughout the package."""

from .airy import airy_ai, airy_ai_prime, airy_pair, airy_zero, airy_zeros
from .gauss import normal_cdf, normal_ppf, normal_sf
from .hermite import hermite_h, hermite_h_log
from .quadrature import QuadratureResult, gauss_kronrod, integrate
from .theta import theta3

__all__ = [
    "airy_ai",
    "airy_ai_prime",
    "airy_pair",
    "airy_zero",
    "airy_zeros",
    "QuadratureResult",
    "hermite_h",
    "hermite_h_log",
    "gauss_kronrod",
    "integrate",
    "normal_cdf",
    "normal_ppf",
    "normal_sf",
    "theta3",
]
