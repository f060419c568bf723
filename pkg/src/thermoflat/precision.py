"""Precision policy.

Two modes exist.  ``native`` works in binary64 floats through :mod:`math`.
``extended`` works in :mod:`mpmath` numbers bound to a private context with
``EXTENDED_DPS`` significant decimal digits.  The extended context is built
once at import and never mutated afterwards, so it is safe to share between
threads.

Every module asks for an :class:`Arith` object and does its arithmetic through
it; this keeps one algorithm serving both precisions.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import Any, Callable

import mpmath

from .errors import ConfigurationError

EXTENDED_DPS = 50

#: environment variable that overrides the CLI ``--precision`` flag
PRECISION_ENV = "THERMOFLAT_PRECISION"


class Mode(str, enum.Enum):
    NATIVE = "native"
    EXTENDED = "extended"


_EXT = mpmath.MPContext()
_EXT.dps = EXTENDED_DPS


@dataclass(frozen=True)
class Arith:
    """Arithmetic namespace for one precision mode."""

    mode: Mode
    bits: int
    digits: int
    eps: Any
    pi: Any
    real: Callable[[Any], Any]
    exp: Callable[[Any], Any]
    log: Callable[[Any], Any]
    sqrt: Callable[[Any], Any]
    sin: Callable[[Any], Any]
    cos: Callable[[Any], Any]
    atanh: Callable[[Any], Any]
    expm1: Callable[[Any], Any]
    log1p: Callable[[Any], Any]

    @property
    def series_tol(self):
        """Relative term threshold shared by every truncated series."""
        return 10 * self.eps

    def is_finite(self, x) -> bool:
        if self.mode is Mode.NATIVE:
            return math.isfinite(x)
        return _EXT.isfinite(x)

    def fmt(self, x) -> str:
        """Decimal text with the mode's digit count (17 native, 40 extended)."""
        if self.mode is Mode.NATIVE:
            return format(float(x), ".17g")
        return _EXT.nstr(_EXT.mpf(x), 40, min_fixed=-5, max_fixed=5)


NATIVE = Arith(
    mode=Mode.NATIVE,
    bits=53,
    digits=15,
    eps=2.0**-52,
    pi=math.pi,
    real=float,
    exp=math.exp,
    log=math.log,
    sqrt=math.sqrt,
    sin=math.sin,
    cos=math.cos,
    atanh=math.atanh,
    expm1=math.expm1,
    log1p=math.log1p,
)

EXTENDED = Arith(
    mode=Mode.EXTENDED,
    bits=_EXT.prec,
    digits=EXTENDED_DPS,
    eps=_EXT.mpf(2) ** (1 - _EXT.prec),
    pi=+_EXT.pi,
    real=_EXT.mpf,
    exp=_EXT.exp,
    log=_EXT.log,
    sqrt=_EXT.sqrt,
    sin=_EXT.sin,
    cos=_EXT.cos,
    atanh=_EXT.atanh,
    expm1=_EXT.expm1,
    log1p=_EXT.log1p,
)


def extended_context() -> mpmath.MPContext:
    """The shared read-only mpmath context behind extended mode."""
    return _EXT


def arith(mode: Mode | str | Arith = Mode.NATIVE) -> Arith:
    if isinstance(mode, Arith):
        return mode
    try:
        mode = Mode(mode)
    except ValueError:
        raise ConfigurationError(f"unknown precision mode {mode!r}") from None
    return NATIVE if mode is Mode.NATIVE else EXTENDED


def mode_from_env(default: Mode | str) -> Mode:
    value = os.environ.get(PRECISION_ENV)
    return Mode(arith(value if value else default).mode)
