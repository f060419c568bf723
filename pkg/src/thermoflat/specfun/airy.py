"""Airy function Ai, its derivative, and its zeros.

Evaluation uses two branches.

* ``|x| <= x_switch``: the Maclaurin pair ``Ai = c1 f(x) - c2 g(x)``.  The
  series are summed in fixed-point integer arithmetic with guard bits sized to
  the cancellation (roughly ``2/3 |x|^{3/2}`` nats for x < 0 and twice that for
  x > 0), so the result keeps full relative accuracy in either mode.
* ``|x| > x_switch``: the standard large-argument expansions, truncated at the
  first term below the mode's series tolerance or at the smallest term.

Seams: ``x_switch = 9`` in native mode (measured branch disagreement below
5e-15 relative on both sides), ``x_switch = 21`` in extended mode, where the
asymptotic remainder near ``exp(-4/3 |x|^{3/2})`` must fall under 1e-50.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from functools import lru_cache

import mpmath

from ..errors import NumericError
from ..precision import Arith, Mode, arith, extended_context

X_SWITCH = {Mode.NATIVE: 9.0, Mode.EXTENDED: 21.0}

_MAX_ASYMPTOTIC_TERMS = 160


@lru_cache(maxsize=None)
def _maclaurin_constants(bits: int) -> tuple[int, int]:
    """Ai(0) and -Ai'(0) as fixed-point integers with ``bits`` fraction bits."""
    ctx = mpmath.MPContext()
    ctx.prec = bits + 32
    c1 = 1 / (ctx.cbrt(9) * ctx.gamma(ctx.mpf(2) / 3))
    c2 = 1 / (ctx.cbrt(3) * ctx.gamma(ctx.mpf(1) / 3))
    return int(ctx.nint(ctx.ldexp(c1, bits))), int(ctx.nint(ctx.ldexp(c2, bits)))


def _to_fixed(x, bits: int) -> int:
    if isinstance(x, float):
        num, den = x.as_integer_ratio()
        return (num << bits) // den
    sign, man, exp, _ = extended_context().mpf(x)._mpf_
    man = -int(man) if sign else int(man)
    shift = exp + bits
    return man << shift if shift >= 0 else man >> -shift


def _from_fixed(v: int, bits: int, ar: Arith):
    if ar.mode is Mode.NATIVE:
        return v / (1 << bits)
    return extended_context().mpf((v, -bits))


def _maclaurin(x, ar: Arith):
    xf = float(x)
    zeta = 2.0 / 3.0 * abs(xf) ** 1.5
    guard = zeta * (2.0 if xf > 0 else 1.0) / math.log(2.0)
    # round up so the constant cache stays small
    bits = ((ar.bits + int(guard) + 40) // 64 + 1) * 64
    one = 1 << bits
    X = _to_fixed(x, bits)
    negative = X < 0
    X = abs(X)
    X3 = (((X * X) >> bits) * X) >> bits

    # f, f', g, g' summed on |x| with the sign of x^3 applied per term;
    # positive integers keep truncation toward zero so the loop terminates
    f = t = one
    fp = tp = (X * X) >> (bits + 1)
    g = s = X
    gp = sp = one
    k = 1
    while t or tp or s or sp:
        t = ((t * X3) >> bits) // ((3 * k - 1) * (3 * k))
        tp = ((tp * X3) >> bits) // ((3 * k) * (3 * k + 2))
        s = ((s * X3) >> bits) // ((3 * k) * (3 * k + 1))
        sp = ((sp * X3) >> bits) // ((3 * k - 2) * (3 * k))
        if negative and k % 2:
            f, fp, g, gp = f - t, fp - tp, g - s, gp - sp
        else:
            f, fp, g, gp = f + t, fp + tp, g + s, gp + sp
        k += 1
    if negative:
        # g carries odd powers x^{3k+1}
        g = -g
    c1, c2 = _maclaurin_constants(bits)
    ai = (c1 * f - c2 * g) >> bits
    aip = (c1 * fp - c2 * gp) >> bits
    return _from_fixed(ai, bits, ar), _from_fixed(aip, bits, ar)


@lru_cache(maxsize=None)
def _asymptotic_coefficients(mode: Mode):
    ar = arith(mode)
    u = [Fraction(1)]
    v = [Fraction(1)]
    for k in range(1, _MAX_ASYMPTOTIC_TERMS):
        uk = u[-1] * Fraction((6 * k - 5) * (6 * k - 3) * (6 * k - 1), (2 * k - 1) * 216 * k)
        u.append(uk)
        v.append(-Fraction(6 * k + 1, 6 * k - 1) * uk)
    conv = []
    for uk, vk in zip(u, v):
        try:
            conv.append((ar.real(uk.numerator) / uk.denominator, ar.real(vk.numerator) / vk.denominator))
        except OverflowError:
            break
    return tuple(conv)


def _asymptotic_sums(zeta, ar: Arith, alternate: bool):
    """Partial sums of sum (+-1)^k u_k zeta^{-k} and the v analogue.

    With ``alternate`` false the four sums needed for negative arguments are
    returned instead: even/odd parts with the (-1)^k sign on the pair index.
    """
    coeffs = _asymptotic_coefficients(ar.mode)
    tol = ar.series_tol
    inv = 1 / zeta
    p = ar.real(1)
    terms_u = []
    terms_v = []
    last = None
    for k, (uk, vk) in enumerate(coeffs):
        tu = uk * p
        tv = vk * p
        mag = max(abs(tu), abs(tv))
        if last is not None and mag > last:
            break
        terms_u.append(tu)
        terms_v.append(tv)
        if k > 0 and mag < tol:
            break
        last = mag
        p *= inv
    if alternate:
        su = sum((t if k % 2 == 0 else -t) for k, t in enumerate(terms_u))
        sv = sum((t if k % 2 == 0 else -t) for k, t in enumerate(terms_v))
        return su, sv
    ue = sum((t if (k // 2) % 2 == 0 else -t) for k, t in enumerate(terms_u) if k % 2 == 0)
    uo = sum((t if (k // 2) % 2 == 0 else -t) for k, t in enumerate(terms_u) if k % 2 == 1)
    ve = sum((t if (k // 2) % 2 == 0 else -t) for k, t in enumerate(terms_v) if k % 2 == 0)
    vo = sum((t if (k // 2) % 2 == 0 else -t) for k, t in enumerate(terms_v) if k % 2 == 1)
    return ue, uo, ve, vo


def _asymptotic(x, ar: Arith):
    sqrt_pi = ar.sqrt(ar.pi)
    if x > 0:
        quarter = ar.sqrt(ar.sqrt(x))
        zeta = 2 * x * ar.sqrt(x) / 3
        su, sv = _asymptotic_sums(zeta, ar, alternate=True)
        decay = ar.exp(-zeta) if zeta < 745 or ar.mode is Mode.EXTENDED else 0.0
        ai = decay / (2 * sqrt_pi * quarter) * su
        aip = -quarter * decay / (2 * sqrt_pi) * sv
        return ai, aip
    t = -x
    quarter = ar.sqrt(ar.sqrt(t))
    zeta = 2 * t * ar.sqrt(t) / 3
    ue, uo, ve, vo = _asymptotic_sums(zeta, ar, alternate=False)
    phase = zeta - ar.pi / 4
    c = ar.cos(phase)
    s = ar.sin(phase)
    ai = (c * ue + s * uo) / (sqrt_pi * quarter)
    aip = quarter / sqrt_pi * (s * ve - c * vo)
    return ai, aip


def airy_pair(x, mode: Arith | str = "native"):
    """Return ``(Ai(x), Ai'(x))`` in the requested precision mode."""
    ar = arith(mode)
    x = ar.real(x)
    if not ar.is_finite(x):
        raise NumericError(f"Airy argument is not finite: {x}")
    if abs(x) <= X_SWITCH[ar.mode]:
        return _maclaurin(x, ar)
    return _asymptotic(x, ar)


def airy_ai(x, mode: Arith | str = "native"):
    return airy_pair(x, mode)[0]


def airy_ai_prime(x, mode: Arith | str = "native"):
    return airy_pair(x, mode)[1]


class _ZeroTable:
    """Append-only memo of Airy zeros for one precision mode."""

    def __init__(self, ar: Arith):
        self.ar = ar
        self.zeros: dict[int, object] = {}
        self.lock = threading.Lock()

    def get(self, n: int):
        value = self.zeros.get(n)
        if value is None:
            value = _refine_zero(n, self.ar)
            with self.lock:
                self.zeros.setdefault(n, value)
        return value


_TABLES = {}
_TABLES_LOCK = threading.Lock()


def _table(ar: Arith) -> _ZeroTable:
    with _TABLES_LOCK:
        table = _TABLES.get(ar.mode)
        if table is None:
            table = _TABLES[ar.mode] = _ZeroTable(ar)
    return table


def airy_zero_seed(n: int) -> float:
    return -((3 * math.pi * (4 * n - 1) / 8) ** (2.0 / 3.0))


def _refine_zero(n: int, ar: Arith):
    seed = ar.real(airy_zero_seed(n))
    half = ar.real(0.3 * math.pi / math.sqrt(-float(seed)))
    lo, hi = seed - half, seed + half
    f_lo = airy_ai(lo, ar)
    f_hi = airy_ai(hi, ar)
    widen = 0
    while f_lo * f_hi > 0:
        widen += 1
        if widen > 4:
            raise NumericError(f"no sign change bracketing Airy zero n={n}")
        half *= ar.real(1.25)
        lo, hi = seed - half, seed + half
        f_lo = airy_ai(lo, ar)
        f_hi = airy_ai(hi, ar)
    for _ in range(10):
        mid = (lo + hi) / 2
        f_mid = airy_ai(mid, ar)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    x = (lo + hi) / 2
    stop = 4 * ar.eps * abs(x)
    for _ in range(60):
        ai, aip = airy_pair(x, ar)
        dx = ai / aip
        x -= dx
        if abs(dx) <= stop:
            break
    else:
        raise NumericError(f"Newton refinement of Airy zero n={n} did not converge")
    ai, aip = airy_pair(x, ar)
    limit = 1e-12 if ar.mode is Mode.NATIVE else ar.eps * 1000
    if abs(ai) > limit * abs(aip):
        raise NumericError(f"Airy zero n={n} failed the residual check: Ai={ai}")
    return x


def airy_zero(n: int, mode: Arith | str = "native"):
    """n-th zero u_n of Ai (u_1 = -2.338...), memoized per precision mode."""
    if n < 1:
        raise ValueError("Airy zeros are indexed from 1")
    return _table(arith(mode)).get(n)


def airy_zeros(n_max: int, mode: Arith | str = "native") -> list:
    """u_1 .. u_{n_max}."""
    table = _table(arith(mode))
    return [table.get(n) for n in range(1, n_max + 1)]
