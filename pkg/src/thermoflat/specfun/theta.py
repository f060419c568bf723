"""Jacobi theta function theta_3 for real nome."""

from __future__ import annotations

from ..errors import DomainError
from ..precision import Arith, arith


def theta3(z, q, mode: Arith | str = "native"):
    """theta_3(z, q) = 1 + 2 sum_{n>=1} q^{n^2} cos(2 n z) for 0 <= q < 1.

    Summation stops once ``2 q^{n^2}`` drops below ``10 * eps`` times the
    running sum.  The bound uses the full term magnitude, not the cosine-weighted
    term, so a vanishing cosine cannot stop the loop early.
    """
    ar = arith(mode)
    z = ar.real(z)
    q = ar.real(q)
    if not 0 <= q < 1:
        raise DomainError(f"theta3 needs 0 <= q < 1, got q={q}")
    if q == 0:
        return ar.real(1)
    total = ar.real(1)
    tol = ar.series_tol
    tiny = ar.eps**3
    n = 1
    # q^{n^2} built incrementally: q^{(n+1)^2} = q^{n^2} * q^{2n+1}
    qn2 = q
    step = q**3
    while True:
        bound = 2 * qn2
        total += bound * ar.cos(2 * n * z)
        if bound <= tol * abs(total) or bound < tiny:
            break
        qn2 *= step
        step *= q * q
        n += 1
    return total
