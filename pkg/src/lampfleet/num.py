"""Small exact-arithmetic helpers shared by the simulator and reports.

Simulation outputs must be bit-identical across platforms, so anything
that feeds telemetry avoids libm floats: integers, Fractions and
Decimals only.
"""

from __future__ import annotations

import math
from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction

_HALF = Fraction(1, 2)


def iround(value: Fraction | int) -> int:
    """Round to nearest integer, ties away from zero upward (half-up)."""
    return math.floor(Fraction(value) + _HALF)


def lerp_int(x0: int, y0: int, x1: int, y1: int, x: int) -> int:
    """Integer linear interpolation with half-up rounding."""
    if x1 == x0:
        return y0
    return iround(Fraction(y0) + Fraction((y1 - y0) * (x - x0), x1 - x0))


def fraction_to_decimal_str(value: Fraction, max_places: int = 9) -> str:
    """Render a Fraction as a decimal string, exactly when it terminates.

    Non-terminating values are rounded half-up to ``max_places`` and
    trailing zeros are stripped; terminating values print exactly
    (``Fraction(6, 5)`` -> ``"1.2"``).
    """
    den = value.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    with localcontext() as ctx:
        ctx.prec = 60
        if den == 1:
            dec = Decimal(value.numerator) / Decimal(value.denominator)
        else:
            q = Decimal(1).scaleb(-max_places)
            dec = (Decimal(value.numerator) / Decimal(value.denominator)).quantize(
                q, rounding=ROUND_HALF_UP
            )
        text = format(dec.normalize(), "f")
    return "0" if text in ("-0", "0") else text
