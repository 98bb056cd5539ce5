"""Number handling helpers.

Exact mode works over `fractions.Fraction` end to end.  Inputs are
accepted as strings ("0.3", "-2/7"), ints, Fractions, or floats; a float
is converted to the exact binary rational it stores, which is the only
faithful reading of a float input.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError

#: largest magnitude the compiled int64 kernels accept, with headroom
#: for the x4 intermediate sums they form.
INT64_SAFE = 2**60


def to_fraction(value) -> Fraction:
    """Parse one number into an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError("boolean is not a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {value!r} as a rational") from exc
    raise DomainError(f"unsupported number type {type(value).__name__}")


def to_fraction_vec(values, m: int | None = None) -> tuple[Fraction, ...]:
    vec = tuple(to_fraction(v) for v in values)
    if m is not None and len(vec) != m:
        raise DomainError(f"expected a vector of length {m}, got {len(vec)}")
    return vec


def as_float_vec(values) -> tuple[float, ...]:
    out = []
    for v in values:
        f = float(v)
        if not math.isfinite(f):
            raise DomainError(f"non-finite value {v!r}")
        out.append(f)
    return tuple(out)


def lcm_denoms(*groups) -> int:
    """lcm of the denominators of every Fraction in the given iterables."""
    M = 1
    for group in groups:
        for f in group:
            M = math.lcm(M, f.denominator)
    return M


def scale_all(fracs, M: int) -> tuple[int, ...]:
    """Multiply each rational by M; every result must land on an integer."""
    out = []
    for f in fracs:
        num = f.numerator * (M // f.denominator)
        out.append(num)
    return tuple(out)
