"""Small numeric helpers: exact rationals, robust logs, least squares."""
from __future__ import annotations

import math
from fractions import Fraction

from .errors import ValidationError


def parse_rational(value) -> Fraction:
    """Parse a rational from an int, Fraction, or a "p/q" / "p" string.

    Floats are rejected: exact boundary comparisons in the kernels require
    rationals to survive serialization exactly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse rational from {value!r}") from exc
    raise ValidationError(f"cannot parse rational from {value!r} (type {type(value).__name__})")


def format_rational(q: Fraction) -> str:
    return str(q)


def ceil_log2(q: Fraction) -> int:
    """Smallest integer t with 2**t >= q, computed exactly. Requires q > 0."""
    if q <= 0:
        raise ValidationError("ceil_log2 requires a positive argument")
    t = 0
    while Fraction(2) ** t < q:
        t += 1
    while Fraction(2) ** (t - 1) >= q:
        t -= 1
    return t


def floor_log2(q: Fraction) -> int:
    """Largest integer t with 2**t <= q, computed exactly. Requires q > 0."""
    if q <= 0:
        raise ValidationError("floor_log2 requires a positive argument")
    t = ceil_log2(q)
    if Fraction(2) ** t > q:
        t -= 1
    return t


def log_value(v) -> float:
    """Natural log of a positive int / Fraction / float, safe for huge ints."""
    if isinstance(v, bool):
        raise ValidationError("log_value: got a bool")
    if isinstance(v, int):
        if v <= 0:
            raise ValidationError(f"log_value: nonpositive value {v}")
        return _log_int(v)
    if isinstance(v, Fraction):
        if v <= 0:
            raise ValidationError(f"log_value: nonpositive value {v}")
        return _log_int(v.numerator) - _log_int(v.denominator)
    x = float(v)
    if x <= 0.0 or math.isnan(x):
        raise ValidationError(f"log_value: nonpositive value {v}")
    return math.log(x)


def _log_int(n: int) -> float:
    if n.bit_length() <= 900:
        return math.log(n)
    shift = n.bit_length() - 900
    return math.log(n >> shift) + shift * math.log(2.0)


def least_squares(xs, ys):
    """Plain least-squares line fit.

    Returns ``(slope, intercept, rms_residual)``. Sums use ``math.fsum``
    so reruns are bit-identical regardless of accumulation order upstream.
    """
    n = len(xs)
    if n < 2 or n != len(ys):
        raise ValidationError("least_squares needs >= 2 paired samples")
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    xbar = math.fsum(xs) / n
    ybar = math.fsum(ys) / n
    sxx = math.fsum((x - xbar) ** 2 for x in xs)
    if sxx == 0.0:
        raise ValidationError("least_squares: degenerate abscissae")
    sxy = math.fsum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    rms = math.sqrt(math.fsum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys)) / n)
    return slope, intercept, rms


def logsumexp(exponents) -> float:
    """log(sum(exp(e))) with the max factored out; terms sorted before fsum."""
    exps = list(exponents)
    if not exps:
        raise ValidationError("logsumexp of an empty sequence")
    m = max(exps)
    return m + math.log(math.fsum(sorted(math.exp(e - m) for e in exps)))


def fsum_sorted(terms) -> float:
    """Compensated sum over terms in sorted order (deterministic)."""
    return math.fsum(sorted(float(t) for t in terms))


def fmt_real(x) -> str:
    """Format a real with 12 significant digits (integers stay integral)."""
    return f"{float(x):.12g}"
