"""Trigonometric helpers evaluated from exactly summed arguments.

Sums such as (1 - alpha - beta - gamma)/2 can sit very close to an integer;
rounding the sum first would cost all relative accuracy of sin(pi s) there.
These helpers take the summands and reduce the integer part exactly.
"""

import math


def _reduce(terms):
    total = math.fsum(terms)
    n = round(total)
    return n, math.fsum(list(terms) + [-n])


def sinpi(terms):
    """sin(pi * sum(terms)) with the integer part removed exactly."""
    n, frac = _reduce(terms)
    v = math.sin(math.pi * frac)
    return -v if n % 2 else v


def cospi(terms):
    """cos(pi * sum(terms))."""
    return sinpi(list(terms) + [0.5])


def s_terms(alpha, beta, gamma, sa, sb, sg):
    """Summands of s = (1 + sa alpha + sb beta + sg gamma)/2 (halving is exact)."""
    return [0.5, sa * alpha / 2, sb * beta / 2, sg * gamma / 2]
