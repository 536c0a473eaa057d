"""Special functions used by the oracles.

Production code uses :func:`scipy.special.gammainc` for the regularized lower
incomplete gamma. :func:`gammainc_reference` is an independent series /
continued-fraction implementation kept as a cross-check.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sps

from .errors import NumericalError

EULER_GAMMA = 0.5772156649015329


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma P(a, x), vectorized."""
    return sps.gammainc(a, x)


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    return sps.gammaincc(a, x)


def _log_prefactor(a, x):
    # log(x^a e^{-x} / Gamma(a))
    return a * math.log(x) - x - math.lgamma(a)


def _series(a, x, tol):
    term = 1.0 / a
    total = term
    n = 0
    while True:
        n += 1
        term *= x / (a + n)
        total += term
        if abs(term) < tol * abs(total):
            break
        if n > 100000:
            raise NumericalError(f"incomplete gamma series did not converge at a={a}, x={x}")
    return total * math.exp(_log_prefactor(a, x))


def _continued_fraction(a, x, tol):
    # modified Lentz evaluation of the Legendre continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 100000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h * math.exp(_log_prefactor(a, x))
    raise NumericalError(f"incomplete gamma continued fraction did not converge at a={a}, x={x}")


def gammainc_reference(a: float, x: float, tol: float = 1e-15) -> float:
    """P(a, x) by the series for x < a + 1 and the continued fraction otherwise."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, _series(a, x, tol))
    return max(0.0, 1.0 - _continued_fraction(a, x, tol))


def expint_e1(x):
    """Exponential integral E1 for x > 0."""
    return sps.exp1(x)


_EIN_COEF = np.array([(-1) ** (n + 1) / (n * math.factorial(n)) for n in range(1, 15)])


def ein(x):
    """Entire function Ein(x) = E1(x) + log(x) + gamma, stable near 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 0.5
    xs = x[small]
    # Ein(x) = sum_{n>=1} (-1)^{n+1} x^n / (n n!), Horner form
    acc = np.full_like(xs, _EIN_COEF[-1])
    for c in _EIN_COEF[-2::-1]:
        acc = acc * xs + c
    out[small] = acc * xs
    xl = x[~small]
    out[~small] = sps.exp1(xl) + np.log(xl) + EULER_GAMMA
    return out if out.ndim else float(out)


def j0_minus_one(x):
    """J0(x) - 1 without cancellation for small x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.5
    xs2 = (x[small] / 2) ** 2
    acc = np.zeros_like(xs2)
    term = np.ones_like(xs2)
    for m in range(1, 12):
        term = -term * xs2 / (m * m)
        acc += term
    out[small] = acc
    out[~small] = sps.j0(x[~small]) - 1.0
    return out if out.ndim else float(out)


def dilog_exp(t):
    """Li2(exp(-2 t)) for t >= 0 via scipy's Spence function."""
    w = np.exp(-2.0 * np.asarray(t, dtype=float))
    return sps.spence(1.0 - w)
