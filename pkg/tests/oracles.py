"""Independent oracles used by the test suite.

These deliberately avoid the library's own quadrature/assembly code paths:
the adaptive integrator refines boxes wherever a coarse and a fine Gauss
estimate disagree, and its results are accepted only after a Richardson-style
agreement check between two tolerance levels.
"""

from itertools import product

import numpy as np


def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def box_gauss(f, lo, hi, n):
    """Plain tensor Gauss estimate of the integral of f over a box."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    xg, wg = _gauss(n)
    axes = [lo[m] + (hi[m] - lo[m]) * (xg + 1) / 2 for m in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    w = np.ones(1)
    for m in range(d):
        w = np.multiply.outer(w, wg * (hi[m] - lo[m]) / 2).ravel()
    return float(np.asarray(f(pts)) @ w)


def adaptive_integral(f, lo, hi, tol=1e-13, n=8):
    """Adaptive-subdivision integral of f over the box [lo, hi].

    Splits any box whose n-point and (n+4)-point tensor Gauss estimates
    differ by more than the local tolerance.
    """
    total = 0.0
    stack = [(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))]
    d = len(lo)
    while stack:
        blo, bhi = stack.pop()
        coarse = box_gauss(f, blo, bhi, n)
        fine = box_gauss(f, blo, bhi, n + 4)
        if abs(coarse - fine) <= tol:
            total += fine
        else:
            mid = 0.5 * (blo + bhi)
            for s in product((0, 1), repeat=d):
                s = np.array(s, dtype=bool)
                stack.append((np.where(s, mid, blo), np.where(s, bhi, mid)))
    return total


def checked_integral(f, lo, hi, tol=1e-12):
    """Adaptive integral with a Richardson consistency check between levels."""
    coarse = adaptive_integral(f, lo, hi, tol=tol)
    fine = adaptive_integral(f, lo, hi, tol=tol / 10)
    if abs(coarse - fine) > 50 * tol * max(1.0, abs(fine)):
        raise AssertionError(
            f"adaptive oracle failed its Richardson check: {coarse} vs {fine}"
        )
    return fine


def radial_power(alpha):
    """The integrand r^-alpha as a vectorized callable."""

    def f(pts):
        r = np.sqrt(np.sum(pts * pts, axis=1))
        return r ** (-alpha)

    return f
