"""Vectorized safeguarded Newton iteration for monotone scalar equations."""
from __future__ import annotations

import numpy as np

from .state import CorrectorFailure


def solve_decreasing(fun, dfun, lo, hi, x0, ftol, maxiter=50):
    """Root of a nonincreasing function on the bracket ``[lo, hi]``, elementwise.

    ``fun(lo) >= 0 >= fun(hi)`` must hold.  Newton steps falling outside the
    current bracket are replaced by bisection.  ``ftol`` is an absolute
    tolerance on ``|fun|`` (array or scalar).
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    x = np.clip(np.array(x0, dtype=float), lo, hi)
    ftol = np.broadcast_to(np.asarray(ftol, dtype=float), x.shape)
    for _ in range(maxiter):
        fx = fun(x)
        lo = np.where(fx > 0.0, x, lo)
        hi = np.where(fx > 0.0, hi, x)
        done = np.abs(fx) <= ftol
        width = hi - lo
        done |= width <= 4.0 * np.finfo(float).eps * np.maximum(np.abs(x), 1e-300)
        if np.all(done):
            return _polish(x, fx, dfun, lo, hi)
        dfx = dfun(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - fx / dfx
        bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        x = np.where(done, x, xn)
    fx = fun(x)
    if np.all((np.abs(fx) <= ftol) | (hi - lo <= 1e-14 * np.maximum(np.abs(x), 1.0))):
        return x
    raise CorrectorFailure(f"scalar corrector did not converge in {maxiter} iterations")


def _polish(x, fx, dfun, lo, hi):
    """One last Newton correction, kept only where it stays inside the bracket."""
    with np.errstate(divide="ignore", invalid="ignore"):
        xn = x - fx / dfun(x)
    ok = np.isfinite(xn) & (xn >= lo) & (xn <= hi)
    return np.where(ok, xn, x)


def bracket_upper(fun, lo, start, maxdoubling=200):
    """Grow ``start`` (elementwise, doubling the distance from ``lo``) until ``fun < 0``."""
    lo = np.array(lo, dtype=float)
    hi = np.array(start, dtype=float)
    step = np.maximum(hi - lo, 1e-300)
    for _ in range(maxdoubling):
        neg = fun(hi) < 0.0
        if np.all(neg):
            return hi
        step = np.where(neg, step, 2.0 * step)
        hi = np.where(neg, hi, lo + step)
    raise CorrectorFailure("could not bracket the plastic multiplier")
