"""Shared quadrature helpers: vectorized panel Gauss rules, refinement,
improper-integral segment summation with divergence detection, and
polynomial extrapolation."""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


class QuadratureError(RuntimeError):
    """Raised when a quadrature fails to reach its tolerance."""


def _gl(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = leggauss(n)
    return _GL_CACHE[n]


def panel_sum(f, edges, n=16):
    """Integrate a vectorized callable over consecutive panels with an
    n-point Gauss-Legendre rule per panel."""
    x, w = _gl(n)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return float(np.dot(vals @ w, half))


def integrate_panels(f, edges, n=16):
    """Panel integral with an error estimate from comparing rule orders."""
    hi = panel_sum(f, edges, n)
    lo = panel_sum(f, edges, max(n // 2, 4))
    return hi, abs(hi - lo)


def geometric_edges(a, b, count):
    """count+1 geometrically spaced edges on [a, b], a > 0."""
    return np.geomspace(a, b, count + 1)


def linear_edges(a, b, count):
    return np.linspace(a, b, count + 1)


def integrate_refine(f, edges, rel_tol=1e-9, abs_tol=0.0, n=16, max_refine=7):
    """Refine a panel grid by halving panels until the order-comparison
    error estimate meets tolerance. Returns (value, error_estimate)."""
    edges = np.asarray(edges, dtype=float)
    for _ in range(max_refine + 1):
        val, err = integrate_panels(f, edges, n)
        if err <= max(rel_tol * abs(val), abs_tol):
            return val, err
        mids = 0.5 * (edges[:-1] + edges[1:])
        edges = np.sort(np.concatenate([edges, mids]))
    raise QuadratureError(
        f"panel refinement stalled: value={val:.6e}, err={err:.2e}, "
        f"panels={len(edges) - 1}")


def singular_lower_edges(a, b, count=40, shrink=2.0 ** -45):
    """Edges on [a, b] clustered geometrically toward `a` (integrable
    endpoint singularity). First panel is [a, a + (b-a)*shrink]."""
    w = b - a
    stub = a + w * np.geomspace(shrink, 1.0, count)
    return np.concatenate([[a], stub])


def integrate_improper_upper(f, a, first_width, rel_tol=1e-9, n=16,
                             panels_per_segment=8, max_segments=200,
                             tail_cauchy=8):
    """Integrate f on [a, inf) by summing segments of doubling width.

    Declares divergence when the last `tail_cauchy` segment increments fail
    to decay (Cauchy criterion over successive doublings).
    Returns (value, err_estimate, diverged, partials).
    """
    total = 0.0
    err = 0.0
    lo = a
    w = first_width
    increments = []
    for _ in range(max_segments):
        edges = linear_edges(lo, lo + w, panels_per_segment)
        val, e = integrate_panels(f, edges, n)
        total += val
        err += e
        increments.append(val)
        lo += w
        w *= 2.0
        if len(increments) >= 3:
            recent = increments[-3:]
            if all(abs(v) <= rel_tol * max(abs(total), 1e-300) for v in recent):
                return total, err, False, increments
        if len(increments) >= tail_cauchy:
            tail = np.abs(increments[-tail_cauchy:])
            if np.all(tail[1:] >= 0.999 * tail[:-1]) and tail[-1] > rel_tol * abs(total):
                return np.inf, err, True, increments
    # did not settle: treat as divergent-for-practical-purposes with certificate
    if abs(increments[-1]) > rel_tol * max(abs(total), 1e-300):
        return np.inf, err, True, increments
    return total, err, False, increments


def neville(xs, ys, x0=0.0):
    """Neville polynomial extrapolation to x0.

    Returns (value, err_estimate) where the estimate is the change from the
    previous extrapolation column (i.e. dropping the highest order).
    """
    xs = np.asarray(xs, dtype=float)
    t = list(np.asarray(ys, dtype=float))
    m = len(t)
    prev = t[0]
    for k in range(1, m):
        new = [0.0] * (m - k)
        for i in range(m - k):
            new[i] = ((x0 - xs[i + k]) * t[i] + (xs[i] - x0) * t[i + 1]) / (xs[i] - xs[i + k])
        prev = t[0]
        t = new
    return t[0], abs(t[0] - prev)
