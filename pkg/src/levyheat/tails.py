"""Tail functionals of the driving noise pushed through the heat kernel.

Four decreasing tail functions govern the solution theory:

* ``tau_bar``   -- tail of the mark-to-peak measure z / s^{d/alpha},
* ``eta_bar``   -- tail of the full space-time exceedance measure,
* ``eta0_bar``  -- tail of the locally restricted exceedance measure
  (marks landing within distance 1/2),
* ``eta_a_bar`` -- tail of the exceedance measure relative to a bounded
  region A, with the kernel evaluated at the distance to A.

``tau_bar`` has a closed decomposition into partial moments.  ``eta_bar``
reduces, for pure power-tail marks, to one-dimensional cumulative integrals
of the inverse profile; the other two are two-dimensional quadratures with
documented spatial truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._quad import integrate_panels
from .kernel import OMEGA_D, get_kernel
from .levy import HypothesisError, MeasureError, ModelConfig, require

# volume of the unit ball in R^d
KAPPA_D = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}

CURVE_KINDS = ("Tau", "Eta", "Eta0", "EtaA")


class NumericsError(RuntimeError):
    """A quadrature failed to meet its accuracy budget."""


# ----------------------------------------------------------------------
# bounded evaluation regions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RegionA:
    """Bounded region: ball (center, radius) or axis box (lo, hi)."""

    shape: str
    center: tuple = ()
    radius: float = 0.0
    lo: tuple = ()
    hi: tuple = ()

    @classmethod
    def ball(cls, center, radius):
        center = tuple(float(c) for c in np.atleast_1d(center))
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        return cls("Ball", center=center, radius=float(radius))

    @classmethod
    def box(cls, lo, hi):
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        if len(lo) != len(hi) or any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("box needs lo < hi per coordinate")
        return cls("Box", lo=lo, hi=hi)

    @property
    def dim(self):
        return len(self.center) if self.shape == "Ball" else len(self.lo)

    def volume(self):
        """Volume of the closure."""
        if self.shape == "Ball":
            return KAPPA_D[self.dim] * self.radius ** self.dim
        return float(np.prod([h - l for l, h in zip(self.lo, self.hi)]))

    def shell_density(self, u):
        """d/du of the volume of {y : dist(y, A) <= u} (Steiner formula)."""
        u = np.asarray(u, dtype=float)
        d = self.dim
        if self.shape == "Ball":
            return d * KAPPA_D[d] * (self.radius + u) ** (d - 1)
        sides = np.array([h - l for l, h in zip(self.lo, self.hi)])
        out = np.zeros_like(u)
        for k in range(1, d + 1):
            out = out + _elem_sym(sides, d - k) * KAPPA_D[k] * k * u ** (k - 1)
        return out

    def distance(self, y):
        """Euclidean distance from points y (..., d) to the closure."""
        y = np.asarray(y, dtype=float)
        if self.dim == 1 and (y.ndim == 0 or y.shape[-1:] != (1,)):
            y = y[..., None]
        if self.shape == "Ball":
            c = np.asarray(self.center)
            return np.maximum(np.sqrt(np.sum((y - c) ** 2, axis=-1)) - self.radius, 0.0)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        gap = np.maximum(np.maximum(lo - y, y - hi), 0.0)
        return np.sqrt(np.sum(gap ** 2, axis=-1))

    def contains(self, y):
        return self.distance(y) == 0.0

    def describe(self):
        if self.shape == "Ball":
            return f"Ball(center={list(self.center)}, radius={self.radius})"
        return f"Box(lo={list(self.lo)}, hi={list(self.hi)})"


def _elem_sym(vals, k):
    """Elementary symmetric polynomial e_k."""
    from itertools import combinations
    if k == 0:
        return 1.0
    return float(sum(np.prod(c) for c in combinations(vals, k)))


# ----------------------------------------------------------------------
# tau
# ----------------------------------------------------------------------

def tau_bar(model: ModelConfig, r, check=True):
    """Tail of the mark-to-peak measure at level r > 0.

    Decomposes exactly into a truncated moment plus a tail term.
    """
    if check:
        require(model, "TauFinite")
    d, alpha, t = model.d, model.alpha, model.t
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr <= 0):
        raise ValueError("level r must be positive")
    out = np.empty_like(r_arr)
    for i, rv in enumerate(r_arr):
        cut = rv * t ** (d / alpha)
        mom = model.levy.partial_moment(alpha / d, 0.0, cut)
        out[i] = rv ** (-alpha / d) * mom + t * float(model.levy.tail(cut))
    return float(out[0]) if np.asarray(r).ndim == 0 else out


# ----------------------------------------------------------------------
# eta: engine with cumulative inverse-profile integrals for power tails
# ----------------------------------------------------------------------

class _EtaEngine:
    """Evaluates eta_bar(r) = pref * r^{-(1+alpha/d)} * J(t^{d/alpha} r).

    For a unit-floor power tail (density beta z^{-1-beta} on (1, inf)) the
    inner mark integral collapses to cumulative integrals of
    phi(w) = g_inv(w)^d, precomputed once on a log grid.
    """

    def __init__(self, model, factor=1):
        self.model = model
        self.kernel = get_kernel(model.d, model.alpha)
        d, alpha = model.d, model.alpha
        # exceedance sets are balls of radius H2: their volume carries
        # kappa_d = omega_d / d (the two coincide only for d = 1)
        self.pref = alpha * KAPPA_D[d] / d
        self.exp_r = 1.0 + alpha / d
        lv = model.levy
        if lv.family_tag != "ParetoTail":
            raise MeasureError("fast eta engine needs the unit-floor power tail")
        self.beta = lv.params["beta"]
        k = self.kernel
        self.M = k.peak
        self.w_tail = float(k.g_eval(k.r_switch))
        self.pow_inv = d / (d + alpha)  # phi(w) ~ (c_tail/w)^{d/(d+alpha)}
        self.c_phi = k.c_tail ** self.pow_inv
        n_grid = 360 * factor
        self._build_tables(n_grid)

    def _phi(self, w):
        return self.kernel.g_inv(w) ** self.kernel.d

    def _build_tables(self, n_grid):
        beta, d, alpha = self.beta, self.model.d, self.model.alpha
        a_d = alpha / d
        # G(x) = int_0^x phi(w) w^{beta-1} dw; below w_tail phi is an exact power
        p0 = beta - self.pow_inv
        if p0 <= 0:
            raise HypothesisError("eta engine needs beta > d/(d+alpha)")
        w = np.geomspace(self.w_tail, self.M, n_grid)
        # per-segment integrals of phi(w) w^{beta-1}
        segs, errs = _segment_integrals(lambda u: self._phi(u) * u ** (beta - 1.0), w)
        g_head = self.c_phi * self.w_tail ** p0 / p0
        G = g_head + np.concatenate([[0.0], np.cumsum(segs)])
        self._G = PchipInterpolator(np.log(w), G, extrapolate=False)
        self._G_M = float(G[-1])
        self._g_err = float(np.sum(errs)) + 1e-12 * g_head

        # J_inner(x) = int_0^x u^{alpha/d - beta} G(u) du on (0, M]
        q0 = 1.0 + a_d - self.pow_inv  # exponent of the closed head
        head_j = self.c_phi / p0 * self.w_tail ** q0 / q0
        x = np.geomspace(self.w_tail, self.M, n_grid)
        gfun = lambda u: np.where(u <= self.w_tail,
                                  self.c_phi * u ** p0 / p0,
                                  self._G(np.log(np.clip(u, self.w_tail, self.M))))
        segs_j, errs_j = _segment_integrals(
            lambda u: u ** (a_d - beta) * gfun(u), x)
        J = head_j + np.concatenate([[0.0], np.cumsum(segs_j)])
        self._J = PchipInterpolator(np.log(x), J, extrapolate=False)
        self._J_M = float(J[-1])
        self._j_err = float(np.sum(errs_j)) + self._g_err

    def _G_eval(self, u):
        if u <= self.w_tail:
            return self.c_phi * u ** (self.beta - self.pow_inv) / (self.beta - self.pow_inv)
        return float(self._G(math.log(min(u, self.M))))

    def _J_inner(self, x):
        """int_0^x u^{alpha/d-beta} G(u) du for x <= M."""
        a_d = self.model.alpha / self.model.d
        if x <= self.w_tail:
            q0 = 1.0 + a_d - self.pow_inv
            p0 = self.beta - self.pow_inv
            return self.c_phi / p0 * x ** q0 / q0
        return float(self._J(math.log(min(x, self.M))))

    def _power_tail_piece(self, upper):
        """int_M^upper u^{alpha/d - beta} du (upper > M)."""
        e = self.model.alpha / self.model.d - self.beta + 1.0
        if e == 0.0:
            return math.log(upper / self.M)
        return (upper ** e - self.M ** e) / e

    def j_total(self, big_u):
        """J(U) = int_0^U u^{alpha/d} F(u) du with the beta prefactor."""
        if big_u <= self.M:
            return self.beta * self._J_inner(big_u)
        return self.beta * (self._J_M + self._G_M * self._power_tail_piece(big_u))

    def eta_bar(self, r):
        big_u = self.model.t ** (self.model.d / self.model.alpha) * r
        return self.pref * r ** (-self.exp_r) * self.j_total(big_u)

    def j_infinite(self):
        """int_0^inf u^{alpha/d} F(u) du; finite iff beta > 1 + alpha/d."""
        e = self.model.alpha / self.model.d - self.beta + 1.0
        if e >= 0:
            return math.inf
        return self.beta * (self._J_M - self._G_M * self.M ** e / e)

    def rel_err(self):
        return self._j_err / max(self._J_M, 1e-300)


def _segment_integrals(f, grid, n=12):
    """Gauss integrals of f over consecutive grid cells, with estimates."""
    from numpy.polynomial.legendre import leggauss
    x, w = leggauss(n)
    xl, wl = leggauss(max(n // 2, 4))
    a, b = grid[:-1], grid[1:]
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    hi = (vals @ w) * half
    pts2 = mid[:, None] + half[:, None] * xl[None, :]
    vals2 = f(pts2.ravel()).reshape(pts2.shape)
    lo = (vals2 @ wl) * half
    return hi, np.abs(hi - lo)


_ETA_CACHE: dict = {}


def _eta_engine(model, factor=2):
    key = (model.fingerprint(), factor)
    if key not in _ETA_CACHE:
        _ETA_CACHE[key] = _EtaEngine(model, factor)
    return _ETA_CACHE[key]


def _eta_bar_generic(model, r, factor=1):
    """Nested quadrature of the defining double integral (any density)."""
    k = get_kernel(model.d, model.alpha)
    d, alpha, t = model.d, model.alpha, model.t
    M = k.peak

    floor = model.levy.support_floor

    def mark_integral(u):
        # int_{(u/M, inf)} g_inv(u/z)^d lambda(dz) via w = u/z; the
        # integrand vanishes beyond w = u/floor and may kink where the
        # density changes branch (z = 1, i.e. w = u)
        def h(w):
            z = u / w
            return k.g_inv(w) ** d * np.asarray(model.levy.density(z)) * z / w
        cap = min(M, u / floor) if floor > 0 else M
        edges = np.geomspace(1e-14 * cap, cap, 96 * factor)
        if u < cap:
            edges = np.unique(np.concatenate([edges, [u]]))
        val, _ = integrate_panels(h, edges, 12)
        return val

    def s_integrand(s_arr):
        return np.array([s ** (d / alpha) * mark_integral(s ** (d / alpha) * r)
                         for s in np.atleast_1d(s_arr)])

    edges = np.concatenate([[0.0], np.geomspace(t * 1e-9, t, 96 * factor)])
    val, err = integrate_panels(s_integrand, edges, 10)
    return KAPPA_D[d] * val, KAPPA_D[d] * err


def eta_bar(model: ModelConfig, r, check=True):
    """Tail of the space-time exceedance measure at level r > 0."""
    if check:
        require(model, "EtaFinite")
    scalar = np.asarray(r).ndim == 0
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rs <= 0):
        raise ValueError("level r must be positive")
    if model.levy.family_tag == "ParetoTail":
        eng = _eta_engine(model)
        out = np.array([eng.eta_bar(rv) for rv in rs])
    else:
        out = np.array([_eta_bar_generic(model, rv)[0] for rv in rs])
    return float(out[0]) if scalar else out


# ----------------------------------------------------------------------
# eta0: locally restricted exceedances
# ----------------------------------------------------------------------

def _eta0_value(model, r, factor=1):
    k = get_kernel(model.d, model.alpha)
    d, alpha, t = model.d, model.alpha, model.t
    lv = model.levy

    def inner(s):
        scale = s ** (1.0 / alpha)
        pref = s ** (d / alpha) * r
        lo = min(1e-4 * scale, 0.25)

        def f(l):
            return np.asarray(lv.tail(pref / k.g_eval(l / scale)),
                              dtype=float) * l ** (d - 1)

        edges = np.concatenate([[0.0], np.geomspace(lo, 0.5, 112 * factor)])
        val, _ = integrate_panels(f, edges, 12)
        return val

    def outer(s_arr):
        return np.array([inner(s) for s in np.atleast_1d(s_arr)])

    edges = np.concatenate([[0.0], np.geomspace(t * 1e-8, t, 96 * factor)])
    val, _ = integrate_panels(outer, edges, 10)
    return OMEGA_D[d] * val


def eta0_bar(model: ModelConfig, r, check=True, with_err=False):
    """Tail of the distance-(1/2)-restricted exceedance measure, r >= 1."""
    if check:
        require(model, "Eta0Finite")
    scalar = np.asarray(r).ndim == 0
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    if model.d < model.alpha and np.any(rs < 1.0):
        raise HypothesisError(
            "for d < alpha the restricted functional is defined through an "
            "extra unit-level indicator; levels r >= 1 only")
    if np.any(rs <= 0):
        raise ValueError("level r must be positive")
    vals = np.array([_eta0_value(model, rv) for rv in rs])
    if with_err:
        fine = np.array([_eta0_value(model, rv, factor=2) for rv in rs])
        errs = np.abs(fine - vals)
        vals = fine
        return (float(vals[0]), float(errs[0])) if scalar else (vals, errs)
    return float(vals[0]) if scalar else vals


# ----------------------------------------------------------------------
# eta_A: exceedances relative to a bounded region
# ----------------------------------------------------------------------

def _eta_a_outside(model, region, r, factor=1):
    """Outside part: int_0^t int_0^inf tail(...) * shell'(u) du ds, with
    geometric continuation bound for the spatial truncation."""
    k = get_kernel(model.d, model.alpha)
    d, alpha, t = model.d, model.alpha, model.t
    lv = model.levy

    def inner(s):
        scale = s ** (1.0 / alpha)
        pref = s ** (d / alpha) * r

        def f(u):
            return (np.asarray(lv.tail(pref / k.g_eval(u / scale)), dtype=float)
                    * region.shell_density(u))

        u0 = max(scale, 1e-12)
        edges = np.concatenate([[0.0], np.geomspace(1e-4 * u0, u0, 24 * factor)])
        val, _ = integrate_panels(f, edges, 10)
        # expand outward by doubling blocks until negligible
        lo = u0
        blocks = []
        for _ in range(90):
            seg, _ = integrate_panels(f, np.geomspace(lo, 2 * lo, 8 * factor), 10)
            val += seg
            blocks.append(seg)
            lo *= 2.0
            if seg <= 1e-9 * max(val, 1e-300):
                break
        ratio = 0.5
        if len(blocks) >= 2 and blocks[-2] > 0:
            ratio = min(blocks[-1] / blocks[-2], 0.9)
        trunc = blocks[-1] * ratio / (1.0 - ratio) if blocks else 0.0
        return val, trunc

    def outer(s_arr):
        return np.array([inner(s)[0] for s in np.atleast_1d(s_arr)])

    edges = np.concatenate([[0.0], np.geomspace(t * 1e-8, t, 30 * factor)])
    val, err = integrate_panels(outer, edges, 8)
    _, trunc_mid = inner(t * 0.5)
    return val, err + t * trunc_mid


def eta_a_bar(model: ModelConfig, region: RegionA, r, check=True,
              with_detail=False):
    """Tail of the exceedance measure relative to region A at level r."""
    if check:
        require(model, "TauFinite")
    if region.dim != model.d:
        raise ValueError("region dimension must match the model")
    k = get_kernel(model.d, model.alpha)
    scalar = np.asarray(r).ndim == 0
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rs <= 0):
        raise ValueError("level r must be positive")
    inside = region.volume() * np.atleast_1d(
        tau_bar(model, rs / k.peak, check=False))
    vals, details = [], []
    for rv, ins in zip(rs, inside):
        out, trunc = _eta_a_outside(model, region, rv)
        vals.append(ins + out)
        details.append({"inside": float(ins), "outside": float(out),
                        "truncation_bound": float(trunc)})
    vals = np.array(vals)
    if with_detail:
        return (float(vals[0]), details[0]) if scalar else (vals, details)
    return float(vals[0]) if scalar else vals


def eta_a_limit_ratio(model: ModelConfig, region: RegionA):
    """Limit of eta_a_bar(r) / tau_bar(r) as r grows.

    Finite-moment regime: volume * g(0)^{alpha/d}.  Power-tail regime with
    exponent between d/(d+alpha) and alpha/d: volume * g(0)^beta plus an
    explicit space-time integral of g(dist/s^{1/alpha})^beta, evaluated by
    quadrature.
    """
    k = get_kernel(model.d, model.alpha)
    d, alpha, t = model.d, model.alpha, model.t
    lv = model.levy
    a_d = alpha / d
    dd = d / (d + alpha)
    try:
        beta = lv.beta
    except MeasureError:
        raise HypothesisError("limit ratio needs a power-tail family")
    finite_moment = np.isfinite(lv.partial_moment(max(a_d, dd), 1.0))
    if finite_moment or beta == a_d:
        return {"regime": "peak-dominated",
                "value": region.volume() * k.peak ** a_d}
    if not (dd < beta < a_d):
        raise HypothesisError(
            f"no limit-ratio regime for beta={beta}, alpha/d={a_d}")

    def inner(s):
        scale = s ** (1.0 / alpha)

        def f(u):
            return k.g_eval(u / scale) ** beta * region.shell_density(u)

        edges = np.concatenate([[0.0], np.geomspace(1e-5 * scale, scale, 30)])
        val, _ = integrate_panels(f, edges, 10)
        lo = scale
        for _ in range(200):
            seg, _ = integrate_panels(f, np.geomspace(lo, 2 * lo, 10), 10)
            val += seg
            lo *= 2.0
            if seg <= 1e-10 * val:
                break
        return val * s ** (-d * beta / alpha)

    edges = np.concatenate([[0.0], np.geomspace(t * 1e-10, t, 40)])
    outer, _ = integrate_panels(
        lambda s_arr: np.array([inner(s) for s in np.atleast_1d(s_arr)]),
        edges, 8)
    coef = (1.0 - d * beta / alpha) / t ** (1.0 - d * beta / alpha)
    return {"regime": "power-tail",
            "value": region.volume() * k.peak ** beta + coef * outer}


# ----------------------------------------------------------------------
# sampled curves
# ----------------------------------------------------------------------

@dataclass
class TailCurve:
    kind: str
    r: np.ndarray
    value: np.ndarray
    err: np.ndarray
    model_fingerprint: str
    region: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        self.err = np.asarray(self.err, dtype=float)
        if np.any(self.value <= 0):
            raise NumericsError("tail curve values must be positive")
        if np.any(np.diff(self.value) > 1e-12 * self.value[:-1]):
            raise NumericsError("tail curve must be nonincreasing")
        rel = self.err / self.value
        if np.any(rel > 1e-4):
            raise NumericsError(
                f"curve error budget exceeded: max rel err {rel.max():.2e}")

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("kind,r,value,err\n")
            for r, v, e in zip(self.r, self.value, self.err):
                fh.write(f"{self.kind},{float(r)!r},{float(v)!r},{float(e)!r}\n")


def sample_curve(model: ModelConfig, kind: str, r_values, region=None):
    """Sample one of the tail functionals on a level grid."""
    if kind not in CURVE_KINDS:
        raise ValueError(f"kind must be one of {CURVE_KINDS}")
    rs = np.sort(np.asarray(r_values, dtype=float))
    meta = {}
    if kind == "Tau":
        require(model, "TauFinite")
        vals = np.atleast_1d(tau_bar(model, rs, check=False))
        errs = 1e-14 * vals
    elif kind == "Eta":
        require(model, "EtaFinite")
        if model.levy.family_tag == "ParetoTail":
            base = _eta_engine(model, 2)
            fine = _eta_engine(model, 4)
            vals = np.array([fine.eta_bar(rv) for rv in rs])
            errs = np.abs(vals - np.array([base.eta_bar(rv) for rv in rs]))
            errs = np.maximum(errs, 1e-13 * vals)
        else:
            pairs = [_eta_bar_generic(model, rv) for rv in rs]
            vals = np.array([p[0] for p in pairs])
            errs = np.array([p[1] for p in pairs])
    elif kind == "Eta0":
        require(model, "Eta0Finite")
        vals, errs = eta0_bar(model, rs, check=False, with_err=True)
    else:
        if region is None:
            raise ValueError("EtaA curves need a region")
        vals, details = eta_a_bar(model, region, rs, with_detail=True)
        errs = np.array([max(d["truncation_bound"], 1e-9 * v)
                         for d, v in zip(details, vals)])
        meta["truncation_bounds"] = [d["truncation_bound"] for d in details]
    return TailCurve(kind, rs, vals, errs, model.fingerprint(),
                     region.describe() if region is not None else None, meta)


def log_slope_profile(curve: TailCurve):
    """Centered log-log slopes of a sampled curve; needs >= 3 samples."""
    if len(curve.r) < 3:
        raise ValueError("need at least 3 samples")
    lr = np.log(curve.r)
    lv = np.log(curve.value)
    slopes = (lv[2:] - lv[:-2]) / (lr[2:] - lr[:-2])
    return np.column_stack([curve.r[1:-1], slopes])


# ----------------------------------------------------------------------
# asymptotic approximants with regime labels
# ----------------------------------------------------------------------

def asymptote(model: ModelConfig, kind: str, r):
    """Leading large-r form of a tail functional with its regime label.

    Exact-limit regimes return the genuine leading term; comparability
    regimes (value known only up to bounded constants) are labelled
    ``order`` in the result.
    """
    d, alpha, t = model.d, model.alpha, model.t
    a_d = alpha / d
    lv = model.levy
    try:
        beta = lv.beta
    except MeasureError as exc:
        raise HypothesisError(f"regime not identifiable: {exc}")
    r = float(r)
    if kind == "Tau":
        if beta > a_d:
            mom = lv.partial_moment(a_d, 0.0, math.inf)
            return {"kind": kind, "regime": "finite-moment", "type": "limit",
                    "value": r ** (-a_d) * mom}
        if beta < a_d:
            coef = alpha / (alpha - d * beta) * t ** (1.0 - d * beta / alpha)
            return {"kind": kind, "regime": "heavy", "type": "limit",
                    "value": coef * float(lv.tail(r))}
        head = lv.partial_moment(a_d, 0.0, 1.0) + float(lv.tail(1.0))
        return {"kind": kind, "regime": "log-boundary", "type": "limit",
                "value": r ** (-a_d) * (head + a_d * math.log(r))}
    if kind == "Eta":
        if beta > 1.0 + a_d:
            if lv.family_tag == "ParetoTail":
                const = _eta_engine(model).j_infinite()
            else:
                raise HypothesisError("eta asymptote constant needs the "
                                      "unit-floor power family")
            pref = alpha * KAPPA_D[d] / d
            return {"kind": kind, "regime": "finite-moment", "type": "limit",
                    "value": pref * const * r ** (-(1.0 + a_d))}
        if beta == 1.0 + a_d:
            return {"kind": kind, "regime": "log-boundary", "type": "order",
                    "value": r ** (-(1.0 + a_d)) * math.log(r)}
        if beta > d / (d + alpha):
            return {"kind": kind, "regime": "comparable-to-noise",
                    "type": "order", "value": float(lv.tail(r))}
        raise HypothesisError("eta asymptote needs beta > d/(d+alpha); the "
                              "boundary case requires a user-supplied slowly "
                              "varying integral")
    if kind == "Eta0":
        delta = min(beta, 1.0 + a_d)
        q = 1 if beta == 1.0 + a_d else 0
        val = r ** (-delta) * (math.log(r) ** q)
        return {"kind": kind, "regime": "comparable-to-eta", "type": "order",
                "value": val}
    raise ValueError("kind must be Tau, Eta or Eta0")
