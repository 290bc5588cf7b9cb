"""Poisson-random-measure simulation of the mild solution and Monte Carlo
verification harness.

Atoms (s_i, y_i, z_i) are sampled inside a space-time window; every derived
quantity is a pure function of (model, window, seed, replica index).  The
replica RNG streams are counter-based (Philox keyed by a seed sequence with
the replica index as spawn key), so batches merge deterministically in any
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._quad import integrate_panels
from .kernel import OMEGA_D, get_kernel, lattice_points
from .levy import HypothesisError, ModelConfig, check_condition, require
from .tails import RegionA, eta_bar

Z95 = 1.959963984540054


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimWindow:
    """Space-time sampling window: box [-R, R]^d, small-jump cutoff, seed."""

    R: float
    delta_small: float = 0.0
    eps_atom: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.R <= 0:
            raise SimulationError("window half-width must be positive")
        if not (0.0 <= self.delta_small < 1.0):
            raise SimulationError("small-jump cutoff must lie in [0, 1)")

    def volume(self, d):
        return (2.0 * self.R) ** d


@dataclass(frozen=True)
class AtomSet:
    """Realized Poisson points inside a window, with truncation metadata."""

    s: np.ndarray
    y: np.ndarray  # shape (n, d)
    z: np.ndarray
    window: SimWindow
    replica: int
    model_fingerprint: str

    @property
    def count(self):
        return len(self.s)

    def to_csv(self, path):
        d = self.y.shape[1]
        cols = ",".join(["s"] + [f"y{i + 1}" for i in range(d)] + ["z"])
        with open(path, "w", newline="\n") as fh:
            fh.write(cols + "\n")
            for i in range(self.count):
                ys = ",".join(repr(float(v)) for v in self.y[i])
                fh.write(f"{float(self.s[i])!r},{ys},{float(self.z[i])!r}\n")


@dataclass
class MCResult:
    """Frequency estimate with Wilson interval and truncation diagnostics."""

    level: float
    successes: int
    n: int
    trunc_mass: float = 0.0
    trunc_bias: float = 0.0

    @property
    def estimate(self):
        return self.successes / self.n if self.n else math.nan

    @property
    def stderr(self):
        if self.n == 0:
            return math.nan
        p = self.estimate
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.n)

    def wilson(self):
        """95% Wilson score interval (lo, hi); always brackets the estimate."""
        n, p = self.n, self.estimate
        z2 = Z95 * Z95
        denom = 1.0 + z2 / n
        center = (p + z2 / (2 * n)) / denom
        half = Z95 * math.sqrt(p * (1.0 - p) / n + z2 / (4 * n * n)) / denom
        return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))

    def merge(self, other):
        if self.level != other.level:
            raise SimulationError("cannot merge results at different levels")
        return MCResult(self.level, self.successes + other.successes,
                        self.n + other.n,
                        max(self.trunc_mass, other.trunc_mass),
                        max(self.trunc_bias, other.trunc_bias))


# ----------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------

def _replica_generator(seed, replica):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replica),))
    return np.random.Generator(np.random.Philox(ss))


class _MarkSampler:
    """Inverse-CDF sampler for the mark law restricted to (delta, inf)."""

    def __init__(self, levy, delta):
        self.levy = levy
        self.delta = float(delta)
        self.mass = float(levy.tail(self.delta))
        if not np.isfinite(self.mass) or self.mass <= 0:
            raise SimulationError(
                f"restricted mark mass lambda(({delta}, inf)) = {self.mass!r} "
                "must be positive and finite")
        if levy.family_tag == "ParetoTail":
            self.kind = "pareto"
            self.beta = levy.params["beta"]
            self.floor = max(self.delta, 1.0)
        else:
            self.kind = "table"
            self._build_table()

    def _build_table(self):
        lo = max(self.delta, 1e-12)
        zs = np.geomspace(lo, 1e12, 4096)
        tails = np.asarray(self.levy.tail(zs), dtype=float)
        # CDF of the normalized restriction
        cdf = 1.0 - tails / self.mass
        keep = np.concatenate([[True], np.diff(cdf) > 1e-15])
        zs, cdf = zs[keep], cdf[keep]
        from scipy.interpolate import PchipInterpolator
        self._inv = PchipInterpolator(cdf, np.log(zs), extrapolate=True)
        self._cdf_hi = float(cdf[-1])
        self._z_hi = float(zs[-1])

    def sample(self, rng, n):
        u = rng.random(n)
        if self.kind == "pareto":
            return self.floor * (1.0 - u) ** (-1.0 / self.beta)
        out = np.exp(self._inv(np.minimum(u, self._cdf_hi)))
        return out


def sample_prm(model: ModelConfig, window: SimWindow, replica: int) -> AtomSet:
    """Sample the Poisson random measure restricted to the window.

    Atom count is Poisson with mean t * vol * lambda((delta, inf)); times
    and locations are uniform; marks follow the normalized restricted law.
    Fully deterministic given (window.seed, replica).
    """
    rng = _replica_generator(window.seed, replica)
    sampler = _MarkSampler(model.levy, window.delta_small)
    mean = model.t * window.volume(model.d) * sampler.mass
    n = int(rng.poisson(mean))
    s = rng.uniform(0.0, model.t, n)
    y = rng.uniform(-window.R, window.R, (n, model.d))
    z = sampler.sample(rng, n)
    return AtomSet(s, y, z, window, int(replica), model.fingerprint())


# ----------------------------------------------------------------------
# pointwise functionals of a realization
# ----------------------------------------------------------------------

_COMPENSATOR_CACHE: dict = {}


def _compensator(model, window, x):
    """Mean small-jump contribution removed in compensated mode:
    int_0^t int_window int_(delta,1] p_s(x-y) z  lambda(dz) dy ds."""
    if model.d != 1:
        raise SimulationError(
            "compensated evaluation is implemented for d = 1")
    key = (model.fingerprint(), window.R, window.delta_small, float(x))
    if key in _COMPENSATOR_CACHE:
        return _COMPENSATOR_CACHE[key]
    k = get_kernel(model.d, model.alpha)
    m1 = model.levy.partial_moment(1.0, window.delta_small, 1.0)
    if m1 == 0.0:
        return 0.0

    def f(s_arr):
        out = []
        for s in np.atleast_1d(s_arr):
            scale = s ** (1.0 / model.alpha)
            lo = (x - window.R) / scale
            hi = (x + window.R) / scale
            # mass of the standard profile on [lo, hi]
            mlo = 0.5 * k.radial_mass(abs(lo)) * np.sign(lo)
            mhi = 0.5 * k.radial_mass(abs(hi)) * np.sign(hi)
            out.append(mhi - mlo)
        return np.array(out)

    edges = np.concatenate([[0.0], np.geomspace(model.t * 1e-9, model.t, 64)])
    val, _ = integrate_panels(f, edges, 10)
    _COMPENSATOR_CACHE[key] = m1 * val
    return m1 * val


def mild_solution(model: ModelConfig, atoms: AtomSet, x, check=True):
    """Mild-solution value at point x from the realized atoms."""
    if check:
        require(model, "SolutionExists")
    k = get_kernel(model.d, model.alpha)
    x = np.asarray(x, dtype=float)
    if atoms.count:
        contrib = k.p_eval(model.t - atoms.s, x - atoms.y) * atoms.z
    else:
        contrib = np.zeros(0)
    if model.mode == "NonCompensated":
        return model.m0 * model.t + float(np.sum(contrib))
    big = atoms.z > 1.0
    comp = _compensator(model, atoms.window, float(np.atleast_1d(x)[0]))
    return (model.m * model.t + float(np.sum(contrib[~big])) - comp
            + float(np.sum(contrib[big])))


def max_atom(model: ModelConfig, atoms: AtomSet, x=None):
    """Largest single-atom contribution at the evaluation point (default 0)."""
    if atoms.count == 0:
        return 0.0
    k = get_kernel(model.d, model.alpha)
    if x is None:
        x = np.zeros(model.d)
    vals = k.p_eval(model.t - atoms.s, np.asarray(x) - atoms.y) * atoms.z
    return float(np.max(vals))


def x_a_functionals(model: ModelConfig, atoms: AtomSet, region: RegionA,
                    check=True):
    """Region-restricted peak functionals of one realization.

    Returns dict with the full sum (X_A), the above-unit-peak sum (X_A*)
    and the maximal single peak (Xbar_A) of z_i / (t - s_i)^{d/alpha} over
    atoms located in the closure of A.
    """
    if check:
        require(model, "XaConverges")
        require(model, "TauFinite")
    mask = region.distance(atoms.y) == 0.0
    vals = atoms.z[mask] / (model.t - atoms.s[mask]) ** (model.d / model.alpha)
    big = vals > 1.0
    return {
        "X_A": float(np.sum(vals)),
        "X_A_star": float(np.sum(vals[big])),
        "Xbar_A": float(np.max(vals)) if len(vals) else 0.0,
    }


@dataclass(frozen=True)
class Lattice:
    radius: float


@dataclass(frozen=True)
class Grid:
    region: tuple  # (lo, hi) per coordinate as arrays
    h: float


def sup_field(model: ModelConfig, atoms: AtomSet, domain, check=True):
    """Supremum of the mild solution over a lattice or grid domain.

    Grid suprema include the atom locations inside the region and are a
    lower bound for the continuum supremum.
    Returns (value, argmax_point).
    """
    if check:
        require(model, "SolutionExists")
    if isinstance(domain, Lattice):
        pts = lattice_points(model.d, domain.radius)
    elif isinstance(domain, Grid):
        lo = np.atleast_1d(np.asarray(domain.region[0], dtype=float))
        hi = np.atleast_1d(np.asarray(domain.region[1], dtype=float))
        axes = [np.arange(l, h + domain.h * 0.5, domain.h)
                for l, h in zip(lo, hi)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        pts = mesh.reshape(-1, model.d)
        if atoms.count:
            inside = np.all((atoms.y >= lo) & (atoms.y <= hi), axis=1)
            pts = np.concatenate([pts, atoms.y[inside]], axis=0)
    else:
        raise SimulationError("domain must be Lattice or Grid")
    if len(pts) == 0:
        raise SimulationError("empty evaluation domain")
    vals = _field_on_points(model, atoms, pts)
    i = int(np.argmax(vals))
    return float(vals[i]), pts[i]


def _field_on_points(model, atoms, pts):
    k = get_kernel(model.d, model.alpha)
    base = model.m0 * model.t if model.mode == "NonCompensated" else None
    if base is None:
        raise SimulationError("sup_field supports NonCompensated mode; "
                              "compensate marks below 1 first")
    if atoms.count == 0:
        return np.full(len(pts), base)
    out = np.empty(len(pts))
    tt = model.t - atoms.s
    for i, p in enumerate(pts):
        out[i] = base + float(np.sum(k.p_eval(tt, p - atoms.y) * atoms.z))
    return out


# ----------------------------------------------------------------------
# window sizing: exceedance mass and bias outside the window
# ----------------------------------------------------------------------

def truncation_mass(model: ModelConfig, R, threshold):
    """Mean number of exceedances of `threshold` by atoms outside radius R.

    R = 0 reproduces the full exceedance mean (an independent route to the
    eta tail).  For box windows the ball-complement value is an upper bound.
    """
    k = get_kernel(model.d, model.alpha)
    d, alpha, t = model.d, model.alpha, model.t
    lv = model.levy
    require(model, "EtaFinite")

    def inner(s):
        scale = s ** (1.0 / alpha)
        pref = s ** (d / alpha) * threshold

        def f(rho):
            with np.errstate(divide="ignore", over="ignore"):
                arg = pref / k.g_eval(rho / scale)
            return np.asarray(lv.tail(arg), dtype=float) * rho ** (d - 1)

        lo = max(R, 1e-6 * scale)
        val = 0.0
        if R < 1e-6 * scale:
            edges = np.concatenate([[R], np.geomspace(1e-6 * scale, scale, 40)])
            v, _ = integrate_panels(f, edges, 10)
            val += v
            lo = scale
        elif R < scale:
            v, _ = integrate_panels(f, np.geomspace(R, scale, 24), 10)
            val += v
            lo = scale
        for _ in range(120):
            seg, _ = integrate_panels(f, np.geomspace(lo, 2 * lo, 10), 10)
            val += seg
            lo *= 2.0
            if seg <= 1e-10 * max(val, 1e-300):
                break
        return val

    edges = np.concatenate([[0.0], np.geomspace(t * 1e-8, t, 72)])
    val, _ = integrate_panels(
        lambda ss: np.array([inner(s) for s in np.atleast_1d(ss)]), edges, 10)
    return OMEGA_D[d] * val


def truncation_bias(model: ModelConfig, R, eps):
    """Expected total solution mass from atoms outside radius R, counting
    only atoms whose individual contribution is at most eps."""
    k = get_kernel(model.d, model.alpha)
    d, alpha, t = model.d, model.alpha, model.t
    lv = model.levy
    big = check_condition(model, "EtaFinite")
    if not np.isfinite(lv.partial_moment(d / (d + alpha), 1.0)):
        raise HypothesisError("bias integral diverges: the big-jump moment "
                              "of order d/(d+alpha) is infinite",
                              big.as_json_dict())

    def inner(s):
        scale = s ** (1.0 / alpha)

        def h(rho):
            p = s ** (-d / alpha) * k.g_eval(rho / scale)
            with np.errstate(divide="ignore"):
                cap = np.where(p > 0, eps / np.maximum(p, 1e-300), np.inf)
            return p * lv.first_moment_below(cap) * rho ** (d - 1)

        lo = max(R, scale)
        val = 0.0
        if R < scale:
            edges = np.geomspace(max(R, 1e-8 * scale), scale, 24)
            if R == 0.0:
                edges = np.concatenate([[0.0], edges])
            v, _ = integrate_panels(h, edges, 8)
            val += v
        blocks = []
        for _ in range(120):
            seg, _ = integrate_panels(h, np.geomspace(lo, 2 * lo, 8), 8)
            val += seg
            blocks.append(seg)
            lo *= 2.0
            if seg <= 1e-9 * max(val, 1e-300):
                break
        return val

    edges = np.concatenate([[0.0], np.geomspace(t * 1e-8, t, 48)])
    val, _ = integrate_panels(
        lambda ss: np.array([inner(s) for s in np.atleast_1d(ss)]), edges, 8)
    return OMEGA_D[d] * val


def size_window(model: ModelConfig, r_min, seed=0, delta_small=0.0,
                eps_atom=1e-3, mass_fraction=1e-3, bias_fraction=0.01,
                r0=4.0):
    """Choose a window so that (a) the missed exceedance mass at level
    r_min is below mass_fraction of eta_bar(r_min) and (b) the missed
    small-contribution mean is below bias_fraction of the level scale.
    Both diagnostics are reported."""
    target = mass_fraction * eta_bar(model, r_min)
    bias_target = bias_fraction * r_min
    R = r0
    for _ in range(30):
        mass = truncation_mass(model, R, r_min)
        bias = truncation_bias(model, R, eps_atom)
        if mass <= target and bias <= bias_target:
            break
        R *= 2.0
    else:
        raise SimulationError("window sizing did not converge")
    window = SimWindow(R=R, delta_small=delta_small, eps_atom=eps_atom,
                       seed=seed)
    return window, {"trunc_mass": mass, "trunc_bias": bias,
                    "mass_target": target, "bias_target": bias_target}


# ----------------------------------------------------------------------
# Monte Carlo harness
# ----------------------------------------------------------------------

FUNCTIONALS = ("x", "xbar", "xbarA", "xA", "xAstar", "supgrid")

_REQUIRED = {
    "x": ("SolutionExists",),
    "xbar": ("EtaFinite",),
    "xbarA": ("TauFinite",),
    "xA": ("XaConverges",),
    "xAstar": ("TauFinite",),
    "supgrid": ("SolutionExists", "SupTailHyp", "SupTailBig"),
}


def replica_values(model: ModelConfig, window: SimWindow, functional: str,
                   n: int, region: Optional[RegionA] = None,
                   grid_h: float = None, start: int = 0):
    """Array of per-replica functional values for replicas start..start+n-1.

    Deterministic per (seed, replica index); independent of batching.
    """
    if functional not in FUNCTIONALS:
        raise SimulationError(f"unknown functional {functional!r}")
    for cond in _REQUIRED[functional]:
        require(model, cond)
    if functional in ("xbarA", "xA", "xAstar", "supgrid"):
        if region is None:
            raise SimulationError(f"functional {functional} needs a region")
        if region.shape == "Ball":
            reach = max(abs(c) for c in region.center) + region.radius
        else:
            reach = max(max(abs(v) for v in region.lo),
                        max(abs(v) for v in region.hi))
        if reach > window.R + 1e-12:
            raise SimulationError(
                f"region extends to {reach} but the window half-width is "
                f"{window.R}; atoms over part of the region would be missing")
    k = get_kernel(model.d, model.alpha)
    d = model.d
    dd = d / model.alpha
    out = np.empty(n)
    base = model.m0 * model.t if model.mode == "NonCompensated" else 0.0
    grid_pts = None
    if functional == "supgrid":
        h = grid_h if grid_h is not None else 0.05 * model.t ** (1.0 / model.alpha)
        lo = np.asarray(region.lo if region.shape == "Box"
                        else np.asarray(region.center) - region.radius)
        hi = np.asarray(region.hi if region.shape == "Box"
                        else np.asarray(region.center) + region.radius)
        axes = [np.arange(l, hh + h * 0.5, h) for l, hh in zip(lo, hi)]
        grid_pts = np.stack(np.meshgrid(*axes, indexing="ij"),
                            axis=-1).reshape(-1, d)
    for j in range(n):
        atoms = sample_prm(model, window, start + j)
        if functional == "x":
            out[j] = mild_solution(model, atoms, np.zeros(d), check=False)
        elif functional == "xbar":
            out[j] = max_atom(model, atoms)
        elif functional in ("xbarA", "xA", "xAstar"):
            vals = x_a_functionals(model, atoms, region, check=False)
            key = {"xbarA": "Xbar_A", "xA": "X_A", "xAstar": "X_A_star"}
            out[j] = vals[key[functional]]
        else:  # supgrid
            pts = grid_pts
            if atoms.count:
                inside = region.distance(atoms.y) == 0.0
                pts = np.concatenate([grid_pts, atoms.y[inside]], axis=0)
            vals = base + _peaks_matrix(k, model, atoms, pts)
            out[j] = float(np.max(vals))
    return out


def _peaks_matrix(k, model, atoms, pts):
    if atoms.count == 0:
        return np.zeros(len(pts))
    tt = model.t - atoms.s
    diff = pts[:, None, :] - atoms.y[None, :, :]  # (npts, natoms, d)
    vals = k.p_eval(tt[None, :], diff) * atoms.z[None, :]
    return np.sum(vals, axis=1)


def mc_tail(model: ModelConfig, window: SimWindow, functional: str,
            r_values, n: int, region: Optional[RegionA] = None,
            grid_h: float = None):
    """Monte Carlo exceedance frequencies at the given levels.

    Returns a list of MCResult, one per level, with shared truncation
    diagnostics computed once per run.
    """
    rs = np.atleast_1d(np.asarray(r_values, dtype=float))
    vals = replica_values(model, window, functional, n, region, grid_h)
    if not np.all(np.isfinite(vals)):
        raise SimulationError("non-finite functional value encountered")
    t_mass = truncation_mass(model, window.R, float(np.min(rs))) \
        if functional in ("x", "xbar", "supgrid") else 0.0
    t_bias = truncation_bias(model, window.R, window.eps_atom) \
        if functional in ("x", "supgrid") else 0.0
    results = []
    for r in rs:
        kcount = int(np.sum(vals > r))
        results.append(MCResult(float(r), kcount, n, t_mass, t_bias))
    return results


def char_function(model: ModelConfig, window: SimWindow, theta: float,
                  n: int):
    """Characteristic function of the solution at frequency theta.

    Returns dict with the Monte Carlo estimate, its standard error, and the
    analytic value exp(i theta m0 t + int (e^{i theta u} - 1) eta(du)),
    the latter via quadrature against the eta tail.
    """
    if model.mode != "NonCompensated":
        raise HypothesisError("characteristic comparison implemented for the "
                              "non-compensated representation")
    require(model, "SolutionExists")
    vals = replica_values(model, window, "x", n)
    mc = np.exp(1j * theta * vals)
    est = complex(np.mean(mc))
    se = math.sqrt((np.var(np.real(mc)) + np.var(np.imag(mc))) / n)
    analytic = _char_analytic(model, theta)
    return {"mc": est, "mc_stderr": se, "analytic": analytic,
            "theta": theta, "n": n}


def _char_analytic(model, theta):
    if theta == 0.0:
        return 1.0 + 0.0j
    sign = 1.0 if theta >= 0 else -1.0
    th = abs(theta)
    # int (e^{i th u} - 1) eta(du) = i th int_0^inf e^{i th u} etabar(u) du
    # (integration by parts; u etabar(u) -> 0 at both ends)
    def etab(u):
        return np.atleast_1d(eta_bar(model, u, check=False))

    # low-u part on [0, 1]: integrable etabar singularity at 0+
    edges = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, 80)])
    re_lo, _ = integrate_panels(lambda u: etab(u) * np.cos(th * u), edges, 10)
    im_lo, _ = integrate_panels(lambda u: etab(u) * np.sin(th * u), edges, 10)
    # oscillatory tail on [1, inf): cycle integration with extrapolation
    from scipy.integrate import IntegrationWarning, quad
    import warnings
    scalar_eta = lambda u: float(eta_bar(model, u, check=False))
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            re_hi, re_err = quad(scalar_eta, 1.0, np.inf, weight="cos",
                                 wvar=th, epsabs=1e-11, limlst=200)
            im_hi, im_err = quad(scalar_eta, 1.0, np.inf, weight="sin",
                                 wvar=th, epsabs=1e-11, limlst=200)
        except IntegrationWarning as exc:
            from .tails import NumericsError
            raise NumericsError(
                f"oscillatory characteristic integral did not settle: {exc}")
    total = (re_lo + re_hi) + 1j * (im_lo + im_hi)
    levy_int = 1j * th * total
    if sign < 0:
        levy_int = np.conj(levy_int)
    return complex(np.exp(1j * theta * model.m0 * model.t + levy_int))
