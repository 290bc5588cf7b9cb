"""Driving Levy measures on (0, infinity) and integrability condition checks.

Every condition the solution theory imposes reduces to partial moments
``int_(a,b] z^q |log z|^w lambda(dz)``.  The built-in families (Pareto tail,
power density) evaluate these in closed form; custom measures fall back to
adaptive quadrature with dyadic divergence detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._quad import integrate_improper_upper, integrate_refine

CONDITION_IDS = (
    "SolutionExists", "EtaFinite", "TauFinite", "SupTailHyp",
    "XaConverges", "Eta0Finite", "LatticeHyp_a", "LatticeHyp_b",
    "SupTailBig",
)

MODES = ("NonCompensated", "Compensated")


class MeasureError(ValueError):
    """Invalid Levy-measure construction or unsupported query."""


class HypothesisError(RuntimeError):
    """A mathematical hypothesis required by an operation fails."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


def _power_piece_moment(c, p, lo, hi, a, b, q, log_weight):
    """Closed-form int_{(a,b] ∩ (lo,hi]} z^q * |log z|^lw * c z^{-1-p} dz."""
    a = max(a, lo)
    b = min(b, hi)
    if b <= a:
        return 0.0
    e = q - p
    if not log_weight:
        if b == math.inf and e >= 0:
            return math.inf
        if a == 0.0 and e <= 0:
            return math.inf
        if e == 0:
            return c * math.log(b / a)
        upper = 0.0 if b == math.inf else b ** e
        lower = 0.0 if a == 0.0 else a ** e
        return c * (upper - lower) / e
    # |log z| weight: split at z = 1 where the sign of log z flips
    if a < 1.0 < b:
        return (_power_piece_moment(c, p, lo, hi, a, 1.0, q, True)
                + _power_piece_moment(c, p, lo, hi, 1.0, b, q, True))
    if b == math.inf and e >= 0:
        return math.inf
    if a == 0.0 and e <= 0:
        return math.inf

    def anti(z):
        # antiderivative of z^{e-1} log z; limits 0 at both 0+ and inf
        if z == 0.0 or z == math.inf:
            return 0.0
        if e == 0:
            return 0.5 * math.log(z) ** 2
        return z ** e * (e * math.log(z) - 1.0) / e ** 2

    sign = 1.0 if a >= 1.0 else -1.0  # |log z| = -log z below 1
    return sign * c * (anti(b) - anti(a))


class LevyMeasure:
    """Levy measure on (0, inf) described by its tail and density.

    Use the classmethods :meth:`pareto`, :meth:`power_density` or
    :meth:`custom`.
    """

    def __init__(self, family_tag, tail, density, support_floor, pieces, params):
        self.family_tag = family_tag
        self._tail = tail
        self._density = density
        self.support_floor = float(support_floor)
        # closed-form power pieces [(c, p, lo, hi)] with density c z^{-1-p}
        self._pieces = pieces
        self.params = dict(params)
        self._validate()

    # -- constructors ---------------------------------------------------

    @classmethod
    def pareto(cls, beta):
        """Tail r^-beta beyond the unit floor; density beta z^{-1-beta}."""
        beta = float(beta)
        if beta <= 0:
            raise MeasureError("beta must be positive")

        def tail(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore", over="ignore"):
                return np.where(r <= 1.0, 1.0, np.maximum(r, 1.0) ** -beta)

        def density(z):
            z = np.asarray(z, dtype=float)
            with np.errstate(divide="ignore", over="ignore"):
                return np.where(z <= 1.0, 0.0,
                                beta * np.maximum(z, 1.0) ** (-1.0 - beta))

        return cls("ParetoTail", tail, density, 1.0,
                   [(beta, beta, 1.0, math.inf)], {"beta": beta})

    @classmethod
    def power_density(cls, kappa, beta, c_small=1.0):
        """Density c_small z^{-1-kappa} below 1 and beta z^{-1-beta} above."""
        kappa, beta, c_small = float(kappa), float(beta), float(c_small)
        if not (0.0 < kappa < 2.0):
            raise MeasureError("kappa must lie in (0, 2) for a Levy measure")
        if beta <= 0 or c_small <= 0:
            raise MeasureError("beta and c_small must be positive")

        def tail(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore", over="ignore"):
                rc = np.maximum(np.minimum(r, 1.0), 1e-300)
                below = c_small * (rc ** -kappa - 1.0) / kappa  # mass on (r, 1]
                out = np.where(r >= 1.0, np.maximum(r, 1.0) ** -beta,
                               below + 1.0)
                return np.where(r <= 0.0, np.inf, out)  # infinite activity

        def density(z):
            z = np.asarray(z, dtype=float)
            return np.where(z < 1.0, c_small * z ** (-1.0 - kappa),
                            beta * z ** (-1.0 - beta))

        return cls("PowerDensity", tail, density, 0.0,
                   [(c_small, kappa, 0.0, 1.0), (beta, beta, 1.0, math.inf)],
                   {"kappa": kappa, "beta": beta, "c_small": c_small})

    @classmethod
    def custom(cls, tail, density, support_floor=0.0, params=None):
        """User-supplied measure; both the tail and the density are required
        and are cross-checked against each other at construction."""
        if tail is None or density is None:
            raise MeasureError("custom measures need both tail and density")
        return cls("Custom", tail, density, support_floor, None, params or {})

    # -- basic queries ---------------------------------------------------

    def tail(self, r):
        """lambda((r, inf))."""
        return self._tail(r)

    def density(self, z):
        if self._density is None:
            raise MeasureError("no density available")
        return self._density(z)

    @property
    def beta(self):
        """Power-tail exponent, when the family has one."""
        b = self.params.get("beta")
        if b is None:
            raise MeasureError(f"{self.family_tag} has no tail exponent")
        return b

    def first_moment_below(self, cap):
        """Vectorized int_(0, cap] z lambda(dz) (cap may be an array)."""
        cap = np.asarray(cap, dtype=float)
        if self._pieces is not None:
            out = np.zeros_like(cap)
            for (c, p, lo, hi) in self._pieces:
                top = np.clip(cap, lo, hi)
                e = 1.0 - p
                with np.errstate(invalid="ignore"):
                    if e == 0.0:
                        seg = c * np.log(np.maximum(top / lo, 1.0)) \
                            if lo > 0 else np.full_like(cap, math.inf)
                    elif lo == 0.0 and e < 0:
                        seg = np.full_like(cap, math.inf)
                    else:
                        base = lo ** e if lo > 0 else 0.0
                        seg = c * (top ** e - base) / e
                out = out + np.where(top > lo, seg, 0.0)
            return out
        flat = np.atleast_1d(cap)
        vals = np.array([self.partial_moment(1.0, 0.0, c) for c in flat])
        return vals.reshape(cap.shape) if cap.shape else float(vals[0])

    def _validate(self):
        probe = np.geomspace(1e-6, 1e9, 40)
        tv = np.asarray(self.tail(probe), dtype=float)
        if np.any(np.diff(tv) > 1e-12 * np.maximum(tv[:-1], 1.0)):
            raise MeasureError("tail must be nonincreasing")
        far, farther = float(self.tail(1e8)), float(self.tail(1e10))
        if farther > 0.95 * far and farther > 1e-300:
            raise MeasureError("tail must vanish at infinity")
        val = self.partial_moment(2.0, 0.0, 1.0) + self.partial_moment(0.0, 1.0, math.inf)
        if not np.isfinite(val):
            raise MeasureError("int (1 ^ z^2) lambda(dz) must be finite")
        if self.family_tag == "Custom":
            self._cross_check_tail()

    def _cross_check_tail(self):
        pts = np.geomspace(max(self.support_floor, 1e-3) * 1.1, 1e4, 10)
        f = lambda z: np.asarray(self.density(z), dtype=float)
        for r in pts:
            mid = max(4.0, 4.0 * r)
            edges = np.geomspace(r, mid, 64)
            if r < 1.0 < mid:
                edges = np.unique(np.concatenate([edges, [1.0]]))
            head, _ = integrate_refine(f, edges, rel_tol=1e-9, abs_tol=1e-14)
            rest, _, diverged, _ = integrate_improper_upper(
                f, mid, mid, rel_tol=1e-9)
            if diverged:
                raise MeasureError("custom density has infinite tail mass")
            stated = float(self.tail(r))
            total = head + rest
            if abs(total - stated) > 1e-5 * max(stated, 1e-12) + 1e-12:
                raise MeasureError(
                    f"custom tail/density mismatch at r={r:.4g}: "
                    f"density integral {total:.6e} vs tail {stated:.6e}")

    # -- partial moments ---------------------------------------------------

    def partial_moment(self, q, a, b=math.inf, log_weight=False,
                       force_quadrature=False):
        """int_(a,b] z^q |log z|^w lambda(dz), +inf when divergent."""
        value, _ = self.partial_moment_detail(q, a, b, log_weight,
                                              force_quadrature)
        return value

    def partial_moment_detail(self, q, a, b=math.inf, log_weight=False,
                              force_quadrature=False):
        """As :meth:`partial_moment` plus a certificate dictionary."""
        if not (0.0 <= a < b):
            raise MeasureError(f"need 0 <= a < b, got ({a}, {b})")
        a = max(a, self.support_floor)
        if b <= a:
            return 0.0, {"method": "empty-support"}
        if self._pieces is not None and not force_quadrature:
            total = 0.0
            for (c, p, lo, hi) in self._pieces:
                total += _power_piece_moment(c, p, lo, hi, a, b, q, log_weight)
            return float(total), {"method": "closed-form"}
        return self._moment_quadrature(q, a, b, log_weight)

    def _moment_quadrature(self, q, a, b, log_weight):
        if self._density is None:
            raise MeasureError("quadrature requires a density")

        def f(z):
            w = np.abs(np.log(z)) if log_weight else 1.0
            return np.asarray(self.density(z), dtype=float) * z ** q * w

        cert = {"method": "quadrature"}
        total, err = 0.0, 0.0
        mid = min(max(2.0 * a, 1.0), b)
        if mid > a:
            # dyadic descent toward the lower endpoint; the integral exists
            # iff the per-level increments decay on the way down.  The stub
            # between a and the innermost cut is never integrated directly
            # (it may contain the singularity); it is bounded by the decay.
            cuts = a + (mid - a) * 2.0 ** -np.arange(54, -1, -1, dtype=float)
            segs = [integrate_refine(f, np.linspace(lo, hi, 3), rel_tol=1e-9,
                                     abs_tol=1e-16)
                    for lo, hi in zip(cuts[:-1], cuts[1:])]
            seg_vals = np.array([s[0] for s in segs])
            toward_a = seg_vals[::-1]  # from mid down toward a
            head = toward_a[-9:]
            grand = float(np.sum(seg_vals))
            if (np.all(head[1:] >= 0.999 * head[:-1])
                    and head[-1] > 1e-12 * max(abs(grand), 1e-300)):
                cert["divergent_at"] = "0+"
                cert["partials"] = toward_a[-12:].tolist()
                return math.inf, cert
            ratio = head[-1] / head[-2] if head[-2] > 0 else 0.0
            ratio = min(ratio, 0.97)
            stub = head[-1] * ratio / (1.0 - ratio)  # geometric continuation
            total += grand + stub
            err += sum(s[1] for s in segs) + 0.5 * abs(stub)
        if b < math.inf:
            if b > mid:
                val, e = integrate_refine(f, np.geomspace(mid, b, 33), rel_tol=1e-9)
                total += val
                err += e
        else:
            val, e, diverged, partials = integrate_improper_upper(
                f, mid, max(mid, 1.0), rel_tol=1e-10)
            if diverged:
                cert["divergent_at"] = "inf"
                cert["partials"] = partials[-12:]
                return math.inf, cert
            total += val
            err += e
        cert["err_estimate"] = err
        return total, cert


@dataclass(frozen=True)
class ModelConfig:
    """Full problem instance: kernel parameters, horizon, drift and noise."""

    d: int
    alpha: float
    t: float
    m: float
    levy: LevyMeasure
    mode: str = "NonCompensated"
    m0: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise MeasureError("d must be 1, 2 or 3")
        if not (0.0 < self.alpha < 2.0):
            raise MeasureError("alpha must lie in (0, 2)")
        if self.t <= 0:
            raise MeasureError("horizon t must be positive")
        if self.mode not in MODES:
            raise MeasureError(f"mode must be one of {MODES}")
        if self.mode == "NonCompensated":
            small = self.levy.partial_moment(1.0, 0.0, 1.0)
            if not np.isfinite(small):
                raise MeasureError(
                    "NonCompensated mode needs a finite small-jump first "
                    "moment; use Compensated")
            object.__setattr__(self, "m0", self.m - small)
        else:
            object.__setattr__(self, "m0", math.nan)
        if self.levy.family_tag == "PowerDensity":
            kappa = self.levy.params["kappa"]
            if kappa >= self.alpha / self.d:
                raise MeasureError(
                    f"PowerDensity small-jump exponent kappa={kappa} must be "
                    f"below alpha/d={self.alpha / self.d}")

    def fingerprint(self):
        import hashlib
        desc = (f"d={self.d};alpha={self.alpha!r};t={self.t!r};m={self.m!r};"
                f"mode={self.mode};family={self.levy.family_tag};"
                f"params={sorted(self.levy.params.items())!r}")
        return hashlib.sha256(desc.encode()).hexdigest()[:16]


@dataclass
class CheckResult:
    condition: str
    holds: bool
    values: dict
    certificates: dict

    def as_json_dict(self):
        def clean(v):
            if isinstance(v, float) and math.isinf(v):
                return "inf"
            return v
        return {
            "condition": self.condition,
            "holds": bool(self.holds),
            "values": {k: clean(v) for k, v in self.values.items()},
            "certificates": self.certificates,
        }


def _mid_gamma(alpha):
    """Default exponent in ((1+alpha)/2, alpha) for the alpha > d = 1 case."""
    return 0.5 * ((1.0 + alpha) / 2.0 + alpha)


def check_condition(model: ModelConfig, cond: str) -> CheckResult:
    """Decide one of the named integrability conditions, with certificates."""
    if cond not in CONDITION_IDS:
        raise MeasureError(f"unknown condition {cond!r}; know {CONDITION_IDS}")
    lv = model.levy
    d, alpha = model.d, model.alpha
    values, certs = {}, {}

    def moment(name, q, a, b, log_weight=False):
        val, cert = lv.partial_moment_detail(q, a, b, log_weight)
        values[name] = val
        certs[name] = cert
        return val

    if cond == "SolutionExists":
        q = min(1.0 + alpha / d, 2.0)
        small = moment("small_jump", q, 0.0, 1.0, log_weight=(d == alpha))
        big = moment("big_jump", d / (d + alpha), 1.0, math.inf)
        holds = np.isfinite(small) and np.isfinite(big)
    elif cond == "EtaFinite":
        small = moment("small_jump", 1.0 + alpha / d, 0.0, 1.0)
        big = moment("big_jump", d / (d + alpha), 1.0, math.inf)
        holds = np.isfinite(small) and np.isfinite(big)
    elif cond == "Eta0Finite":
        holds = np.isfinite(moment("small_jump", 1.0 + alpha / d, 0.0, 1.0))
    elif cond == "TauFinite":
        holds = np.isfinite(moment("small_jump", alpha / d, 0.0, 1.0))
    elif cond == "SupTailHyp":
        if alpha <= d:
            holds = np.isfinite(moment("small_jump", 1.0, 0.0, 1.0))
        elif d == 1:
            gam = _mid_gamma(alpha)
            values["gamma"] = gam
            holds = np.isfinite(moment("small_jump", gam, 0.0, 1.0))
        else:
            holds = False
            certs["note"] = "alpha > d requires d = 1"
    elif cond == "XaConverges":
        q = min(1.0, alpha / d)
        holds = np.isfinite(moment("small_jump", q, 0.0, 1.0,
                                   log_weight=(d == alpha)))
    elif cond == "LatticeHyp_a":
        holds = np.isfinite(moment("small_jump", 1.0, 0.0, 1.0))
    elif cond == "LatticeHyp_b":
        lo = 1.0 / (1.0 + alpha)
        try:
            beta = lv.beta
            feasible = beta > lo
            gam = 0.5 * (lo + min(beta, lo + 2.0)) if feasible else lo * 1.01
        except MeasureError:
            feasible = None
            gam = None
        if feasible is None:
            # probe a grid of exponents just above the threshold
            holds = False
            for gam in (lo * 1.001, lo * 1.01, lo * 1.1, lo * 1.5):
                if np.isfinite(moment(f"big_jump_gamma={gam:.4g}", gam, 1.0,
                                      math.inf)):
                    holds = True
                    values["gamma"] = gam
                    break
        else:
            values["gamma"] = gam
            holds = feasible and np.isfinite(
                moment("big_jump", gam, 1.0, math.inf))
    else:  # SupTailBig
        q = max(alpha / d, d / (d + alpha))
        opt_a = np.isfinite(moment("big_jump", q, 1.0, math.inf))
        opt_b = False
        try:
            beta = lv.beta
            opt_b = (d / (d + alpha) < alpha / d
                     and d / (d + alpha) < beta <= alpha / d)
            values["beta"] = beta
        except MeasureError:
            pass
        values["option_a"] = bool(opt_a)
        values["option_b"] = bool(opt_b)
        holds = opt_a or opt_b
    return CheckResult(cond, bool(holds), values, certs)


def require(model: ModelConfig, cond: str):
    """Raise HypothesisError with the certificate when `cond` fails."""
    res = check_condition(model, cond)
    if not res.holds:
        raise HypothesisError(
            f"condition {cond} fails for this model", res.as_json_dict())
    return res


# ----------------------------------------------------------------------
# plain-text key=value model configuration files
# ----------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


_CONFIG_KEYS = {
    "d": int, "alpha": float, "t": float, "m": float, "mode": str,
    "family": str, "beta": float, "kappa": float, "c_small": float,
    "seed": int,
}


def parse_config_text(text):
    """Parse key=value lines; returns a plain dict of typed values."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError("expected key=value", lineno, len(line))
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno, raw.index(key) + 1)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", lineno, 1)
        try:
            out[key] = _CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {exc}", lineno,
                             raw.index("=") + 2) from exc
    return out


def model_from_mapping(cfg):
    """Build a ModelConfig from a parsed config mapping."""
    missing = [k for k in ("d", "alpha", "t", "family") if k not in cfg]
    if missing:
        raise ParseError(f"missing required keys: {missing}")
    family = cfg["family"].lower()
    if family == "pareto":
        if "beta" not in cfg:
            raise ParseError("pareto family needs beta")
        levy = LevyMeasure.pareto(cfg["beta"])
    elif family in ("powerdensity", "power_density"):
        for k in ("beta", "kappa"):
            if k not in cfg:
                raise ParseError(f"powerdensity family needs {k}")
        levy = LevyMeasure.power_density(cfg["kappa"], cfg["beta"],
                                         cfg.get("c_small", 1.0))
    else:
        raise ParseError(f"unknown family {cfg['family']!r}")
    mode_raw = cfg.get("mode", "noncompensated").lower()
    mode = {"noncompensated": "NonCompensated",
            "compensated": "Compensated"}.get(mode_raw)
    if mode is None:
        raise ParseError(f"unknown mode {cfg['mode']!r}")
    return ModelConfig(d=cfg["d"], alpha=cfg["alpha"], t=cfg["t"],
                       m=cfg.get("m", 0.0), levy=levy, mode=mode)


def load_model_config(path):
    """Read a config file; returns (ModelConfig, extras) with e.g. the seed."""
    with open(path) as fh:
        cfg = parse_config_text(fh.read())
    model = model_from_mapping(cfg)
    extras = {k: v for k, v in cfg.items() if k == "seed"}
    return model, extras
