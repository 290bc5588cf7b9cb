"""Integral tests classifying almost-sure spatial growth rates.

The dichotomy: for a nondecreasing test function f, the normalized spatial
supremum has limsup 0 or infinity according as
``int_1^inf r^{d-1} tail(f(r)) dr`` converges or diverges, where the tail is
``tau_bar`` for the whole-space supremum, ``eta_bar`` for the lattice zero
direction and ``eta0_bar`` for the lattice infinity direction.

For power-log test functions against power-log tails the test reduces to an
exact exponent comparison; arbitrary tails are handled numerically with an
explicit Inconclusive verdict near the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .levy import HypothesisError, ModelConfig, check_condition

VERDICTS = ("Converges", "Diverges", "Inconclusive")
THEOREMS = ("WholeSpace", "LatticeUpper", "LatticeLower")


@dataclass(frozen=True)
class PowerLogFunction:
    """f(r) = C * r^a * (log r)^p for r >= r0 >= e."""

    C: float = 1.0
    a: float = 0.0
    p: float = 0.0
    r0: float = math.e

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.a < 0 or (self.a == 0 and self.p < 0):
            raise ValueError("f must be nondecreasing: a > 0, or a = 0, p >= 0")
        if self.r0 < math.e:
            raise ValueError("validity threshold r0 must be >= e")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.C * r ** self.a * np.log(r) ** self.p

    def describe(self):
        return f"{self.C}*r^{self.a}*(log r)^{self.p}"


@dataclass(frozen=True)
class TailAsymptote:
    """tail(x) ~ scale * (log x)^q / x^gamma for large x."""

    gamma: float
    q: int = 0
    scale: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.q not in (0, 1):
            raise ValueError("q must be 0 or 1")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.scale * np.log(np.maximum(x, math.e)) ** self.q \
            * x ** (-self.gamma)


def classify_power_log(d: int, tail: TailAsymptote, f: PowerLogFunction):
    """Exact convergence test of int r^{d-1} tail(f(r)) dr.

    The integrand reduces to r^{d-1-a*gamma} (log r)^{q - p*gamma};
    convergence iff a*gamma > d, or a*gamma = d and p*gamma - q > 1
    (strict: the boundary harmonic-log integrand diverges).
    """
    ag = f.a * tail.gamma
    if ag > d:
        return "Converges"
    if ag < d:
        return "Diverges"
    return "Converges" if f.p * tail.gamma - tail.q > 1.0 else "Diverges"


def classify_numeric(d: int, tail, f, r_max=1e8, panels=400, margin=0.05):
    """Numeric stand-in for the integral test against any tail callable.

    Integrates r^{d-1} tail(f(r)) on [max(r0, e), r_max] over log-spaced
    panels and fits the log-log slope of the integrand over the last
    decade: slope below -1 - margin means Converges, above -1 + margin
    means Diverges.  Inside the margin band the residual log-power c of
    h(r) ~ (log r)^c / r decides (c >= -1 diverges), again with a margin;
    Inconclusive is a legal outcome and is never coerced.
    """
    tail_fn = tail if callable(tail) else _curve_callable(tail)
    f_fn = f if callable(f) else (lambda r: np.interp(r, f[0], f[1]))
    r0 = getattr(f, "r0", math.e)
    rs = np.geomspace(max(r0, math.e), r_max, panels + 1)

    def h(r):
        return r ** (d - 1) * np.asarray(tail_fn(f_fn(r)), dtype=float)

    mids = np.sqrt(rs[:-1] * rs[1:])
    widths = np.diff(rs)
    partial = float(np.sum(h(mids) * widths))
    decade = rs >= r_max / 10.0
    xs = np.log(rs[decade])
    ys = np.log(np.maximum(h(rs[decade]), 1e-300))
    slope = float(np.polyfit(xs, ys, 1)[0])
    log_power = None
    band_lo = -1.0 - max(3.0 * margin, 0.15)
    if slope < band_lo:
        verdict = "Converges"
    elif slope >= -1.0 + margin:
        verdict = "Diverges"
    else:
        # borderline polynomial order: fit h(r) ~ (log r)^c / r; the
        # harmonic-log boundary sits at c = -1
        resid = ys + xs
        log_power = float(np.polyfit(np.log(xs), resid, 1)[0])
        c_margin = 0.25
        if log_power >= -1.0 + c_margin:
            verdict = "Diverges"
        elif log_power < -1.0 - c_margin:
            verdict = "Converges"
        else:
            verdict = "Inconclusive"
    return {"verdict": verdict, "partial_integral": partial,
            "slope": slope, "log_power": log_power,
            "confident": verdict != "Inconclusive"}


def _curve_callable(curve):
    """Log-log interpolation of a sampled tail curve (no extrapolation)."""
    lr = np.log(curve.r)
    lv = np.log(curve.value)

    def fn(x):
        x = np.asarray(x, dtype=float)
        lx = np.log(x)
        if np.any(lx < lr[0] - 1e-9) or np.any(lx > lr[-1] + 1e-9):
            raise ValueError("tail curve does not cover the requested levels")
        return np.exp(np.interp(lx, lr, lv))

    return fn


# ----------------------------------------------------------------------
# regime table for unit-floor power-tail noise
# ----------------------------------------------------------------------

def regime_table(d: int, alpha: float, beta: float):
    """Growth-regime summary for tail exponent beta.

    gamma and delta are the effective decay exponents of the whole-space
    and lattice tail functionals; thresholds are the critical log-powers p
    for the natural test functions r^{d/gamma} (log r)^p and
    r^{d/delta} (log r)^p.
    """
    dd = d / (d + alpha)
    a_d = alpha / d
    if beta <= dd:
        raise HypothesisError(
            f"no finite solution for beta={beta} <= d/(d+alpha)={dd}")
    gamma = min(beta, a_d)
    delta = min(beta, 1.0 + a_d)
    q_tau = 1 if beta == a_d else 0
    q_eta = 1 if beta == 1.0 + a_d else 0
    whole = (1.0 + q_tau) / gamma
    lattice = (1.0 + q_eta) / delta
    if beta < a_d:
        note = "same growth order on the whole space and on the lattice"
    elif beta == a_d:
        note = ("three-band boundary: the whole-space and lattice orders "
                "separate only through log factors")
    else:
        note = "higher polynomial growth order on the whole space"
    return {
        "d": d, "alpha": alpha, "beta": beta,
        "gamma": gamma, "delta": delta,
        "q_tau": q_tau, "q_eta": q_eta,
        "whole_threshold": whole, "lattice_threshold": lattice,
        "comparison": note,
    }


def regime_table_csv(rows, path):
    cols = ("d", "alpha", "beta", "gamma", "delta", "q_tau", "q_eta",
            "whole_threshold", "lattice_threshold")
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(repr(row[c]) if isinstance(row[c], float)
                              else str(row[c]) for c in cols) + "\n")


# ----------------------------------------------------------------------
# from verdicts to almost-sure statements
# ----------------------------------------------------------------------

_THEOREM_CONDITIONS = {
    # (condition ids for alpha <= d, condition ids for alpha > d = 1)
    "WholeSpace": (("TauFinite", "SupTailHyp", "SupTailBig"),
                   ("SupTailHyp", "SupTailBig")),
    "LatticeUpper": (("SolutionExists",), ("SolutionExists",)),
    "LatticeLower": (("SolutionExists", "LatticeHyp_a"),
                     ("SolutionExists", "LatticeHyp_b")),
}

_INTEGRAL_USED = {"WholeSpace": "Tau", "LatticeUpper": "Eta",
                  "LatticeLower": "Eta0"}


def required_conditions(model: ModelConfig, theorem: str):
    if theorem not in THEOREMS:
        raise ValueError(f"theorem must be one of {THEOREMS}")
    small, big = _THEOREM_CONDITIONS[theorem]
    return small if model.alpha <= model.d else big


def verdict_to_limsup(verdict: str, theorem: str, conditions):
    """Emit the almost-sure statement a verdict licenses under a theorem.

    `conditions` maps condition ids to CheckResult-like objects; every
    condition the theorem needs must be present and hold, otherwise a
    HypothesisError carries the failing certificate.
    """
    if verdict not in VERDICTS:
        raise ValueError(f"verdict must be one of {VERDICTS}")
    if theorem not in THEOREMS:
        raise ValueError(f"theorem must be one of {THEOREMS}")
    # the caller supplies certificates for one hypothesis variant (the
    # alpha <= d or the alpha > d = 1 set); all of them must hold
    variants = _THEOREM_CONDITIONS[theorem]
    for variant in variants:
        if all(c in conditions for c in variant):
            needed = variant
            break
    else:
        raise HypothesisError(
            f"{theorem} needs certificates for one of {variants}; "
            f"got {sorted(conditions)}")
    failing = [c for c in needed if not conditions[c].holds]
    if failing:
        raise HypothesisError(
            f"hypotheses of {theorem} fail: {failing}",
            {c: conditions[c].as_json_dict() for c in failing})
    integral = _INTEGRAL_USED[theorem]
    if verdict == "Inconclusive":
        statement = "no verdict: integral test inconclusive"
    elif theorem == "WholeSpace":
        statement = ("lim sup_{|x|<=r} X(t,x)/f(r) = 0 a.s."
                     if verdict == "Converges"
                     else "limsup sup_{|x|<=r} X(t,x)/f(r) = inf a.s.")
    elif theorem == "LatticeUpper":
        statement = ("lim sup_{x in Z^d, |x|<=r} X(t,x)/f(r) = 0 a.s."
                     if verdict == "Converges"
                     else "no conclusion from the upper lattice test")
    else:
        statement = ("limsup sup_{x in Z^d, |x|<=r} X(t,x)/f(r) = inf a.s."
                     if verdict == "Diverges"
                     else "no conclusion from the lower lattice test")
    return {
        "statement": statement,
        "theorem": theorem,
        "verdict": verdict,
        "integral": integral,
        "certificates": {c: conditions[c].as_json_dict() for c in needed},
    }


def classify_growth(model: ModelConfig, f: PowerLogFunction):
    """End-to-end classification for a unit-floor power-tail model.

    Returns whole-space and lattice records; the lattice record reports
    'gap' when the zero-direction and infinity-direction integrals disagree
    (possible only when the restricted and full exceedance tails are not
    comparable).
    """
    lv = model.levy
    beta = lv.beta
    table = regime_table(model.d, model.alpha, beta)
    conds = {c: check_condition(model, c)
             for c in ("TauFinite", "SupTailHyp", "SupTailBig",
                       "SolutionExists", "LatticeHyp_a", "LatticeHyp_b")}

    whole_tail = TailAsymptote(table["gamma"], table["q_tau"])
    v_whole = classify_power_log(model.d, whole_tail, f)
    whole = verdict_to_limsup(v_whole, "WholeSpace", conds)

    lattice_tail = TailAsymptote(table["delta"], table["q_eta"])
    v_upper = classify_power_log(model.d, lattice_tail, f)
    # eta and eta0 share their decay order for this family (no gap regime)
    if v_upper == "Converges":
        lattice = verdict_to_limsup("Converges", "LatticeUpper", conds)
    else:
        lattice = verdict_to_limsup("Diverges", "LatticeLower", conds)
    return {"regime": table, "whole_space": whole, "lattice": lattice,
            "f": f.describe()}
