"""Render figures from levyheat CSV artifacts.

Readers are deliberately dumb: plots consume only the CSV files the
numerical tool emits, never the tool itself.  Rendering is deterministic
(fixed style, salted SVG ids, no timestamp metadata) so repeated runs are
byte-identical.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Optional

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "levyheat-plots"

import matplotlib.pyplot as plt
import numpy as np

PLOT_KINDS = ("tail-ratio", "growth-envelope", "threshold-map")

_MC_COLUMNS = {"r", "estimate", "ci_lo", "ci_hi"}
_TAIL_COLUMNS = {"kind", "r", "value"}
_GROWTH_COLUMNS = {"radius", "sup_lattice", "sup_grid", "f_of_radius"}
_THRESHOLD_COLUMNS = {"beta", "whole_threshold", "lattice_threshold"}


class SchemaError(ValueError):
    """Input CSV does not match the expected schema for the plot kind."""


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    inputs: tuple
    output: str
    reference: Optional[str] = None
    normalize: bool = False
    reference_level: float = 1.0

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise SchemaError(f"kind must be one of {PLOT_KINDS}")


def read_csv_columns(path, required):
    """Read a CSV into float column arrays, checking required columns."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file")
        missing = required - set(reader.fieldnames)
        if missing:
            raise SchemaError(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for name in reader.fieldnames:
        try:
            out[name] = np.array([float(row[name]) for row in rows])
        except ValueError:
            out[name] = np.array([row[name] for row in rows])
    return out


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=100)
    ax.grid(True, which="both", alpha=0.3, linewidth=0.5)
    return fig, ax


def _save(fig, path):
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def render_tail_ratio(spec: PlotSpec):
    """Ratio of Monte Carlo exceedance estimates to a reference tail curve.

    Log-x plot of estimate/value with the Wilson band, plus a horizontal
    reference line (1 by default, or the expected limit constant).
    Mismatched level grids are aligned by log-log interpolation, with a
    warning.
    """
    mc = read_csv_columns(spec.inputs[0], _MC_COLUMNS)
    if spec.reference is None:
        raise SchemaError("tail-ratio needs a reference tail curve CSV")
    ref = read_csv_columns(spec.reference, _TAIL_COLUMNS)
    r = mc["r"]
    ref_r, ref_v = ref["r"], ref["value"]
    if len(ref_r) == len(r) and np.allclose(ref_r, r, rtol=1e-12):
        tail = ref_v
    else:
        warnings.warn("reference grid differs from the Monte Carlo grid; "
                      "resampling by log-log interpolation")
        tail = np.exp(np.interp(np.log(r), np.log(ref_r), np.log(ref_v)))
    ratio = mc["estimate"] / tail
    lo = mc["ci_lo"] / tail
    hi = mc["ci_hi"] / tail
    fig, ax = _new_axes()
    ax.set_xscale("log")
    ax.fill_between(r, lo, hi, alpha=0.25, color="#4878d0", linewidth=0,
                    label="95% interval")
    ax.plot(r, ratio, "o-", color="#4878d0", markersize=4, label="estimate / tail")
    ax.axhline(spec.reference_level, color="#d65f5f", linewidth=1.2,
               linestyle="--", label=f"reference {spec.reference_level:g}")
    ax.set_xlabel("level r")
    ax.set_ylabel("exceedance ratio")
    ax.legend(frameon=False, fontsize=9)
    _save(fig, spec.output)
    return spec.output


def render_growth_envelope(spec: PlotSpec):
    """Growth envelope of one realization: suprema against the test function.

    Log-log plot of the lattice and grid suprema with the f(r) overlay;
    with normalize=True every series is divided by f(r).
    """
    data = read_csv_columns(spec.inputs[0], _GROWTH_COLUMNS)
    r = data["radius"]
    f = data["f_of_radius"]
    series = [("sup on lattice", data["sup_lattice"], "o-", "#4878d0"),
              ("sup on grid", data["sup_grid"], "s-", "#6acc64")]
    fig, ax = _new_axes()
    ax.set_xscale("log")
    ax.set_yscale("log")
    denom = f if spec.normalize else np.ones_like(f)
    for label, vals, style, color in series:
        shown = vals / denom
        ax.plot(r, np.maximum(shown, 1e-300), style, color=color,
                markersize=4, label=label)
    if spec.normalize:
        ax.axhline(1.0, color="#d65f5f", linewidth=1.2, linestyle="--",
                   label="f(r)")
        ax.set_ylabel("supremum / f(r)")
    else:
        ax.plot(r, f, "--", color="#d65f5f", linewidth=1.2, label="f(r)")
        ax.set_ylabel("supremum")
    ax.set_xlabel("radius r")
    ax.legend(frameon=False, fontsize=9)
    _save(fig, spec.output)
    return spec.output


def render_threshold_map(spec: PlotSpec):
    """Critical log-power thresholds against the noise tail exponent."""
    data = read_csv_columns(spec.inputs[0], _THRESHOLD_COLUMNS)
    beta = data["beta"]
    order = np.argsort(beta)
    fig, ax = _new_axes()
    ax.plot(beta[order], data["whole_threshold"][order], "o-",
            color="#4878d0", markersize=4, label="whole space")
    ax.plot(beta[order], data["lattice_threshold"][order], "s-",
            color="#6acc64", markersize=4, label="lattice")
    ax.set_xlabel("tail exponent beta")
    ax.set_ylabel("critical log power")
    ax.legend(frameon=False, fontsize=9)
    _save(fig, spec.output)
    return spec.output


_RENDERERS = {
    "tail-ratio": render_tail_ratio,
    "growth-envelope": render_growth_envelope,
    "threshold-map": render_threshold_map,
}


def render(spec: PlotSpec):
    return _RENDERERS[spec.kind](spec)
