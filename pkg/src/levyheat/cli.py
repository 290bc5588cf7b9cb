"""Batch command-line front end.

Subcommands: validate | tails | mc-tail | sup-growth | classify | report.
Exit codes: 0 success, 1 usage/parse error, 2 mathematical-hypothesis
refusal, 3 numeric non-convergence.

Data outputs (CSV, JSON reports) are byte-reproducible given (config, seed,
version); the run manifest additionally records wall-clock time and refers
to each output file by its content hash.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
import time

import numpy as np

from . import __version__
from .growthtest import PowerLogFunction, classify_growth
from .levy import (CONDITION_IDS, HypothesisError, MeasureError, ParseError,
                   check_condition, load_model_config)
from .sim import (Grid, Lattice, SimWindow, mc_tail, sample_prm, size_window,
                  sup_field)
from .tails import NumericsError, RegionA, sample_curve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_HYPOTHESIS = 2
EXIT_NUMERIC = 3


def _fmt(x):
    """Stable float formatting for CSV cells ('.' decimal, no grouping)."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def parse_range(spec):
    """Parse 'start:stop:logspace:count' / 'start:stop:linspace:count' or a
    comma list of levels."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 4 or parts[2] not in ("logspace", "linspace"):
            raise ParseError(
                f"range must be start:stop:logspace|linspace:count, got {spec!r}")
        start, stop, kind, count = (float(parts[0]), float(parts[1]),
                                    parts[2], int(parts[3]))
        if count < 1 or stop <= start:
            raise ParseError(f"bad range bounds in {spec!r}")
        if kind == "logspace":
            if start <= 0:
                raise ParseError("logspace needs a positive start")
            return np.geomspace(start, stop, count)
        return np.linspace(start, stop, count)
    try:
        return np.array([float(v) for v in spec.split(",") if v.strip()])
    except ValueError as exc:
        raise ParseError(f"bad level list {spec!r}: {exc}")


_F_RE = re.compile(
    r"^\s*(?:(?P<C>[0-9.eE+-]+)\s*\*\s*)?"
    r"r\^(?P<a>[0-9.eE+-]+)"
    r"(?:\s*\*\s*\(log\s*r\)\^(?P<p>[0-9.eE+-]+))?\s*$")


def parse_f_expression(text):
    """Parse 'C*r^a*(log r)^p' (C and the log factor optional)."""
    m = _F_RE.match(text)
    if not m:
        raise ParseError(
            f"test function must match C*r^a*(log r)^p, got {text!r}")
    return PowerLogFunction(
        C=float(m.group("C") or 1.0),
        a=float(m.group("a")),
        p=float(m.group("p") or 0.0))


def parse_region(text, d):
    """Parse 'ball:radius' / 'ball:cx,...:radius' / 'box:lo,..:hi,..'."""
    parts = text.split(":")
    try:
        if parts[0] == "ball":
            if len(parts) == 2:
                return RegionA.ball([0.0] * d, float(parts[1]))
            center = [float(v) for v in parts[1].split(",")]
            return RegionA.ball(center, float(parts[2]))
        if parts[0] == "box":
            lo = [float(v) for v in parts[1].split(",")]
            hi = [float(v) for v in parts[2].split(",")]
            return RegionA.box(lo, hi)
    except (IndexError, ValueError) as exc:
        raise ParseError(f"bad region {text!r}: {exc}")
    raise ParseError(f"region must start with ball: or box:, got {text!r}")


def _resolve_seed(args, extras):
    env = os.environ.get("LEVYHEAT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ParseError(f"bad LEVYHEAT_SEED {env!r}: {exc}")
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    return int(extras.get("seed", 0))


def _write_json(path, payload):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(args, model, extras, seed, outputs, t_start, **fields):
    manifest = {
        "tool_version": __version__,
        "subcommand": args.command,
        "config": {
            "d": model.d, "alpha": model.alpha, "t": model.t, "m": model.m,
            "mode": model.mode, "family": model.levy.family_tag,
            "params": model.levy.params,
        },
        "model_fingerprint": model.fingerprint(),
        "seed": seed,
        "outputs": {os.path.basename(p): _sha256(p) for p in outputs},
        "wall_clock_s": round(time.time() - t_start, 3),
    }
    manifest.update(fields)
    path = args.out + ".manifest.json"
    _write_json(path, manifest)
    return path


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_validate(args):
    t0 = time.time()
    model, extras = load_model_config(args.config)
    seed = _resolve_seed(args, extras)
    results = {c: check_condition(model, c).as_json_dict()
               for c in CONDITION_IDS}
    payload = {
        "model_fingerprint": model.fingerprint(),
        "conditions": results,
        "all_hold": all(r["holds"] for r in results.values()),
    }
    _write_json(args.out, payload)
    _manifest(args, model, extras, seed, [args.out], t0)
    print(f"wrote {args.out}")
    return EXIT_OK if payload["all_hold"] else EXIT_HYPOTHESIS


def cmd_tails(args):
    t0 = time.time()
    model, extras = load_model_config(args.config)
    seed = _resolve_seed(args, extras)
    rs = parse_range(args.r)
    region = parse_region(args.region, model.d) if args.region else None
    curve = sample_curve(model, args.kind, rs, region=region)
    curve.to_csv(args.out)
    _manifest(args, model, extras, seed, [args.out], t0,
              kind=args.kind, region=region.describe() if region else None)
    print(f"wrote {args.out} ({len(rs)} rows)")
    return EXIT_OK


def cmd_mc_tail(args):
    t0 = time.time()
    model, extras = load_model_config(args.config)
    seed = _resolve_seed(args, extras)
    rs = parse_range(args.r)
    region = parse_region(args.region, model.d) if args.region else None
    if args.window is not None:
        window = SimWindow(R=args.window, seed=seed)
        sizing = None
    else:
        window, sizing = size_window(model, float(np.min(rs)), seed=seed)
    results = mc_tail(model, window, args.functional, rs, args.n,
                      region=region)
    with open(args.out, "w", newline="\n") as fh:
        fh.write("r,estimate,stderr,ci_lo,ci_hi,trunc_mass,trunc_bias\n")
        for res in results:
            lo, hi = res.wilson()
            cells = [res.level, res.estimate, res.stderr, lo, hi,
                     res.trunc_mass, res.trunc_bias]
            fh.write(",".join(_fmt(float(c)) for c in cells) + "\n")
    _manifest(args, model, extras, seed, [args.out], t0,
              functional=args.functional, n=args.n,
              window={"R": window.R, "delta_small": window.delta_small,
                      "eps_atom": window.eps_atom},
              window_sizing=sizing,
              region=region.describe() if region else None)
    print(f"wrote {args.out} ({len(results)} rows, n={args.n})")
    return EXIT_OK


def cmd_sup_growth(args):
    t0 = time.time()
    model, extras = load_model_config(args.config)
    seed = _resolve_seed(args, extras)
    radii = sorted(float(v) for v in args.radii.split(","))
    f = parse_f_expression(args.f)
    margin = 4.0 * model.t ** (1.0 / model.alpha)
    window = SimWindow(R=max(radii) + margin, seed=seed)
    atoms = sample_prm(model, window, args.replica)
    rows = []
    for rad in radii:
        s_lat, _ = sup_field(model, atoms, Lattice(rad))
        grid = Grid(([-rad] * model.d, [rad] * model.d),
                    0.05 * model.t ** (1.0 / model.alpha))
        s_grid, _ = sup_field(model, atoms, grid, check=False)
        rows.append((rad, s_lat, s_grid, float(f(rad))))
    with open(args.out, "w", newline="\n") as fh:
        fh.write("radius,sup_lattice,sup_grid,f_of_radius\n")
        for row in rows:
            fh.write(",".join(_fmt(float(c)) for c in row) + "\n")
    _manifest(args, model, extras, seed, [args.out], t0,
              f=f.describe(), radii=radii, replica=args.replica,
              window={"R": window.R})
    print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK


def cmd_classify(args):
    model, extras = load_model_config(args.config)
    f = parse_f_expression(args.f)
    record = classify_growth(model, f)
    _write_json(args.out, record)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_report(args):
    """Aggregate manifests, validate bundles and classify records."""
    summary = {"manifests": [], "status": "pass", "checks": []}

    def add_check(name, holds):
        summary["checks"].append({"name": name, "holds": bool(holds)})
        if not holds:
            summary["status"] = "fail"

    for path in args.manifests:
        with open(path) as fh:
            doc = json.load(fh)
        summary["manifests"].append({
            "file": os.path.basename(path),
            "subcommand": doc.get("subcommand"),
            "model_fingerprint": doc.get("model_fingerprint"),
        })
        for name, res in (doc.get("conditions") or {}).items():
            add_check(name, res["holds"])
        for side in ("whole_space", "lattice"):
            rec = doc.get(side)
            if isinstance(rec, dict) and "certificates" in rec:
                for name, res in rec["certificates"].items():
                    add_check(f"{side}:{name}", res["holds"])
    _write_json(args.out, summary)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="levyheat",
        description="Stable-kernel Levy noise toolkit: condition checking, "
                    "tail curves, Monte Carlo verification, growth tests.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check every integrability condition")
    p.add_argument("config")
    p.add_argument("--out", default="validate.json")
    p.set_defaults(fn=cmd_validate)

    kind_map = {"tau": "Tau", "eta": "Eta", "eta0": "Eta0", "etaa": "EtaA"}
    p = sub.add_parser("tails", help="sample a tail-functional curve")
    p.add_argument("config")
    p.add_argument("--kind", required=True,
                   type=lambda s: kind_map.get(s.lower(), s),
                   choices=("Tau", "Eta", "Eta0", "EtaA"))
    p.add_argument("--r", required=True,
                   help="levels: start:stop:logspace:count or comma list")
    p.add_argument("--region", default=None,
                   help="EtaA region, e.g. ball:1.0 or box:-1:1")
    p.add_argument("--out", default="tails.csv")
    p.set_defaults(fn=cmd_tails)

    p = sub.add_parser("mc-tail", help="Monte Carlo exceedance frequencies")
    p.add_argument("config")
    p.add_argument("--functional", required=True,
                   choices=("x", "xbar", "xbarA", "xA", "xAstar", "supgrid"))
    p.add_argument("--r", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--region", default=None)
    p.add_argument("--window", type=float, default=None,
                   help="window half-width (default: sized from truncation)")
    p.add_argument("--out", default="mc.csv")
    p.set_defaults(fn=cmd_mc_tail)

    p = sub.add_parser("sup-growth", help="growth envelope of one realization")
    p.add_argument("config")
    p.add_argument("--radii", required=True, help="comma list of radii")
    p.add_argument("--f", required=True, help="test function C*r^a*(log r)^p")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replica", type=int, default=0)
    p.add_argument("--out", default="supgrowth.csv")
    p.set_defaults(fn=cmd_sup_growth)

    p = sub.add_parser("classify", help="growth classification record")
    p.add_argument("config")
    p.add_argument("--f", required=True)
    p.add_argument("--out", default="classify.json")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("report", help="aggregate manifests into a summary")
    p.add_argument("manifests", nargs="*")
    p.add_argument("--out", default="report.json")
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (ParseError, MeasureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisError as exc:
        print(f"hypothesis refusal: {exc}", file=sys.stderr)
        if exc.certificate is not None:
            print(json.dumps(exc.certificate, indent=2, sort_keys=True,
                             default=str), file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NumericsError as exc:
        print(f"numeric non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
