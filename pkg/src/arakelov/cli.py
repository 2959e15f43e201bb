"""Command line driver.

    arakelov bundle hn|minima --spec bundle.json [--cap K]
    arakelov okounkov transform --spec series.json --nmax N [--format csv]
    arakelov volumes chi|vol|volI --spec series.json --nmax N [--csv out.csv]
    arakelov experiment continuity --spec pair.json --schedule 1/2,1/4 --nmax N
    arakelov decompose --divisor divisor.json
    arakelov run --spec experiment.json

Reports are written as sorted, indented JSON (or CSV rows n,value,lo,hi) and
contain no timestamps, so the same spec and seed give identical bytes.  The
wall time goes to stderr.  Exit status: 0 when every check passes, 1 when a
check fails, 2 on input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
import time
from fractions import Fraction

import jsonschema

from . import __version__
from .adelic_curve import LogValue, parse_rational
from .ample_decomp import decompose_ample
from .bundles import AdelicBundle, arakelov_degree, hn_filtration, slope_sandwich, successive_minima
from .divisor_series import RDivisorP1, series_from_json
from .errors import ArakelovError, SchemaError
from .okounkov import concave_transform, okounkov_data, vol_I
from .piecewise import PL
from .volumes import (chi_vs_I_check, continuity_experiment, trivially_valued_experiment,
                      vol_chi_estimate, vol_estimate, vol_I_estimate)

KINDS = ["bundle", "series", "okounkov", "volumes", "continuity", "decompose", "trivial-mode"]

SPEC_SCHEMA = {
    "type": "object",
    "required": ["kind", "inputs"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": KINDS},
        "inputs": {"type": "object"},
        "n_max": {"type": "integer", "minimum": 1},
        "cap": {"type": "integer", "minimum": 1},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
        "schedule": {"type": "array", "items": {"type": ["string", "integer"]}},
        "seed": {"type": "integer"},
        "format": {"enum": ["json", "csv"]},
        "ops": {"type": "array", "items": {"type": "string"}},
    },
}


# ---------------------------------------------------------------- helpers

def jsonable(x):
    if isinstance(x, LogValue):
        return x.to_json()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, float):
        return float(repr(x))
    return x


def validate_spec(spec) -> dict:
    try:
        jsonschema.validate(spec, SPEC_SCHEMA)
    except jsonschema.ValidationError as exc:
        field = "spec" + "".join(f"[{p!r}]" if isinstance(p, int) else f".{p}" for p in exc.absolute_path)
        raise SchemaError(exc.message, field) from None
    return spec


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}", "spec") from None


def _schedule(items, path="spec.schedule"):
    return [parse_rational(str(s), f"{path}[{i}]") for i, s in enumerate(items)]


def _seq_rows(seq):
    return [[n, v, lo, hi] for n, v, lo, hi in seq]


def _check(name, ok):
    return {"name": name, "pass": bool(ok)}


# ---------------------------------------------------------------- runners

def run_bundle(spec):
    E = AdelicBundle.from_json(spec["inputs"].get("bundle"), "spec.inputs.bundle")
    ops = spec.get("ops") or ["degree", "hn", "minima"]
    cap = spec.get("cap", 4)
    result, checks = {"dim": E.dim}, []
    result["degree"] = arakelov_degree(E)
    if "hn" in ops:
        hn = hn_filtration(E, cap=cap)
        result["hn"] = hn.to_json()
        sw = slope_sandwich(E, hn)
        checks.append(_check("slope_sandwich", sw["lower_ok"] and sw["upper_ok"]))
    if "minima" in ops:
        mins = successive_minima(E, cap=max(cap, 6))
        result["minima"] = list(mins.values)
        if "hn" in ops:
            checks.append(_check("nu_le_mu", all(a <= b for a, b in zip(mins.values, hn.slopes))))
    return result, checks, {}


def run_okounkov(spec):
    S = series_from_json(spec["inputs"].get("series"), "spec.inputs.series")
    n_max = spec.get("n_max", 50)
    T = concave_transform(S, n_max)
    data = okounkov_data(S, n_max)
    v, err = vol_I(T)
    result = {"transform": T.to_json(), "vol_I": v, "vol_I_err": err}
    checks = [_check("envelope_concave", T.envelope.is_concave(1e-12)),
              _check("sup_finite", T.sup_value < float("inf"))]
    table = [[n, a, g] for (n, a), g in sorted(data.g_table.items())]
    return result, checks, {"g_table": table}


def run_volumes(spec):
    S = series_from_json(spec["inputs"].get("series"), "spec.inputs.series")
    n_max = spec.get("n_max", 100)
    which = spec["inputs"].get("which", ["chi", "vol", "volI"])
    fns = {"chi": vol_chi_estimate, "vol": vol_estimate, "volI": vol_I_estimate}
    result, seqs, checks = {}, {}, []
    for w in which:
        if w not in fns:
            raise SchemaError(f"unknown volume kind {w!r}", "spec.inputs.which")
        est = fns[w](S, n_max)
        result[w] = {k: v for k, v in est.to_json().items() if k != "sequence"}
        seqs[w] = _seq_rows(est.sequence)
    if "chi" in which and "volI" in which:
        cross = chi_vs_I_check(S, n_max)
        result["chi_vs_2volI"] = cross
        checks.append(_check("chi_eq_2volI", cross["pass"]))
    if "chi" in which and "vol" in which:
        checks.append(_check("chi_le_vol", result["chi"]["bracket"][0] <= result["vol"]["bracket"][1]))
    return result, checks, seqs


def run_continuity(spec):
    inp = spec["inputs"]
    SD = series_from_json(inp.get("D"), "spec.inputs.D")
    SE = series_from_json(inp.get("E"), "spec.inputs.E")
    sched = _schedule(spec.get("schedule", inp.get("schedule", [])))
    n_max = spec.get("n_max", 100)
    rep = continuity_experiment(SD, SE, sched, n_max)
    checks = [_check("vol_I_continuity", rep["vol_I_pass"]),
              _check("vol_chi_continuity", rep["vol_chi_pass"]),
              _check("phi_shift_path", rep["phi_path_pass"]),
              _check("ineq_eff", rep["ineq_eff_pass"])]
    return rep, checks, {}


def run_decompose(spec):
    D = RDivisorP1.from_json(spec["inputs"].get("divisor"), "spec.inputs.divisor")
    dec = decompose_ample(D)
    ver = dec.verify(D)
    result = dec.to_json()
    result["verify"] = ver
    return result, [_check("reconstruction", ver["reconstructs"]),
                    _check("ample_parts", ver["ample_parts"] and ver["positive_coefficients"])], {}


def run_trivial(spec):
    inp = spec["inputs"]
    for key in inp:
        if key not in ("degree", "f", "h", "places"):
            raise SchemaError(f"unknown key {key!r}", f"spec.inputs.{key}")
    a = parse_rational(inp.get("degree", "1"), "spec.inputs.degree")
    f = _profile_or_const(inp.get("f", "0"), "spec.inputs.f")
    h = inp.get("h")
    h = None if h is None else _profile_or_const(h, "spec.inputs.h")
    places = inp.get("places", ["trivial"])
    rep = trivially_valued_experiment(a, f, h, _schedule(spec.get("schedule", [])), places)
    return rep, [_check("vol_chi_exact", rep["exact"]), _check("nu_min", rep["nu_min_ok"]),
                 _check("perturbation_sandwich", rep["violations"] == 0),
                 _check("closed_form", rep["expected"] is None or rep["expected"] == rep["vol_chi"])], {}


def _profile_or_const(obj, path):
    if isinstance(obj, dict):
        knots = obj.get("knots")
        if not knots:
            raise SchemaError("profile needs 'knots'", path)
        xs = [parse_rational(k[0], path + ".knots") for k in knots]
        ys = [parse_rational(k[1], path + ".knots") for k in knots]
        try:
            return PL(tuple(xs), tuple(ys))
        except ValueError as exc:
            raise SchemaError(str(exc), path) from None
    return parse_rational(obj, path)


RUNNERS = {"bundle": run_bundle, "series": run_okounkov, "okounkov": run_okounkov,
           "volumes": run_volumes, "continuity": run_continuity, "decompose": run_decompose,
           "trivial-mode": run_trivial}


def run_experiment(spec) -> dict:
    validate_spec(spec)
    random.seed(spec.get("seed", 0))
    result, checks, seqs = RUNNERS[spec["kind"]](spec)
    return {"version": __version__, "kind": spec["kind"], "inputs": spec,
            "result": jsonable(result), "sequences": jsonable(seqs), "checks": checks,
            "pass": all(c["pass"] for c in checks)}


def emit_report(report, fmt="json", out=None) -> str:
    """Serialise deterministically; write to ``out`` (file or directory) if given."""
    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
        name = "report.json"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        seqs = report.get("sequences", {})
        if "g_table" in seqs:
            w.writerow(["n", "alpha", "g"])
            w.writerows(seqs["g_table"])
        else:
            w.writerow(["n", "value", "lo", "hi"])
            for key in sorted(seqs):
                w.writerows(seqs[key])
        text = buf.getvalue()
        name = "report.csv"
    if out:
        path = os.path.join(out, name) if os.path.isdir(out) else out
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise ArakelovError(f"cannot write {path}: {exc}") from None
    return text


# ---------------------------------------------------------------- argument parsing

def _common(p):
    p.add_argument("--spec", help="input JSON file")
    p.add_argument("--nmax", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--schedule", help="comma-separated rationals, e.g. 1/2,1/4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--csv", help="also write the CSV sequences here")


def build_parser():
    ap = argparse.ArgumentParser(prog="arakelov", description="Adelic bundles and arithmetic volumes on P^1.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bundle", help="HN filtration, successive minima")
    b.add_argument("op", choices=["hn", "minima", "degree"])
    _common(b)
    o = sub.add_parser("okounkov", help="Okounkov body and concave transform")
    o.add_argument("op", choices=["transform"])
    _common(o)
    v = sub.add_parser("volumes", help="volume estimators")
    v.add_argument("which", choices=["chi", "vol", "volI"])
    _common(v)
    e = sub.add_parser("experiment", help="continuity and trivially valued experiments")
    e.add_argument("name", choices=["continuity", "trivial-mode"])
    _common(e)
    d = sub.add_parser("decompose", help="ample decomposition of a divisor")
    d.add_argument("--divisor", required=True, help="divisor JSON file")
    _common(d)
    r = sub.add_parser("run", help="run an ExperimentSpec")
    _common(r)
    return ap


def spec_from_args(args) -> dict:
    if args.command == "decompose":
        return {"kind": "decompose", "inputs": {"divisor": _load(args.divisor)}}
    if not args.spec:
        raise SchemaError("--spec is required", "spec")
    raw = _load(args.spec)
    if args.command == "run":
        spec = raw
    elif args.command == "bundle":
        spec = {"kind": "bundle", "inputs": {"bundle": raw}, "ops": [args.op, "degree"]}
    elif args.command == "okounkov":
        spec = {"kind": "okounkov", "inputs": {"series": raw}}
    elif args.command == "volumes":
        spec = {"kind": "volumes", "inputs": {"series": raw, "which": [args.which]}}
    elif args.name == "continuity":
        spec = {"kind": "continuity", "inputs": raw}
    else:
        spec = {"kind": "trivial-mode", "inputs": raw}
    spec = dict(spec)
    if args.nmax is not None:
        spec["n_max"] = args.nmax
    if args.cap is not None:
        spec["cap"] = args.cap
    if args.tol is not None:
        spec.setdefault("tolerances", {})["default"] = args.tol
    if args.schedule is not None:
        spec["schedule"] = [s for s in args.schedule.split(",") if s.strip()]
    if args.seed:
        spec["seed"] = args.seed
    return spec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        spec = spec_from_args(args)
        report = run_experiment(spec)
        fmt = args.format if args.command != "run" else spec.get("format", args.format)
        text = emit_report(report, fmt, args.out)
        if args.csv:
            emit_report(report, "csv", args.csv)
    except ArakelovError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "field": getattr(exc, "field", None)}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 2
    if not args.out:
        sys.stdout.write(text)
    print(f"wall time {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
