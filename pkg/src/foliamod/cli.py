"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure (non-convergence or singular geometry).
"""

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import analysis, gallery, geometry, modulus, quadrature, verify
from .errors import (FoliamodError, NonConvergenceError, PreconditionError,
                     SingularGeometryError, UnsupportedExponentError, check_exponent)
from .optimizer import solve_global

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

EXPORT_FIELDS = ("f0", "jac", "hat1", "meancurv", "f_opt")

CONFIG_KEYS = ("example", "params", "p", "grid", "suite", "seed", "out", "format",
               "n_phi", "p_list", "field", "max_iters")


class ConfigError(PreconditionError):
    pass


def _parse_params(items):
    params = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        params[key.strip()] = value.strip()
    return params


def _parse_grid(text, chart):
    if text is None:
        return quadrature.default_counts(chart)
    if isinstance(text, (list, tuple)):
        counts = [int(c) for c in text]
    else:
        try:
            counts = [int(c) for c in str(text).replace("x", ",").split(",") if c.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --grid value {text!r}") from exc
    if len(counts) == 1:
        counts = counts * chart.dim_total
    return counts


def _parse_p_list(text):
    if text is None:
        return []
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --p-list value {text!r}") from exc


def load_config(path):
    """Read a JSON config whose keys mirror the command-line flags."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _resolve(args):
    """Merge config file and flags (flags win) into one dict."""
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    merged = dict(cfg)
    merged["params"] = {str(k): v for k, v in (cfg.get("params") or {}).items()}
    merged["params"].update(_parse_params(getattr(args, "param", None)))
    for key in ("example", "p", "grid", "suite", "seed", "out", "format", "n_phi",
                "p_list", "field", "max_iters"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    merged.setdefault("example", "torus")
    merged.setdefault("p", 2.0)
    merged.setdefault("seed", 0)
    merged.setdefault("format", "json")
    merged.setdefault("n_phi", 10)
    return merged


def _setup(cfg):
    chart = gallery.build_example(cfg["example"], **cfg["params"])
    quad = quadrature.build_quadrature(chart, _parse_grid(cfg.get("grid"), chart))
    bundle = geometry.densities(chart, quad)
    return chart, quad, bundle


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(type(o).__name__)
    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def cmd_list(args):
    rows = []
    for name, desc in gallery.EXAMPLES.items():
        rows.append({
            "name": name,
            "description": desc.description,
            "params": {ps.name: ps.default for ps in desc.params},
            "validity": desc.validity,
        })
    if args.json:
        sys.stdout.write(_json(rows))
        return EXIT_OK
    for row in rows:
        params = ", ".join(f"{k}={v}" for k, v in row["params"].items())
        sys.stdout.write(f"{row['name']:<14} {row['description']}\n"
                         f"{'':<14} params: {params}\n"
                         f"{'':<14} valid:  {row['validity']}\n")
    return EXIT_OK


def _solver_cfg(cfg):
    from .optimizer import SolverConfig
    if cfg.get("max_iters") is None:
        return None
    return SolverConfig(max_iters=int(cfg["max_iters"]))


def cmd_compute(args):
    cfg = _resolve(args)
    p = check_exponent(cfg["p"])
    chart, quad, bundle = _setup(cfg)
    rng = np.random.default_rng(int(cfg["seed"]))
    phis = [verify.random_trig_field(quad, rng) for _ in range(int(cfg["n_phi"]))]
    report = modulus.compute_report(chart, quad, bundle, p, solver_cfg=_solver_cfg(cfg),
                                    with_optimizer=not args.no_optimizer, phis=phis)
    data = report.to_dict(timings=args.timings)
    ok = (report.cross_route_error <= verify.CROSS_ROUTE_TOL
          and report.norm_residual <= verify.NORM_TOL_CLOSED
          and max(report.intformula_residuals, default=0.0) <= verify.INTFORMULA_TOL)
    data["passed"] = bool(ok)
    if cfg["format"] == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        scalars = {k: v for k, v in data.items() if isinstance(v, (int, float, bool))}
        writer.writerow(sorted(scalars))
        writer.writerow([repr(scalars[k]) for k in sorted(scalars)])
        _emit(buf.getvalue(), cfg.get("out"))
    else:
        _emit(_json(data), cfg.get("out"))
    if not ok:
        sys.stderr.write("cross-route or normalization residual above tolerance\n")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_verify(args):
    cfg = _resolve(args)
    p = check_exponent(cfg["p"])
    chart, quad, bundle = _setup(cfg)
    ctx = verify.Context(chart, quad, bundle, p, seed=int(cfg["seed"]), n_phi=int(cfg["n_phi"]))
    results = verify.run_suite(ctx, cfg.get("suite") or "all")
    if cfg["format"] == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check", "status", "value", "tol", "reason"])
        for r in results:
            status = "skip" if r.skipped else ("pass" if r.passed else "fail")
            writer.writerow([r.name, status, repr(float(r.value)), repr(r.tol), r.reason])
        text = buf.getvalue()
    elif cfg["format"] == "json":
        text = _json([vars(r) for r in results])
    else:
        text = "".join(r.line() + "\n" for r in results)
    _emit(text, cfg.get("out"))
    failed = [r.name for r in results if not r.passed]
    if failed:
        sys.stderr.write(f"failed checks: {', '.join(failed)}\n")
        return EXIT_VERIFY
    return EXIT_OK


def _export_values(name, chart, quad, bundle, p):
    if name == "f0":
        return modulus.closed_form_extremal(bundle, quad, p)[..., None], ["f0"]
    if name == "jac":
        return bundle.jac[..., None], ["jac"]
    if name == "hat1":
        return quadrature.hat(np.ones(quad.shape), bundle, quad)[..., None], ["hat1"]
    if name == "meancurv":
        H = analysis.mean_curvature_orthogonal(chart, quad.points)
        return H.coeffs, [f"H_{a}" for a in chart.axis_names]
    if name == "f_opt":
        return solve_global(bundle, quad, p).field[..., None], ["f_opt"]
    raise ConfigError(f"unknown field {name!r}; choose from {EXPORT_FIELDS}")


def cmd_export(args):
    cfg = _resolve(args)
    p = check_exponent(cfg["p"])
    name = cfg.get("field")
    if name not in EXPORT_FIELDS:
        raise ConfigError(f"unknown field {name!r}; choose from {EXPORT_FIELDS}")
    chart, quad, bundle = _setup(cfg)
    values, columns = _export_values(name, chart, quad, bundle, p)
    coords = quad.points.reshape(-1, chart.dim_total)
    flat = values.reshape(coords.shape[0], -1)
    header = list(chart.axis_names) + columns
    if cfg["format"] == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for c, v in zip(coords, flat):
            writer.writerow([repr(float(x)) for x in c] + [repr(float(x)) for x in v])
        text = buf.getvalue()
    else:
        text = _json({"field": name, "columns": header,
                      "rows": np.concatenate([coords, flat], axis=1)})
    _emit(text, cfg.get("out"))
    return EXIT_OK


def cmd_sweep(args):
    cfg = _resolve(args)
    p_list = [check_exponent(p) for p in _parse_p_list(cfg.get("p_list"))]
    rows = []
    if p_list:
        chart, quad, bundle = _setup(cfg)
        for p in p_list:
            t0 = time.perf_counter()
            rep = modulus.compute_report(chart, quad, bundle, p, solver_cfg=_solver_cfg(cfg))
            rows.append({"p": p, "mod_closed": rep.mod_closed, "mod_direct": rep.mod_direct,
                         "mod_opt": rep.mod_opt, "cross_route_error": rep.cross_route_error,
                         "passed": rep.cross_route_error <= verify.CROSS_ROUTE_TOL,
                         "runtime_s": time.perf_counter() - t0})
        mods = [r["mod_closed"] for r in rows]
        order = np.argsort(p_list)
        diffs = np.diff(np.array(mods)[order])
        trend = ("decreasing" if np.all(diffs < 0) else
                 "increasing" if np.all(diffs > 0) else "mixed") if len(rows) > 1 else "n/a"
        for r in rows:
            r["trend_in_p"] = trend
    columns = ["p", "mod_closed", "mod_direct", "mod_opt", "cross_route_error", "passed",
               "runtime_s", "trend_in_p"]
    if cfg["format"] == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([r[c] if isinstance(r[c], (str, bool)) else repr(float(r[c]))
                             for c in columns])
        text = buf.getvalue()
    else:
        text = _json(rows)
    _emit(text, cfg.get("out"))
    return EXIT_OK if all(r["passed"] for r in rows) else EXIT_VERIFY


def _common(parser, suite=False):
    parser.add_argument("--config", help="JSON file with the same keys as the flags")
    parser.add_argument("--example", choices=sorted(gallery.EXAMPLES))
    parser.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="example parameter (repeatable)")
    parser.add_argument("--p", type=float, help="exponent p > 1 (default 2)")
    parser.add_argument("--grid", help="node counts per axis, e.g. 64,64 (default 64 periodic / 48 other)")
    parser.add_argument("--seed", type=int, help="seed for random test functions")
    parser.add_argument("--n-phi", dest="n_phi", type=int, help="number of random test functions")
    parser.add_argument("--max-iters", dest="max_iters", type=int, help="optimizer iteration cap")
    parser.add_argument("--out", help="output file (default stdout)")
    parser.add_argument("--format", choices=("csv", "json", "text") if suite else ("csv", "json"))


def build_parser():
    parser = argparse.ArgumentParser(prog="foliamod",
                                     description="p-modulus of foliations given by submersions")
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list built-in examples")
    p_list.add_argument("--json", action="store_true", help="machine-readable output")
    p_list.set_defaults(func=cmd_list)

    p_comp = sub.add_parser("compute", help="modulus by closed form, direct norm and optimizer")
    _common(p_comp)
    p_comp.add_argument("--no-optimizer", action="store_true")
    p_comp.add_argument("--timings", action="store_true", help="include wall-clock timings")
    p_comp.set_defaults(func=cmd_compute)

    p_ver = sub.add_parser("verify", help="run verification checks")
    _common(p_ver, suite=True)
    p_ver.add_argument("--suite", help=f"'all' or one of: {', '.join(verify.SUITES)}")
    p_ver.set_defaults(func=cmd_verify)

    p_exp = sub.add_parser("export", help="write a grid field as a table")
    _common(p_exp)
    p_exp.add_argument("--field", required=False, choices=EXPORT_FIELDS)
    p_exp.set_defaults(func=cmd_export)

    p_sw = sub.add_parser("sweep", help="modulus for several exponents")
    _common(p_sw)
    p_sw.add_argument("--p-list", dest="p_list", help="comma-separated exponents")
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "format", None) is None and args.command == "verify":
        args.format = "text"
    try:
        return args.func(args)
    except UnsupportedExponentError as exc:
        sys.stderr.write(f"error: unsupported exponent: {exc}\n")
        return EXIT_CONFIG
    except (NonConvergenceError, SingularGeometryError) as exc:
        sys.stderr.write(f"error: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (PreconditionError, FoliamodError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
