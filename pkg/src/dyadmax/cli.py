"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 usage or domain
error, 3 I/O error.  Every number printed comes from a library call.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import yaml

from . import scalars
from .errors import DomainError, NumericError, ResourceError
from .extremizer import SHARPNESS_COLUMNS, sharpness_report
from .scalars import RootConfig
from .svg import loglog_svg
from .verify import CHECKS, VerificationPlan, run_plan

OUT_DIR_ENV = "DYADMAX_OUT_DIR"

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

# built-in defaults, applied after config file values and explicit flags
DEFAULTS = {
    "format": None,
    "tol": 1e-12,
    "samples": 500,
    "seed": 0,
    "depth": "10",
    "tree": "binary",
    "betas": "0.1,0.5,1,2,5",
    "pq": "2:1.5,3:2,1.5:1.2",
    "laws": "uniform,lognormal,spikes",
    "checks": ",".join(CHECKS),
    "ks": "4,16,64,256",
    "rank": "auto",
    "alphas": "1e-1,1e-2,1e-3,1e-4",
}

EVAL_NEEDS = {
    "omega": ("p", "tau"),
    "H": ("p", "z"),
    "bellman2": ("p", "f", "F"),
    "bellman3": ("p", "q", "f", "A"),
    "surfaceF": ("p", "q", "f", "A"),
    "beta": ("p", "q", "f", "F"),
    "bound3": ("p", "q", "f", "A", "F"),
}


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from exc


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def rows_to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _resolve(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    return p if p.is_absolute() or not base else Path(base) / p


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    path = _resolve(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"))
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--config", help="flat YAML file of flag values; flags win")
    common.add_argument("--tol", type=float, help="root-finder bracket tolerance")

    parser = argparse.ArgumentParser(prog="dyadmax", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="evaluate a scalar function")
    ev.add_argument("quantity", choices=sorted(EVAL_NEEDS))
    for name in ("p", "q", "f", "A", "F", "tau", "z"):
        ev.add_argument(f"--{name}", type=float)

    ve = sub.add_parser("verify", parents=[common], help="run the randomized inequality net")
    ve.add_argument("--samples", type=int)
    ve.add_argument("--seed", type=int)
    ve.add_argument("--depth", help="tree depth N or range MIN-MAX")
    ve.add_argument("--tree", choices=("binary", "triadic", "random", "mixed"))
    ve.add_argument("--betas")
    ve.add_argument("--pq", help="comma-separated p:q pairs")
    ve.add_argument("--laws")
    ve.add_argument("--checks")

    ex = sub.add_parser("extremize", parents=[common], help="extremizer sharpness sweep")
    for name in ("p", "q", "f", "A"):
        ex.add_argument(f"--{name}", type=float)
    ex.add_argument("--ks", help="comma-separated k values (alpha = 1/k)")
    ex.add_argument("--rank", help="'auto' or a truncation rank")
    ex.add_argument("--svg", help="write a log-log plot of abs_err_z against k")

    sw = sub.add_parser("sweep", parents=[common], help="alpha sweep of z(alpha, tau) toward omega_q(tau)")
    sw.add_argument("--q", type=float)
    sw.add_argument("--tau", type=float)
    sw.add_argument("--alphas")
    return parser


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
        raise UsageError(f"config {path} must be a flat mapping of flag names to values")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def merge(args: argparse.Namespace) -> dict:
    cfg = load_config(args.config)
    merged = {}
    for key, val in vars(args).items():
        if val is not None:
            merged[key] = val
        elif key in cfg:
            merged[key] = cfg[key]
        else:
            merged[key] = DEFAULTS.get(key)
    return merged


def _need(opts: dict, names) -> list[float]:
    missing = [n for n in names if opts.get(n) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join(f"--{n}" for n in missing))
    return [float(opts[n]) for n in names]


def cmd_eval(opts: dict, root: RootConfig) -> int:
    quantity = opts["quantity"]
    vals = _need(opts, EVAL_NEEDS[quantity])
    fn = {
        "omega": lambda p, tau: scalars.omega(p, tau, root),
        "H": scalars.H,
        "bellman2": lambda p, f, F: scalars.bellman_two(p, f, F, root),
        "bellman3": lambda p, q, f, A: scalars.bellman_three_on_surface(p, q, f, A, root),
        "surfaceF": lambda p, q, f, A: scalars.F_of_surface(p, q, f, A, root),
        "beta": lambda p, q, f, F: scalars.beta_from_fF(p, q, f, F, root),
        "bound3": lambda p, q, f, A, F: scalars.upper_bound_three(p, q, f, A, F, root),
    }[quantity]
    value = fn(*vals)
    fmt = opts["format"] or "text"
    if fmt == "json":
        inputs = dict(zip(EVAL_NEEDS[quantity], vals))
        text = json.dumps({"quantity": quantity, "inputs": inputs, "value": value}, sort_keys=True) + "\n"
    elif fmt == "csv":
        text = f"quantity,value\n{quantity},{value!r}\n"
    else:
        text = f"{value:.15g}\n"
    _emit(text, opts["out"])
    return EXIT_OK


def _depth_range(text) -> tuple[int, int]:
    parts = str(text).split("-")
    try:
        lo, hi = (int(parts[0]), int(parts[-1]))
    except ValueError as exc:
        raise UsageError(f"--depth must be N or MIN-MAX, got {text!r}") from exc
    return lo, hi


def cmd_verify(opts: dict, root: RootConfig) -> int:
    pairs = []
    for item in str(opts["pq"]).split(","):
        try:
            p, q = item.split(":")
            pairs.append((float(p), float(q)))
        except ValueError as exc:
            raise UsageError(f"--pq entries must look like P:Q, got {item!r}") from exc
    lo, hi = _depth_range(opts["depth"])
    plan = VerificationPlan(
        seed=int(opts["seed"]), samples=int(opts["samples"]), tree=opts["tree"],
        min_depth=lo, max_depth=hi,
        value_laws=tuple(s.strip() for s in str(opts["laws"]).split(",") if s.strip()),
        pq_grid=tuple(pairs), betas=tuple(_floats(opts["betas"])),
        checks=tuple(s.strip() for s in str(opts["checks"]).split(",") if s.strip()))
    report = run_plan(plan, root)
    fmt = opts["format"] or "json"
    _emit(report.summary_csv() if fmt == "csv" else report.to_json(), opts["out"])
    return EXIT_OK if report.ok else EXIT_CHECK


def cmd_extremize(opts: dict, root: RootConfig) -> int:
    p, q, f, A = _need(opts, ("p", "q", "f", "A"))
    ks = _ints(opts["ks"])
    if not ks or any(k < 2 for k in ks):
        raise UsageError(f"--ks needs integers >= 2, got {opts['ks']!r}")
    rank = None if str(opts["rank"]) == "auto" else int(opts["rank"])
    rows = sharpness_report(p, q, f, A, ks, root, rank)
    fmt = opts["format"] or "csv"
    if fmt == "json":
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    else:
        text = rows_to_csv(rows, SHARPNESS_COLUMNS)
    _emit(text, opts["out"])
    if opts.get("svg"):
        svg = loglog_svg([r["k"] for r in rows], [r["abs_err_z"] for r in rows],
                         "k (alpha = 1/k)", "|z^p - omega_q^p|",
                         f"p={p:g} q={q:g} f={f:g} A={A:g}")
        _emit(svg, opts["svg"])
    return EXIT_OK


def cmd_sweep(opts: dict, root: RootConfig) -> int:
    q, tau = _need(opts, ("q", "tau"))
    target = scalars.omega(q, tau, root)
    rows = []
    for a in _floats(opts["alphas"]):
        z = scalars.solve_z(q, a, tau, root)
        rows.append({"alpha": a, "z": z, "omega_q": target, "abs_gap": abs(z - target)})
    fmt = opts["format"] or "csv"
    cols = ("alpha", "z", "omega_q", "abs_gap")
    text = json.dumps(rows, indent=2, sort_keys=True) + "\n" if fmt == "json" else rows_to_csv(rows, cols)
    _emit(text, opts["out"])
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "extremize": cmd_extremize, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        opts = merge(args)
        root = RootConfig(tol=float(opts["tol"]))
        return COMMANDS[args.command](opts, root)
    except (DomainError, NumericError, ResourceError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
