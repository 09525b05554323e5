"""Command-line entry point.

Exit codes: 0 on success, 1 when the numerical engine fails, 2 for bad
configuration (malformed JSON, unknown names, inconsistent flags).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Optional, Sequence

from . import fields as fm
from . import harness
from .estimators import estimate_on_grid, grid_axes
from .kernels import BandwidthError, KernelSpec, resolve_bandwidth, validate_kernel
from .lattice import LatticeSpec, fourier_grid
from .spectra import fourier_coefficients, periodogram

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class UsageError(Exception):
    """Bad flags or input files; mapped to exit code 2."""


def parse_lattice(text: str) -> LatticeSpec:
    try:
        a, b = text.lower().replace(",", "x").split("x")
        return LatticeSpec(int(a), int(b))
    except ValueError as exc:
        raise UsageError(f"--lattice: expected 'd1xd2' with both sides >= 2, got {text!r} ({exc})") from None


def parse_bandwidth(text: str, spec: LatticeSpec):
    if text.startswith("pow:"):
        try:
            return resolve_bandwidth(text, spec)
        except ValueError:
            raise UsageError(f"--bandwidth: bad exponent in {text!r}") from None
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"--bandwidth: expected 'h', 'h1,h2' or 'pow:<beta>', got {text!r}") from None
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2 or min(parts) <= 0:
        raise UsageError("--bandwidth: expected one or two positive numbers")
    return tuple(parts)


def _read_json(path: str, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise UsageError(f"{what} {path}: {exc.strerror}") from None


def _load_model(path: str):
    doc = _read_json(path, "model file")
    try:
        return fm.model_from_dict(doc)
    except fm.ModelSpecError as exc:
        raise UsageError(f"model file {path}: field {exc}") from None


def _kernel(args, spec: LatticeSpec) -> KernelSpec:
    try:
        return KernelSpec(args.kernel, parse_bandwidth(args.bandwidth, spec))
    except ValueError as exc:
        raise UsageError(f"--kernel/--bandwidth: {exc}") from None


def _out_dir(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise UsageError(f"output location {parent} is not a writable directory")


def _load_field(path: str, lattice: Optional[str]):
    spec = parse_lattice(lattice) if lattice else None
    try:
        return fm.FieldGrid.from_csv(path, spec)
    except OSError as exc:
        raise UsageError(f"field file {path}: {exc.strerror}") from None
    except (ValueError, KeyError) as exc:
        raise UsageError(f"field file {path}: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    model = _load_model(args.model)
    spec = parse_lattice(args.lattice)
    _out_dir(args.out)
    v = fm.simulate(model, spec, seed=args.seed)
    v.to_csv(args.out)
    vals = v.values
    print(f"simulated {spec.label()} {model.variant}: mean={vals.mean():.6g} variance={vals.var():.6g}")
    return EXIT_OK


def cmd_transform(args) -> int:
    v = _load_field(args.field, args.lattice)
    _out_dir(args.out)
    table = fourier_coefficients(v)
    pg = periodogram(table)
    l1, l2 = fourier_grid(v.spec)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j1", "j2", "lambda1", "lambda2", "x", "y", "I"])
        for j2 in range(1, v.spec.d2 + 1):
            for j1 in range(1, v.spec.d1 + 1):
                i1, i2 = j1 - 1, j2 - 1
                w.writerow([j1, j2, f"{l1[i1]:.17g}", f"{l2[i2]:.17g}", f"{table.x[i1, i2]:.17g}",
                            f"{table.y[i1, i2]:.17g}", f"{pg.values[i1, i2]:.17g}"])
    print(f"wrote {v.spec.size} frequencies to {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    v = _load_field(args.field, args.lattice)
    kernel = _kernel(args, v.spec)
    try:
        grid_axes(v.spec, args.grid)
    except ValueError as exc:
        raise UsageError(f"--grid: {exc}") from None
    reference = None
    if args.truth:
        model = _load_model(args.truth)
        if not fm.has_closed_form(model):
            raise UsageError(f"--truth: {model.variant} has no closed-form spectrum")
        reference = lambda a, b: fm.theoretical_spectrum(model, a, b)  # noqa: E731
    _out_dir(args.out)
    try:
        est = estimate_on_grid(v, kernel, args.grid, method=args.method, reference=reference)
    except BandwidthError as exc:
        raise UsageError(f"--bandwidth: {exc}") from None
    est.to_csv(args.out)
    msg = f"wrote {est.values.size} estimates to {args.out}"
    if reference is not None:
        msg += f"; sup error {est.sup_error():.6g}"
    print(msg)
    return EXIT_OK


def _bandwidth_override(text: str):
    if text.startswith("pow:"):
        return text
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"--bandwidth: expected 'h', 'h1,h2' or 'pow:<beta>', got {text!r}") from None
    return parts * 2 if len(parts) == 1 else parts


def cmd_experiment(args) -> int:
    doc = _read_json(args.config, "config")
    if isinstance(doc, dict):
        if args.reps is not None:
            doc["replications"] = args.reps
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.lattice:
            doc["lattices"] = list(args.lattice)
        if args.kernel or args.bandwidth:
            kern = dict(doc.get("kernel", {}))
            if args.kernel:
                kern["family"] = args.kernel
            if args.bandwidth:
                kern["bandwidth"] = _bandwidth_override(args.bandwidth)
            doc["kernel"] = kern
    try:
        config = harness.config_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(args.config)))
    except (harness.ConfigError, fm.ModelSpecError) as exc:
        raise UsageError(f"config {args.config}: {exc}") from None
    os.makedirs(args.out_dir, exist_ok=True)
    if not os.access(args.out_dir, os.W_OK):
        raise UsageError(f"--out-dir {args.out_dir} is not writable")
    report = harness.run_experiment(config, threads=args.threads)
    report.to_json(os.path.join(args.out_dir, "report.json"))
    report.to_csv(os.path.join(args.out_dir, "report.csv"))
    for row in report.rows:
        se = "null" if row.se is None else f"{row.se:.3g}"
        print(f"{row.lattice:>8} {row.statistic:<14} {row.estimate:.6g} (se {se}, n={row.reps})")
    print(f"wrote report.json and report.csv to {args.out_dir} in {report.wall_clock:.2f}s")
    return EXIT_OK


def cmd_validate_kernel(args) -> int:
    spec = parse_lattice(args.lattice)
    kernel = _kernel(args, spec)
    report = validate_kernel(kernel, spec, uniform_points=args.points).as_dict()
    text = json.dumps({"lattice": spec.label(), "family": kernel.family, "bandwidth": list(kernel.bandwidth),
                       **report}, indent=2)
    if args.out:
        _out_dir(args.out)
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latticespec", description="Spectral analysis of lattice random fields.")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for experiments (default: $LATTICESPEC_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a field model to CSV")
    s.add_argument("--model", required=True, help="model JSON file")
    s.add_argument("--lattice", required=True, help="lattice as d1xd2")
    s.add_argument("--seed", type=int, default=None, help="overrides the model's innovation seed")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("transform", help="Fourier coefficients and periodogram of a field CSV")
    s.add_argument("--field", required=True)
    s.add_argument("--lattice", default=None, help="declared lattice; checked against the CSV")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("estimate", help="kernel spectral density estimate on a grid")
    s.add_argument("--field", required=True)
    s.add_argument("--lattice", default=None)
    s.add_argument("--kernel", default="epanechnikov")
    s.add_argument("--bandwidth", default="0.4,0.4", help="'h', 'h1,h2' or 'pow:<beta>'")
    s.add_argument("--grid", default="fourier", help="'fourier' or 'uniform:<m>'")
    s.add_argument("--method", choices=("kernel", "lag"), default="kernel")
    s.add_argument("--truth", default=None, help="model JSON adding f_true and abs_err columns")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("experiment", help="run a Monte Carlo experiment config")
    s.add_argument("--config", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--reps", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--lattice", action="append", default=None, help="replace the lattice list (repeatable)")
    s.add_argument("--kernel", default=None)
    s.add_argument("--bandwidth", default=None)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("validate-kernel", help="numerical probes of the kernel regularity conditions")
    s.add_argument("--kernel", default="epanechnikov")
    s.add_argument("--bandwidth", default="0.4,0.4")
    s.add_argument("--lattice", default="64x64")
    s.add_argument("--points", type=int, default=64)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_validate_kernel)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be at least 1")
        if args.threads is None and os.environ.get("LATTICESPEC_THREADS"):
            try:
                harness.resolve_threads(None)
            except ValueError:
                raise UsageError("LATTICESPEC_THREADS must be a positive integer") from None
        return args.func(args)
    except (UsageError, harness.ConfigError, fm.ModelSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # engine failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
