"""``siegelkit`` command line.

Exit status: 0 on success, 1 when an operation rejects its input (the
message names the violated precondition), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import boundlab, gl2
from .decomp import DEFAULT_PRECISION, format_bigfloat, iwasawa, real_matrix
from .errors import SiegelkitError
from .exactmat import RationalMatrix, format_rational
from .gensiegel import SiegelTripleGLn, standardize, verify_containment
from .segments import leading_entries, segment_partition, witnessing_sequence
from .siegel import SiegelParams, in_siegel, reduce_to_siegel


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- serialization

def _columns_for(records, columns):
    if columns is not None:
        return tuple(columns)
    if records:
        return type(records[0]).CSV_COLUMNS
    return boundlab.ExperimentRecord.CSV_COLUMNS


def _row(record, precision):
    if isinstance(record, boundlab.ExperimentRecord):
        return record.csv_row(precision)
    return record.csv_row()


def _json_obj(record, precision, emit_matrices):
    if isinstance(record, boundlab.ExperimentRecord):
        return record.to_json(precision, emit_matrices)
    return record.to_json()


def render_records(records, fmt: str = "csv", columns=None, precision: int = DEFAULT_PRECISION,
                   emit_matrices: bool = False) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_columns_for(records, columns))
        for r in records:
            writer.writerow(_row(r, precision))
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([_json_obj(r, precision, emit_matrices) for r in records], indent=1) + "\n"
    raise ValueError(f"unknown record format {fmt!r}; expected 'csv' or 'json'")


def emit_records(records, fmt: str = "csv", path=None, columns=None,
                 precision: int = DEFAULT_PRECISION, emit_matrices: bool = False) -> None:
    """Write experiment or GL_2 records as CSV or JSON to ``path`` (stdout when None)."""
    text = render_records(list(records), fmt, columns, precision, emit_matrices)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write records to {path}: {exc.strerror or exc}") from exc


def parse_records(text: str, kind: str = "experiment", precision: int = DEFAULT_PRECISION):
    """Inverse of the JSON form of :func:`emit_records`."""
    data = json.loads(text)
    if kind == "experiment":
        return [boundlab.ExperimentRecord.from_json(d, precision) for d in data]
    return [gl2.GL2Record.from_json(d) for d in data]


# ---------------------------------------------------------------- input helpers

def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise SiegelkitError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_matrix_rows(path: str) -> list[list[str]]:
    """Matrix file: ``"a b; c d"`` text or a JSON array of arrays of strings."""
    text = _read(path).strip()
    if text.startswith("["):
        return [[str(x) for x in row] for row in json.loads(text)]
    return [c.split() for c in re.split(r"[;\n]", text) if c.strip()]


def load_exact(path: str) -> RationalMatrix:
    try:
        return RationalMatrix(load_matrix_rows(path))
    except ValueError as exc:
        raise SiegelkitError(f"{path}: {exc}") from None


def load_real(path: str, precision: int):
    rows = load_matrix_rows(path)
    try:
        return real_matrix(rows, precision)
    except ValueError as exc:
        raise SiegelkitError(f"{path}: malformed real entry ({exc})") from None


def _fmt_vec(values, p):
    return "(" + ", ".join(format_bigfloat(v, p) for v in values) + ")"


def _fmt_mat(m, p):
    return "\n".join("  " + "  ".join(format_bigfloat(v, p) for v in row) for row in m)


def _dec_json(dec, p):
    return {
        "nu": [[format_bigfloat(v, p) for v in row] for row in dec.nu],
        "alpha": [format_bigfloat(v, p) for v in dec.alpha],
        "kappa": [[format_bigfloat(v, p) for v in row] for row in dec.kappa],
    }


def _dec_text(dec, p):
    return f"nu =\n{_fmt_mat(dec.nu, p)}\nalpha = {_fmt_vec(dec.alpha, p)}\nkappa =\n{_fmt_mat(dec.kappa, p)}"


def _params(args) -> SiegelParams:
    try:
        return SiegelParams.from_values(args.u, args.t)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--u/--t: {exc}") from None


def _out(args, text: str) -> None:
    path = args.out
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------- subcommands

def cmd_decompose(args) -> int:
    p = args.precision
    dec = iwasawa(load_real(args.matrix, p), p)
    _out(args, json.dumps(_dec_json(dec, p), indent=1) if args.format == "json" else _dec_text(dec, p))
    return 0


def cmd_reduce(args) -> int:
    p = args.precision
    trace = [] if args.trace else None
    delta, dec = reduce_to_siegel(load_real(args.matrix, p), _params(args), args.tol, p, trace=trace)
    if args.format == "json":
        out = {"delta": delta.to_json(), **_dec_json(dec, p)}
        if trace is not None:
            out["potential"] = [format_bigfloat(v, p) for v in trace]
        _out(args, json.dumps(out, indent=1))
    else:
        text = f"delta =\n  {delta.to_text()}\n{_dec_text(dec, p)}"
        if trace is not None:
            text += "\npotential = " + _fmt_vec(trace, p)
        _out(args, text)
    return 0


def cmd_membership(args) -> int:
    p = args.precision
    ok, dec = in_siegel(load_real(args.matrix, p), _params(args), args.tol, p)
    if args.format == "json":
        _out(args, json.dumps({"member": ok, **_dec_json(dec, p)}, indent=1))
    else:
        _out(args, f"member = {str(ok).lower()}\n{_dec_text(dec, p)}")
    return 0


def _pair(text: str) -> tuple[int, int]:
    try:
        i, j = (int(s) for s in text.split(","))
    except ValueError:
        raise UsageError(f"--pair expects 'i,j', got {text!r}") from None
    return i, j


def cmd_segments(args) -> int:
    gamma = load_exact(args.matrix)
    lead = leading_entries(gamma)
    part = segment_partition(gamma)
    seq = witnessing_sequence(gamma, *_pair(args.pair)) if args.pair else None
    if args.format == "json":
        out = {"leading_entries": [list(e) for e in lead], "segments": part.blocks}
        if seq is not None:
            out["witnessing_sequence"] = [list(e) for e in seq]
        _out(args, json.dumps(out))
    else:
        lines = ["leading entries: " + " ".join(f"({e.row},{e.col})" for e in lead),
                 f"segments: {part}"]
        if seq is not None:
            lines.append("witnessing sequence: [" + ", ".join(f"({e.row},{e.col})" for e in seq) + "]")
        _out(args, "\n".join(lines))
    return 0


def cmd_experiment(args) -> int:
    try:
        config = boundlab.ExperimentConfig.from_json(_read(args.config))
    except (ValueError, TypeError) as exc:
        raise SiegelkitError(f"{args.config}: invalid experiment config ({exc})") from None
    overrides = {"seed": args.seed, "threads": args.threads, "precision": args.precision_override}
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    if args.timing:
        config.timing = True
    records, summary = boundlab.run_experiment(config)
    emit_records(records, args.format or "csv", args.out, precision=config.precision,
                 emit_matrices=args.emit_matrices)
    if args.summary:
        Path(args.summary).write_text(json.dumps(_summary_json(summary, config.precision), indent=1) + "\n")
    for f in summary["failures"]:
        print(f"sample with seed {f['seed']} failed: {f['error']}", file=sys.stderr)
    return 0


def _summary_json(summary, p):
    def conv(v):
        if isinstance(v, dict):
            return {str(k): conv(x) for k, x in v.items()}
        if isinstance(v, list):
            return [conv(x) for x in v]
        if isinstance(v, Fraction):
            return format_rational(v)
        if type(v).__name__ == "mpfr":
            return format_bigfloat(v, p)
        return v
    return conv(summary)


def cmd_gl2(args) -> int:
    p = args.precision
    try:
        x = gl2.UpperHalfPoint.parse(args.x, p)
    except ValueError as exc:
        raise UsageError(f"--x expects 're,im', got {args.x!r} ({exc})") from None
    records, summary = gl2.hp_experiment(x, args.nmax, p)
    emit_records(records, args.format or "csv", args.out)
    print(f"slope = {summary['slope']:.6f}  max H/N = {format_rational(summary['max_ratio'])}  "
          f"all in domain = {str(summary['all_in_domain']).lower()}", file=sys.stderr)
    return 0


def cmd_standardize(args) -> int:
    p = args.precision
    try:
        triple = SiegelTripleGLn.from_json(_read(args.triple), p)
    except (KeyError, ValueError, TypeError) as exc:
        raise SiegelkitError(f"{args.triple}: invalid triple ({exc})") from None
    result = standardize(triple, p)
    out = result.to_json()
    if args.verify:
        report = verify_containment(triple, result, grid=args.verify, seed=args.seed or 0, precision=p)
        out["containment"] = {"checked": report.checked, "failures": len(report.failures)}
    _out(args, json.dumps(out, indent=1))
    return 0


# ---------------------------------------------------------------- parser

_NO_PATH = object()


class _FormatAction(argparse.Action):
    """``--csv`` / ``--json`` select the format; an optional value is the output path."""

    def __call__(self, parser, namespace, values, option_string=None):
        namespace.format = option_string.lstrip("-")
        if values is not _NO_PATH:
            namespace.out = values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None,
                        help=f"working precision in bits (default {DEFAULT_PRECISION})")
    common.add_argument("--seed", type=int, default=None, help="64-bit seed")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--csv", dest="format", nargs="?", const=_NO_PATH, action=_FormatAction, metavar="PATH")
    common.add_argument("--json", dest="format", nargs="?", const=_NO_PATH, action=_FormatAction, metavar="PATH")

    siegel_args = argparse.ArgumentParser(add_help=False)
    siegel_args.add_argument("--u", default="1/2")
    siegel_args.add_argument("--t", default="sqrt3over2", help="rational or the token sqrt3over2")
    siegel_args.add_argument("--tol", type=float, default=1e-12)

    parser = argparse.ArgumentParser(prog="siegelkit", description="Reduction theory toolkit for GL_n.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="Iwasawa decomposition g = nu alpha kappa")
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reduce", parents=[common, siegel_args], help="reduce g into the Siegel set")
    p.add_argument("--matrix", required=True)
    p.add_argument("--trace", action="store_true", help="print the potential after every step")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("membership", parents=[common, siegel_args], help="test g against the Siegel set")
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_membership)

    p = sub.add_parser("segments", parents=[common], help="leading entries and segment partition")
    p.add_argument("--matrix", required=True)
    p.add_argument("--pair", help="'i,j' with i > j: also print a witnessing sequence")
    p.set_defaults(func=cmd_segments)

    p = sub.add_parser("experiment", parents=[common], help="witnessed-element height experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--emit-matrices", action="store_true", help="embed gamma in JSON output")
    p.add_argument("--timing", action="store_true", help="fill the ms column (breaks byte-reproducibility)")
    p.add_argument("--summary", help="write the JSON summary to this path")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gl2", parents=[common], help="heights of reduced isogeny matrices")
    p.add_argument("--x", default="0,1", help="base point 're,im'")
    p.add_argument("--nmax", type=int, default=500)
    p.set_defaults(func=cmd_gl2)

    p = sub.add_parser("standardize", parents=[common], help="standardize a Siegel triple")
    p.add_argument("--triple", required=True)
    p.add_argument("--verify", type=int, nargs="?", const=100, default=0, metavar="GRID",
                   help="also run the containment check on a grid (default 100 points)")
    p.set_defaults(func=cmd_standardize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.precision_override = args.precision
    if args.precision is None:
        args.precision = DEFAULT_PRECISION
    if args.precision < 32:
        print(f"siegelkit: error: --precision must be at least 32 bits, got {args.precision}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"siegelkit: error: {exc}", file=sys.stderr)
        return 2
    except (SiegelkitError, OSError) as exc:
        print(f"siegelkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
