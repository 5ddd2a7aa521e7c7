"""``bilinext`` command line: run verification suites and one-off computations.

Exit codes: 0 when every check passes, 1 when an invariant fails, 2 for
usage or input errors, 3 for unreadable files.
"""
from __future__ import annotations

import argparse
import csv
import io as _stringio
import sys

from ._ascent import NonConvergenceError, OptimizerConfig
from .bilinear_maps import bilinear_norm
from .extension import extend_bilinear
from .io import (SchemaError, bilinear_from_dict, dump_json, extension_problem_from_dict,
                 linear_map_from_dict, load_json, projection_from_dict, tensor_from_dict)
from .normed_spaces import operator_norm
from .suites import SUITE_SUMMARIES, SUITES, SuiteSpec, UsageError, run_suite
from .tensor_norms import projective_norm

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _tolerance(text):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VAL, got {text!r}")
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {key} must be a number") from None


def _exponent(text):
    return float("inf") if text.lower() in ("inf", "infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bilinext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    listing = "\n".join(f"  {k:<15}{v}" for k, v in SUITE_SUMMARIES.items())
    s = sub.add_parser("suite", help="run a randomized verification suite",
                       epilog="suites:\n" + listing,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    s.add_argument("--id", dest="suite_id", required=True, choices=sorted(SUITES))
    s.add_argument("--trials", type=int)
    s.add_argument("--dims", type=int, help="upper bound for random dimensions (1..8)")
    s.add_argument("--p", dest="p_values", type=_exponent, nargs="+",
                   help="exponents to draw from, e.g. --p 1 2 inf")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=32)
    s.add_argument("--tol", type=_tolerance, action="append", default=[],
                   metavar="KEY=VAL", help="override a tolerance of the suite")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.add_argument("--out", help="write the JSON report here instead of stdout")
    s.add_argument("--csv", action="store_true", help="emit one CSV row per trial")
    s.add_argument("--no-timing", action="store_true", help="omit timing fields")

    c = sub.add_parser("compute", help="evaluate a norm or an extension from a JSON file")
    c.add_argument("what", choices=["op-norm", "bilinear-norm", "tensor-norm", "extend"])
    c.add_argument("file")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--restarts", type=int, default=32)
    c.add_argument("--out")
    c.add_argument("--csv", action="store_true", help="emit a flat CSV row")
    return parser


def _flatten(d, prefix=""):
    out = {}
    for key, value in d.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        elif isinstance(value, (int, float, str, bool)) or value is None:
            out[name] = value
    return out


def _csv(rows) -> str:
    buf = _stringio.StringIO()
    fields = sorted({k for row in rows for k in row})
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text, out):
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text if text.endswith("\n") else text + "\n")
        except OSError as exc:
            print(f"bilinext: cannot write {out}: {exc.strerror or exc}", file=sys.stderr)
            raise SystemExit(EXIT_IO)
    else:
        print(text)


def _compute(args) -> dict:
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed)
    data = load_json(args.file)
    optimizer = {"restarts": cfg.restarts, "seed": cfg.seed}
    if args.what == "op-norm":
        if isinstance(data, dict) and "range" in data:
            lin = projection_from_dict(data).underlying
        else:
            lin = linear_map_from_dict(data)
        return {"operator_norm": operator_norm(lin, cfg), "optimizer": optimizer}
    if args.what == "bilinear-norm":
        return {"bilinear_norm": bilinear_norm(bilinear_from_dict(data), cfg),
                "optimizer": optimizer}
    if args.what == "tensor-norm":
        return projective_norm(tensor_from_dict(data), cfg).to_dict()
    phi, M, N, E, P = extension_problem_from_dict(data)
    return extend_bilinear(phi, M, N, E, P, cfg).to_dict()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "suite":
            spec = SuiteSpec(args.suite_id, args.trials, args.dims, args.p_values, args.seed,
                             dict(args.tol), args.restarts)
            report = run_suite(spec, jobs=max(1, args.jobs))
            data = report.to_dict(timing=not args.no_timing)
            if args.csv:
                rows = [{"trial": r["trial"], "seed": r["seed"], **r["values"]}
                        for r in data["trials"]]
                _emit(_csv(rows), args.out)
            else:
                _emit(dump_json(data), args.out)
            status = "PASS" if report.passed else "FAIL"
            print(f"{report.suite_id}: {status} ({report.trials_run} trials, "
                  f"{len(report.failures)} failures)", file=sys.stderr)
            return EXIT_OK if report.passed else EXIT_FAIL
        result = _compute(args)
        _emit(_csv([_flatten(result)]) if args.csv else dump_json(result), args.out)
        return EXIT_OK
    except (UsageError, SchemaError) as exc:
        print(f"bilinext: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bilinext: {exc}", file=sys.stderr)
        return EXIT_IO
    except NonConvergenceError as exc:
        print(f"bilinext: optimizer did not converge (best value {exc.best})", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"bilinext: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
