"""``seqassort`` command line: batch evaluation with machine-readable reports.

Exit codes: 0 success (and, for evaluations, the guarantee passed),
1 guarantee failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from seqassort.conditions import Condition, check_instance, expected_conditions
from seqassort.errors import SeqAssortError
from seqassort.harness import (
    EvaluationReport,
    Given,
    UniformRandom,
    WorstCase,
    exact_evaluate,
    mc_evaluate,
)
from seqassort.instance import Instance
from seqassort.io import load_instance
from seqassort.lowerbounds import check_reduction, evaluate_thm53, make_reduction_appB
from seqassort.oracle import opt_stats
from seqassort.policies import (
    Alg1,
    Alg2,
    Alg3,
    Alg4,
    ApproxOracle,
    ConvexPI,
    Exact,
    External,
    MonteCarlo,
    compute_threshold,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
REDUCTION_TOL = 0.01

POLICIES = {
    "alg1:gamma": (Alg1, "gamma_tuned"),
    "alg1:half": (Alg1, "half"),
    "alg2:strong": (Alg2, "strong"),
    "alg2:weak": (Alg2, "weak"),
    "alg2:gammaweak": (Alg2, "gamma_weak"),
    "alg3:strong": (Alg3, "strong"),
    "alg3:weak": (Alg3, "weak"),
    "alg4:five": (Alg4, "five_competitive"),
    "alg4:eight": (Alg4, "eight_competitive"),
    "convexpi:half": (ConvexPI, "half_expected_max"),
    "convexpi:median": (ConvexPI, "median_max"),
}

# the reduction default: 1/r gaps of 0.5 keep every f(A) within 0.01 of min r at δ = 1e-6
DEFAULT_REDUCTION_MARGINALS = (
    ((0.5, 2.0), (0.5, 1.0)),
    ((0.5, 2 / 3), (0.5, 0.5)),
    ((0.5, 0.4), (0.5, 1 / 3)),
)


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"expected number(s), got {text!r}") from None


def parse_threshold_source(text: str, seed: int):
    kind, _, rest = text.partition(":")
    parts = rest.split(":") if rest else []
    if kind == "exact" and not parts:
        return Exact()
    if kind == "mc" and len(parts) == 1 and parts[0].isdigit() and int(parts[0]) > 0:
        return MonteCarlo(int(parts[0]), seed)
    if kind == "external" and 1 <= len(parts) <= 2:
        vals = _floats(parts[0])
        alpha = float(parts[1]) if len(parts) == 2 else 1.0
        return External(vals[0], vals[1] if len(vals) > 1 else None, alpha)
    if kind == "approx" and 2 <= len(parts) <= 3:
        vals = _floats(parts[1])
        gamma = float(parts[2]) if len(parts) == 3 else None
        return ApproxOracle(float(parts[0]), vals[0], gamma, vals[1] if len(vals) > 1 else None)
    raise UsageError(
        f"bad --threshold-source {text!r}; use exact | mc:N | external:v[:alpha] | approx:alpha:v[:gamma]"
    )


def parse_policy(text: str, source, seed: int):
    if text not in POLICIES:
        raise UsageError(f"unknown --policy {text!r}; choose from {', '.join(POLICIES)}")
    cls, variant = POLICIES[text]
    if cls is ConvexPI:
        return ConvexPI(variant, source)
    if cls is Alg4:
        return Alg4(variant, source, coin_seed=seed)
    return cls(variant, source)


def parse_order(text: str, seed: int):
    if text == "worst":
        return WorstCase()
    if text == "random":
        return UniformRandom(seed)
    if text.startswith("given:"):
        try:
            return Given(tuple(int(x) for x in text[6:].split(",")))
        except ValueError:
            raise UsageError(f"bad permutation in {text!r}") from None
    raise UsageError(f"bad --order {text!r}; use given:<perm> | random | worst")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def to_json(report: dict | list) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return " ".join(map(str, v))
    if isinstance(v, dict):
        return ";".join(f"{k}={_cell(x)}" for k, x in sorted(v.items()))
    return repr(v) if isinstance(v, float) else str(v)


def to_csv(report: dict | list) -> str:
    """Per-realization rows for evaluation reports, one row per record otherwise."""
    buf = _io.StringIO()
    if isinstance(report, dict) and "rows" in report:
        records = [
            {
                "prob": r["prob"],
                "atoms": r["atoms"],
                "opt": r["opt"],
                "policy_value": r["value"],
                "order": r["orders"],
                "collected": r["collected"],
            }
            for r in report["rows"]
        ]
        fields = ["prob", "atoms", "opt", "policy_value", "order", "collected"]
    else:
        records = report if isinstance(report, list) else [report]
        fields = sorted({k for rec in records for k in rec})
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for rec in records:
        writer.writerow([_cell(rec.get(f)) for f in fields])
    return buf.getvalue()


def emit_report(report: dict | list, fmt: str = "json", path: str | None = None) -> None:
    text = to_json(report) if fmt == "json" else to_csv(report)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _instance(args) -> Instance:
    if not args.instance:
        raise UsageError("--instance is required")
    return load_instance(args.instance)


def _config(args, default_policy: str | None = None):
    source = parse_threshold_source(args.threshold_source, args.seed)
    return parse_policy(args.policy or default_policy, source, args.seed)


def _evaluate(args, config) -> tuple[dict, int]:
    inst = _instance(args)
    order = parse_order(args.order, args.seed)
    if args.exact:
        rep: EvaluationReport = exact_evaluate(inst, config, order, args.tol, threads=args.threads)
    else:
        rep = mc_evaluate(inst, config, order, args.trials, args.seed, args.tol, threads=args.threads)
    return rep.to_dict(), EXIT_OK if rep.passed else EXIT_FAIL


def cmd_simulate(args):
    if not args.policy:
        raise UsageError("--policy is required")
    return _evaluate(args, _config(args))


def cmd_convexpi(args):
    if args.policy and not args.policy.startswith("convexpi:"):
        raise UsageError("convexpi takes --policy convexpi:half or convexpi:median")
    return _evaluate(args, _config(args, "convexpi:half"))


def cmd_threshold(args):
    if not args.policy:
        raise UsageError("--policy is required")
    inst = _instance(args)
    return compute_threshold(inst, _config(args), threads=args.threads).to_dict(), EXIT_OK


def cmd_oracle(args):
    inst = _instance(args)
    if args.exact:
        stats = opt_stats(inst, "exact", threads=args.threads)
    else:
        stats = opt_stats(inst, "monte_carlo", samples=args.trials, seed=args.seed, threads=args.threads)
    return stats.to_dict(), EXIT_OK


def cmd_conditions(args):
    inst = _instance(args)
    expected = expected_conditions(inst.model)
    if args.model_checks in ("all", "expected"):
        checks = expected
    else:
        try:
            checks = [Condition(c) for c in args.model_checks.split(",")]
        except ValueError:
            raise UsageError(
                f"bad --model-checks {args.model_checks!r}; use all or a list of "
                + ", ".join(c.value for c in Condition)
            ) from None
    reports = check_instance(inst, checks, args.tol, seed=args.seed)
    ok = all(r.holds for r in reports if r.condition in expected)
    return [r.to_dict() for r in reports], EXIT_OK if ok else EXIT_FAIL


def cmd_lowerbound(args):
    if args.thm53 == args.reduction:
        raise UsageError("choose exactly one of --thm53 and --reduction")
    if args.delta is None:
        raise UsageError("--delta is required")
    if args.thm53:
        if args.kappa is None:
            raise UsageError("--thm53 needs --kappa")
        return evaluate_thm53(args.delta, args.kappa).to_dict(), EXIT_OK
    if args.instance:
        inst = load_instance(args.instance)
        marginals = [[(a.prob, a.revenue) for a in d.atoms] for d in inst.distributions]
    else:
        marginals = DEFAULT_REDUCTION_MARGINALS
    chk = check_reduction(make_reduction_appB(marginals, args.delta))
    report = {
        "delta": args.delta,
        "max_error": chk.max_error,
        "tolerance": REDUCTION_TOL,
        "checked_sets": chk.checked,
        "skipped_realizations": chk.skipped_realizations,
        "opt_equals_max_revenue": chk.opt_matches_max,
    }
    ok = chk.max_error <= REDUCTION_TOL and chk.opt_matches_max
    return report, EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate,
    "conditions": cmd_conditions,
    "threshold": cmd_threshold,
    "oracle": cmd_oracle,
    "lowerbound": cmd_lowerbound,
    "convexpi": cmd_convexpi,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", metavar="PATH")
    common.add_argument("--policy", choices=sorted(POLICIES), metavar="POLICY")
    common.add_argument("--order", default="worst", help="given:<perm> | random | worst")
    common.add_argument("--threshold-source", default="exact")
    common.add_argument("--trials", type=int, default=10_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--exact", action="store_true")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="seqassort", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "conditions":
            p.add_argument("--model-checks", default="all")
        if name == "lowerbound":
            p.add_argument("--thm53", action="store_true")
            p.add_argument("--reduction", action="store_true")
            p.add_argument("--delta", type=float)
            p.add_argument("--kappa", type=float)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.trials < 1:
        print("seqassort: --trials must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        report, code = COMMANDS[args.command](args)
        emit_report(report, args.format, args.out)
    except (UsageError, SeqAssortError, ValueError, TypeError, KeyError, OSError) as exc:
        print(f"seqassort {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
