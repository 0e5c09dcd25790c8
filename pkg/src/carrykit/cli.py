"""Command line entry point: ``carrykit <analyze|pollard|search|simulate|ksum> ...``.

Exit status: 0 success, 1 usage error, 2 a theorem check came out false,
3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import carries, pollard, search, simulator
from .errors import BudgetExceeded, CarryError
from .ring import Base, DigitSet, balanced_digits, digit_set_from_json, make_digit_set, standard_digits

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_FALSIFIED, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_digits(src: str | None, b: int) -> DigitSet:
    """``balanced``, ``standard``, a comma list (reduced mod b**2) or a JSON file."""
    if src is None:
        src = "balanced" if b % 2 else "standard"
    if src == "balanced":
        return balanced_digits(b)
    if src == "standard":
        return standard_digits(b)
    path = src[1:] if src.startswith("@") else src
    if path.endswith(".json"):
        try:
            ds = digit_set_from_json(Path(path).read_text())
        except OSError as e:
            raise UsageError(f"cannot read digit set file: {e}") from None
        if ds.b != b:
            raise UsageError(f"{path} holds a base-{ds.b} digit set, expected base {b}")
        return ds
    return make_digit_set(parse_int_list(src), b)


# -- subcommands -------------------------------------------------------------


def _baselines(b: int) -> dict:
    out = {"standard": carries.closed_form_standard(b)}
    base = Base(b)
    if base.is_odd:
        out["balanced"] = carries.closed_form_balanced(b)
    if base.is_odd and base.is_prime:
        out["pair_lower_bound"] = carries.pair_lower_bound(b)
    return out


def cmd_analyze(args) -> tuple[dict, list[dict], int]:
    b = args.base
    A = parse_digits(args.digits, b)
    stats = carries.carry_count_pairs(A) if args.k == 2 else carries.ksum_carry_count(A, args.k)
    report = {"digit_set": A.to_dict(), "carry": stats.to_dict(), "closed_forms": _baselines(b)}
    falsified = False
    base = A.base
    if base.is_odd and base.is_prime:
        if args.k == 2:
            bound = carries.pair_lower_bound(b)
            report["bound_ok"] = stats.carry_tuples >= bound
        else:
            report["balanced_carry_tuples"] = carries.balanced_ksum_carry_count(b, args.k).carry_tuples
            report["bound_ok"] = stats.carry_tuples >= report["balanced_carry_tuples"]
        falsified = not report["bound_ok"]
    if args.digits_b or args.digits_c:
        B = parse_digits(args.digits_b or args.digits, b)
        C = parse_digits(args.digits_c or args.digits, b)
        mixed = carries.mixed_carry_count(A, B, C)
        report["mixed"] = {"B": B.to_dict(), "C": C.to_dict(), "carry": mixed.to_dict()}
        if base.is_odd and base.is_prime:
            report["mixed"]["bound_ok"] = mixed.carry_tuples >= carries.pair_lower_bound(b)
            falsified |= not report["mixed"]["bound_ok"]
    row = {"base": b, "k": args.k, "carry_tuples": stats.carry_tuples, "total_tuples": stats.total_tuples,
           "probability": str(stats.probability)}
    return report, [row], EXIT_FALSIFIED if falsified else EXIT_OK


def _digit_sets_for(args) -> list[DigitSet]:
    if args.digits == "all":
        return list(search.enumerate_digit_sets(args.base))
    return [parse_digits(args.digits, args.base)]


def cmd_pollard(args) -> tuple[dict, list[dict], int]:
    check = args.check
    if check == "pair":
        if args.A is None or args.m is None:
            raise UsageError("--check pair needs --A and --m (and optionally --B)")
        A = parse_int_list(args.A)
        B = parse_int_list(args.B) if args.B else A
        rep = pollard.check_pollard_pair(A, B, args.m)
        rows = [c.to_dict() for c in rep.checks]
        if not rep.precondition_ok:
            return rep.to_dict(), rows, EXIT_USAGE
        return rep.to_dict(), rows, EXIT_OK if rep.passed else EXIT_FALSIFIED
    if check == "interval":
        if args.sets is None or args.m is None:
            raise UsageError("--check interval needs --sets 'a,b;c,d;...' and --m")
        sets = [parse_int_list(s) for s in args.sets.split(";")]
        inst = pollard.SumsetInstance.of(args.m, *sets)
        intervals = None
        if args.starts:
            starts = parse_int_list(args.starts)
            if len(starts) != inst.k:
                raise UsageError(f"--starts needs {inst.k} values")
            intervals = [(s, len(x)) for s, x in zip(starts, inst.sets)]
        res = pollard.check_interval_comparison(inst, intervals, args.r)
        return res.to_dict(), [{"r": res.r, "lhs": res.lhs, "rhs": res.rhs, "pass": res.passed}], (
            EXIT_OK if res.passed else EXIT_FALSIFIED
        )
    if check in ("theorem12", "corollary42"):
        if args.base is None:
            raise UsageError(f"--check {check} needs --base")
        sets = _digit_sets_for(args)
        if check == "theorem12":
            results = [pollard.theorem12_certificate(args.base, A) for A in sets]
        else:
            bal = carries.balanced_ksum_carry_count(args.base, args.k).carry_tuples
            results = [pollard.corollary42_check(A, args.k, bal) for A in sets]
        failures = [r.to_dict() for r in results if not r.passed]
        report = {"check": check, "base": args.base, "count": len(results), "failures": failures,
                  "pass": not failures}
        if check == "corollary42":
            report["k"] = args.k
        if len(results) == 1:
            report["result"] = results[0].to_dict()
        rows = [{"reps": " ".join(map(str, r.digit_set.reps)), "pass": r.passed} for r in results]
        return report, rows, EXIT_FALSIFIED if failures else EXIT_OK
    if check == "pair-suite":
        s = pollard.run_pair_suite(args.instances, args.seed, args.m or 60, args.workers)
    else:
        s = pollard.run_interval_suite(args.instances, args.seed, args.workers)
    return s.to_dict(), s.violations, EXIT_OK if s.passed else EXIT_FALSIFIED


def cmd_search(args) -> tuple[dict, list[dict], int]:
    code = EXIT_OK
    try:
        res = search.search_min_carry(args.base, args.k, args.mode, args.workers, args.budget, args.witness_cap)
    except BudgetExceeded as e:
        res, code = e.incumbent, EXIT_BUDGET
    report = res.to_dict(telemetry=args.telemetry)
    base = res.base
    if res.certified and args.k == 2 and base.is_odd and base.is_prime:
        report["pair_lower_bound"] = carries.pair_lower_bound(base.b)
        if res.min_count < report["pair_lower_bound"]:
            code = EXIT_FALSIFIED
    rows = [{"reps": " ".join(map(str, w.reps)), "carry_count": search.carry_count(w, args.k)} for w in res.witnesses]
    return report, rows, code


def cmd_simulate(args) -> tuple[dict, list[dict], int]:
    A = parse_digits(args.digits, args.base)
    if args.uniformity:
        rep = simulator.partial_sum_uniformity_check(A, args.n, args.trials, args.seed, args.workers, args.flag_sigma)
        stats, report, rows = rep.stats, rep.to_dict(), rep.csv_rows()
        bad = rep.failed
    else:
        stats = simulator.simulate_chain(A, args.n, args.trials, args.seed, args.workers)
        report, rows, bad = stats.to_dict(), stats.csv_rows(), False
    bad |= abs(stats.z_score) > simulator.FAIL_SIGMA
    return report, rows, EXIT_FALSIFIED if bad else EXIT_OK


def cmd_ksum(args) -> tuple[dict, list[dict], int]:
    A = parse_digits(args.digits, args.base)
    dist = carries.ksum_distribution(A, args.k)
    report = {"digit_set": A.to_dict(), "distribution": dist.to_dict()}
    if args.k >= 2:
        report["carry"] = carries.ksum_carry_count(A, args.k).to_dict()
    code = EXIT_OK
    if A.base.is_odd:
        p, k = args.base, args.k
        tail = carries.balanced_integer_tail(p, k)
        modular = carries.balanced_ksum_carry_count(p, k).probability if k >= 2 else Fraction(0)
        no_wrap = carries.no_wrap(p, k)
        report["balanced_comparison"] = {
            "integer_tail": tail,
            "modular_probability": modular,
            "no_wrap_regime": no_wrap,
            "agree": tail == modular,
        }
        if no_wrap and tail != modular:
            code = EXIT_FALSIFIED
    rows = [{"residue": x, "count": c} for x, c in dist.support().items()]
    return report, rows, code


# -- output ------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return carries.fraction_dict(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _is_fraction(v) -> bool:
    return isinstance(v, dict) and set(v) == {"num", "den"}


def render_human(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for key, v in obj.items():
        if _is_fraction(v):
            q = Fraction(v["num"], v["den"])
            lines.append(f"{pad}{key}: {q} (decimal {float(q):.6f})")
        elif isinstance(v, dict):
            lines.append(f"{pad}{key}:")
            lines.append(render_human(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{key}:")
            for i, item in enumerate(v):
                lines.append(f"{pad}  [{i}]")
                lines.append(render_human(item, indent + 2))
        else:
            lines.append(f"{pad}{key}: {v}")
    return "\n".join(line for line in lines if line)


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in r.items()})
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="carrykit", description="Exact carry analysis for digit systems in Z_{b^2}.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "human"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[common], help="carry counts for a digit set")
    a.add_argument("--base", type=int, required=True)
    a.add_argument("--digits", help="balanced | standard | comma list | file.json")
    a.add_argument("--digits-b", help="second summand's digits (mixed count)")
    a.add_argument("--digits-c", help="result digits (mixed count)")
    a.add_argument("--k", type=int, default=2)

    po = sub.add_parser("pollard", parents=[common], help="check Pollard-type inequalities")
    po.add_argument("--check", required=True,
                    choices=("pair", "interval", "theorem12", "corollary42", "pair-suite", "interval-suite"))
    po.add_argument("--A")
    po.add_argument("--B")
    po.add_argument("--m", type=int)
    po.add_argument("--sets", help="semicolon-separated comma lists")
    po.add_argument("--starts", help="interval start offsets, one per set")
    po.add_argument("--r", type=int, default=1)
    po.add_argument("--base", type=int)
    po.add_argument("--digits", help="as for analyze, or 'all' to sweep every digit set")
    po.add_argument("--k", type=int, default=2)
    po.add_argument("--instances", type=int, default=10_000)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("search", parents=[common], help="minimum carry count over all digit sets")
    s.add_argument("--base", type=int, required=True)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--mode", choices=search.MODES, default="branch_and_bound")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--budget", type=int, default=search.DEFAULT_BUDGET)
    s.add_argument("--witness-cap", type=int, default=search.DEFAULT_WITNESS_CAP)
    s.add_argument("--telemetry", action="store_true", help="include node counts and timing")

    sm = sub.add_parser("simulate", parents=[common], help="Monte Carlo chain addition")
    sm.add_argument("--base", type=int, required=True)
    sm.add_argument("--digits")
    sm.add_argument("--n", type=int, required=True)
    sm.add_argument("--trials", type=int, default=100_000)
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--workers", type=int, default=1)
    sm.add_argument("--uniformity", action="store_true", help="also tabulate running-sum frequencies")
    sm.add_argument("--flag-sigma", type=float, default=simulator.FLAG_SIGMA)

    ks = sub.add_parser("ksum", parents=[common], help="k-fold sum distribution and integer tail")
    ks.add_argument("--base", type=int, required=True)
    ks.add_argument("--digits")
    ks.add_argument("--k", type=int, required=True)
    return p


COMMANDS = {
    "analyze": cmd_analyze,
    "pollard": cmd_pollard,
    "search": cmd_search,
    "simulate": cmd_simulate,
    "ksum": cmd_ksum,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, rows, code = COMMANDS[args.command](args)
    except (UsageError, CarryError, ValueError) as e:
        print(f"carrykit {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    report = {"schema": f"carrykit.{args.command}/{SCHEMA_VERSION}", **_jsonable(report)}
    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    elif args.format == "csv":
        text = render_csv(_jsonable(rows))
    else:
        text = render_human(report) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
