"""Command line front end.

Exit status: 0 when every verdict passes, 2 when a check ran and failed,
1 when the input could not be checked at all.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from pathlib import Path
from typing import Any, Sequence

from .dpp import VIOLATION_TOL, check_dpp_abel, check_dpp_cesaro, check_subsolution
from .model import (
    ModelError,
    Strategy,
    TrajectoryBundle,
    TransitionSystem,
    load_model,
    save_model,
)
from .payoff import Abel, Cesaro, PayoffError
from .tauberian import COINCIDE_TOL, UNIFORM_TOL, family_values, theorem2_report
from .valuemap import BestValueMap, GameValueMap, StrategyValueMap, greedy_mean_payoff_strategy
from .zoo import ZOO

EXIT_PASS, EXIT_INPUT, EXIT_FAIL = 0, 1, 2

_GEN = re.compile(r"^\s*(?P<base>[^*]+?)\s*\*\s*2\^(?P<sign>-?)k\s*,\s*k\s*<=\s*(?P<K>\d+)\s*$")


class InputError(ValueError):
    pass


def _number(text: str) -> float:
    text = text.strip()
    if text.lower() == "ln2":
        return math.log(2)
    try:
        return float(text)
    except ValueError:
        raise InputError(f"not a number: {text!r}") from None


def parse_grid(text: str, kind: str) -> list:
    """``"1,2,4"`` or a doubling generator ``"10*2^k,k<=10"`` / ``"ln2*2^-k,k<=14"``."""
    match = _GEN.match(text)
    if match:
        base = _number(match["base"])
        sign = -1 if match["sign"] else 1
        values = [base * 2.0 ** (sign * k) for k in range(int(match["K"]) + 1)]
    else:
        values = [_number(part) for part in text.split(",") if part.strip()]
    if not values:
        raise InputError(f"empty {kind} grid")
    if kind == "T":
        if any(v != int(v) or v < 1 for v in values):
            raise InputError("T must be ≥ 1 (positive integers only)")
        values = [int(v) for v in values]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InputError("T grid must be strictly increasing")
    else:
        if any(not v > 0 for v in values):
            raise InputError("lambda must be > 0")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise InputError("lambda grid must be strictly decreasing")
    return values


def _parse_param(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise InputError(f"--param expects key=value, got {text!r}")
    key, raw = (s.strip() for s in text.split("=", 1))
    if raw.lower() in ("true", "false"):
        return key, raw.lower() == "true"
    for conv in (int, float):
        try:
            return key, conv(raw)
        except ValueError:
            pass
    return key, raw


def _load(args) -> tuple[TransitionSystem | TrajectoryBundle, dict]:
    if bool(args.model) == bool(args.zoo):
        raise InputError("give exactly one of --model or --zoo")
    if args.model:
        path = Path(args.model)
        if not path.exists():
            raise InputError(f"model file not found: {path}")
        return load_model(path), {"model": str(path)}
    if args.zoo not in ZOO:
        raise InputError(f"unknown zoo entry {args.zoo!r}; try `zoo list`")
    params = dict(_parse_param(p) for p in args.param)
    try:
        model = ZOO[args.zoo].build(**params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {args.zoo!r}: {exc}") from None
    return model, {"zoo": args.zoo, "params": ZOO[args.zoo].params | params}


def parse_strategy(text: str | None, m: TransitionSystem | TrajectoryBundle) -> Strategy:
    """``greedy-mean-payoff``, ``first`` (first listed trajectory per start), or a map ``A=B,B=A`` / JSON object."""
    if isinstance(m, TrajectoryBundle):
        if text not in (None, "first"):
            raise InputError("bundles only support the 'first' selector")
        return Strategy.general({w: m.trajectories_from(w)[0] for w in m.start_states})
    if text in (None, "greedy-mean-payoff"):
        return greedy_mean_payoff_strategy(m)
    if text.lstrip().startswith("{"):
        try:
            mapping = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"--strategy: invalid JSON ({exc})") from None
    else:
        mapping = {}
        for part in text.split(","):
            if "=" not in part:
                raise InputError(f"--strategy: expected from=to pairs, got {part!r}")
            a, b = (s.strip() for s in part.split("=", 1))
            mapping[a] = b
    choice = []
    for sid in m.ids:
        if sid not in mapping:
            raise InputError(f"--strategy: no choice for state {sid!r}")
        choice.append(m.index(mapping[sid]))
    return Strategy.stationary(choice)


def _value_map(args, m):
    kind = getattr(args, "value_map", "best")
    if kind == "best":
        return BestValueMap(m)
    if kind == "game":
        return GameValueMap(m)
    return StrategyValueMap(m, parse_strategy(args.strategy, m))


def _rows_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _emit(args, doc: dict, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    if args.format == "csv":
        text = _rows_to_csv(header, rows)
    else:
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _grids(args, need_both: bool = False) -> tuple[list, list]:
    Ts = parse_grid(args.T_grid, "T") if args.T_grid else []
    lambdas = parse_grid(args.lambda_grid, "lambda") if args.lambda_grid else []
    if need_both and not (Ts and lambdas):
        raise InputError("both --T-grid and --lambda-grid are required")
    if not (Ts or lambdas):
        raise InputError("give --T-grid and/or --lambda-grid")
    return Ts, lambdas


# --- subcommands -----------------------------------------------------------------


def cmd_eval(args) -> int:
    m, source = _load(args)
    Ts, lambdas = _grids(args)
    v = _value_map(args, m)
    doc: dict[str, Any] = {"command": "eval", "source": source, "value_map": v.name, "values": {}}
    rows = []
    for family, grid in (("cesaro", Ts), ("abel", lambdas)):
        if not grid:
            continue
        values = family_values(v, family, grid)
        doc["values"][family] = [{"param": p, "values": vf.to_dict()} for p, vf in zip(grid, values)]
        for p, vf in zip(grid, values):
            rows.extend((family, p, sid, float(x)) for sid, x in zip(vf.ids, vf.values))
    _emit(args, doc, ["family", "param", "state", "value"], rows)
    return EXIT_PASS


def cmd_dpp(args) -> int:
    m, source = _load(args)
    hs = [int(h) for h in parse_grid(args.h_grid, "T")]
    Ts, lambdas = _grids(args)
    v = _value_map(args, m)
    reports = []
    if Ts:
        reports.append(check_dpp_cesaro(v, hs, Ts))
    if lambdas:
        reports.append(check_dpp_abel(v, hs, lambdas))
    tol = args.tol if args.tol is not None else VIOLATION_TOL
    passed = all(r.max_deviation <= tol for r in reports)
    doc = {
        "command": "dpp-check",
        "source": source,
        "value_map": v.name,
        "tolerance": tol,
        "passed": passed,
        "reports": [r.to_dict() for r in reports],
    }
    rows = [
        (r.family, h, p, d) for r in reports for (h, p), d in zip(r.grid, r.deviations)
    ]
    _emit(args, doc, ["family", "h", "T_or_lambda", "deviation"], rows)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_subsolution(args) -> int:
    m, source = _load(args)
    if not isinstance(m, TransitionSystem):
        raise InputError("subsolution checks need a transition system")
    Ts, lambdas = _grids(args)
    ns = [int(n) for n in parse_grid(args.ns, "T")]
    v = BestValueMap(m)
    reports = [check_subsolution(v, Cesaro(T), ns) for T in Ts]
    reports += [check_subsolution(v, Abel(lam), ns) for lam in lambdas]
    passed = all(r.passed for r in reports)
    doc = {
        "command": "subsolution-check",
        "source": source,
        "passed": passed,
        "reports": [r.to_dict() for r in reports],
    }
    rows = [
        (r.family, float(r.parameter), s, n, lhs, rhs, lhs - rhs)
        for r in reports
        for s, n, lhs, rhs in r.rows
    ]
    _emit(args, doc, ["family", "param", "state", "n", "lhs", "rhs", "slack"], rows)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_tauberian(args) -> int:
    m, source = _load(args)
    Ts, lambdas = _grids(args, need_both=True)
    s = parse_strategy(args.strategy, m)
    hs = [int(h) for h in parse_grid(args.h_grid, "T")]
    report = theorem2_report(
        m,
        s,
        Ts,
        lambdas,
        tol=args.tol if args.tol is not None else UNIFORM_TOL,
        coincide_tol=args.coincide_tol,
        dpp_hs=hs,
    )
    doc = {"command": "tauberian", "source": source, "strategy": args.strategy or "default"}
    doc |= report.to_dict()
    rows = []
    for family, grid in (("cesaro", Ts), ("abel", lambdas)):
        best = report.diagnostics[f"best_{family}"]
        strat = report.diagnostics[f"strategy_{family}"]
        gaps = report.gaps[family].gaps
        for k, p in enumerate(grid):
            residual = best.sup_residuals[k - 1] if k > 0 else ""
            for j, sid in enumerate(best.values[k].ids):
                rows.append(
                    (family, p, sid, float(best.values[k].values[j]), float(strat.values[k].values[j]), residual, gaps[k])
                )
    _emit(args, doc, ["family", "param", "state", "best", "strategy", "best_cauchy_residual", "gap"], rows)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_zoo(args) -> int:
    if args.action == "list":
        for name, entry in ZOO.items():
            params = ", ".join(f"{k}={v}" for k, v in entry.params.items())
            print(f"{name:<12} [{params}] {entry.summary}")
        return EXIT_PASS
    if not args.name:
        raise InputError("zoo build needs an entry name")
    if args.name not in ZOO:
        raise InputError(f"unknown zoo entry {args.name!r}")
    params = dict(_parse_param(p) for p in args.param)
    model = ZOO[args.name].build(**params)
    if not args.out:
        raise InputError("zoo build needs -o/--out")
    save_model(model, args.out)
    return EXIT_PASS


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1); exit 2 is reserved for failed checks."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tauberian-games",
        description="Cesaro/Abel value maps, DPP checks and uniform-value diagnostics on finite models.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--model", help="model file (JSON transition system or bundle)")
    source.add_argument("--zoo", help="zoo entry name")
    source.add_argument("--param", action="append", default=[], metavar="K=V", help="zoo builder parameter")
    source.add_argument("--out", help="output path (default: stdout)")
    source.add_argument("--format", choices=("json", "csv"), default="json")

    grids = argparse.ArgumentParser(add_help=False)
    grids.add_argument("--T-grid", dest="T_grid", help='e.g. "1,2,4" or "10*2^k,k<=10"')
    grids.add_argument("--lambda-grid", dest="lambda_grid", help='e.g. "0.5,0.25" or "ln2*2^-k,k<=14"')
    grids.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("eval", parents=[source, grids], help="value functions for Cesaro/Abel payoffs")
    p.add_argument("--value-map", dest="value_map", choices=("best", "strategy", "game"), default="best")
    p.add_argument("--strategy")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("dpp-check", parents=[source, grids], help="weak DPP deviations on a grid")
    p.add_argument("--value-map", dest="value_map", choices=("best", "strategy", "game"), default="best")
    p.add_argument("--strategy")
    p.add_argument("--h-grid", dest="h_grid", default="1,2,5")
    p.set_defaults(func=cmd_dpp)

    p = sub.add_parser("subsolution-check", parents=[source, grids], help="subsolution slacks of V_best")
    p.add_argument("--ns", default="1,2,4,10")
    p.set_defaults(func=cmd_subsolution)

    p = sub.add_parser("tauberian", parents=[source, grids], help="uniform optimality report for s*")
    p.add_argument("--strategy", help="greedy-mean-payoff (default), first (bundles), or A=B,... map")
    p.add_argument("--coincide-tol", dest="coincide_tol", type=float, default=COINCIDE_TOL)
    p.add_argument("--h-grid", dest="h_grid", default="1,2,5")
    p.set_defaults(func=cmd_tauberian)

    p = sub.add_parser("zoo", help="list or build zoo models")
    p.add_argument("action", choices=("list", "build"))
    p.add_argument("name", nargs="?")
    p.add_argument("--param", action="append", default=[], metavar="K=V")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_zoo)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ModelError, PayoffError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
