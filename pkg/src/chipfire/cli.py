"""Command line interface.

Commands: simulate, space, analyze, transform, isocheck, fixtures.
Games travel as JSON files in the format documented in the README; all
output is deterministic for fixed inputs and flags. The environment
variable CHIPFIRE_BUDGET overrides the default step and state budgets.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Any

from . import engine, fixtures, space as space_mod, transform
from .errors import (
    BudgetExceeded,
    ChipfireError,
    CyclicSupport,
    GameFormatError,
    InternalInconsistency,
    IterationBudget,
    MissingSink,
    MultipleSinks,
    NonConvergent,
    NotMCFG,
    NotSimple,
    Undecided,
    UnfiredVertex,
    UnknownVertex,
    VertexFiredOnce,
    WrongKind,
)
from .lattice import analyze_poset, isomorphic
from .model import Game, dumps_game, loads_game, validate

EXIT_OK = 0
EXIT_NOT_EQUIVALENT = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_NON_CONVERGENT = 4
EXIT_VERIFY_MISMATCH = 5
EXIT_CYCLIC_SUPPORT = 6
EXIT_NOT_SIMPLE = 7
EXIT_MULTIPLE_SINKS = 8
EXIT_NOT_MCFG = 9
EXIT_VERTEX_FIRED_ONCE = 10
EXIT_ITERATION_BUDGET = 11
EXIT_UNKNOWN_VERTEX = 12
EXIT_MISSING_SINK = 13
EXIT_UNFIRED_VERTEX = 14
EXIT_INTERNAL = 15

_ERROR_CODES: list[tuple[type, int]] = [
    (CyclicSupport, EXIT_CYCLIC_SUPPORT),
    (NotSimple, EXIT_NOT_SIMPLE),
    (MultipleSinks, EXIT_MULTIPLE_SINKS),
    (NotMCFG, EXIT_NOT_MCFG),
    (VertexFiredOnce, EXIT_VERTEX_FIRED_ONCE),
    (IterationBudget, EXIT_ITERATION_BUDGET),
    (UnknownVertex, EXIT_UNKNOWN_VERTEX),
    (MissingSink, EXIT_MISSING_SINK),
    (UnfiredVertex, EXIT_UNFIRED_VERTEX),
    (BudgetExceeded, EXIT_BUDGET),
    (Undecided, EXIT_NON_CONVERGENT),
    (NonConvergent, EXIT_NON_CONVERGENT),
    (InternalInconsistency, EXIT_INTERNAL),
    (GameFormatError, EXIT_INPUT),
    (WrongKind, EXIT_INPUT),
]


class _CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _exit_code_for(exc: ChipfireError) -> int:
    for klass, code in _ERROR_CODES:
        if isinstance(exc, klass):
            return code
    return EXIT_INPUT


def _budget_override() -> int | None:
    raw = os.environ.get("CHIPFIRE_BUDGET")
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise _CliFailure(EXIT_INPUT, f"CHIPFIRE_BUDGET must be an integer, got {raw!r}")


def _load(path: str) -> Game:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _CliFailure(EXIT_INPUT, f"{path}: {exc}")
    try:
        game = loads_game(text)
    except GameFormatError as exc:
        raise _CliFailure(EXIT_INPUT, f"{path}: {exc}")
    problems = validate(game)
    if problems:
        lines = "\n".join(f"{path}: {p}" for p in problems)
        raise _CliFailure(EXIT_INPUT, lines)
    return game


def _emit(data: Any, out: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _step_budget(args) -> int | None:
    if getattr(args, "budget", None) is not None:
        return args.budget
    return _budget_override()


def _state_budget(args) -> int:
    if getattr(args, "budget", None) is not None:
        return args.budget
    return _budget_override() or space_mod.DEFAULT_STATE_BUDGET


def _build_space_checked(game: Game, args) -> space_mod.ConfigSpace:
    try:
        if not engine.is_convergent(game, _step_budget(args)):
            raise _CliFailure(EXIT_NON_CONVERGENT, "game does not converge")
    except Undecided as exc:
        raise _CliFailure(EXIT_NON_CONVERGENT, str(exc))
    return space_mod.build_space(game, _state_budget(args))


# -- commands ---------------------------------------------------------------


def _cmd_simulate(args) -> int:
    game = _load(args.game)
    record = engine.run_to_fixpoint(game, policy=args.policy,
                                    step_budget=_step_budget(args))
    _emit({"sequence": list(record.sequence),
           "final": {v: record.final[v] for v in game.vertex_order}},
          args.out)
    return EXIT_OK


def _cmd_space(args) -> int:
    game = _load(args.game)
    sp = _build_space_checked(game, args)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(space_mod.space_to_dot(sp))
    if args.png:
        from . import viz

        viz.save_hasse(sp, args.png)
    data = space_mod.space_to_dict(sp)
    if args.json:
        _emit(data, args.json)
    if not (args.dot or args.json or args.png):
        _emit(data, None)
    else:
        sys.stdout.write(f"states: {len(sp)}\ncovers: {len(sp.covers)}\n")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    game = _load(args.game)
    sp = _build_space_checked(game, args)
    report = analyze_poset(sp.poset())
    data = report.to_dict()
    if args.csv:
        fields = ["elements", "covers", "lattice", "ranked", "uld", "lld",
                  "distributive", "hypercube", "hypercube_dim"]
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerow({k: data[k] for k in fields})
    if args.png:
        from . import viz

        viz.save_hasse(sp, args.png)
    _emit(data, args.out)
    return EXIT_OK


def _cmd_transform(args) -> int:
    game = _load(args.game)
    budget = _step_budget(args)

    if args.op in ("ground", "multiply"):
        if args.vertex is None or args.factor is None:
            raise _CliFailure(EXIT_INPUT,
                              f"--op {args.op} needs --vertex and --factor")
        if args.op == "ground":
            result = transform.ground(game, args.vertex, args.factor)
        else:
            result = transform.multiply(game, args.vertex, args.factor)
    elif args.op == "to-asm":
        result = transform.cfg_to_asm(game, verify=args.verify,
                                      state_budget=_state_budget(args))
    elif args.op == "mcfg-simplify":
        result = transform.mcfg_simplify(game, step_budget=budget)
    elif args.op == "mcfg-to-cfg":
        result = transform.mcfg_to_cfg(game, step_budget=budget)
    else:  # pragma: no cover - argparse restricts choices
        raise _CliFailure(EXIT_INPUT, f"unknown op {args.op!r}")

    if args.verify:
        before = space_mod.build_space(game, _state_budget(args)).poset()
        after = space_mod.build_space(result, _state_budget(args)).poset()
        if isomorphic(before, after) is None:
            raise _CliFailure(EXIT_VERIFY_MISMATCH,
                              "configuration spaces are not isomorphic")
    text = dumps_game(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_isocheck(args) -> int:
    ga, gb = _load(args.game_a), _load(args.game_b)
    sa = _build_space_checked(ga, args)
    sb = _build_space_checked(gb, args)
    mapping = isomorphic(sa.poset(), sb.poset())
    if mapping is None:
        _emit({"equivalent": False,
               "sizes": [len(sa), len(sb)]}, args.out)
        return EXIT_NOT_EQUIVALENT
    bijection = [[i, mapping[i]] for i in sorted(mapping)]
    _emit({"equivalent": True, "bijection": bijection}, args.out)
    return EXIT_OK


def _cmd_fixtures(args) -> int:
    if args.action == "list":
        for name in fixtures.FIXTURES:
            sys.stdout.write(name + "\n")
        return EXIT_OK
    if args.name is None:
        raise _CliFailure(EXIT_INPUT, "fixtures dump needs a fixture name")
    try:
        game = fixtures.get(args.name)
    except KeyError as exc:
        raise _CliFailure(EXIT_INPUT, str(exc))
    text = dumps_game(game)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chipfire",
        description="Simulate chip firing games and analyze their "
                    "configuration-space lattices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a game to its fixed point")
    p.add_argument("game")
    p.add_argument("--policy", default="lex",
                   help='"lex" or "random:SEED" (default lex)')
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("space", help="build the configuration space")
    p.add_argument("game")
    p.add_argument("--dot", default=None, help="write the Hasse diagram as DOT")
    p.add_argument("--json", default=None, help="write the space as JSON")
    p.add_argument("--png", default=None, help="render the Hasse diagram")
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=_cmd_space)

    p = sub.add_parser("analyze", help="lattice report for the space")
    p.add_argument("game")
    p.add_argument("--csv", default=None, help="write the report as one CSV row")
    p.add_argument("--png", default=None, help="render the Hasse diagram")
    p.add_argument("--out", default=None)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("transform", help="apply a space-preserving rewrite")
    p.add_argument("game")
    p.add_argument("--op", required=True,
                   choices=["ground", "multiply", "to-asm",
                            "mcfg-simplify", "mcfg-to-cfg"])
    p.add_argument("--vertex", default=None)
    p.add_argument("--factor", type=int, default=None)
    p.add_argument("--verify", action="store_true",
                   help="check space isomorphism between input and output")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("isocheck", help="compare two configuration spaces")
    p.add_argument("game_a")
    p.add_argument("game_b")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_isocheck)

    p = sub.add_parser("fixtures", help="list or dump bundled games")
    p.add_argument("action", choices=["list", "dump"])
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_fixtures)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliFailure as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except ChipfireError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return _exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
