"""Command-line front end.

Every command prints one JSON object per line on stdout and a short human
summary on stderr.  Exit codes: 0 when a verdict was computed (whatever it
is), 2 for input errors, 3 when the requested engine cannot handle the game.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import gadgets
from .concepts import bargaining_set_check, core_check, core_nonempty, kernel_check
from .errors import CoalkitError, EngineUnsupported, InputError
from .game import Game, format_rational, parse_rational, resolve_engine
from .representations import GraphGame, dump_game, game_digest, load_game
from .treewidth import METHODS, decompose

EXIT_OK, EXIT_INPUT, EXIT_ENGINE = 0, 2, 3


def read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if exc.lineno - 1 < len(text.splitlines()) else ""
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}: {line.strip()!r}")


def read_game(path: str) -> Game:
    try:
        return load_game(read_json(path))
    except InputError as exc:
        if str(exc).startswith(path):
            raise
        raise InputError(f"{path}: {exc}")


def read_payoff(path: str, game: Game) -> tuple:
    obj = read_json(path)
    if isinstance(obj, dict) and "payoff" in obj:
        obj = obj["payoff"]
    names = game.players.names
    if isinstance(obj, list):
        if len(obj) != len(names):
            raise InputError(f"{path}: payoff has {len(obj)} entries, game has {len(names)} players")
        return tuple(parse_rational(v) for v in obj)
    if not isinstance(obj, dict):
        raise InputError(f"{path}: payoff must map player names to rational strings")
    unknown = set(obj) - set(names)
    missing = [p for p in names if p not in obj]
    if unknown or missing:
        raise InputError(f"{path}: payoff players do not match the game "
                         f"(unknown {sorted(unknown)}, missing {missing})")
    return tuple(parse_rational(obj[p]) for p in names)


def payoff_json(game: Game, x) -> dict:
    return {name: format_rational(v) for name, v in zip(game.players.names, x)}


def emit(record: dict, summary: str, started: float) -> None:
    record["wall_time"] = f"{time.perf_counter() - started:.6f}"
    print(json.dumps(record, sort_keys=False))
    print(summary, file=sys.stderr)


def cmd_eval(args) -> tuple:
    game = read_game(args.game)
    S = game.players.parse_coalition(args.coalition)
    worth = game.worth(S)
    return ({"command": "eval", "game": game_digest(game),
             "coalition": game.players.names_of(S), "worth": format_rational(worth)},
            f"v({{{args.coalition}}}) = {worth}")


def cmd_check(args) -> tuple:
    game = read_game(args.game)
    x = read_payoff(args.payoff, game)
    record = {"command": "check", "concept": args.concept, "game": game_digest(game),
              "payoff": payoff_json(game, x)}
    names = game.players.names
    if args.concept == "core":
        engine = resolve_engine(game, args.engine)
        verdict = core_check(game, x, engine=engine, force=args.force)
        record.update(engine=engine, member=verdict.member)
        if verdict.blocking is not None:
            record["blocking"] = {"coalition": game.players.names_of(verdict.blocking),
                                  "deficit": format_rational(verdict.deficit)}
        elif not verdict.member:
            record["reason"] = verdict.reason
        summary = "in the core" if verdict.member else "not in the core"
    elif args.concept == "kernel":
        engine = resolve_engine(game, args.engine)
        verdict = kernel_check(game, x, engine=engine, force=args.force)
        record.update(engine=engine, member=verdict.member)
        if verdict.violation:
            i, j, sij, sji = verdict.violation
            record["violation"] = {"outweighs": names[i], "against": names[j],
                                   "surplus_ij": format_rational(sij),
                                   "surplus_ji": format_rational(sji)}
        summary = "in the kernel" if verdict.member else "not in the kernel"
    else:
        objector = game.players.idx(args.objector) if args.objector else None
        target = game.players.idx(args.against) if args.against else None
        verdict = bargaining_set_check(game, x, jobs=args.jobs, force=args.force,
                                       objector=objector, target=target)
        record.update(engine="enumerate", member=verdict.member,
                      coalitions_examined=verdict.examined)
        if verdict.justified:
            obj = verdict.justified
            record["objection"] = {"objector": names[obj.i], "against": names[obj.j],
                                   "coalition": game.players.names_of(obj.S),
                                   "y": {names[k]: format_rational(v)
                                         for k, v in obj.as_dict().items()}}
        summary = "in the bargaining set" if verdict.member else "not in the bargaining set"
    return record, summary


def cmd_core_nonempty(args) -> tuple:
    game = read_game(args.game)
    result = core_nonempty(game, mode=args.mode, engine=args.engine, force=args.force)
    record = {"command": "core-nonempty", "game": game_digest(game), "mode": args.mode,
              "nonempty": result.nonempty, "iterations": result.iterations}
    if result.nonempty:
        record["point"] = payoff_json(game, result.point)
        summary = "core is nonempty"
    else:
        cert = result.certificate
        record["certificate_size"] = len(cert.coalitions)
        if args.certificate:
            record["certificate"] = {
                "coalitions": [{"coalition": game.players.names_of(S),
                                "worth": format_rational(w)}
                               for S, w in zip(cert.coalitions, cert.worths)],
                "grand_worth": format_rational(cert.grand_worth)}
        summary = f"core is empty (certificate of {len(cert.coalitions)} coalitions)"
    return record, summary


def cmd_gadget(args) -> tuple:
    try:
        text = Path(args.formula).read_text()
    except OSError as exc:
        raise InputError(f"{args.formula}: {exc.strerror}")
    if args.kind == "kernel":
        built = gadgets.build_kernel_gadget(gadgets.parse_dimacs(text))
    else:
        q = gadgets.parse_qdimacs(text)
        q = gadgets.normalize_qbf(q) if args.normalize else gadgets.Nqbf2Forall(
            q.universals, q.existentials, q.clauses)
        built = gadgets.build_bs_gadget(q)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    files = {"game": f"{out}.game.json", "payoff": f"{out}.payoff.json",
             "meta": f"{out}.meta.json"}
    meta = built.meta()
    Path(files["game"]).write_text(json.dumps(dump_game(built.game), indent=1) + "\n")
    Path(files["payoff"]).write_text(json.dumps(payoff_json(built.game, built.x), indent=1) + "\n")
    Path(files["meta"]).write_text(json.dumps(meta, indent=1) + "\n")
    record = {"command": "gadget", "kind": args.kind, "game": game_digest(built.game),
              "files": files, "meta": meta}
    return record, f"wrote {built.game.players.n}-player {args.kind} gadget to {out}.*"


def cmd_treewidth(args) -> tuple:
    game = read_game(args.game)
    if not isinstance(game, GraphGame):
        raise EngineUnsupported("treewidth needs a graph game")
    td = decompose(game, args.method)
    record = {"command": "treewidth", "game": game_digest(game), "method": args.method,
              "width": td.width, "exact": args.method == "exact-small"}
    if args.dump:
        Path(args.dump).write_text(json.dumps(td.dump(game), indent=1) + "\n")
        record["dump"] = args.dump
    return record, f"width {td.width} ({args.method})"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coalkit", description=__doc__.splitlines()[0])
    parser.add_argument("--force", action="store_true",
                        help="allow exhaustive enumeration beyond the player cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="worth of one coalition")
    p.add_argument("game")
    p.add_argument("coalition", help='comma-separated player names, "" for the empty coalition')
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="membership test for a payoff vector")
    p.add_argument("game")
    p.add_argument("concept", choices=("core", "kernel", "bs"))
    p.add_argument("payoff")
    p.add_argument("--engine", choices=("auto", "enumerate", "treewidth-dp"), default="auto")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--objector", help="bs only: restrict objections to this player")
    p.add_argument("--against", help="bs only: restrict objections against this player")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("core-nonempty", help="decide core non-emptiness")
    p.add_argument("game")
    p.add_argument("--mode", choices=("constraint-generation", "full-lp"),
                   default="constraint-generation")
    p.add_argument("--engine", choices=("auto", "enumerate", "treewidth-dp"), default="auto")
    p.add_argument("--certificate", action="store_true",
                   help="include the emptiness certificate coalitions")
    p.set_defaults(func=cmd_core_nonempty)

    p = sub.add_parser("gadget", help="build a reduction gadget from a formula file")
    p.add_argument("kind", choices=("kernel", "bs"))
    p.add_argument("formula", help="DIMACS (kernel) or QDIMACS (bs) file")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--normalize", action="store_true",
                   help="bs only: rewrite a general 2QBF into twin form first")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("treewidth", help="tree decomposition width of a graph game")
    p.add_argument("game")
    p.add_argument("--method", choices=METHODS, default="min-fill")
    p.add_argument("--dump", help="write the decomposition (parent array + bags) here")
    p.set_defaults(func=cmd_treewidth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        record, summary = args.func(args)
    except EngineUnsupported as exc:
        print(json.dumps({"command": args.command, "error": type(exc).__name__,
                          "message": str(exc)}))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except CoalkitError as exc:
        print(json.dumps({"command": args.command, "error": type(exc).__name__,
                          "message": str(exc)}))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    emit(record, summary, started)
    return EXIT_OK


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
