"""Command-line driver.  Exit status: 0 positive verdict or success, 1 negative
verdict, 2 usage or input-format error."""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .automata import AlphabetError, AutomatonError, accepts, parse_automaton
from .bisim import BisimError, guarded_bisimilar, max_guarded_bisim
from .compiler import CompileError, compile
from .finsat import MODES, FinSatError, finsat_bounded
from .games import GameError, brute_solve, parse_game, solve
from .graphs import GraphError, graph_to_text, parse_graph
from .logic import (FormulaError, free_vars, load_formula, relations, to_text, validate_guarded,
                    width)
from .structures import EvaluationError, StructureError, evaluate, parse_structure
from .tabloids import Catalog, TabloidError, model_graph, unravel_graph

FORMAT_ERRORS = (FormulaError, StructureError, GraphError, AutomatonError, GameError,
                 TabloidError, BisimError, CompileError, FinSatError, EvaluationError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class Report:
    def __init__(self, as_json: bool, out):
        self.as_json = as_json
        self.out = out

    def emit(self, human: str, /, **fields):
        if self.as_json:
            print(json.dumps(fields, sort_keys=True), file=self.out)
        else:
            print(human, file=self.out)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str, out) -> None:
    if path is None or path == "-":
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load(loader, path: str):
    try:
        return loader(_read(path))
    except FORMAT_ERRORS as exc:
        raise _FileError(f"{path}: {exc}") from None


class _FileError(Exception):
    pass


def _sentence(path: str):
    f, sig = _load(load_formula, path)
    if free_vars(f):
        raise _FileError(f"{path}: formula has free variables {sorted(free_vars(f))}")
    return f, sig


def _labelled_graph(path: str, catalog: Catalog | None):
    text = _read(path)
    try:
        gf = parse_graph(text)
    except GraphError as exc:
        raise _FileError(f"{path}: {exc}") from None
    if catalog is None:
        if gf.dictionary:
            raise AlphabetError(f"{path}: phi-type letters given to an explicit-alphabet automaton")
        return gf
    if gf.header.get("formula", [None])[0] != catalog.text():
        raise AlphabetError(f"{path}: graph letters are not phi-types of the automaton's formula")
    try:
        return parse_graph(text, catalog.parse_letter)
    except FORMAT_ERRORS as exc:
        raise _FileError(f"{path}: {exc}") from None


def _node(gf, ident: str | None):
    g = gf.graph
    if ident is None:
        ident = g.start if g.start is not None else g.nodes[0]
    if ident not in set(g.nodes):
        raise UsageError(f"unknown node {ident}")
    return ident


# -- subcommands -------------------------------------------------------------

def cmd_check(args, rep: Report) -> int:
    f, _ = _load(load_formula, args.formula)
    report = validate_guarded(f, strict=not args.lenient)
    problems = [str(d) for d in report.diagnostics]
    if free_vars(f):
        problems.append(f"open formula: free variables {sorted(free_vars(f))}")
    if problems:
        rep.emit("failed\n" + "\n".join(problems), verdict="failed", diagnostics=problems)
        return 1
    rep.emit(f"ok, width {width(f)}", verdict="ok", width=width(f))
    return 0


def cmd_mc(args, rep: Report) -> int:
    f, _ = _sentence(args.formula)
    s = _load(parse_structure, args.structure)
    missing = {r for r, ar in relations(f).items() if s.sig.relations.get(r) != ar}
    if missing:
        raise _FileError(f"{args.structure}: signature lacks {sorted(missing)}")
    truth = evaluate(s, f, {})
    rep.emit("true" if truth else "false", result=truth)
    return 0 if truth else 1


def cmd_bisim(args, rep: Report) -> int:
    a = _load(parse_structure, args.a)
    b = _load(parse_structure, args.b)
    z = max_guarded_bisim(a, b)
    if args.tuple:
        ta, tb = (t.split(",") for t in args.tuple)
        result = guarded_bisimilar(a, ta, b, tb, z)
        rep.emit("bisimilar" if result else "not bisimilar", result=result)
        return 0 if result else 1
    maps = sorted(str(m) for m in z.maps)
    rep.emit("\n".join([f"{len(maps)} partial isomorphisms"] + maps), count=len(maps), maps=maps)
    return 0 if maps else 1


def cmd_tabloid(args, rep: Report) -> int:
    f, _ = _sentence(args.formula)
    s = _load(parse_structure, args.structure)
    catalog = Catalog(f)
    g, _ = model_graph(s, catalog)
    _write(args.output, graph_to_text(g, lambda letter: letter.render(), catalog.header_lines()),
           sys.stdout)
    if args.output not in (None, "-"):
        rep.emit(f"wrote G_phi with {len(g.nodes)} vertices and {len(g.edges)} edges",
                 vertices=len(g.nodes), edges=len(g.edges))
    return 0


def cmd_unravel(args, rep: Report) -> int:
    text = _read(args.graph)
    try:
        gf = parse_graph(text)
    except GraphError as exc:
        raise _FileError(f"{args.graph}: {exc}") from None
    v = _node(gf, args.start)
    tree, _ = unravel_graph(gf.graph, v, args.depth)
    header = [f"{k} {line}" for k, lines in gf.header.items() for line in lines]
    # dictionary labels come back as their renderings; hash them again on output
    body = graph_to_text(tree, (lambda r: r) if gf.dictionary else None, header)
    _write(args.output, body, sys.stdout)
    if args.output not in (None, "-"):
        rep.emit(f"wrote unravelling with {len(tree.nodes)} nodes", nodes=len(tree.nodes))
    return 0


def cmd_compile(args, rep: Report) -> int:
    f, _ = _sentence(args.formula)
    c = compile(f)
    _write(args.output, c.to_text(), sys.stdout)
    if args.output not in (None, "-"):
        rep.emit(f"{c.state_count} states (bound {c.bound}), width {c.width}",
                 states=c.state_count, bound=c.bound, width=c.width)
    return 0


def cmd_accept(args, rep: Report) -> int:
    aut = _load(parse_automaton, args.automaton)
    gf = _labelled_graph(args.graph, aut.catalog)
    v = _node(gf, args.start)
    result = accepts(aut, gf.graph, v)
    rep.emit("accepted" if result else "rejected", result=result)
    return 0 if result else 1


def cmd_finsat(args, rep: Report) -> int:
    f, _ = _sentence(args.formula)
    verdict = finsat_bounded(f, args.max_size, args.mode)
    text = str(verdict)
    if verdict.found:
        text += "\n" + verdict.model.to_text().rstrip()
    rep.emit(text, **verdict.as_dict())
    return 0 if verdict.found else 1


def cmd_games(args, rep: Report) -> int:
    g = _load(parse_game, args.game)
    sol = brute_solve(g) if args.brute else solve(g)
    lines = [f"{p} {sol.winner[p]}" + (f" -> {sol.strategy[p]}" if p in sol.strategy else "")
             for p in g.positions]
    fields = {"winner": {str(p): w for p, w in sol.winner.items()},
              "strategy": {str(p): str(w) for p, w in sol.strategy.items()}}
    if g.initial is not None:
        lines.append(f"initial {g.initial} won by {sol.winner[g.initial]}")
        fields["initial"] = sol.winner[g.initial]
    rep.emit("\n".join(lines), **fields)
    return 0


def cmd_gen(args, rep: Report) -> int:
    from .corpus import FormulaGen, random_structure
    rng = random.Random(args.seed)
    if args.kind == "formula":
        text = to_text(FormulaGen().sentence(rng))
    else:
        text = random_structure(rng, max_size=args.max_size).to_text().rstrip()
    rep.emit(text, kind=args.kind, seed=args.seed, text=text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gfx", description="guarded fixpoint logic workbench")
    p.add_argument("--json", action="store_true", help="emit JSON lines")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("check", help="validate a formula file")
    s.add_argument("formula")
    s.add_argument("--lenient", action="store_true", help="skip the explicit-guard requirement")
    s.set_defaults(run=cmd_check)

    s = sub.add_parser("mc", help="model-check a sentence on a structure")
    s.add_argument("-f", "--formula", required=True)
    s.add_argument("-s", "--structure", required=True)
    s.set_defaults(run=cmd_mc)

    s = sub.add_parser("bisim", help="guarded bisimulation between two structures")
    s.add_argument("-a", required=True)
    s.add_argument("-b", required=True)
    s.add_argument("--tuple", nargs=2, metavar=("A_TUPLE", "B_TUPLE"),
                   help="comma-separated guarded tuples")
    s.set_defaults(run=cmd_bisim)

    s = sub.add_parser("tabloid", help="emit the phi-labelled tabloid graph of a model")
    s.add_argument("-s", "--structure", required=True)
    s.add_argument("-f", "--formula", required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(run=cmd_tabloid)

    s = sub.add_parser("unravel", help="bounded undirected unravelling of a labelled graph")
    s.add_argument("-g", "--graph", required=True)
    s.add_argument("--from", dest="start")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(run=cmd_unravel)

    s = sub.add_parser("compile", help="compile a sentence into an automaton")
    s.add_argument("-f", "--formula", required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(run=cmd_compile)

    s = sub.add_parser("accept", help="run an automaton on a labelled graph")
    s.add_argument("-a", "--automaton", required=True)
    s.add_argument("-g", "--graph", required=True)
    s.add_argument("--from", dest="start")
    s.set_defaults(run=cmd_accept)

    s = sub.add_parser("finsat", help="bounded finite-model search")
    s.add_argument("-f", "--formula", required=True)
    s.add_argument("--max-size", type=int, default=4)
    s.add_argument("--mode", choices=MODES, default="direct")
    s.set_defaults(run=cmd_finsat)

    s = sub.add_parser("games", help="parity games")
    gsub = s.add_subparsers(dest="games_command", parser_class=_Parser)
    gs = gsub.add_parser("solve", help="solve a game file")
    gs.add_argument("game")
    gs.add_argument("--brute", action="store_true", help="use the exhaustive solver")
    gs.set_defaults(run=cmd_games)

    s = sub.add_parser("gen", help="seeded random corpus items")
    s.add_argument("kind", choices=("formula", "structure"))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-size", type=int, default=4)
    s.set_defaults(run=cmd_gen)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "run"):
            raise UsageError("missing subcommand (try --help)")
    except UsageError as exc:
        print(exc, file=err)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    rep = Report(args.json, out)
    old = sys.stdout
    sys.stdout = out
    try:
        return args.run(args, rep)
    except (UsageError, _FileError, AlphabetError) as exc:
        print(f"error: {exc}", file=err)
        return 2
    except FORMAT_ERRORS as exc:
        print(f"error: {exc}", file=err)
        return 2
    finally:
        sys.stdout = old


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
