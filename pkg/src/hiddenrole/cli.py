"""Command-line interface: ``hiddenrole gen|validate|solve|certify|breakdown|table``.

Exit codes: 0 success, 1 failed check (invalid game, uncertified value),
2 usage error, 3 parse error, 4 iteration cap reached without meeting the
target.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .avalon import AvalonConfig, build_avalon, outcome_breakdown
from .cfr import SolveConfig, VARIANTS, solve_cfr
from .efg import MAX, MIN, GameError, counts, validate
from .games import card_game, guessing_game, matching_pennies, uniform_assignments
from .io import (REPORT_FORMAT, ParseError, frac_str, game_hash, load_game, load_json,
                 load_simgame_file, load_strategy, save_game, save_json, save_strategy)
from .lp import (FloatSolution, build_lp, certify, round_and_certify, solve_exact,
                 solve_float)
from .transform import build_mediator_game, TeamAssignment

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARSE, EXIT_CAP = 0, 1, 2, 3, 4
THREADS_ENV = "HIDDENROLE_THREADS"

log = logging.getLogger("hiddenrole")


class UsageError(Exception):
    pass


def _manifest(args, game_path=None) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    return {
        "argv": sys.argv[1:],
        "config": cfg,
        "game_sha256": game_hash(game_path) if game_path else None,
        "seed": getattr(args, "seed", 0),
        "threads": getattr(args, "threads", None),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
    }


def _num(v):
    if v is None:
        return None
    if isinstance(v, Fraction):
        return frac_str(v)
    return float(v)


def _show(v) -> str:
    """Exact fraction when short, else a decimal approximation."""
    if isinstance(v, Fraction) and v.denominator.bit_length() > 64:
        return f"~{float(v):.9f} (exact fraction with {len(str(v.denominator))}-digit denominator)"
    return f"{v} ({float(v):.6f})"


def _sidecar(path) -> Path:
    return Path(str(path) + ".meta.json")


# -- gen --------------------------------------------------------------------------------


def _read_dist(path):
    data = load_json(path)
    try:
        return [(TeamAssignment(tuple(int(v) for v in t)), Fraction(str(p))) for t, p in data]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"distribution must be a list of [teams, probability]: {exc}", None, str(path))


def cmd_gen(args) -> int:
    g = args.game
    if g == "avalon":
        try:
            config = AvalonConfig.from_roles(args.n or 5, args.roles or "")
        except GameError as exc:
            raise UsageError(str(exc))
        game = build_avalon(config, prune_dominated=not args.no_prune, fail_counts=args.fail_counts)
    else:
        if args.transform != "mediator":
            raise UsageError("example games need --transform mediator")
        try:
            if g == "mp":
                sim = matching_pennies(args.n or 3)
            elif g == "cards":
                sim = card_game(args.distinguishable)
            elif g == "guess":
                if args.dist:
                    sim = guessing_game(_read_dist(args.dist))
                else:
                    sim = guessing_game(uniform_assignments(args.n or 3, args.k or 1))
            elif g == "simgame":
                if not args.input:
                    raise UsageError("--game simgame needs --input FILE")
                sim = load_simgame_file(args.input)
            else:
                raise UsageError(f"unknown game {g!r}")
        except GameError as exc:
            raise UsageError(str(exc))
        game = build_mediator_game(sim)
    out = args.output or f"{game.name}.game"
    save_game(game, out)
    nodes, terms, (ix, iy) = counts(game)
    meta = {"game": game.name, "file": str(out), "config": game.meta, "nodes": nodes,
            "terminals": terms, "infosets": {"MAX": ix, "MIN": iy}, "value": None,
            "manifest": _manifest(args)}
    save_json(meta, _sidecar(out))
    print(f"wrote {out}: {nodes} nodes, {terms} terminals, infosets MAX={ix} MIN={iy}")
    return EXIT_OK


def cmd_validate(args) -> int:
    game = load_game(args.game_file)
    report = validate(game)
    nodes, terms, (ix, iy) = counts(game)
    print(f"{game.name}: {nodes} nodes, {terms} terminals, infosets MAX={ix} MIN={iy}")
    print(report)
    return EXIT_OK if report.ok else EXIT_FAIL


# -- solve ------------------------------------------------------------------------------


def _write_strategies(x, y, prefix):
    paths = {}
    for s, name in ((x, "MAX"), (y, "MIN")):
        p = f"{prefix}.{name.lower()}.json"
        save_strategy(s, p)
        paths[name] = p
    return paths


def _breakdown_fields(game, x, y):
    if "merlin" not in game.meta:
        return None
    bd = outcome_breakdown(game, x, y)
    return {"rw": _num(bd.rw), "mg": None if bd.mg is None else _num(bd.mg)}


def cmd_solve(args) -> int:
    game = load_game(args.game_file)
    threads = args.threads or int(os.environ.get(THREADS_ENV, "1"))
    args.threads = threads
    out = args.output or f"{args.game_file}.{args.algo}.report.json"
    prefix = args.strategies or str(out).removesuffix(".json")
    report = {"format": REPORT_FORMAT, "game": game.name, "game_meta": game.meta,
              "algorithm": args.algo, "manifest": _manifest(args, args.game_file)}
    code = EXIT_OK
    t0 = time.perf_counter()
    if args.algo in VARIANTS:
        cfg = SolveConfig(variant=args.algo, max_iterations=args.iters,
                          target_exploitability=args.target, check_every=args.check_every,
                          seed=args.seed, workers=threads)
        res = solve_cfr(game, cfg, callback=lambda it, e, v: log.info("iter %d expl %.3g value %.6f", it, e, v))
        report.update(value=res.value, exact=False, exploitability=res.exploitability,
                      lower=res.lower, upper=res.upper, iterations=res.iterations,
                      reached_target=res.reached_target, trace=res.trace)
        x, y = res.x, res.y
        if not res.reached_target:
            code = EXIT_CAP
    elif args.algo in ("lp-exact", "lp-float"):
        lp = build_lp(game)
        warm = True
        if args.warmstart:
            warm = _warmstart_from_report(game, args.warmstart)
        if args.algo == "lp-float":
            sol = solve_float(lp)
            from .lp import behavior_from_realization
            x = behavior_from_realization(game, MAX, sol.x)
            y = behavior_from_realization(game, MIN, sol.y)
            report.update(value=sol.value, exact=False)
        else:
            sol = solve_exact(lp, warmstart=warm)
            x, y = sol.x, sol.y
            report.update(value=_num(sol.value), exact=sol.value is not None,
                          lower=_num(sol.lower), upper=_num(sol.upper), method=sol.method,
                          pivots=sol.pivots, notes=sol.notes,
                          exploitability=_num(sol.upper - sol.lower) if sol.lower is not None else None)
            if sol.value is None:
                code = EXIT_FAIL
    else:
        raise UsageError(f"unknown algorithm {args.algo!r}")
    report["seconds"] = time.perf_counter() - t0
    report["breakdown"] = _breakdown_fields(game, x, y)
    report["strategies"] = _write_strategies(x, y, prefix)
    save_json(report, out)
    print(f"{game.name}: value {report['value']} ({args.algo}); report {out}")
    return code


def _warmstart_from_report(game, path):
    rep = load_json(path)
    paths = rep.get("strategies") or {}
    if "MAX" not in paths or "MIN" not in paths:
        raise ParseError("warm-start report lists no strategy files", None, str(path))
    x = load_strategy(game, paths["MAX"]).to_float()
    y = load_strategy(game, paths["MIN"]).to_float()
    return FloatSolution(float(rep.get("value", float("nan"))),
                         np.asarray(x.realization()), np.asarray(y.realization()))


def cmd_certify(args) -> int:
    game = load_game(args.game_file)
    x = load_strategy(game, args.max_strategy)
    y = load_strategy(game, args.min_strategy)
    if not (x.exact and y.exact):
        x, y = x.to_exact(args.denominator), y.to_exact(args.denominator)
    lower, upper = certify(game, x, y)
    print(f"lower {_show(lower)}")
    print(f"upper {_show(upper)}")
    print("equilibrium" if lower == upper else f"gap {float(upper - lower):.3g}")
    if args.output:
        save_json({"format": REPORT_FORMAT, "game": game.name, "game_meta": game.meta,
                   "algorithm": "certify", "lower": _num(lower), "upper": _num(upper),
                   "value": _num(lower) if lower == upper else None, "exact": lower == upper,
                   "manifest": _manifest(args, args.game_file)}, args.output)
    return EXIT_OK if lower == upper or not args.require_equal else EXIT_FAIL


def cmd_breakdown(args) -> int:
    game = load_game(args.game_file)
    x = load_strategy(game, args.max_strategy)
    y = load_strategy(game, args.min_strategy)
    bd = outcome_breakdown(game, x, y)
    print(f"RW {float(bd.rw):.4f}")
    print("MG n/a" if bd.mg is None else f"MG {float(bd.mg):.4f}")
    print(f"value {float(bd.value):.4f}")
    return EXIT_OK


# -- table ------------------------------------------------------------------------------

VARIANT_ORDER = ["resistance", "merlin", "merlin+mordred", "merlin+mordred+mordred",
                 "merlin+mordred+percival+morgana"]


def _fmt_value(rep) -> str:
    v = rep.get("value")
    if v is None:
        lo, hi = rep.get("lower"), rep.get("upper")
        return f"[{lo}, {hi}]" if lo is not None else "?"
    if rep.get("exact"):
        f = Fraction(v)
        return f"{f.numerator}/{f.denominator} ({float(f):.4f})"
    gap = rep.get("exploitability")
    return f"{float(v):.4f}" + (f" ± {float(gap):.1g}" if gap is not None else "")


def render_table(reports: list) -> str:
    rows: dict = {}
    other = []
    for rep in reports:
        meta = rep.get("game_meta") or {}
        if "config" in meta and "n" in meta:
            variant = meta["config"].split("-", 1)[1]
            rows.setdefault(variant, {})[int(meta["n"])] = rep
        else:
            other.append(rep)
    lines = ["| Variant | 5 players | 6 players |", "|---|---|---|"]
    order = [v for v in VARIANT_ORDER if v in rows] + sorted(v for v in rows if v not in VARIANT_ORDER)
    for v in order:
        cells = [_fmt_value(rows[v][n]) if n in rows[v] else "" for n in (5, 6)]
        lines.append(f"| {v} | {cells[0]} | {cells[1]} |")
    bd_rows = []
    for v in order:
        for n in (5, 6):
            rep = rows[v].get(n)
            if rep and rep.get("breakdown"):
                bd = rep["breakdown"]
                mg = "n/a" if bd.get("mg") is None else f"{float(Fraction(str(bd['mg']))):.4f}"
                bd_rows.append(f"| {v} | {n} | {float(Fraction(str(bd['rw']))):.4f} | {mg} |")
    if bd_rows:
        lines += ["", "| Variant | Players | RW | MG |", "|---|---|---|---|"] + bd_rows
    if other:
        lines += ["", "| Game | Value |", "|---|---|"]
        lines += [f"| {rep.get('game')} | {_fmt_value(rep)} |" for rep in sorted(other, key=lambda r: r.get("game", ""))]
    return "\n".join(lines)


def cmd_table(args) -> int:
    d = Path(args.directory)
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    reports = []
    for p in sorted(d.glob("*.json")):
        try:
            rep = load_json(p)
        except ParseError:
            continue
        if isinstance(rep, dict) and rep.get("format") == REPORT_FORMAT:
            reports.append(rep)
    if not reports:
        print(f"warning: no reports in {d}", file=sys.stderr)
    print(render_table(reports))
    return EXIT_OK


# -- entry point ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hiddenrole", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a game file")
    g.add_argument("--game", required=True, choices=["mp", "cards", "guess", "avalon", "simgame"])
    g.add_argument("--n", type=int, help="player count")
    g.add_argument("--k", type=int, help="adversary count (uniform guessing game)")
    g.add_argument("--roles", default="", help="comma-separated Avalon roles, e.g. merlin,mordred")
    g.add_argument("--distinguishable", action="store_true", help="card game with labelled MAX cards")
    g.add_argument("--dist", help="JSON list of [teams, probability] for the guessing game")
    g.add_argument("--input", help="SimGame file for --game simgame")
    g.add_argument("--transform", default="mediator", choices=["mediator"])
    g.add_argument("--no-prune", action="store_true", help="keep dominated spy passes in Avalon")
    g.add_argument("--fail-counts", action="store_true", help="spies choose how many fails; the count is public")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("validate", help="check a game file")
    v.add_argument("game_file")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="solve a game file")
    s.add_argument("game_file")
    s.add_argument("--algo", default="pcfr+", choices=list(VARIANTS) + ["lp-exact", "lp-float"])
    s.add_argument("--iters", type=int, default=10_000)
    s.add_argument("--target", type=float, default=1e-3)
    s.add_argument("--check-every", type=int, default=100)
    s.add_argument("--threads", type=int, default=None,
                   help=f"worker count (default ${THREADS_ENV} or 1)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--warmstart", help="earlier report whose strategies seed the exact solve")
    s.add_argument("--strategies", help="path prefix for strategy files")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="exact best-response bounds for a strategy pair")
    c.add_argument("game_file")
    c.add_argument("--max", dest="max_strategy", required=True)
    c.add_argument("--min", dest="min_strategy", required=True)
    c.add_argument("--denominator", type=int, default=10**6, help="rounding cap for float strategies")
    c.add_argument("--require-equal", action="store_true", help="exit 1 unless bounds meet")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_certify)

    b = sub.add_parser("breakdown", help="Avalon outcome probabilities")
    b.add_argument("game_file")
    b.add_argument("--max", dest="max_strategy", required=True)
    b.add_argument("--min", dest="min_strategy", required=True)
    b.set_defaults(func=cmd_breakdown)

    t = sub.add_parser("table", help="summarise a directory of reports")
    t.add_argument("directory")
    t.set_defaults(func=cmd_table)
    return p


def main(argv=None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)  # exact certificates can have very long fractions
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
