"""Text formats for games, strategies and solve reports.

Game files are line oriented::

    hiddenrole-game 1
    [meta]
    name "avalon-5p-merlin"          # values are JSON
    [infosets]
    0 MAX 3 M|v,M34,v,v,v|           # id, owner, action count, key (rest of line)
    [nodes]
    0 C 1:1/30 2:1/30 ...            # chance: child:probability
    1 D 1 4 5 6                      # decision: player, infoset, children
    5 T 1/1 3                        # terminal: MAX payoff, outcome tag
    [end]

Node ids are listed parent first; the root is node ``meta.root``.  Files
ending in ``.gz`` are gzip-compressed.  Strategies and reports are JSON.
"""

from __future__ import annotations

import gzip
import hashlib
import json
from array import array
from fractions import Fraction
from pathlib import Path

from .efg import (CHANCE, DECISION, MAX, MIN, PLAYER_NAMES, TERMINAL,
                  BehavioralStrategy, GameTree)

GAME_HEADER = "hiddenrole-game 1"
STRATEGY_FORMAT = "hiddenrole-strategy 1"
REPORT_FORMAT = "hiddenrole-report 1"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<string>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def frac_str(v) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def _open(path, mode):
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def write_game(game: GameTree, fh) -> None:
    w = fh.write
    w(GAME_HEADER + "\n[meta]\n")
    meta = {"name": game.name, "root": game.root,
            "payoff_range": [frac_str(v) for v in game.payoff_range],
            "tag_names": list(game.tag_names), **game.meta}
    for k, v in meta.items():
        w(f"{k} {json.dumps(v)}\n")
    w("[infosets]\n")
    for i, key in enumerate(game.infoset_keys):
        w(f"{i} {PLAYER_NAMES[game.infoset_owner[i]]} {game.infoset_actions[i]} {key}\n")
    w("[nodes]\n")
    values = [frac_str(v) for v in game.values]
    probs = [frac_str(v) for v in game.probs]
    kind, edges, es, ec, ep = game.kind, game.edges, game.edge_start, game.edge_count, game.edge_prob
    for nid in range(game.num_nodes):
        k = kind[nid]
        if k == TERMINAL:
            w(f"{nid} T {values[game.payoff[nid]]} {game.tag[nid]}\n")
        elif k == CHANCE:
            s = es[nid]
            w(f"{nid} C " + " ".join(f"{edges[e]}:{probs[ep[e]]}" for e in range(s, s + ec[nid])) + "\n")
        else:
            s = es[nid]
            w(f"{nid} D {game.player[nid]} {game.infoset[nid]} "
              + " ".join(str(edges[e]) for e in range(s, s + ec[nid])) + "\n")
    w("[end]\n")


def save_game(game: GameTree, path) -> None:
    with _open(path, "w") as fh:
        write_game(game, fh)


def read_game(fh, source: str = "<string>") -> GameTree:
    lines = iter(enumerate(fh, start=1))

    def fail(msg, ln):
        raise ParseError(msg, ln, source)

    try:
        ln, head = next(lines)
    except StopIteration:
        raise ParseError("empty file", None, source) from None
    if head.strip() != GAME_HEADER:
        fail(f"expected header {GAME_HEADER!r}", ln)
    section = None
    meta: dict = {}
    infoset_owner, infoset_actions, keys = array("b"), array("l"), []
    kind, player, infoset = array("b"), array("b"), array("l")
    edge_start, edge_count, edges, edge_prob = array("q"), array("l"), array("q"), array("l")
    payoff, tag = array("l"), array("b")
    values, vindex, probs, pindex = [], {}, [], {}
    ended = False
    for ln, raw in lines:
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("["):
            section = line.strip()
            if section == "[end]":
                ended = True
                break
            if section not in ("[meta]", "[infosets]", "[nodes]"):
                fail(f"unknown section {section}", ln)
            continue
        try:
            if section == "[meta]":
                k, _, v = line.partition(" ")
                meta[k] = json.loads(v)
            elif section == "[infosets]":
                parts = line.split(" ", 3)
                if len(parts) < 4:
                    fail("infoset line needs id, owner, action count and key", ln)
                iid = int(parts[0])
                if iid != len(keys):
                    fail(f"infoset ids must be consecutive (got {iid})", ln)
                if parts[1] not in PLAYER_NAMES:
                    fail(f"bad infoset owner {parts[1]!r}", ln)
                infoset_owner.append(PLAYER_NAMES.index(parts[1]))
                infoset_actions.append(int(parts[2]))
                keys.append(parts[3])
            elif section == "[nodes]":
                parts = line.split()
                nid = int(parts[0])
                if nid != len(kind):
                    fail(f"node ids must be consecutive (got {nid})", ln)
                edge_start.append(len(edges))
                t = parts[1]
                if t == "T":
                    v = Fraction(parts[2])
                    idx = vindex.get(v)
                    if idx is None:
                        idx = vindex[v] = len(values)
                        values.append(v)
                    kind.append(TERMINAL), player.append(-1), infoset.append(-1)
                    payoff.append(idx)
                    tag.append(int(parts[3]) if len(parts) > 3 else 0)
                    edge_count.append(0)
                elif t == "C":
                    kind.append(CHANCE), player.append(-1), infoset.append(-1)
                    payoff.append(-1), tag.append(0)
                    for item in parts[2:]:
                        c, _, p = item.partition(":")
                        pv = Fraction(p)
                        idx = pindex.get(pv)
                        if idx is None:
                            idx = pindex[pv] = len(probs)
                            probs.append(pv)
                        edges.append(int(c))
                        edge_prob.append(idx)
                    edge_count.append(len(parts) - 2)
                elif t == "D":
                    kind.append(DECISION), player.append(int(parts[2])), infoset.append(int(parts[3]))
                    payoff.append(-1), tag.append(0)
                    for c in parts[4:]:
                        edges.append(int(c))
                        edge_prob.append(-1)
                    edge_count.append(len(parts) - 4)
                else:
                    fail(f"unknown node type {t!r}", ln)
            else:
                fail("content outside any section", ln)
        except ParseError:
            raise
        except (ValueError, IndexError, ZeroDivisionError, json.JSONDecodeError) as exc:
            fail(f"malformed line: {exc}", ln)
    if not ended:
        raise ParseError("missing [end] marker (truncated file?)", None, source)
    if not len(kind):
        raise ParseError("no nodes", None, source)
    name = meta.pop("name", "game")
    root = int(meta.pop("root", 0))
    pr = meta.pop("payoff_range", ["0/1", "1/1"])
    tag_names = meta.pop("tag_names", [])
    return GameTree(
        name=name, root=root, kind=kind, player=player, infoset=infoset,
        edge_start=edge_start, edge_count=edge_count, edges=edges, edge_prob=edge_prob,
        payoff=payoff, tag=tag, values=values, probs=probs,
        infoset_owner=infoset_owner, infoset_actions=infoset_actions, infoset_keys=keys,
        payoff_range=(Fraction(pr[0]), Fraction(pr[1])), tag_names=tag_names, meta=meta)


def load_game(path) -> GameTree:
    with _open(path, "r") as fh:
        return read_game(fh, str(path))


def game_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# -- strategies -----------------------------------------------------------------------


def strategy_to_json(strategy: BehavioralStrategy) -> dict:
    if strategy.exact:
        probs = {k: [frac_str(v) for v in vec] for k, vec in strategy.to_dict().items()}
    else:
        probs = {k: [float(v) for v in vec] for k, vec in strategy.to_dict().items()}
    return {"format": STRATEGY_FORMAT, "game": strategy.game.name,
            "owner": PLAYER_NAMES[strategy.owner], "exact": strategy.exact, "probs": probs}


def strategy_from_json(game: GameTree, data: dict) -> BehavioralStrategy:
    if data.get("format") != STRATEGY_FORMAT:
        raise ParseError(f"not a strategy file (format {data.get('format')!r})")
    owner = PLAYER_NAMES.index(data["owner"])
    exact = bool(data.get("exact", True))
    return BehavioralStrategy.from_dict(game, owner, data["probs"], exact=exact)


def save_strategy(strategy: BehavioralStrategy, path) -> None:
    with _open(path, "w") as fh:
        json.dump(strategy_to_json(strategy), fh)


def load_strategy(game: GameTree, path) -> BehavioralStrategy:
    with _open(path, "r") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc}", exc.lineno, str(path)) from None
    return strategy_from_json(game, data)


def save_json(obj: dict, path) -> None:
    with _open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    with _open(path, "r") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc}", exc.lineno, str(path)) from None


def load_simgame_file(path):
    from .efg import GameError
    from .transform import load_simgame
    with _open(path, "r") as fh:
        text = fh.read()
    try:
        return load_simgame(text)
    except (GameError, KeyError, ValueError) as exc:
        raise ParseError(f"bad SimGame: {exc}", None, str(path)) from None
