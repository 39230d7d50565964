"""Hidden-role games and their mediated two-player zero-sum form.

A :class:`SimGame` is a small multi-player game in which chance first draws a
team assignment ``t`` and then play proceeds through simultaneous-move stages.
:func:`build_mediator_game` converts it into a two-player zero-sum
:class:`~hiddenrole.efg.GameTree` between a *mediator* (MAX) and an
*adversary* (MIN) controlling every MIN-team player jointly.  Each move stage
becomes three phases:

1. the adversary reports an observation for every MIN player, chosen among
   the observations a MAX player could have made given what that player has
   reported so far, or ``BOT`` (the player drops out of the protocol);
2. the mediator, seeing only reports and its own past recommendations,
   recommends a joint action to every player still in the protocol;
3. the adversary picks the actions actually played by the MIN players.

MAX players always report truthfully and obey.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .efg import MAX, MIN, GameError, GameTree, TreeBuilder, as_fraction

BOT = "BOT"  # report marking a player who has left the protocol


@dataclass(frozen=True)
class TeamAssignment:
    teams: tuple[int, ...]

    def __post_init__(self):
        if any(v not in (MAX, MIN) for v in self.teams):
            raise GameError(f"team flags must be 0 (MAX) or 1 (MIN): {self.teams}")
        if MAX not in self.teams:
            raise GameError("an assignment needs at least one MAX player")

    @classmethod
    def with_min(cls, n: int, min_players: Sequence[int]) -> "TeamAssignment":
        return cls(tuple(MIN if i in min_players else MAX for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.teams)

    @property
    def min_players(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.teams) if v == MIN)

    def label(self) -> str:
        return "".join("X" if v == MIN else "o" for v in self.teams)


# -- stage tree ---------------------------------------------------------------


@dataclass
class SimTerminal:
    utility: Fraction
    obs: tuple | None = None


@dataclass
class SimChance:
    outcomes: list            # [(probability, node), ...]
    obs: tuple | None = None  # per-player labels observed on arrival


@dataclass
class SimMove:
    """Simultaneous move; ``children`` is indexed by the joint action in
    row-major order over ``actions`` (player 0 most significant)."""

    actions: tuple            # per-player tuple of action labels (nonempty)
    children: list
    obs: tuple | None = None

    def child(self, joint: Sequence[int]):
        idx = 0
        for i, a in enumerate(joint):
            idx = idx * len(self.actions[i]) + a
        return self.children[idx]


@dataclass
class SimGame:
    n: int
    assignments: list              # [(TeamAssignment, probability)]
    roots: list                    # stage tree per assignment (may be shared)
    name: str = "simgame"
    payoff_range: tuple = (Fraction(0), Fraction(1))

    @property
    def k(self) -> int:
        return max((len(t.min_players) for t, _ in self.assignments), default=0)

    def root_observation(self, t: TeamAssignment, i: int):
        return ("t", t.label()) if t.teams[i] == MIN else ("t", "MAX")

    def num_histories(self) -> int:
        """Histories counted over every assignment, plus the assignment draw."""
        total = 1
        for root in self.roots:
            stack = [root]
            while stack:
                node = stack.pop()
                total += 1
                if isinstance(node, SimChance):
                    stack.extend(c for _, c in node.outcomes)
                elif isinstance(node, SimMove):
                    stack.extend(node.children)
        return total

    def validate(self) -> list[str]:
        issues = []
        if not self.assignments:
            return ["assignment distribution is empty"]
        if len(self.roots) != len(self.assignments):
            issues.append("need exactly one stage tree per assignment")
        total = sum((as_fraction(p) for _, p in self.assignments), Fraction(0))
        if total != 1:
            issues.append(f"assignment probabilities sum to {total}")
        for t, p in self.assignments:
            if t.n != self.n:
                issues.append(f"assignment {t.teams} has wrong length")
            if as_fraction(p) < 0:
                issues.append(f"assignment {t.teams} has negative probability")
        # the action set must be a function of each player's observation history
        seen: dict = {}
        for (t, _), root in zip(self.assignments, self.roots):
            for i, seq, actions in _walk_sequences(self, t, root, range(self.n)):
                prev = seen.setdefault((i, seq), actions)
                if prev != actions:
                    issues.append(f"player {i}: action set not determined by observations at {seq!r}")
        for root in self.roots:
            stack = [root]
            while stack:
                node = stack.pop()
                if isinstance(node, SimChance):
                    s = sum((as_fraction(p) for p, _ in node.outcomes), Fraction(0))
                    if s != 1:
                        issues.append(f"chance stage probabilities sum to {s}")
                    stack.extend(c for _, c in node.outcomes)
                elif isinstance(node, SimMove):
                    if len(node.actions) != self.n or any(len(a) == 0 for a in node.actions):
                        issues.append("move stage needs a nonempty action set for every player")
                        continue
                    want = 1
                    for a in node.actions:
                        want *= len(a)
                    if len(node.children) != want:
                        issues.append(f"move stage has {len(node.children)} children, expected {want}")
                    stack.extend(node.children)
                elif isinstance(node, SimTerminal):
                    lo, hi = self.payoff_range
                    if not lo <= as_fraction(node.utility) <= hi:
                        issues.append(f"utility {node.utility} outside payoff range")
        return issues


def _obs(node, i):
    return None if node.obs is None else node.obs[i]


def _walk_sequences(game: SimGame, t: TeamAssignment, root, players):
    """Yield (player, sequence, action labels) at every move stage.

    A sequence is a tuple alternating step observations and action indices;
    a step observation collects every label received since the last move.
    """
    init = tuple((game.root_observation(t, i),) for i in range(game.n))
    stack = [(root, tuple(() for _ in range(game.n)), init)]
    while stack:
        node, seqs, pend = stack.pop()
        pend = tuple(p + ((_obs(node, i),) if _obs(node, i) is not None else ()) for i, p in enumerate(pend))
        if isinstance(node, SimChance):
            for _, c in node.outcomes:
                stack.append((c, seqs, pend))
        elif isinstance(node, SimMove):
            for i in players:
                yield i, seqs[i] + (pend[i],), node.actions[i]
            for joint in itertools.product(*(range(len(a)) for a in node.actions)):
                nseqs = tuple(s + (pend[i], joint[i]) for i, s in enumerate(seqs))
                stack.append((node.child(joint), nseqs, tuple(() for _ in range(game.n))))


class _Consistency:
    """Observation sets O(s) and action sets A(s) along MAX-player sequences."""

    def __init__(self, game: SimGame):
        self.options: dict = {}
        self.actions: dict = {}
        for (t, _), root in zip(game.assignments, game.roots):
            maxp = [i for i in range(game.n) if t.teams[i] == MAX]
            for i, seq, acts in _walk_sequences(game, t, root, maxp):
                self.options.setdefault((i, seq[:-1]), set()).add(seq[-1])
                self.actions[(i, seq)] = acts
        self.options = {k: sorted(v, key=repr) for k, v in self.options.items()}

    def reports(self, i, seq):
        return self.options.get((i, seq), []) + [BOT]


def build_mediator_game(g: SimGame, name: str | None = None) -> GameTree:
    """Construct the mediated zero-sum game; single-option choices are collapsed."""
    if not g.assignments:
        raise GameError("assignment distribution is empty")
    issues = g.validate()
    if issues:
        raise GameError("invalid SimGame: " + "; ".join(issues[:5]))
    cons = _Consistency(g)
    n = g.n
    b = TreeBuilder(name or f"mediated-{g.name}", payoff_range=g.payoff_range)

    def key(*parts):
        return repr(parts)

    def walk(t, node, pend, rep, med, adv):
        """Return the Gamma0 node for sim ``node``.

        ``pend`` pending true observations per player; ``rep`` reported
        sequence per player (``None`` after BOT); ``med``/``adv`` the
        mediator's and adversary's information histories.
        """
        pend = tuple(p + ((_obs(node, i),) if _obs(node, i) is not None else ()) for i, p in enumerate(pend))
        if isinstance(node, SimTerminal):
            return b.terminal(node.utility)
        if isinstance(node, SimChance):
            c = b.chance([p for p, _ in node.outcomes])
            for a, (_, child) in enumerate(node.outcomes):
                b.set_child(c, a, walk(t, child, pend, rep, med, adv))
            return c
        mins = t.min_players
        adv = adv + (("obs", tuple(pend[i] for i in mins)),)
        # phase 1: reports for MIN players
        opts = [cons.reports(i, rep[i]) if rep[i] is not None else [BOT] for i in mins]
        joint_reports = list(itertools.product(*opts))
        p1 = None
        if len(joint_reports) > 1:
            p1 = b.decision(MIN, key("report", t.label(), adv), len(joint_reports))
        for ra, jr in enumerate(joint_reports):
            report = list(pend)
            for i, r in zip(mins, jr):
                report[i] = r
            nrep = list(rep)
            for i, r in zip(mins, jr):
                if r == BOT:
                    nrep[i] = None
            adv1 = adv + (("rep", jr),)
            med1 = med + (("rep", tuple(report)),)
            # phase 2: recommendations to players still in the protocol
            active = [i for i in range(n) if nrep[i] is not None]
            rec_sets = [cons.actions[(i, nrep[i] + (report[i],))] if t.teams[i] == MIN
                        else node.actions[i] for i in active]
            joint_recs = list(itertools.product(*(range(len(s)) for s in rec_sets)))
            p2 = None
            if len(joint_recs) > 1:
                p2 = b.decision(MAX, key("mediator", med1), len(joint_recs))
            for ca, jc in enumerate(joint_recs):
                rec = dict(zip(active, jc))
                med2 = med1 + (("rec", jc),)
                adv2 = adv1 + (("rec", tuple(rec.get(i) for i in mins)),)
                # phase 3: actions actually played by MIN players
                min_sets = [range(len(node.actions[i])) for i in mins]
                joint_acts = list(itertools.product(*min_sets))
                p3 = None
                if len(joint_acts) > 1:
                    p3 = b.decision(MIN, key("act", t.label(), adv2), len(joint_acts))
                for aa, ja in enumerate(joint_acts):
                    played = [rec.get(i) for i in range(n)]
                    for i, a in zip(mins, ja):
                        played[i] = a
                    rep3 = tuple(None if r is None else r + (report[i], rec[i]) for i, r in enumerate(nrep))
                    child = walk(t, node.child(played), tuple(() for _ in range(n)), rep3, med2,
                                 adv2 + (("act", ja),))
                    if p3 is None:
                        sub = child
                    else:
                        b.set_child(p3, aa, child)
                        sub = p3
                if p2 is None:
                    sub2 = sub
                else:
                    b.set_child(p2, ca, sub)
                    sub2 = p2
            if p1 is None:
                return sub2
            b.set_child(p1, ra, sub2)
        return p1

    nonzero = [(t, p, r) for (t, p), r in zip(g.assignments, g.roots) if as_fraction(p) > 0]
    root = b.chance([p for _, p, _ in nonzero]) if len(nonzero) > 1 else None
    for a, (t, _, r) in enumerate(nonzero):
        pend = tuple((g.root_observation(t, i),) for i in range(n))
        sub = walk(t, r, pend, tuple(() for _ in range(n)), (), ())
        if root is None:
            root = sub
        else:
            b.set_child(root, a, sub)
    b.meta.update({"source": g.name, "players": n, "k": g.k})
    return b.build(root=root)


def size_bound(g: SimGame) -> int:
    return g.num_histories() ** (g.k + 1)


def size_bound_check(g: SimGame, built: GameTree) -> bool:
    """Node count of the mediated game is at most |H|^(k+1)."""
    return built.num_nodes <= size_bound(g)


# -- text format ----------------------------------------------------------------

SIMGAME_FORMAT = "hiddenrole-simgame 1"


def _node_to_json(node):
    if isinstance(node, SimTerminal):
        d = {"terminal": str(as_fraction(node.utility))}
    elif isinstance(node, SimChance):
        d = {"chance": [[str(as_fraction(p)), _node_to_json(c)] for p, c in node.outcomes]}
    else:
        d = {"actions": [list(a) for a in node.actions],
             "children": [_node_to_json(c) for c in node.children]}
    if node.obs is not None:
        d["obs"] = list(node.obs)
    return d


def _node_from_json(d):
    obs = tuple(_freeze(o) for o in d["obs"]) if "obs" in d else None
    if "terminal" in d:
        return SimTerminal(Fraction(d["terminal"]), obs)
    if "chance" in d:
        return SimChance([(Fraction(p), _node_from_json(c)) for p, c in d["chance"]], obs)
    return SimMove(tuple(tuple(a) for a in d["actions"]),
                   [_node_from_json(c) for c in d["children"]], obs)


def _freeze(o):
    return tuple(_freeze(x) for x in o) if isinstance(o, list) else o


def dump_simgame(g: SimGame) -> str:
    body = {
        "format": SIMGAME_FORMAT, "name": g.name, "n": g.n,
        "payoff_range": [str(as_fraction(v)) for v in g.payoff_range],
        "assignments": [[list(t.teams), str(as_fraction(p))] for t, p in g.assignments],
        "roots": [_node_to_json(r) for r in g.roots],
    }
    return json.dumps(body)


def load_simgame(text: str) -> SimGame:
    d = json.loads(text)
    if d.get("format") != SIMGAME_FORMAT:
        raise GameError(f"not a SimGame file (format {d.get('format')!r})")
    return SimGame(
        n=d["n"],
        assignments=[(TeamAssignment(tuple(t)), Fraction(p)) for t, p in d["assignments"]],
        roots=[_node_from_json(r) for r in d["roots"]],
        name=d.get("name", "simgame"),
        payoff_range=tuple(Fraction(v) for v in d.get("payoff_range", ("0", "1"))))
