"""Two-player zero-sum extensive-form games with chance.

Trees are stored as an index arena of compact ``array`` columns so that games
with millions of nodes fit in memory.  Player 0 is MAX and player 1 is MIN;
terminal payoffs are MAX's utility (MIN receives the negation).

Exact quantities use :class:`fractions.Fraction`.  Every evaluation routine
works in one of two numeric modes: exact (all inputs rational, result is a
``Fraction``) or float (numpy, result is a ``float``).
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

MAX, MIN = 0, 1
PLAYER_NAMES = ("MAX", "MIN")

TERMINAL, CHANCE, DECISION = 0, 1, 2


class GameError(ValueError):
    """Raised for malformed games or builder misuse."""


class StrategyIncompleteError(ValueError):
    """Raised when a strategy does not cover every infoset of its owner."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


def rationalize(value: float, max_denominator: int = 10**6) -> Fraction:
    """Closest fraction with bounded denominator (continued-fraction rounding)."""
    return Fraction(float(value)).limit_denominator(max_denominator)


class GameTree:
    """Immutable two-player zero-sum game tree.

    Build one with :class:`TreeBuilder`.  Infoset ids are assigned in order of
    first appearance during construction, so for each player every infoset's
    parent sequence belongs to an infoset with a smaller id.
    """

    def __init__(self, *, name, root, kind, player, infoset, edge_start,
                 edge_count, edges, edge_prob, payoff, tag, values, probs,
                 infoset_owner, infoset_actions, infoset_keys,
                 payoff_range=(Fraction(0), Fraction(1)), tag_names=(),
                 meta=None):
        self.name = name
        self.root = root
        self.kind = kind
        self.player = player
        self.infoset = infoset
        self.edge_start = edge_start
        self.edge_count = edge_count
        self.edges = edges
        self.edge_prob = edge_prob
        self.payoff = payoff
        self.tag = tag
        self.values = values
        self.probs = probs
        self.infoset_owner = infoset_owner
        self.infoset_actions = infoset_actions
        self.infoset_keys = infoset_keys
        self.payoff_range = payoff_range
        self.tag_names = tuple(tag_names)
        self.meta = dict(meta or {})

    def __repr__(self):
        n, z, (a, b) = counts(self)
        return f"GameTree({self.name!r}, nodes={n}, terminals={z}, infosets=({a}, {b}))"

    @property
    def num_nodes(self) -> int:
        return len(self.kind)

    @property
    def num_infosets(self) -> int:
        return len(self.infoset_owner)

    def children(self, node: int) -> range | list:
        s = self.edge_start[node]
        return self.edges[s:s + self.edge_count[node]]

    def chance_probs(self, node: int) -> list[Fraction]:
        s = self.edge_start[node]
        return [self.probs[i] for i in self.edge_prob[s:s + self.edge_count[node]]]

    def terminal_payoff(self, node: int) -> Fraction:
        return self.values[self.payoff[node]]

    @cached_property
    def infoset_index(self) -> dict[str, int]:
        return {k: i for i, k in enumerate(self.infoset_keys)}

    @cached_property
    def seq_start(self) -> np.ndarray:
        """First sequence id of each infoset within its owner's sequence space.

        Sequence 0 of each player is the empty sequence; the sequence for action
        ``a`` at infoset ``I`` is ``seq_start[I] + a``.
        """
        owner = np.frombuffer(self.infoset_owner, dtype=np.int8) if len(self.infoset_owner) else np.zeros(0, np.int8)
        nact = np.asarray(self.infoset_actions, dtype=np.int64)
        start = np.zeros(len(nact), dtype=np.int64)
        for p in (MAX, MIN):
            mask = owner == p
            sizes = nact[mask]
            start[mask] = 1 + np.concatenate(([0], np.cumsum(sizes)[:-1])) if sizes.size else sizes
        return start

    def num_sequences(self, p: int) -> int:
        owner = np.frombuffer(self.infoset_owner, dtype=np.int8) if len(self.infoset_owner) else np.zeros(0, np.int8)
        return 1 + int(np.asarray(self.infoset_actions, dtype=np.int64)[owner == p].sum())

    def player_infosets(self, p: int) -> np.ndarray:
        owner = np.frombuffer(self.infoset_owner, dtype=np.int8) if len(self.infoset_owner) else np.zeros(0, np.int8)
        return np.flatnonzero(owner == p)

    @cached_property
    def sequence_form(self) -> "SequenceForm":
        return SequenceForm(self)


class TreeBuilder:
    """Incremental constructor for :class:`GameTree`.

    Nodes are created parent-first; each parent reserves its child slots, which
    are filled with :meth:`set_child` once the child exists.
    """

    def __init__(self, name: str = "game", payoff_range=(0, 1), tag_names=()):
        self.name = name
        self.payoff_range = (as_fraction(payoff_range[0]), as_fraction(payoff_range[1]))
        self.tag_names = tuple(tag_names)
        self.kind = array("b")
        self.player = array("b")
        self.infoset = array("l")
        self.edge_start = array("q")
        self.edge_count = array("l")
        self.edges = array("q")
        self.edge_prob = array("l")
        self.payoff = array("l")
        self.tag = array("b")
        self.values: list[Fraction] = []
        self._value_index: dict[Fraction, int] = {}
        self.probs: list[Fraction] = []
        self._prob_index: dict[Fraction, int] = {}
        self.infoset_owner = array("b")
        self.infoset_actions = array("l")
        self.infoset_keys: list[str] = []
        self._infosets: dict[str, int] = {}
        self.meta: dict = {}

    def _new_node(self, kind, player, infoset, nchildren, payoff=-1, tag=0):
        nid = len(self.kind)
        self.kind.append(kind)
        self.player.append(player)
        self.infoset.append(infoset)
        self.edge_start.append(len(self.edges))
        self.edge_count.append(nchildren)
        self.payoff.append(payoff)
        self.tag.append(tag)
        return nid

    def _value(self, v: Fraction) -> int:
        idx = self._value_index.get(v)
        if idx is None:
            idx = self._value_index[v] = len(self.values)
            self.values.append(v)
        return idx

    def _prob(self, p: Fraction) -> int:
        idx = self._prob_index.get(p)
        if idx is None:
            idx = self._prob_index[p] = len(self.probs)
            self.probs.append(p)
        return idx

    def infoset_id(self, player: int, key: str, num_actions: int) -> int:
        iid = self._infosets.get(key)
        if iid is None:
            iid = self._infosets[key] = len(self.infoset_keys)
            self.infoset_keys.append(key)
            self.infoset_owner.append(player)
            self.infoset_actions.append(num_actions)
        elif self.infoset_owner[iid] != player or self.infoset_actions[iid] != num_actions:
            raise GameError(
                f"infoset {key!r} reused with owner/actions "
                f"({player}, {num_actions}) != ({self.infoset_owner[iid]}, {self.infoset_actions[iid]})")
        return iid

    def terminal(self, payoff, tag: int = 0) -> int:
        return self._new_node(TERMINAL, -1, -1, 0, self._value(as_fraction(payoff)), tag)

    def chance(self, probs: Sequence) -> int:
        nid = self._new_node(CHANCE, -1, -1, len(probs))
        for p in probs:
            self.edges.append(-1)
            self.edge_prob.append(self._prob(as_fraction(p)))
        return nid

    def decision(self, player: int, key: str, num_actions: int) -> int:
        iid = self.infoset_id(player, key, num_actions)
        nid = self._new_node(DECISION, player, iid, num_actions)
        for _ in range(num_actions):
            self.edges.append(-1)
            self.edge_prob.append(-1)
        return nid

    def set_child(self, parent: int, slot: int, child: int) -> None:
        if not 0 <= slot < self.edge_count[parent]:
            raise GameError(f"node {parent} has no child slot {slot}")
        self.edges[self.edge_start[parent] + slot] = child

    def build(self, root: int = 0) -> GameTree:
        return GameTree(
            name=self.name, root=root, kind=self.kind, player=self.player,
            infoset=self.infoset, edge_start=self.edge_start,
            edge_count=self.edge_count, edges=self.edges,
            edge_prob=self.edge_prob, payoff=self.payoff, tag=self.tag,
            values=self.values, probs=self.probs,
            infoset_owner=self.infoset_owner,
            infoset_actions=self.infoset_actions,
            infoset_keys=self.infoset_keys, payoff_range=self.payoff_range,
            tag_names=self.tag_names, meta=self.meta)


def constant_game(c=0, name: str = "constant") -> GameTree:
    b = TreeBuilder(name, payoff_range=(min(0, as_fraction(c)), max(1, as_fraction(c))))
    b.terminal(c)
    return b.build()


# ---------------------------------------------------------------------------
# structural operations


def counts(game: GameTree) -> tuple[int, int, tuple[int, int]]:
    """(num_nodes, num_terminals, (MAX infosets, MIN infosets))."""
    kind = np.frombuffer(game.kind, dtype=np.int8) if len(game.kind) else np.zeros(0, np.int8)
    owner = np.frombuffer(game.infoset_owner, dtype=np.int8) if len(game.infoset_owner) else np.zeros(0, np.int8)
    return (len(kind), int((kind == TERMINAL).sum()),
            (int((owner == MAX).sum()), int((owner == MIN).sum())))


@dataclass
class ValidationReport:
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "ok" if self.ok else "\n".join(self.issues)


def validate(game: GameTree, max_issues: int = 50) -> ValidationReport:
    """Check tree-ness, probabilities, infoset consistency and perfect recall."""
    report = ValidationReport()

    def issue(msg):
        if len(report.issues) < max_issues:
            report.issues.append(msg)

    n = game.num_nodes
    if n == 0:
        issue("game has no nodes")
        return report
    if not 0 <= game.root < n:
        issue(f"root {game.root} out of range")
        return report
    lo, hi = game.payoff_range
    seen = bytearray(n)
    # owner sequence of each infoset: (seq of MAX, seq of MIN) at first visit
    parent_seq: dict[int, int] = {}
    seq_start = game.seq_start
    stack = [(game.root, 0, 0)]
    seen[game.root] = 1
    while stack:
        node, sx, sy = stack.pop()
        kind = game.kind[node]
        cs = game.children(node)
        if kind == TERMINAL:
            if cs:
                issue(f"terminal node {node} has children")
            v = game.terminal_payoff(node)
            if not lo <= v <= hi:
                issue(f"terminal node {node} payoff {v} outside declared range [{lo}, {hi}]")
            continue
        if kind == CHANCE:
            probs = game.chance_probs(node)
            if not probs:
                issue(f"chance node {node} has no outcomes")
            if any(p < 0 for p in probs):
                issue(f"chance node {node} has a negative probability")
            total = sum(probs, Fraction(0))
            if total != 1:
                issue(f"chance node {node} probabilities sum to {total}, not 1")
        elif kind == DECISION:
            iid = game.infoset[node]
            if not 0 <= iid < game.num_infosets:
                issue(f"decision node {node} has invalid infoset {iid}")
                continue
            if game.infoset_owner[iid] != game.player[node]:
                issue(f"decision node {node} owner differs from infoset {game.infoset_keys[iid]!r}")
            if len(cs) != game.infoset_actions[iid]:
                issue(f"decision node {node} has {len(cs)} children but infoset "
                      f"{game.infoset_keys[iid]!r} declares {game.infoset_actions[iid]} actions")
            own = sx if game.player[node] == MAX else sy
            prev = parent_seq.setdefault(iid, own)
            if prev != own:
                issue(f"perfect recall violated at infoset {game.infoset_keys[iid]!r} (node {node})")
        else:
            issue(f"node {node} has unknown kind {kind}")
            continue
        for a, c in enumerate(cs):
            if not 0 <= c < n:
                issue(f"node {node} child slot {a} is unset or out of range")
                continue
            if seen[c]:
                issue(f"node {c} has more than one parent (or a cycle)")
                continue
            seen[c] = 1
            if kind == DECISION:
                s = int(seq_start[game.infoset[node]]) + a
                if game.player[node] == MAX:
                    stack.append((c, s, sy))
                else:
                    stack.append((c, sx, s))
            else:
                stack.append((c, sx, sy))
    unreached = n - sum(seen)
    if unreached:
        issue(f"{unreached} node(s) unreachable from the root")
    for iid in range(game.num_infosets):
        if iid not in parent_seq and not unreached:
            issue(f"infoset {game.infoset_keys[iid]!r} has no member nodes")
    return report


# ---------------------------------------------------------------------------
# sequence form


class _Levels:
    """Per-player infoset layering used by the vectorised passes."""

    def __init__(self, seq_start, nact, parent_seq, owner_infosets, infoset_of_seq_owner):
        depth = {}
        self.levels = []
        # infosets are topologically ordered by id within a player
        by_depth: dict[int, list[int]] = {}
        for iid in owner_infosets:
            ps = parent_seq[iid]
            d = 0 if ps == 0 else depth[infoset_of_seq_owner[ps]] + 1
            depth[iid] = d
            by_depth.setdefault(d, []).append(iid)
        for d in sorted(by_depth):
            infs = np.asarray(by_depth[d], dtype=np.int64)
            starts = seq_start[infs]
            sizes = nact[infs]
            offsets = np.concatenate(([0], np.cumsum(sizes)[:-1]))
            seqs = np.repeat(starts - offsets, sizes) + np.arange(int(sizes.sum()))
            parents = parent_seq[infs]
            order = np.argsort(parents, kind="stable")
            uniq, group_start = np.unique(parents[order], return_index=True)
            self.levels.append(_Level(infs, seqs, offsets, sizes, parents, order, uniq, group_start))


@dataclass
class _Level:
    infosets: np.ndarray      # global infoset ids at this depth
    seqs: np.ndarray          # their sequences, contiguous per infoset
    offsets: np.ndarray       # segment start of each infoset inside ``seqs``
    sizes: np.ndarray
    parents: np.ndarray       # parent sequence of each infoset
    order: np.ndarray         # infosets sorted by parent
    uniq_parents: np.ndarray
    group_start: np.ndarray

    def seq_parents(self):
        return np.repeat(self.parents, self.sizes)

    def add_to_parents(self, target, infoset_values):
        sums = np.add.reduceat(infoset_values[self.order], self.group_start)
        target[self.uniq_parents] += sums


class SequenceForm:
    """Sequence-form view of a game: terminal table plus sequence structure.

    Attributes are numpy arrays.  ``term_seq[p][z]`` is player ``p``'s last
    sequence before terminal ``z``; ``term_reach`` the chance reach.
    """

    def __init__(self, game: GameTree):
        self.game = game
        nI = game.num_infosets
        seq_start = game.seq_start
        nact = np.asarray(game.infoset_actions, dtype=np.int64)
        parent_seq = np.full(nI, -1, dtype=np.int64)
        reach_index: dict[Fraction, int] = {Fraction(1): 0}
        reach_values = [Fraction(1)]
        mult_cache: dict[tuple[int, int], int] = {}
        t_node = array("q")
        t_x = array("q")
        t_y = array("q")
        t_r = array("l")
        stack = [(game.root, 0, 0, 0)]
        kind, edges, estart, ecount = game.kind, game.edges, game.edge_start, game.edge_count
        eprob, infoset, player = game.edge_prob, game.infoset, game.player
        while stack:
            node, sx, sy, r = stack.pop()
            k = kind[node]
            s0 = estart[node]
            if k == TERMINAL:
                t_node.append(node)
                t_x.append(sx)
                t_y.append(sy)
                t_r.append(r)
            elif k == CHANCE:
                for e in range(s0, s0 + ecount[node]):
                    pi = eprob[e]
                    key = (r, pi)
                    nr = mult_cache.get(key)
                    if nr is None:
                        val = reach_values[r] * game.probs[pi]
                        nr = reach_index.get(val)
                        if nr is None:
                            nr = reach_index[val] = len(reach_values)
                            reach_values.append(val)
                        mult_cache[key] = nr
                    stack.append((edges[e], sx, sy, nr))
            else:
                iid = infoset[node]
                own = sx if player[node] == MAX else sy
                if parent_seq[iid] < 0:
                    parent_seq[iid] = own
                elif parent_seq[iid] != own:
                    raise GameError(f"perfect recall violated at {game.infoset_keys[iid]!r}")
                base = int(seq_start[iid])
                if player[node] == MAX:
                    for a in range(ecount[node]):
                        stack.append((edges[s0 + a], base + a, sy, r))
                else:
                    for a in range(ecount[node]):
                        stack.append((edges[s0 + a], sx, base + a, r))
        order = np.argsort(np.asarray(t_node, dtype=np.int64), kind="stable")
        self.term_node = np.asarray(t_node, dtype=np.int64)[order]
        self.term_seq = (np.asarray(t_x, dtype=np.int64)[order], np.asarray(t_y, dtype=np.int64)[order])
        self.term_reach_idx = np.asarray(t_r, dtype=np.int64)[order]
        self.reach_values = reach_values
        self.term_reach = np.array([float(v) for v in reach_values])[self.term_reach_idx] if len(order) else np.zeros(0)
        pay_idx = np.frombuffer(game.payoff, dtype=np.int32 if game.payoff.itemsize == 4 else np.int64)
        self.term_payoff_idx = pay_idx[self.term_node].astype(np.int64)
        self.term_payoff = np.array([float(v) for v in game.values])[self.term_payoff_idx] if len(order) else np.zeros(0)
        self.parent_seq = parent_seq
        self.seq_start = seq_start
        self.num_actions = nact
        owner = np.frombuffer(game.infoset_owner, dtype=np.int8) if nI else np.zeros(0, np.int8)
        self.owner = owner
        self.num_seqs = (game.num_sequences(MAX), game.num_sequences(MIN))
        self.infosets = (np.flatnonzero(owner == MAX), np.flatnonzero(owner == MIN))
        # infoset owning each sequence (-1 for the empty sequence)
        self.seq_infoset = []
        for p in (MAX, MIN):
            arr = np.full(self.num_seqs[p], -1, dtype=np.int64)
            infs = self.infosets[p]
            arr[np.repeat(seq_start[infs], nact[infs]) + _ranges(nact[infs])] = np.repeat(infs, nact[infs])
            self.seq_infoset.append(arr)
        self.levels = tuple(
            _Levels(seq_start, nact, parent_seq, self.infosets[p], self.seq_infoset[p]).levels
            for p in (MAX, MIN))
        self.weighted_payoff = self.term_reach * self.term_payoff

    @property
    def num_terminals(self) -> int:
        return len(self.term_node)

    # -- float kernels -------------------------------------------------------

    def realization(self, p: int, behavior: np.ndarray) -> np.ndarray:
        """Realization plan from a flat behavioral vector indexed by sequence."""
        x = np.zeros(self.num_seqs[p])
        x[0] = 1.0
        for lv in self.levels[p]:
            x[lv.seqs] = x[lv.seq_parents()] * behavior[lv.seqs]
        return x

    def terminal_values(self, p: int, opp_realization: np.ndarray) -> np.ndarray:
        """Per-sequence sum of MAX payoff times chance and opponent reach."""
        w = self.weighted_payoff * opp_realization[self.term_seq[1 - p]]
        return np.bincount(self.term_seq[p], weights=w, minlength=self.num_seqs[p])

    def cf_values(self, p: int, behavior: np.ndarray, tv: np.ndarray) -> np.ndarray:
        """Bottom-up counterfactual sequence values (MAX utility) under ``behavior``."""
        v = tv.copy()
        for lv in reversed(self.levels[p]):
            prod = behavior[lv.seqs] * v[lv.seqs]
            inf_val = np.add.reduceat(prod, lv.offsets) if len(prod) else prod
            lv.add_to_parents(v, inf_val)
        return v

    def best_response_values(self, p: int, tv: np.ndarray):
        """Bottom-up best response for ``p``; returns (sequence values, argmax per infoset)."""
        v = tv.copy()
        choice = np.zeros(len(self.num_actions), dtype=np.int64)
        red = np.maximum if p == MAX else np.minimum
        for lv in reversed(self.levels[p]):
            seg = v[lv.seqs]
            best = red.reduceat(seg, lv.offsets)
            # first action attaining the optimum
            hit = seg == np.repeat(best, lv.sizes)
            idx = np.flatnonzero(hit)
            seg_id = np.repeat(np.arange(len(lv.sizes)), lv.sizes)[idx]
            first = np.full(len(lv.sizes), -1)
            first[seg_id[::-1]] = idx[::-1] - lv.offsets[seg_id[::-1]]
            choice[lv.infosets] = first
            lv.add_to_parents(v, best)
        return v, choice

    def uniform_behavior(self, p: int) -> np.ndarray:
        b = np.ones(self.num_seqs[p])
        infs = self.infosets[p]
        nact = self.num_actions[infs]
        b[np.repeat(self.seq_start[infs], nact) + _ranges(nact)] = np.repeat(1.0 / nact, nact)
        return b


def _ranges(sizes: np.ndarray) -> np.ndarray:
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.size == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    return np.arange(int(sizes.sum())) - np.repeat(offsets, sizes)


# ---------------------------------------------------------------------------
# strategies


class BehavioralStrategy:
    """Per-infoset action distributions for one player.

    ``values`` is a flat vector indexed by the owner's sequence ids
    (``game.seq_start[I] + a``); entry 0 (the empty sequence) is 1.  In exact
    mode it is a list of ``Fraction``; in float mode a numpy array.
    """

    def __init__(self, game: GameTree, owner: int, values, exact: bool | None = None):
        self.game = game
        self.owner = owner
        if exact is None:
            exact = not isinstance(values, np.ndarray)
        self.exact = exact
        self.values = list(values) if exact else np.asarray(values, dtype=float)

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"BehavioralStrategy({PLAYER_NAMES[self.owner]}, {mode}, {len(self.values)} sequences)"

    @classmethod
    def uniform(cls, game: GameTree, owner: int, exact: bool = True) -> "BehavioralStrategy":
        vals = [Fraction(1)] * game.num_sequences(owner)
        start = game.seq_start
        for iid in game.player_infosets(owner):
            k = game.infoset_actions[iid]
            for a in range(k):
                vals[start[iid] + a] = Fraction(1, k)
        if exact:
            return cls(game, owner, vals, exact=True)
        return cls(game, owner, np.array([float(v) for v in vals]), exact=False)

    @classmethod
    def from_dict(cls, game: GameTree, owner: int, probs: dict, exact: bool = True,
                  default=None) -> "BehavioralStrategy":
        """Build from ``{infoset key: probability vector}``.

        Missing infosets raise :class:`StrategyIncompleteError` unless
        ``default`` is ``"uniform"``.
        """
        vals = [Fraction(1)] * game.num_sequences(owner) if exact else np.ones(game.num_sequences(owner))
        start = game.seq_start
        for iid in game.player_infosets(owner):
            key = game.infoset_keys[iid]
            k = game.infoset_actions[iid]
            vec = probs.get(key)
            if vec is None:
                if default != "uniform":
                    raise StrategyIncompleteError(f"no probabilities for infoset {key!r}")
                vec = [Fraction(1, k)] * k
            if len(vec) != k:
                raise GameError(f"infoset {key!r} expects {k} probabilities, got {len(vec)}")
            for a, v in enumerate(vec):
                vals[start[iid] + a] = as_fraction(v) if exact else float(v)
        return cls(game, owner, vals, exact=exact)

    def to_dict(self) -> dict[str, list]:
        out = {}
        start = self.game.seq_start
        for iid in self.game.player_infosets(self.owner):
            s = int(start[iid])
            k = self.game.infoset_actions[iid]
            out[self.game.infoset_keys[iid]] = list(self.values[s:s + k])
        return out

    def at(self, key: str) -> list:
        iid = self.game.infoset_index[key]
        s = int(self.game.seq_start[iid])
        return list(self.values[s:s + self.game.infoset_actions[iid]])

    def to_float(self) -> "BehavioralStrategy":
        if not self.exact:
            return self
        return BehavioralStrategy(self.game, self.owner, np.array([float(v) for v in self.values]), exact=False)

    def to_exact(self, max_denominator: int | None = None) -> "BehavioralStrategy":
        """Exact copy; float entries are rationalised then renormalised per infoset."""
        if self.exact:
            return self
        max_den = max_denominator or 10**6
        vals = [Fraction(1)] * len(self.values)
        start = self.game.seq_start
        for iid in self.game.player_infosets(self.owner):
            s = int(start[iid])
            k = self.game.infoset_actions[iid]
            seg = [max(rationalize(v, max_den), Fraction(0)) for v in self.values[s:s + k]]
            tot = sum(seg, Fraction(0))
            seg = [v / tot for v in seg] if tot > 0 else [Fraction(1, k)] * k
            vals[s:s + k] = seg
        return BehavioralStrategy(self.game, self.owner, vals, exact=True)

    def check(self, tol: float = 1e-12) -> list[str]:
        """Return infosets whose distribution is not a probability vector."""
        bad = []
        start = self.game.seq_start
        for iid in self.game.player_infosets(self.owner):
            s = int(start[iid])
            seg = self.values[s:s + self.game.infoset_actions[iid]]
            if self.exact:
                ok = all(v >= 0 for v in seg) and sum(seg, Fraction(0)) == 1
            else:
                ok = bool(np.all(np.asarray(seg) >= -tol)) and abs(float(np.sum(seg)) - 1) <= tol
            if not ok:
                bad.append(self.game.infoset_keys[iid])
        return bad

    def realization(self):
        """Sequence-form realization plan (list of Fraction or numpy array)."""
        sf = self.game.sequence_form
        if not self.exact:
            return sf.realization(self.owner, self.values)
        x = [Fraction(0)] * len(self.values)
        x[0] = Fraction(1)
        for lv in sf.levels[self.owner]:
            for s, par in zip(lv.seqs.tolist(), lv.seq_parents().tolist()):
                x[s] = x[par] * self.values[s]
        return x


def _check_owner(strategy: BehavioralStrategy, owner: int, game: GameTree):
    if strategy.owner != owner:
        raise GameError(f"expected a {PLAYER_NAMES[owner]} strategy")
    if strategy.game is not game and len(strategy.values) != game.num_sequences(owner):
        raise StrategyIncompleteError("strategy does not match the game's sequence space")


def expected_value(game: GameTree, x: BehavioralStrategy, y: BehavioralStrategy):
    """MAX's expected payoff; exact ``Fraction`` when both strategies are exact."""
    _check_owner(x, MAX, game)
    _check_owner(y, MIN, game)
    sf = game.sequence_form
    if x.exact and y.exact:
        rx, ry = x.realization(), y.realization()
        total = Fraction(0)
        acc: dict[tuple[int, int], Fraction] = {}
        for sx, sy, ri, pi in zip(sf.term_seq[0].tolist(), sf.term_seq[1].tolist(),
                                  sf.term_reach_idx.tolist(), sf.term_payoff_idx.tolist()):
            if rx[sx] and ry[sy]:
                k = (ri, pi)
                acc[k] = acc.get(k, Fraction(0)) + rx[sx] * ry[sy]
        for (ri, pi), w in acc.items():
            total += w * sf.reach_values[ri] * game.values[pi]
        return total
    rx = sf.realization(MAX, np.asarray(x.to_float().values))
    ry = sf.realization(MIN, np.asarray(y.to_float().values))
    return float(np.sum(sf.weighted_payoff * rx[sf.term_seq[0]] * ry[sf.term_seq[1]]))


def expected_value_tree(game: GameTree, x: BehavioralStrategy, y: BehavioralStrategy) -> Fraction:
    """Exact expected value by direct depth-first tree walk (no sequence form)."""
    _check_owner(x, MAX, game)
    _check_owner(y, MIN, game)
    start = game.seq_start
    total = Fraction(0)
    stack = [(game.root, Fraction(1))]
    while stack:
        node, reach = stack.pop()
        if not reach:
            continue
        k = game.kind[node]
        if k == TERMINAL:
            total += reach * game.terminal_payoff(node)
        elif k == CHANCE:
            for c, p in zip(game.children(node), game.chance_probs(node)):
                stack.append((c, reach * p))
        else:
            strat = x if game.player[node] == MAX else y
            s = int(start[game.infoset[node]])
            for a, c in enumerate(game.children(node)):
                stack.append((c, reach * as_fraction(strat.values[s + a])))
    return total


def _exact_terminal_values(game: GameTree, p: int, opp_real: list) -> list:
    sf = game.sequence_form
    tv = [Fraction(0)] * sf.num_seqs[p]
    wp = {}
    own = sf.term_seq[p].tolist()
    opp = sf.term_seq[1 - p].tolist()
    for s, o, ri, pi in zip(own, opp, sf.term_reach_idx.tolist(), sf.term_payoff_idx.tolist()):
        r = opp_real[o]
        if not r:
            continue
        key = (ri, pi)
        w = wp.get(key)
        if w is None:
            w = wp[key] = sf.reach_values[ri] * game.values[pi]
        if w:
            tv[s] += w * r
    return tv


def best_response(game: GameTree, opponent: BehavioralStrategy):
    """Pure best response to ``opponent`` and the resulting MAX payoff.

    The responder is the player not owning ``opponent``: MAX maximises, MIN
    minimises.  Exact when the opponent strategy is exact.
    """
    p = 1 - opponent.owner
    sf = game.sequence_form
    nseq = sf.num_seqs[p]
    start = game.seq_start
    if opponent.exact:
        opp_real = opponent.realization()
        v = _exact_terminal_values(game, p, opp_real)
        pure = [Fraction(0)] * nseq
        pure[0] = Fraction(1)
        better = (lambda a, b: a > b) if p == MAX else (lambda a, b: a < b)
        for lv in reversed(sf.levels[p]):
            for iid, par in zip(lv.infosets.tolist(), lv.parents.tolist()):
                s = int(start[iid])
                k = game.infoset_actions[iid]
                best_a, best_v = 0, v[s]
                for a in range(1, k):
                    if better(v[s + a], best_v):
                        best_a, best_v = a, v[s + a]
                pure[s + best_a] = Fraction(1)
                v[par] += best_v
        return BehavioralStrategy(game, p, pure, exact=True), v[0]
    opp_real = sf.realization(opponent.owner, np.asarray(opponent.values))
    tv = sf.terminal_values(p, opp_real)
    v, choice = sf.best_response_values(p, tv)
    pure = np.zeros(nseq)
    pure[0] = 1.0
    infs = sf.infosets[p]
    pure[start[infs] + choice[infs]] = 1.0
    return BehavioralStrategy(game, p, pure, exact=False), float(v[0])


def exploitability(game: GameTree, x: BehavioralStrategy, y: BehavioralStrategy):
    """Saddle-point gap u(BR(y), y) - u(x, BR(x)); zero exactly at equilibrium."""
    _check_owner(x, MAX, game)
    _check_owner(y, MIN, game)
    _, upper = best_response(game, y)
    _, lower = best_response(game, x)
    return upper - lower


def pure_strategies(game: GameTree, p: int):
    """Enumerate all pure behavioral strategies of ``p`` (small games only)."""
    import itertools
    infs = game.player_infosets(p)
    start = game.seq_start
    ranges = [range(game.infoset_actions[i]) for i in infs]
    for choice in itertools.product(*ranges):
        vals = [Fraction(0)] * game.num_sequences(p)
        vals[0] = Fraction(1)
        for iid, a in zip(infs, choice):
            vals[int(start[iid]) + a] = Fraction(1)
        yield BehavioralStrategy(game, p, vals, exact=True)


def payoff_matrix(game: GameTree):
    """Normal-form payoff matrix over pure strategies (small games only)."""
    xs = list(pure_strategies(game, MAX))
    ys = list(pure_strategies(game, MIN))
    return [[expected_value(game, x, y) for y in ys] for x in xs], xs, ys
