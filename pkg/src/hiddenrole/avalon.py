"""Reduced Avalon as a mediator-versus-adversary zero-sum game.

Only the information-relevant skeleton of Avalon is kept: roles are dealt,
players holding knowledge privately report it to the mediator (spies may
fake such reports), then the mediator dictates missions and the spies decide
whether to fail them.  Voting is dropped (the mediator controls proposals) and
missions that are dominated given earlier results are skipped:

* 5 players: three missions of size 3, one pass wins for the good team;
* 6 players: missions of sizes 3, 4, 3, 4, two passes win.

After a size-``s`` mission passes, later missions of size at most ``s`` pass
automatically.  Three failures win for the spies.  If Merlin is in play, a
good-team win is followed by the spies guessing Merlin.

Mission proposals are restricted to *plausible* sets (could be all good given
public information) that contain every *safe* player (good in every deal
consistent with public information).  Public information here is the
multiset of reported observation contents without reporter identities plus
the mission results.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .efg import MAX, MIN, BehavioralStrategy, GameError, GameTree, TreeBuilder

TAG_FAILED, TAG_PASSED, TAG_GUESSED, TAG_SURVIVED = 0, 1, 2, 3
TAG_NAMES = ("spies-fail-missions", "resistance-win", "merlin-guessed", "merlin-survived")

FAIL, PASS = 0, 1  # adversary action order at mission nodes

ROLE_ALIASES = {"merlin": "merlin", "mordred": "mordred", "percival": "percival",
                "morgana": "morgana", "resistance": None, "none": None, "": None}


@dataclass(frozen=True)
class MissionSchedule:
    sizes: tuple
    passes_needed: int
    fails_needed: int = 3

    @classmethod
    def for_players(cls, n: int) -> "MissionSchedule":
        if n == 5:
            return cls((3, 3, 3), 1)
        if n == 6:
            return cls((3, 4, 3, 4), 2)
        raise GameError(f"reduced Avalon supports 5 or 6 players, not {n}")

    def after_pass(self, j: int, passes: int):
        """Next mission index and pass count once mission ``j`` passes."""
        s = self.sizes[j]
        j, passes = j + 1, passes + 1
        while j < len(self.sizes) and self.sizes[j] <= s and passes < self.passes_needed:
            j, passes = j + 1, passes + 1
        return j, passes


@dataclass(frozen=True)
class AvalonConfig:
    n: int = 5
    merlin: bool = False
    mordred_count: int = 0
    percival: bool = False
    morgana: bool = False

    def __post_init__(self):
        if self.n not in (5, 6):
            raise GameError(f"reduced Avalon supports 5 or 6 players, not {self.n}")
        if (self.mordred_count or self.percival or self.morgana) and not self.merlin:
            raise GameError("Mordred, Percival and Morgana require Merlin")
        if self.percival != self.morgana:
            raise GameError("Percival and Morgana must be used together")
        if not 0 <= self.mordred_count <= self.k:
            raise GameError(f"at most {self.k} Mordreds")
        if self.morgana and self.mordred_count >= self.k:
            raise GameError("Morgana needs a spy who is not Mordred")

    @property
    def k(self) -> int:
        return math.ceil(self.n / 3)

    @property
    def schedule(self) -> MissionSchedule:
        return MissionSchedule.for_players(self.n)

    @classmethod
    def from_roles(cls, n: int, roles: str | Iterable[str] = ()) -> "AvalonConfig":
        if isinstance(roles, str):
            roles = [r for r in roles.replace("+", ",").split(",")]
        kw = dict(merlin=False, mordred_count=0, percival=False, morgana=False)
        for r in roles:
            key = r.strip().lower()
            if key not in ROLE_ALIASES:
                raise GameError(f"unknown role {r!r}")
            role = ROLE_ALIASES[key]
            if role == "mordred":
                kw["mordred_count"] += 1
            elif role:
                kw[role] = True
        return cls(n, **kw)

    @property
    def label(self) -> str:
        parts = []
        if self.merlin:
            parts.append("merlin")
        parts += ["mordred"] * self.mordred_count
        if self.percival:
            parts += ["percival", "morgana"]
        return f"{self.n}p-" + ("+".join(parts) if parts else "resistance")


@dataclass(frozen=True)
class RoleDeal:
    spies: frozenset
    merlin: int | None = None
    mordreds: frozenset = frozenset()
    percival: int | None = None
    morgana: int | None = None

    @property
    def merlin_view(self) -> frozenset:
        return self.spies - self.mordreds

    @property
    def percival_view(self) -> frozenset:
        return frozenset((self.merlin, self.morgana))

    def good(self, n: int) -> frozenset:
        return frozenset(range(n)) - self.spies

    def observation(self, i: int):
        """Report-relevant knowledge of good player ``i``."""
        if i == self.merlin:
            return ("M", self.merlin_view)
        if i == self.percival:
            return ("P", self.percival_view)
        return VANILLA

    def adversary_view(self) -> str:
        return f"{_digits(self.spies)}/{_digits(self.mordreds)}/{'' if self.morgana is None else self.morgana}"


VANILLA = ("v",)


def _digits(s) -> str:
    return "".join(str(i) for i in sorted(s))


def claim_code(c) -> str:
    return "v" if c[0] == "v" else c[0] + _digits(c[1])


def parse_claim(code: str):
    return VANILLA if code == "v" else (code[0], frozenset(int(ch) for ch in code[1:]))


def role_deals(config: AvalonConfig) -> list[RoleDeal]:
    n, k = config.n, config.k
    out = []
    for spies in itertools.combinations(range(n), k):
        goods = [i for i in range(n) if i not in spies]
        for mer in (goods if config.merlin else [None]):
            for mords in itertools.combinations(spies, config.mordred_count):
                pcs = [g for g in goods if g != mer] if config.percival else [None]
                mgs = [s for s in spies if s not in mords] if config.morgana else [None]
                for pc in pcs:
                    for mg in mgs:
                        out.append(RoleDeal(frozenset(spies), mer, frozenset(mords), pc, mg))
    return out


def fake_claims(config: AvalonConfig, player: int) -> list:
    """Reports a spy may send: nothing, or any Merlin/Percival-shaped view
    that does not name itself."""
    others = [j for j in range(config.n) if j != player]
    opts = [VANILLA]
    if config.merlin:
        size = config.k - config.mordred_count
        opts += [("M", frozenset(c)) for c in itertools.combinations(others, size)]
    if config.percival:
        opts += [("P", frozenset(c)) for c in itertools.combinations(others, 2)]
    return opts


def _public_ok(deal: RoleDeal, contents: list, n: int, missions, kinds=("M", "P")) -> bool:
    """Could ``deal`` have produced these anonymous report contents and results?

    ``contents`` holds the public reports, restricted to report ``kinds``.
    """
    rest = list(contents)
    for i in deal.good(n):
        c = deal.observation(i)
        if c[0] not in kinds:
            continue
        if c in rest:
            rest.remove(c)
        else:
            return False
    if len(rest) > len(deal.spies):
        return False
    if rest and not any(all(s not in c[1] for s, c in zip(perm, rest))
                        for perm in itertools.permutations(sorted(deal.spies), len(rest))):
        return False
    return all(passed or (S & deal.spies) for S, passed in missions)


def _private_ok(deal: RoleDeal, claims: Sequence, n: int, missions) -> bool:
    """Could ``deal`` have produced this identified report profile and results?"""
    for i, c in enumerate(claims):
        if i in deal.spies:
            if c[0] != "v" and i in c[1]:
                return False
        elif c != deal.observation(i):
            return False
    return all(passed or (S & deal.spies) for S, passed in missions)


@dataclass(frozen=True)
class CommonKnowledgeState:
    """Public record: reports (optionally with reporter identities) and missions.

    With ``identities=False`` only the multiset of report contents of the
    ``public_kinds`` report types is public, which is the knowledge the
    mediator can act on without revealing who reported what.
    """

    config: AvalonConfig
    claims: tuple                    # per player report, VANILLA for none
    missions: tuple = ()             # ((frozenset, passed), ...)
    identities: bool = False
    public_kinds: tuple = ("M", "P")

    def contents(self) -> list:
        return sorted((c for c in self.claims if c[0] in self.public_kinds), key=claim_code)

    def consistent_deals(self) -> list[RoleDeal]:
        n = self.config.n
        if self.identities:
            return [d for d in role_deals(self.config) if _private_ok(d, self.claims, n, self.missions)]
        cont = self.contents()
        return [d for d in role_deals(self.config)
                if _public_ok(d, cont, n, self.missions, self.public_kinds)]

    def safe_players(self) -> frozenset:
        goods = [d.good(self.config.n) for d in self.consistent_deals()]
        return frozenset.intersection(*goods) if goods else frozenset()

    def plausible_sets(self, size: int) -> list[frozenset]:
        return plausible_sets(self, size)

    def proposals(self, size: int) -> list[frozenset]:
        return _proposals([d.good(self.config.n) for d in self.consistent_deals()], self.config.n, size)


def plausible_sets(state: CommonKnowledgeState, size: int) -> list[frozenset]:
    """Size-``size`` sets that are all-good in some deal consistent with ``state``."""
    goods = {d.good(state.config.n) for d in state.consistent_deals()}
    return [frozenset(c) for c in itertools.combinations(range(state.config.n), size)
            if any(frozenset(c) <= g for g in goods)]


def _proposals(goods: list, n: int, size: int) -> list[frozenset]:
    """Plausible sets that include every safe player (or lie inside the safe set)."""
    goods = list(set(goods))
    safe = frozenset.intersection(*goods)
    out = []
    for c in itertools.combinations(range(n), size):
        S = frozenset(c)
        if not any(S <= g for g in goods):
            continue
        if (len(safe) <= size and safe <= S) or (len(safe) > size and S <= safe):
            out.append(S)
    return out


# -- game construction ----------------------------------------------------------------


def _hist_code(hist) -> str:
    return ";".join(_digits(S) + ("+" if ok else "-") for S, ok in hist)


def parse_hist(code: str):
    code = code.split("#")[0]
    if not code:
        return ()
    return tuple((frozenset(int(ch) for ch in part[:-1]), part[-1] == "+") for part in code.split(";"))


def build_avalon(config: AvalonConfig, prune_dominated: bool = True,
                 public_kinds: tuple | None = None, fail_counts: bool = False) -> GameTree:
    """Build the reduced Avalon game for ``config``.

    ``prune_dominated`` removes the spies' option to pass a mission when the
    pass would end the game with the maximal payoff for the good team.
    ``public_kinds`` selects which report kinds enter public knowledge
    (default: Merlin reports only).  With ``fail_counts`` every spy on a
    mission may fail it and the number of fail cards is made public; the
    default binary outcome gives the same value and a smaller tree.
    """
    if public_kinds is None:
        public_kinds = ("M",)
    n = config.n
    sched = config.schedule
    deals = role_deals(config)
    b = TreeBuilder(f"avalon-{config.label}", payoff_range=(0, 1), tag_names=TAG_NAMES)
    b.meta.update({"config": config.label, "n": n, "merlin": config.merlin,
                   "mordred_count": config.mordred_count, "percival": config.percival,
                   "morgana": config.morgana, "public_kinds": "".join(public_kinds),
                   "prune_dominated": prune_dominated, "fail_counts": fail_counts})
    deal_cache: dict = {}
    prop_cache: dict = {}

    def public_deals(contents_key):
        res = deal_cache.get(contents_key)
        if res is None:
            contents = [parse_claim(c) for c in contents_key]
            res = deal_cache[contents_key] = [d for d in deals if _public_ok(d, contents, n, (), public_kinds)]
        return res

    def proposals(contents_key, hist, size, fc=None):
        key = (contents_key, hist, size, fc)
        res = prop_cache.get(key)
        if res is None:
            need = fc or (1,) * len(hist)
            goods = [d.good(n) for d in public_deals(contents_key)
                     if all(ok or len(S & d.spies) >= f for (S, ok), f in zip(hist, need))]
            res = prop_cache[key] = _proposals(goods, n, size)
        return res

    root = b.chance([Fraction(1, len(deals))] * len(deals))
    for di, deal in enumerate(deals):
        spies = sorted(deal.spies)
        advbase = deal.adversary_view()
        options = [fake_claims(config, s) for s in spies]
        joint = list(itertools.product(*options))
        cnode = None
        if len(joint) > 1:
            cnode = b.decision(MIN, f"C|{advbase}", len(joint))
        for ci, jc in enumerate(joint):
            claims = [deal.observation(i) for i in range(n)]
            for s, c in zip(spies, jc):
                claims[s] = c
            profile = ",".join(claim_code(c) for c in claims)
            contents_key = tuple(sorted(claim_code(c) for c in claims if c[0] in public_kinds))
            advkey = f"{advbase}|{','.join(claim_code(c) for c in jc)}"
            sub = _missions(b, config, sched, deal, profile, contents_key, advkey, proposals,
                            prune_dominated, 0, 0, 0, (), () if fail_counts else None)
            if cnode is None:
                b.set_child(root, di, sub)
            else:
                b.set_child(cnode, ci, sub)
        if cnode is not None:
            b.set_child(root, di, cnode)
    game = b.build(root=root)
    return game


def _missions(b, config, sched, deal, profile, contents_key, advkey, proposals, prune,
              j, passes, fails, hist, fc=None):
    """Mission loop.  ``fc`` is the tuple of public fail counts (``None`` when
    outcomes are binary)."""
    n = config.n
    hcode = _hist_code(hist) + ("" if fc is None else "#" + "".join(map(str, fc)))
    if fails >= sched.fails_needed:
        return b.terminal(0, TAG_FAILED)
    if passes >= sched.passes_needed:
        if not config.merlin:
            return b.terminal(1, TAG_PASSED)
        goods = sorted(deal.good(n))
        g = b.decision(MIN, f"G|{advkey}|{hcode}", len(goods))
        for a, p in enumerate(goods):
            if p == deal.merlin:
                b.set_child(g, a, b.terminal(0, TAG_GUESSED))
            else:
                b.set_child(g, a, b.terminal(1, TAG_SURVIVED))
        return g
    size = sched.sizes[j]
    cands = proposals(contents_key, hist, size, fc)
    m = b.decision(MAX, f"M|{profile}|{hcode}", len(cands)) if len(cands) > 1 else None

    def cont(S, ok, f):
        if ok:
            jn, pn, fn = *sched.after_pass(j, passes), fails
        else:
            jn, pn, fn = j + 1, passes, fails + 1
        return _missions(b, config, sched, deal, profile, contents_key, advkey, proposals, prune,
                         jn, pn, fn, hist + ((S, ok),), None if fc is None else fc + (f,))

    for a, S in enumerate(cands):
        spies_on = len(S & deal.spies)
        if spies_on:
            # fail options (one per possible fail-card count), then pass
            nfail = 1 if fc is None else spies_on
            _, pp = sched.after_pass(j, passes)
            pass_wins = pp >= sched.passes_needed and not config.merlin
            outs = [(False, f) for f in range(1, nfail + 1)]
            if not (prune and pass_wins):
                outs.append((True, 0))
            if len(outs) == 1:
                sub = cont(S, *outs[0])
            else:
                sub = b.decision(MIN, f"F|{advkey}|{hcode}|{_digits(S)}", len(outs))
                for o, (ok, f) in enumerate(outs):
                    b.set_child(sub, o, cont(S, ok, f))
        else:
            sub = cont(S, True, 0)
        if m is None:
            return sub
        b.set_child(m, a, sub)
    return m


# -- analysis ---------------------------------------------------------------------


@dataclass
class Breakdown:
    rw: float | Fraction
    mg: float | Fraction | None   # None when no Merlin guess exists

    @property
    def value(self):
        return self.rw if self.mg is None else self.rw * (1 - self.mg)


def terminal_reach(game: GameTree, x: BehavioralStrategy, y: BehavioralStrategy):
    sf = game.sequence_form
    if x.exact and y.exact:
        rx, ry = x.realization(), y.realization()
        return [sf.reach_values[r] * rx[a] * ry[c] for r, a, c in
                zip(sf.term_reach_idx.tolist(), sf.term_seq[0].tolist(), sf.term_seq[1].tolist())]
    rx = sf.realization(MAX, np.asarray(x.to_float().values))
    ry = sf.realization(MIN, np.asarray(y.to_float().values))
    return sf.term_reach * rx[sf.term_seq[0]] * ry[sf.term_seq[1]]


def outcome_breakdown(game: GameTree, x: BehavioralStrategy, y: BehavioralStrategy) -> Breakdown:
    """Probability the good team completes its missions (RW) and conditional
    probability the spies then name Merlin (MG)."""
    sf = game.sequence_form
    tags = np.frombuffer(game.tag, dtype=np.int8)[sf.term_node]
    reach = terminal_reach(game, x, y)
    exact = not isinstance(reach, np.ndarray)
    zero = Fraction(0) if exact else 0.0

    def mass(*wanted):
        if exact:
            return sum((r for r, t in zip(reach, tags.tolist()) if t in wanted), Fraction(0))
        return float(reach[np.isin(tags, wanted)].sum())

    rw = mass(TAG_PASSED, TAG_GUESSED, TAG_SURVIVED)
    guessed, survived = mass(TAG_GUESSED), mass(TAG_SURVIVED)
    has_guess = bool(np.isin(tags, (TAG_GUESSED, TAG_SURVIVED)).any())
    if not has_guess:
        return Breakdown(rw, None)
    total = guessed + survived
    return Breakdown(rw, guessed / total if total else zero)


# -- explicit strategies for 5 players, Merlin and two Mordreds -----------------


def blind_merlin_mediator_strategy(game: GameTree) -> BehavioralStrategy:
    """Mediator strategy guaranteeing 5/18 when Merlin knows no spies.

    Players are randomly labelled A to E.  With one claimant, A is the
    claimant and the missions are ABC, ABD, ABE; with three claimants A is a
    random non-claimant and the same pattern is used; with two claimants A
    and B are the claimants and the missions are ACD, BCE, ADE.
    """
    _check_blind_merlin(game)
    probs = {}
    for iid in game.player_infosets(MAX):
        key = game.infoset_keys[iid]
        _, profile, hcode = key.split("|")
        claims = [parse_claim(c) for c in profile.split(",")]
        hist = parse_hist(hcode)
        claimants = [i for i, c in enumerate(claims) if c[0] == "M"]
        cands = _mediator_actions(game, iid, claims, hist)
        dist = _planned_mission_distribution(claimants, hist)
        vec = [dist.get(S, Fraction(0)) for S in cands]
        tot = sum(vec, Fraction(0))
        if tot == 0:  # history unreachable under this strategy
            vec = [Fraction(1, len(cands))] * len(cands)
        else:
            vec = [v / tot for v in vec]
        probs[key] = vec
    return BehavioralStrategy.from_dict(game, MAX, probs)


def _check_blind_merlin(game):
    m = game.meta
    if not (m.get("n") == 5 and m.get("merlin") and m.get("mordred_count") == 2 and not m.get("percival")):
        raise GameError("explicit strategies are defined for 5 players with Merlin and two Mordreds")


def _mediator_actions(game, iid, claims, hist):
    """Recover the candidate set list of a mediator infoset."""
    size = 3
    goods_count = game.infoset_actions[iid]
    n = 5
    config = AvalonConfig(5, merlin=True, mordred_count=2)
    contents = sorted((c for c in claims if c[0] == "M"), key=claim_code)
    deals = [d for d in role_deals(config) if _public_ok(d, contents, n, hist, ("M",))]
    cands = _proposals([d.good(n) for d in deals], n, size)
    if len(cands) != goods_count:
        raise GameError("mediator infoset does not match the reconstructed proposal list")
    return cands


def _planned_mission_distribution(claimants, hist) -> dict:
    """Distribution of the next mission given the (all-failed) history."""
    players = range(5)
    plans = []  # (probability, [M1, M2, M3])
    if len(claimants) == 2:
        others = [p for p in players if p not in claimants]
        for A, B in itertools.permutations(claimants):
            for C, D, E in itertools.permutations(others):
                plans.append((Fraction(1, 12), [frozenset((A, C, D)), frozenset((B, C, E)),
                                                frozenset((A, D, E))]))
    else:
        if len(claimants) == 1:
            anchors = list(claimants)
        else:  # three claimants: a random non-claimant stands in for Merlin
            anchors = [p for p in players if p not in claimants]
        for A in anchors:
            rest = [p for p in players if p != A]
            for B in rest:
                for C, D, E in itertools.permutations([p for p in rest if p != B]):
                    plans.append((Fraction(1, len(anchors) * 24),
                                  [frozenset((A, B, C)), frozenset((A, B, D)), frozenset((A, B, E))]))
    j = len(hist)
    dist: dict = {}
    for p, plan in plans:
        if all(plan[i] == S and not ok for i, (S, ok) in enumerate(hist)):
            dist[plan[j]] = dist.get(plan[j], Fraction(0)) + p
    return dist


def blind_merlin_adversary_strategy(game: GameTree) -> BehavioralStrategy:
    """Adversary strategy holding the good team to 5/18 in the same game.

    Spies send no reports, fail every mission they can and guess Merlin
    among good players weighted by how often each went on missions.
    """
    _check_blind_merlin(game)
    probs = {}
    for iid in game.player_infosets(MIN):
        key = game.infoset_keys[iid]
        kind = key[0]
        k = game.infoset_actions[iid]
        if kind == "C":
            vec = [Fraction(1)] + [Fraction(0)] * (k - 1)   # all spies stay silent
        elif kind == "F":
            vec = [Fraction(0)] * k
            vec[FAIL] = Fraction(1)
        else:
            parts = key.split("|")
            spies = frozenset(int(ch) for ch in parts[1].split("/")[0])
            hist = parse_hist(parts[3])
            goods = sorted(frozenset(range(5)) - spies)
            weights = _mission_guess_weights(goods, hist)
            tot = sum(weights)
            if tot == 0:  # a spy passed a mission: never happens under this strategy
                weights, tot = [1] * k, k
            vec = [Fraction(w, tot) for w in weights]
        probs[key] = vec
    return BehavioralStrategy.from_dict(game, MIN, probs)


def _mission_guess_weights(goods, hist):
    missions = [S for S, _ in hist]
    if len(missions) == 1:
        return [1] * len(goods)
    if len(missions) == 2:
        return [1 if g in missions[0] else 0 for g in goods]
    counts = [sum(g in S for S in missions) for g in goods]
    return [2 if c == 3 else (1 if c == 2 else 0) for c in counts]
