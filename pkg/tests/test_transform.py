import ast
import itertools
from fractions import Fraction

import pytest

from hiddenrole.efg import DECISION, MAX, MIN, BehavioralStrategy, GameError, TreeBuilder, best_response, validate
from hiddenrole.games import card_game, guessing_game, matching_pennies, uniform_assignments
from hiddenrole.lp import solve_game_exact
from hiddenrole.transform import (BOT, SimChance, SimGame, SimMove, SimTerminal, TeamAssignment,
                                  build_mediator_game, dump_simgame, load_simgame, size_bound,
                                  size_bound_check)

import oracles


def parse_key(key):
    return ast.literal_eval(key)


def near_unanimous_mediator(game, n):
    """Mediator recommending a uniform draw from the 2n+2 bit strings with at
    most one bit differing from the rest (marginalised onto active players)."""
    strings = [s for s in itertools.product((0, 1), repeat=n)
               if min(sum(s), n - sum(s)) <= 1]
    probs = {}
    for iid in game.player_infosets(MAX):
        key = game.infoset_keys[iid]
        reports = dict(parse_key(key)[1])["rep"]
        active = [i for i, r in enumerate(reports) if r != BOT]
        dist = {}
        for s in strings:
            sub = tuple(s[i] for i in active)
            dist[sub] = dist.get(sub, 0) + Fraction(1, len(strings))
        joint = list(itertools.product((0, 1), repeat=len(active)))
        assert len(joint) == game.infoset_actions[iid]
        probs[key] = [dist.get(j, Fraction(0)) for j in joint]
    return BehavioralStrategy.from_dict(game, MAX, probs)


def flipping_adversary(game, n):
    """Report honestly-as-MAX, then play the recommended bit with
    probability 1/(n+1) and flip it otherwise."""
    probs = {}
    keep = Fraction(1, n + 1)
    for iid in game.player_infosets(MIN):
        key = game.infoset_keys[iid]
        phase, _, hist = parse_key(key)
        k = game.infoset_actions[iid]
        if phase == "report":
            probs[key] = [Fraction(1)] + [Fraction(0)] * (k - 1)   # BOT is listed last
        else:
            rec = dict(hist)["rec"][0]
            if rec is None:
                probs[key] = [Fraction(1, k)] * k
            else:
                probs[key] = [keep if a == rec else 1 - keep for a in range(k)]
    return BehavioralStrategy.from_dict(game, MIN, probs)


class TestMatchingPennies:
    @pytest.mark.parametrize("n", [3, 4])
    def test_mediator_scheme_guarantees(self, n):
        g = build_mediator_game(matching_pennies(n))
        x = near_unanimous_mediator(g, n)
        _, v = best_response(g, x)
        assert v == Fraction(1, n + 1)

    @pytest.mark.parametrize("n", [3, 4])
    def test_flipping_adversary_holds(self, n):
        g = build_mediator_game(matching_pennies(n))
        _, v = best_response(g, flipping_adversary(g, n))
        assert v == Fraction(1, n + 1)

    def test_value(self, mp3):
        assert solve_game_exact(mp3).value == Fraction(1, 4)


class TestStructure:
    def test_validates(self, mp3, cards):
        assert validate(mp3).ok and validate(cards).ok

    def test_size_bound(self):
        for sim in (matching_pennies(3), matching_pennies(4), card_game(False), card_game(True),
                    guessing_game(uniform_assignments(3, 1)), guessing_game(uniform_assignments(4, 2))):
            g = build_mediator_game(sim)
            assert size_bound_check(sim, g)
            assert g.num_nodes <= size_bound(sim)

    def test_mediator_key_hides_assignment(self, mp3):
        # all-honest reports look the same whoever the adversary is
        members = {}
        for v in range(mp3.num_nodes):
            if mp3.kind[v] == DECISION and mp3.player[v] == MAX:
                members.setdefault(mp3.infoset[v], 0)
                members[mp3.infoset[v]] += 1
        full = [i for i in members if mp3.infoset_actions[i] == 8]
        assert len(full) == 1 and members[full[0]] == 3

    def test_reports_are_consistent_or_bot(self, mp3):
        for iid in mp3.player_infosets(MIN):
            phase, label, _ = parse_key(mp3.infoset_keys[iid])
            if phase == "report":
                assert mp3.infoset_actions[iid] == 2   # ("t", "MAX") or BOT

    def test_bot_removes_recommendation(self, mp3):
        for iid in mp3.player_infosets(MIN):
            phase, _, hist = parse_key(mp3.infoset_keys[iid])
            h = dict(hist)
            if phase == "act" and h["rep"] == (BOT,):
                assert h["rec"] == (None,)

    def test_empty_distribution_rejected(self):
        with pytest.raises(GameError):
            build_mediator_game(SimGame(2, [], []))

    def test_deterministic_build(self):
        a = build_mediator_game(card_game(True))
        b = build_mediator_game(card_game(True))
        assert list(a.edges) == list(b.edges) and a.infoset_keys == b.infoset_keys


TOY_TABLES = {0: [1, 0, 0, 1], 1: [1, 0, 0, 0]}   # payoff by card, row-major over (MAX, MIN) bits


def _toy_sim():
    """Chance shows MAX a card; both then pick a bit at once."""
    moves = [SimMove((("0", "1"), ("0", "1")), [SimTerminal(Fraction(u)) for u in TOY_TABLES[c]],
                     obs=(("card", c), None))
             for c in (0, 1)]
    root = SimChance([(Fraction(1, 3), moves[0]), (Fraction(2, 3), moves[1])])
    t = TeamAssignment((0, 1))
    return SimGame(2, [(t, Fraction(1))], [root], name="toy")


def _toy_direct():
    b = TreeBuilder("toy-direct")
    root = b.chance([Fraction(1, 3), Fraction(2, 3)])
    for c in (0, 1):
        d = b.decision(MAX, f"card{c}", 2)
        b.set_child(root, c, d)
        for a in range(2):
            m = b.decision(MIN, "min", 2)
            b.set_child(d, a, m)
            for bb in range(2):
                b.set_child(m, bb, b.terminal(TOY_TABLES[c][2 * a + bb]))
    return b.build(root)


class TestSingleAssignment:
    def test_value_equals_direct_game(self):
        sim = _toy_sim()
        assert sim.validate() == []
        g0 = build_mediator_game(sim)
        direct = _toy_direct()
        assert solve_game_exact(g0).value == solve_game_exact(direct).value
        assert solve_game_exact(direct).value == oracles.brute_force_value(direct)


class TestSerialization:
    def test_roundtrip(self):
        sim = card_game(True)
        back = load_simgame(dump_simgame(sim))
        assert dump_simgame(back) == dump_simgame(sim)
        a, b = build_mediator_game(sim), build_mediator_game(back)
        assert a.infoset_keys == b.infoset_keys

    def test_bad_format(self):
        with pytest.raises(GameError):
            load_simgame('{"format": "other"}')


class TestSimGameValidation:
    def test_probabilities_must_sum_to_one(self):
        t = TeamAssignment((0, 1))
        sim = SimGame(2, [(t, Fraction(1, 2))], [SimTerminal(Fraction(0))])
        assert any("sum" in m for m in sim.validate())

    def test_needs_a_max_player(self):
        with pytest.raises(GameError):
            TeamAssignment((1, 1))


def matching_mediator(game, labels):
    """Pair the four players by a uniformly random perfect matching and tell
    each player the assignment in which they and their partner are MAX."""
    def pair_index(pair):
        return next(j for j, lab in enumerate(labels) if all(lab[p] == "o" for p in pair))
    profiles = []
    for m in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
        rec = [None] * 4
        for pair in m:
            for i in pair:
                rec[i] = pair_index(pair)
        profiles.append(rec)
    probs = {}
    for iid in game.player_infosets(MAX):
        key = game.infoset_keys[iid]
        active = [i for i, r in enumerate(dict(parse_key(key)[1])["rep"]) if r != BOT]
        dist = {}
        for rec in profiles:
            sub = tuple(rec[i] for i in active)
            dist[sub] = dist.get(sub, 0) + Fraction(1, 3)
        joint = list(itertools.product(range(len(labels)), repeat=len(active)))
        probs[key] = [dist.get(j, Fraction(0)) for j in joint]
    return BehavioralStrategy.from_dict(game, MAX, probs)


class TestGuessing:
    def test_three_players(self):
        g = build_mediator_game(guessing_game(uniform_assignments(3, 1)))
        assert solve_game_exact(g).value == Fraction(1, 3)

    @pytest.mark.slow
    def test_matching_mediator_four_players(self):
        dist = uniform_assignments(4, 2)
        g = build_mediator_game(guessing_game(dist))
        _, lower = best_response(g, matching_mediator(g, [t.label() for t, _ in dist]))
        assert lower == Fraction(1, 3)
