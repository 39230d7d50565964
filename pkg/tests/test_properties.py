import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from hiddenrole.avalon import AvalonConfig, build_avalon
from hiddenrole.cfr import SolveConfig, solve_cfr
from hiddenrole.efg import MAX, MIN, BehavioralStrategy, exploitability, expected_value, expected_value_tree
from hiddenrole.games import card_game, guessing_game, matching_pennies
from hiddenrole.io import read_game, write_game
from hiddenrole.lp import build_lp, solve_game_exact
from hiddenrole.transform import TeamAssignment, build_mediator_game, size_bound

import oracles

SMALL = dict(max_depth=4, max_infosets=4)
seeds = st.integers(0, 2**32 - 1)
fast = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def random_strategy(game, p, rng):
    probs = {}
    for iid in game.player_infosets(p):
        w = [int(v) for v in rng.integers(0, 5, game.infoset_actions[iid])]
        if sum(w) == 0:
            w[0] = 1
        probs[game.infoset_keys[iid]] = [Fraction(v, sum(w)) for v in w]
    return BehavioralStrategy.from_dict(game, p, probs)


def tree_text(game):
    buf = io.StringIO()
    write_game(game, buf)
    return buf.getvalue()


class TestExploitability:
    @fast
    @given(seeds)
    def test_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        g = oracles.random_tree(rng, **SMALL)
        x, y = random_strategy(g, MAX, rng), random_strategy(g, MIN, rng)
        assert exploitability(g, x, y) >= 0

    @fast
    @given(seeds)
    def test_zero_at_equilibrium(self, seed):
        g = oracles.random_tree(np.random.default_rng(seed), **SMALL)
        sol = solve_game_exact(g)
        assert exploitability(g, sol.x, sol.y) == 0


class TestSequenceForm:
    @pytest.mark.parametrize("seed", range(20))
    def test_lp_matches_normal_form(self, seed):
        g = oracles.random_tree(np.random.default_rng(1000 + seed), **SMALL)
        assert solve_game_exact(g).value == oracles.brute_force_value(g)

    @fast
    @given(seeds)
    def test_bilinear_is_expected_value(self, seed):
        rng = np.random.default_rng(seed)
        g = oracles.random_tree(rng, **SMALL)
        x, y = random_strategy(g, MAX, rng), random_strategy(g, MIN, rng)
        ev = expected_value(g, x, y)
        assert build_lp(g).bilinear(x.realization(), y.realization()) == ev
        assert expected_value_tree(g, x, y) == ev


class TestSizeBound:
    @fast
    @given(st.lists(st.tuples(st.integers(0, 2), st.integers(1, 4)), min_size=1, max_size=3, unique_by=lambda t: t[0]))
    def test_random_guessing_distributions(self, support):
        # adversary index with an integer weight
        tot = sum(w for _, w in support)
        dist = [(TeamAssignment.with_min(3, [i]), Fraction(w, tot)) for i, w in support]
        sim = guessing_game(dist)
        assert build_mediator_game(sim).num_nodes <= size_bound(sim)

    @pytest.mark.parametrize("sim", [matching_pennies(3), matching_pennies(5), card_game(True)],
                             ids=["mp3", "mp5", "cards"])
    def test_named_games(self, sim):
        assert build_mediator_game(sim).num_nodes <= size_bound(sim)


class TestLpAgreesWithCfr:
    @pytest.mark.parametrize("name", ["mp3", "cards", "resistance5", "merlin5"])
    def test_within_exploitability(self, name):
        g = {"mp3": lambda: build_mediator_game(matching_pennies(3)),
             "cards": lambda: build_mediator_game(card_game(False)),
             "resistance5": lambda: build_avalon(AvalonConfig(5)),
             "merlin5": lambda: build_avalon(AvalonConfig(5, merlin=True))}[name]()
        exact = solve_game_exact(g).value
        rep = solve_cfr(g, SolveConfig(max_iterations=300, check_every=100))
        assert rep.lower - 1e-9 <= float(exact) <= rep.upper + 1e-9
        assert abs(rep.value - float(exact)) <= rep.exploitability + 1e-9

    @fast
    @given(seeds)
    def test_random_trees(self, seed):
        g = oracles.random_tree(np.random.default_rng(seed), **SMALL)
        exact = solve_game_exact(g).value
        rep = solve_cfr(g, SolveConfig(max_iterations=50, check_every=50))
        assert abs(rep.value - float(exact)) <= rep.exploitability + 1e-9


class TestSerialization:
    @fast
    @given(seeds)
    def test_roundtrip(self, seed):
        g = oracles.random_tree(np.random.default_rng(seed))
        text = tree_text(g)
        back = read_game(io.StringIO(text), "toy.game")
        assert tree_text(back) == text
        assert solve_game_exact(back).value == solve_game_exact(g).value


class TestDeterminism:
    def test_build_and_solve_bit_identical(self):
        runs = []
        for _ in range(2):
            g = build_avalon(AvalonConfig(5, merlin=True))
            rep = solve_cfr(g, SolveConfig(max_iterations=60, check_every=20))
            runs.append((tree_text(g), rep.trace, rep.x.values.tobytes(), rep.y.values.tobytes()))
        assert runs[0] == runs[1]
