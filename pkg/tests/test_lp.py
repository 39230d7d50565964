from fractions import Fraction

import numpy as np
import pytest

from hiddenrole.efg import MAX, MIN, BehavioralStrategy, expected_value
from hiddenrole.games import card_game, guessing_game, matching_pennies, uniform_assignments
from hiddenrole.lp import (build_lp, certify, round_and_certify, simplex_exact, solve_exact,
                           solve_float, solve_game_exact)
from hiddenrole.transform import build_mediator_game

import oracles
from test_efg import matrix_tree


class TestBuild:
    def test_shapes(self, mp3):
        lp = build_lp(mp3)
        assert lp.A.shape == (lp.nx, lp.ny)
        assert lp.E.shape[1] == lp.nx and lp.F.shape[1] == lp.ny

    def test_bilinear_matches_expected_value(self, cards):
        lp = build_lp(cards)
        x, y = BehavioralStrategy.uniform(cards, MAX), BehavioralStrategy.uniform(cards, MIN)
        assert lp.bilinear(x.realization(), y.realization()) == expected_value(cards, x, y)


class TestSolve:
    def test_matrix_game(self):
        g = matrix_tree([[3, 0], [1, 2]])
        assert solve_game_exact(g).value == Fraction(3, 2)

    def test_float_close(self, mp3):
        sol = solve_float(build_lp(mp3))
        assert sol.value == pytest.approx(0.25, abs=1e-9)

    def test_round_and_certify(self, cards):
        sol = solve_float(build_lp(cards))
        x, y, lo, hi, cap = round_and_certify(cards, sol)
        assert lo == hi == Fraction(2, 3)

    @pytest.mark.parametrize("sim,value", [
        (matching_pennies(3), Fraction(1, 4)),
        (card_game(False), Fraction(2, 3)),
        (guessing_game(uniform_assignments(3, 1)), Fraction(1, 3)),
    ])
    def test_simplex_agrees_with_warm_start(self, sim, value):
        lp = build_lp(build_mediator_game(sim))
        cold = solve_exact(lp, warmstart=False)
        warm = solve_exact(lp)
        assert cold.value == warm.value == value
        assert cold.method == "simplex" and cold.pivots > 0

    def test_simplex_duals_certify(self):
        rng = np.random.default_rng(3)
        g = oracles.random_tree(rng, max_depth=3)
        value, xr, yr, _ = simplex_exact(build_lp(g))
        from hiddenrole.lp import behavior_from_realization
        x = behavior_from_realization(g, MAX, xr)
        y = behavior_from_realization(g, MIN, yr)
        assert certify(g, x, y) == (value, value)

    def test_certify_rejects_float(self, mp3):
        from hiddenrole.efg import GameError
        x = BehavioralStrategy.uniform(mp3, MAX, exact=False)
        y = BehavioralStrategy.uniform(mp3, MIN)
        with pytest.raises(GameError):
            certify(mp3, x, y)

    def test_interval_when_too_large(self, cards):
        lp = build_lp(cards)
        bad = solve_float(lp)
        bad.x[:] = 1.0   # not a realization plan: rounding cannot certify
        bad.y[:] = 1.0
        res = solve_exact(lp, warmstart=bad, max_simplex_size=0)
        assert res.value is None and res.lower <= Fraction(2, 3) <= res.upper
