"""Small hidden-role games: matching pennies, the card-vote game and the
team-guessing game used to measure the price of hidden roles."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from .efg import GameError, as_fraction
from .transform import (SimChance, SimGame, SimMove, SimTerminal,
                        TeamAssignment, build_mediator_game)


def _joint_stage(actions, utility):
    """One simultaneous stage whose terminal utility is ``utility(joint)``."""
    children = [SimTerminal(as_fraction(utility(j)))
                for j in itertools.product(*(range(len(a)) for a in actions))]
    return SimMove(tuple(tuple(a) for a in actions), children)


def matching_pennies(n: int) -> SimGame:
    """n players pick bits simultaneously; MAX wins iff all bits agree.

    One player, chosen uniformly, is the adversary.
    """
    if n < 3:
        raise GameError("matching pennies needs n >= 3")
    stage = _joint_stage([("0", "1")] * n, lambda j: int(len(set(j)) == 1))
    assignments = [(TeamAssignment.with_min(n, [i]), Fraction(1, n)) for i in range(n)]
    return SimGame(n, assignments, [stage] * n, name=f"matching-pennies-{n}")


def _vote_utility(t: TeamAssignment):
    def u(votes):
        for cand in set(votes):
            if 2 * votes.count(cand) > len(votes):
                return int(t.teams[cand] == 0)
        return 0
    return u


def card_game(distinguishable: bool = False) -> SimGame:
    """Three players vote to elect a winner; MAX wins iff a strict majority
    elects a MAX player.  With ``distinguishable`` the two MAX cards carry
    private labels ``a`` and ``b``."""
    n = 3
    votes = [("1", "2", "3")] * n
    assignments, roots = [], []
    for adv in range(n):
        t = TeamAssignment.with_min(n, [adv])
        stage = _joint_stage(votes, _vote_utility(t))
        if distinguishable:
            good = [i for i in range(n) if i != adv]
            outcomes = []
            for perm in (("a", "b"), ("b", "a")):
                obs = [None] * n
                for g, lab in zip(good, perm):
                    obs[g] = ("card", lab)
                outcomes.append((Fraction(1, 2), SimMove(stage.actions, stage.children, tuple(obs))))
            stage = SimChance(outcomes)
        assignments.append((t, Fraction(1, n)))
        roots.append(stage)
    return SimGame(n, assignments, roots, name="cards-distinct" if distinguishable else "cards")


def guessing_game(dist: Sequence) -> SimGame:
    """Everyone announces an assignment from the support of ``dist``; MAX
    wins iff every MAX player announces the true one."""
    dist = [(t if isinstance(t, TeamAssignment) else TeamAssignment(tuple(t)), as_fraction(p))
            for t, p in dist]
    dist = [(t, p) for t, p in dist if p > 0]
    if not dist:
        raise GameError("assignment distribution has empty support")
    n = dist[0][0].n
    labels = tuple(t.label() for t, _ in dist)
    roots = []
    for idx, (t, _) in enumerate(dist):
        maxp = [i for i in range(n) if t.teams[i] == 0]
        roots.append(_joint_stage([labels] * n,
                                  lambda j, idx=idx, maxp=maxp: int(all(j[i] == idx for i in maxp))))
    return SimGame(n, dist, roots, name=f"guessing-{n}")


def uniform_assignments(n: int, k: int):
    combos = list(itertools.combinations(range(n), k))
    return [(TeamAssignment.with_min(n, c), Fraction(1, len(combos))) for c in combos]


def price_of_hidden_roles(dist: Sequence, solve=None) -> Fraction:
    """Public-team value divided by hidden-role value of the guessing game.

    With teams public every MAX player announces the truth, so the public
    value is 1; the hidden value comes from solving the mediated game.
    """
    if solve is None:
        from .lp import solve_game_exact
        solve = lambda game: solve_game_exact(game).value
    hidden = solve(build_mediator_game(guessing_game(dist)))
    if hidden <= 0:
        raise GameError("hidden-role value is zero; price is unbounded")
    return Fraction(1) / hidden
