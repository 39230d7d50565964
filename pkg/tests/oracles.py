"""Independent reference computations used by the test-suite.

Nothing here goes through the sequence form: games are walked node by node,
pure strategies are enumerated as infoset -> action maps, and matrix games
are solved on the normal form with certified rounding.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from hiddenrole.efg import CHANCE, MAX, MIN, TERMINAL, TreeBuilder


# -- random toy trees -------------------------------------------------------------------


def random_tree(rng: np.random.Generator, max_depth: int = 4, max_infosets: int = 8,
                payoffs=(0, 1, 2, 3), name: str = "toy"):
    """Random two-player tree with chance and perfect recall.

    A decision node's infoset key is its owner's own observation history
    (earlier keys, own actions, and the chance signals the owner was shown),
    so perfect recall holds by construction.  Action counts are a function
    of the key.
    """
    b = TreeBuilder(name, payoff_range=(min(payoffs), max(payoffs)))
    keys: dict = {}

    def nact(key):
        if key not in keys:
            keys[key] = int(rng.integers(2, 4))
        return keys[key]

    def grow(depth, hist):
        r = rng.random()
        if depth >= max_depth or r < 0.15 or len(keys) >= max_infosets:
            return b.terminal(Fraction(int(rng.choice(payoffs))))
        if r < 0.3:
            k = int(rng.integers(2, 4))
            probs = [Fraction(1, k)] * k if rng.random() < 0.5 else _split(k)
            node = b.chance(probs)
            seen = int(rng.integers(0, 3))  # 0: MAX sees it, 1: MIN sees it, 2: hidden
            for a in range(k):
                h = [list(hist[0]), list(hist[1])]
                if seen < 2:
                    h[seen].append(f"c{a}")
                b.set_child(node, a, grow(depth + 1, (tuple(h[0]), tuple(h[1]))))
            return node
        p = MAX if rng.random() < 0.5 else MIN
        key = f"{p}:" + ",".join(hist[p])
        k = nact(key)
        node = b.decision(p, key, k)
        for a in range(k):
            h = [list(hist[0]), list(hist[1])]
            h[p].append(f"{key}>{a}")
            b.set_child(node, a, grow(depth + 1, (tuple(h[0]), tuple(h[1]))))
        return node

    root = grow(0, ((), ()))
    return b.build(root)


def _split(k):
    cuts = [Fraction(1, 2 ** (i + 1)) for i in range(k - 1)]
    return cuts + [1 - sum(cuts)]


# -- normal form --------------------------------------------------------------------------


def infosets_of(game, p):
    return [i for i in range(len(game.infoset_keys)) if game.infoset_owner[i] == p]


def pure_plans(game, p):
    """All infoset -> action maps of player ``p``."""
    infs = infosets_of(game, p)
    for choice in itertools.product(*(range(game.infoset_actions[i]) for i in infs)):
        yield dict(zip(infs, choice))


def play(game, plan_max, plan_min) -> Fraction:
    """Exact expected payoff of two pure plans by recursive tree walk."""
    plans = (plan_max, plan_min)

    def rec(node):
        k = game.kind[node]
        if k == TERMINAL:
            return game.values[game.payoff[node]]
        s = game.edge_start[node]
        if k == CHANCE:
            return sum((game.probs[game.edge_prob[s + a]] * rec(game.edges[s + a])
                        for a in range(game.edge_count[node])), Fraction(0))
        a = plans[game.player[node]][game.infoset[node]]
        return rec(game.edges[s + a])

    return rec(game.root)


def normal_form(game):
    xs = list(pure_plans(game, MAX))
    ys = list(pure_plans(game, MIN))
    return [[play(game, x, y) for y in ys] for x in xs], xs, ys


def matrix_game_value(M) -> Fraction:
    """Exact value of the zero-sum matrix game ``M`` (row player maximises).

    A float LP finds mixed strategies; these are rounded to rationals and the
    value is accepted only when the exact row guarantee equals the exact
    column guarantee.
    """
    A = np.array([[float(v) for v in row] for row in M])
    m, n = A.shape
    # rows: max v s.t. A^T x >= v, sum x = 1
    res_x = linprog(np.r_[np.zeros(m), -1.0], A_ub=np.c_[-A.T, np.ones(n)], b_ub=np.zeros(n),
                    A_eq=np.r_[np.ones(m), 0.0][None, :], b_eq=[1.0],
                    bounds=[(0, None)] * m + [(None, None)], method="highs")
    res_y = linprog(np.r_[np.zeros(n), 1.0], A_ub=np.c_[A, -np.ones(m)], b_ub=np.zeros(m),
                    A_eq=np.r_[np.ones(n), 0.0][None, :], b_eq=[1.0],
                    bounds=[(0, None)] * n + [(None, None)], method="highs")
    assert res_x.status == 0 and res_y.status == 0
    for cap in (10, 100, 1000, 10_000, 100_000, 1_000_000):
        x = _round_simplex(res_x.x[:m], cap)
        y = _round_simplex(res_y.x[:n], cap)
        lo = min(sum(x[i] * M[i][j] for i in range(m)) for j in range(n))
        hi = max(sum(M[i][j] * y[j] for j in range(n)) for i in range(m))
        if lo == hi:
            return lo
    raise AssertionError("could not certify the matrix game value")


def _round_simplex(v, cap):
    r = [Fraction(max(float(a), 0.0)).limit_denominator(cap) for a in v]
    tot = sum(r)
    return [a / tot for a in r]


def brute_force_value(game) -> Fraction:
    M, _, _ = normal_form(game)
    return matrix_game_value(M)


def brute_force_best_response(game, strategy) -> Fraction:
    """Best-response value against a (behavioral, exact) strategy by
    enumerating the responder's pure plans."""
    p = 1 - strategy.owner
    start = game.seq_start
    best = None
    for plan in pure_plans(game, p):
        v = _mixed_play(game, strategy, plan, start)
        if best is None or (v > best if p == MAX else v < best):
            best = v
    return best


def _mixed_play(game, strategy, plan, start):
    def rec(node):
        k = game.kind[node]
        if k == TERMINAL:
            return game.values[game.payoff[node]]
        s = game.edge_start[node]
        if k == CHANCE:
            return sum((game.probs[game.edge_prob[s + a]] * rec(game.edges[s + a])
                        for a in range(game.edge_count[node])), Fraction(0))
        iid = game.infoset[node]
        if game.player[node] == strategy.owner:
            base = int(start[iid])
            return sum((Fraction(strategy.values[base + a]) * rec(game.edges[s + a])
                        for a in range(game.edge_count[node]) if strategy.values[base + a]),
                       Fraction(0))
        return rec(game.edges[s + plan[iid]])

    return rec(game.root)


def count_nodes(game):
    """(nodes, terminals) reachable from the root by explicit walk."""
    nodes = terms = 0
    stack = [game.root]
    while stack:
        v = stack.pop()
        nodes += 1
        if game.kind[v] == TERMINAL:
            terms += 1
        s = game.edge_start[v]
        stack.extend(game.edges[s + a] for a in range(game.edge_count[v]))
    return nodes, terms


# -- Avalon knowledge ---------------------------------------------------------------------


def avalon_worlds(n, k, merlin=True, mordreds=0):
    """All (spies, merlin, mordred set) role deals, written out directly."""
    out = []
    for spies in itertools.combinations(range(n), k):
        goods = [i for i in range(n) if i not in spies]
        for m in (goods if merlin else [None]):
            for mords in itertools.combinations(spies, mordreds):
                out.append((frozenset(spies), m, frozenset(mords)))
    return out


def world_consistent_with_identified_claims(world, claims, missions):
    """Identified reports: claims[i] is None (no claim) or the set of spies
    player ``i`` says they see as Merlin.  Good non-Merlin players never
    claim, Merlin claims exactly what Merlin sees, spies claim anything
    that does not name themselves."""
    spies, merlin, mords = world
    for i, c in enumerate(claims):
        if i in spies:
            if c is not None and i in c:
                return False
        elif i == merlin:
            if c != spies - mords:
                return False
        elif c is not None:
            return False
    return all(ok or (S & spies) for S, ok in missions)


def brute_force_plausible(n, k, claims, missions, size, mordreds=0):
    worlds = [w for w in avalon_worlds(n, k, True, mordreds)
              if world_consistent_with_identified_claims(w, claims, missions)]
    goods = [frozenset(range(n)) - w[0] for w in worlds]
    return {frozenset(S) for S in itertools.combinations(range(n), size)
            if any(frozenset(S) <= g for g in goods)}
