# %% [markdown]
# Mediated matching pennies: one hidden adversary among n players.
# The mediator recommends bits privately; the best it can do is 1/(n+1).

# %%
from fractions import Fraction

from hiddenrole.efg import counts
from hiddenrole.games import matching_pennies
from hiddenrole.lp import solve_game_exact
from hiddenrole.transform import build_mediator_game, size_bound

# %%
for n in (3, 4, 5):
    sim = matching_pennies(n)
    g = build_mediator_game(sim)
    nodes, terms, infosets = counts(g)
    sol = solve_game_exact(g)
    print(f"n={n}: value {sol.value} (1/(n+1) = {Fraction(1, n + 1)}), "
          f"{nodes} nodes <= bound {size_bound(sim)}, infosets {infosets}, via {sol.method}")

# %% [markdown]
# The LP's mediator at the all-honest report profile, over joint bit
# recommendations in lexicographic order (000, 001, ..., 111).  Other optimal
# mediators exist, e.g. uniform over the 2n+2 strings with at most one odd bit.

# %%
g = build_mediator_game(matching_pennies(3))
sol = solve_game_exact(g)
for key, probs in sol.x.to_dict().items():
    if "BOT" not in key:
        print(key)
        print("  ", [str(p) for p in probs])
