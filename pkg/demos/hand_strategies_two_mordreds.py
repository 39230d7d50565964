# %% [markdown]
# Hand-coded strategies for 5 players with Merlin and two Mordreds, where
# Merlin sees no spies.  Exact best responses give the bound each strategy
# guarantees; the game value is 5/18.  Takes a few minutes.

# %%
from hiddenrole.avalon import (AvalonConfig, build_avalon, blind_merlin_adversary_strategy, blind_merlin_mediator_strategy,
                               outcome_breakdown)
from hiddenrole.efg import best_response, expected_value
from hiddenrole.lp import solve_game_exact

g = build_avalon(AvalonConfig(5, merlin=True, mordred_count=2))
print(g)

# %%
x_hand, y_hand = blind_merlin_mediator_strategy(g), blind_merlin_adversary_strategy(g)
_, lower = best_response(g, x_hand)
_, upper = best_response(g, y_hand)
print("mediator guarantees", lower)
print("adversary concedes at most", upper)

# %%
sol = solve_game_exact(g)
print("exact value", sol.value)
for name, x, y in (("LP pair", sol.x, sol.y), ("hand x, LP y", x_hand, sol.y), ("LP x, hand y", sol.x, y_hand)):
    bd = outcome_breakdown(g, x, y)
    print(f"{name:14s} value {expected_value(g, x, y)}  RW {float(bd.rw):.4f}  MG {float(bd.mg):.4f}")
