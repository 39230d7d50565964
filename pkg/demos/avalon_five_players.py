# %% [markdown]
# Exact values and outcome breakdowns for small 5-player Avalon variants.

# %%
import time

from hiddenrole.avalon import AvalonConfig, build_avalon, outcome_breakdown
from hiddenrole.cfr import SolveConfig, solve_cfr
from hiddenrole.efg import counts
from hiddenrole.lp import solve_game_exact

# %%
for roles in ("", "merlin"):
    t0 = time.perf_counter()
    g = build_avalon(AvalonConfig.from_roles(5, roles))
    sol = solve_game_exact(g)
    bd = outcome_breakdown(g, sol.x, sol.y)
    mg = "n/a" if bd.mg is None else f"{float(bd.mg):.4f}"
    print(f"{g.name}: |Z| {counts(g)[1]}, value {sol.value}, RW {float(bd.rw):.4f}, MG {mg}, "
          f"{time.perf_counter() - t0:.1f}s")

# %% [markdown]
# PCFR+ on the same Merlin game: the value sits inside the reported bounds.

# %%
g = build_avalon(AvalonConfig.from_roles(5, "merlin"))
rep = solve_cfr(g, SolveConfig(max_iterations=2000, target_exploitability=1e-6, check_every=50))
print(f"PCFR+: value {rep.value:.6f}, exploitability {rep.exploitability:.2g} after {rep.iterations} iterations")
for it, e, v in rep.trace[:6]:
    print(f"  iter {it:4d}  exploitability {e:.3g}  value {v:.6f}")
