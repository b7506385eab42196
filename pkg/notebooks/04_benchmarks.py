# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Comparing methods
#
# Loads `runs/agent.sacv1` (written by the training notebook) or trains a
# short agent if it is missing.

# %%
import os

import numpy as np

from hstirs import bench
from hstirs.config import ScenarioConfig
from hstirs.sac import SacConfig, load_agent, train

cfg = ScenarioConfig()
if os.path.exists("runs/agent.sacv1"):
    agent, _ = load_agent("runs/agent.sacv1")
else:
    agent = train(cfg, SacConfig(), episodes=300, seed=0).best_agent
SEEDS = range(int(os.environ.get("SEEDS", "5")))

# %% [markdown]
# ## Trajectory and assignment variants

# %%
names = ["OU_OI", "OU_SI", "OU_RI", "SU_OI", "FIXED_ALT(100)", "FIXED_ALT(200)", "FIXED_ALT(300)"]
by_method = {}
for name in names:
    variant = bench.MethodVariant.parse(name)
    by_method[name] = [r for s in SEEDS for r in bench.run_method(variant, cfg, agent, s)]
rows, series = bench.compare_report(by_method)
for row in rows:
    print(f"{row['method']:15s} mean {row['mean_min_rate']:8.1f}  OU_OI gain {row['ou_oi_gain_pct']:+7.1f}%")

# %% [markdown]
# Per-slot series, the data behind a rate-versus-slot plot.

# %%
for name in ("OU_OI", "SU_OI", "OU_RI"):
    print(name, [round(v, 1) for _, v in series[name]])

# %% [markdown]
# ## Solver effort against panel size
#
# Rate columns of a real panel are almost identical, which makes the search
# tree nearly symmetric. Nine reflectors already need a large node budget to
# prove optimality; larger panels stop at the budget with a good incumbent.

# %%
def show(rows):
    for row in rows:
        print(f"N={row['n_reflectors']:3d}  {row['mean_solve_ms']:8.1f} ms  nodes {row['mean_nodes']:9.0f}  "
              f"proved optimal {row['optimal_fraction']:.0%}")


show(bench.solver_scaling_study(cfg, [4, 9], seeds=range(2)))
show(bench.solver_scaling_study(cfg, [16, 25], seeds=range(2), node_limit=50_000))
