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
# # Training the trajectory agent
#
# Soft actor-critic with twin critics, written in numpy. Set `EPISODES=2000`
# in the environment for the full run (about a minute per thousand episodes
# on a laptop core).

# %%
import os

import numpy as np

from hstirs.config import ScenarioConfig
from hstirs.sac import SacConfig, save_agent, train

EPISODES = int(os.environ.get("EPISODES", "400"))
cfg = ScenarioConfig()
result = train(cfg, SacConfig(), episodes=EPISODES, seed=0)
returns = result.returns()
print(EPISODES, "episodes,", result.steps, "environment steps")

# %% [markdown]
# ## Learning curve
#
# Returns are noisy per episode; block means show the trend.

# %%
block = max(1, EPISODES // 10)
means = [returns[i:i + block].mean() for i in range(0, len(returns), block)]
for i, m in enumerate(means):
    print(f"episodes {i * block:5d}-{min((i + 1) * block, EPISODES) - 1:5d}: mean return {m:8.3f}")
temps = [row["temperature"] for row in result.curves]
print("temperature", round(temps[0], 3), "->", round(temps[-1], 3))

# %% [markdown]
# The best-return snapshot is what the benchmarks use.

# %%
os.makedirs("runs", exist_ok=True)
save_agent(result.best_agent, "runs/agent.sacv1", cfg.n_trains)
print("saved runs/agent.sacv1, best episode return", float(np.max(returns)))
