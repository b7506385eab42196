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
# # Channel model and reflector assignment
#
# A 10x10 reflecting panel hangs under a UAV. Each reflector relays the base
# station signal to one of four trains. We look at the single-reflector rate
# matrix, the max-min assignment and what co-phasing buys.

# %%
import numpy as np

from hstirs import assignment as asg
from hstirs.channel import cascaded_link, compute_geometry, per_reflector_rate_matrix, rate, snr_all
from hstirs.config import ScenarioConfig
from hstirs.env import HstEnv

cfg = ScenarioConfig()
env = HstEnv(cfg)
state = env.reset()
state.uav = np.array([600.0, 250.0, 200.0])
print("BS", state.bs, "\ntrains\n", state.hsts)

# %% [markdown]
# ## Rate matrix
#
# `R[n, m]` is the rate train `m` would get from reflector `n` alone. The
# rows are nearly identical because the panel is only 9 cm across.

# %%
geom = compute_geometry(state.bs, state.uav, state.hsts, cfg.panel)
link = cascaded_link(geom, cfg.panel, cfg)
R = per_reflector_rate_matrix(link, cfg.tx_power, cfg.sigma2, cfg.bandwidth)
print("shape", R.shape)
print("column means (bit/s)", R.mean(axis=0).round(3))
print("row spread / mean", float((R.max(axis=0) - R.min(axis=0)).max() / R.mean()))

# %% [markdown]
# ## Max-min split
#
# Greedy, equal contiguous blocks and branch-and-bound, compared on the
# additive surrogate. On a panel this size branch-and-bound stops at its node
# budget, so its answer is an incumbent rather than a certificate.

# %%
exact = asg.solve_exact(R, node_limit=20_000)
greedy = asg.solve_greedy(R)
blocks = asg.solution_for(asg.equal_block_assignment(*R.shape), R)
for name, sol in [("exact", exact), ("greedy", greedy), ("equal blocks", blocks)]:
    print(f"{name:13s} Z = {sol.bottleneck:9.3f}  reflectors per train {sol.indicator.sum(axis=0)}")
print("proved optimal:", exact.optimal, "after", exact.nodes, "nodes")

# %% [markdown]
# Small instances can be checked against full enumeration.

# %%
small = np.random.default_rng(0).uniform(size=(8, 3))
print(asg.solve_exact(small).bottleneck == asg.solve_brute_force(small).bottleneck)

# %% [markdown]
# ## Co-phasing
#
# Cancelling each path phase makes the reflected fields add in amplitude, so
# the SNR grows with the square of the number of reflectors. Random phases
# only add in power.

# %%
co = asg.co_phase(link, exact.indicator)
rng = np.random.default_rng(1)
coherent = rate(snr_all(link, exact.indicator, co, cfg.tx_power, cfg.sigma2), cfg.bandwidth)
scrambled = rate(snr_all(link, exact.indicator, rng.uniform(0, 2 * np.pi, R.shape[0]), cfg.tx_power, cfg.sigma2),
                 cfg.bandwidth)
print("co-phased train rates", coherent.round(1))
print("random-phase rates   ", scrambled.round(1))
