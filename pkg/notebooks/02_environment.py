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
# # The trajectory environment
#
# One episode spans `n_slots` slots of `inner_steps` UAV moves. Trains advance
# at slot boundaries. The reward is the scaled gain in the smallest train rate,
# and an episode stops as soon as that rate fails to improve.

# %%
import numpy as np

from hstirs.config import ScenarioConfig
from hstirs.env import HstEnv, run_algorithm1, scale_action, zero_policy

cfg = ScenarioConfig()
env = HstEnv(cfg)
env.reset(uav_start=(600.0, 250.0, 150.0))
print("observation size", env.obs_dim, " start rate", round(env.prev_rate, 2), "bit/s")
print("largest move per step", cfg.step_length, "m")
print("action (dx, dl, dz) = (0, 1, 0) moves", scale_action([0, 1, 0], cfg))

# %% [markdown]
# Climbing from 150 m raises the worst rate only a little here. A gain below
# the `r0` threshold counts as a stall and ends the episode at once.

# %%
out = env.step([0.0, 1.0, 0.0])
print(f"rate {out.info['min_rate']:.2f}  reward {out.reward:.3f}  {out.info['case']}  done={out.done}")

# %% [markdown]
# With `r0 = 0` every gain is rewarded, so the climb continues until the rate
# stops rising.

# %%
env0 = HstEnv(cfg.replace(r0=0.0))
env0.reset(uav_start=(600.0, 250.0, 150.0))
for _ in range(40):
    out = env0.step([0.0, 1.0, 0.0])
    print(f"k={out.next_state.k} t={out.next_state.t} z={out.next_state.uav[2]:6.1f} "
          f"rate={out.info['min_rate']:8.2f} reward={out.reward:7.3f} {out.info['case']}")
    if out.done:
        break

# %% [markdown]
# ## Alternating solve and move
#
# `run_algorithm1` never terminates early: each inner step solves the
# assignment, then applies one policy move. A parked UAV only sees the rate
# change as the trains go by.

# %%
res = run_algorithm1(zero_policy, cfg, seed=0)
for rec in res.slot_records():
    print(f"slot {rec['k']}: min rate {rec['min_rate']:8.2f} bit/s at {rec['uav_x']:.1f}, {rec['uav_y']:.1f}, "
          f"{rec['uav_z']:.1f}")
