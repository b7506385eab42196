"""Episode loop that trains a SAC agent on the trajectory environment."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from ..config import ScenarioConfig
from ..env import HstEnv
from .agent import SacAgent, SacConfig, sample_action, update
from .replay import ReplayBuffer

log = logging.getLogger(__name__)

CURVE_HEADER = ["episode", "return", "critic_loss", "actor_loss", "temperature"]


@dataclass
class TrainResult:
    agent: SacAgent
    best_agent: SacAgent
    curves: list = field(default_factory=list)
    steps: int = 0

    def returns(self) -> np.ndarray:
        return np.array([row["return"] for row in self.curves])


def anchored_start(env: HstEnv, rng, horizontal: float = 120.0) -> np.ndarray:
    """UAV start near the ground midpoint of the BS and the train centroid,
    uniformly perturbed, at a uniform altitude inside the legal band."""
    s = env.state
    mid = 0.5 * (s.bs + s.hsts.mean(axis=0))
    cfg = env.cfg
    margin = min(cfg.step_length, 0.25 * (cfg.l_max - cfg.l_min))
    return np.array([
        mid[0] + rng.uniform(-horizontal, horizontal),
        mid[1] + rng.uniform(-horizontal, horizontal),
        rng.uniform(cfg.l_min + margin, cfg.l_max - margin),
    ])


def train(cfg: ScenarioConfig, hp: SacConfig = None, episodes: int = 2000, seed: int = 0,
          randomize: bool = False, start_spread: float = 120.0, progress_every: int = 0) -> TrainResult:
    """Train from scratch. Deterministic for a given ``seed``.

    Each episode starts in a uniformly drawn slot with the UAV placed by
    :func:`anchored_start`; actions are uniform during warm-up and sampled
    from the policy afterwards, with one update per step once the buffer
    holds a full batch.
    """
    hp = hp or SacConfig()
    rng = np.random.default_rng(seed)
    env = HstEnv(cfg)
    agent = SacAgent.create(env.obs_dim, env.act_dim, hp, rng)
    best_agent, best_return = agent.copy(), -np.inf
    buffer = ReplayBuffer(hp.buffer_size, env.obs_dim, env.act_dim)
    result = TrainResult(agent, best_agent)

    total_steps = 0
    for episode in range(episodes):
        slot = int(rng.integers(cfg.n_slots))
        scene_seed = int(rng.integers(2**31))
        env.reset(randomize=randomize, rng_seed=scene_seed, start_slot=slot)
        env.reset(randomize=randomize, rng_seed=scene_seed, start_slot=slot,
                  uav_start=anchored_start(env, rng, start_spread))
        obs = env.observe()
        ep_return, losses = 0.0, []
        done = False
        while not done:
            if total_steps < hp.warmup_steps:
                action = rng.uniform(-1.0, 1.0, size=env.act_dim)
            else:
                action, _ = sample_action(agent, obs, "stochastic", rng)
            out = env.step(action)
            next_obs = env.observe()
            terminal = out.done and not out.info.get("truncated", False)
            buffer.add(obs, action, out.reward, next_obs, terminal)
            obs = next_obs
            ep_return += out.reward
            done = out.done
            total_steps += 1
            if total_steps >= hp.warmup_steps and len(buffer) >= hp.batch_size:
                for _ in range(hp.updates_per_step):
                    batch = buffer.sample(hp.batch_size, rng)
                    losses.append(update(agent, batch, rng, hp.actor_lr, hp.critic_lr, hp.temperature_lr))

        row = {
            "episode": episode,
            "return": ep_return,
            "critic_loss": float(np.mean([0.5 * (l["critic1"] + l["critic2"]) for l in losses])) if losses else float("nan"),
            "actor_loss": float(np.mean([l["actor"] for l in losses])) if losses else float("nan"),
            "temperature": agent.temperature,
        }
        result.curves.append(row)
        if ep_return > best_return:
            best_return = ep_return
            result.best_agent = agent.copy()
        if progress_every and (episode + 1) % progress_every == 0:
            recent = [r["return"] for r in result.curves[-progress_every:]]
            log.info("episode %d  steps %d  mean return %.4f  temperature %.4f",
                     episode + 1, total_steps, float(np.mean(recent)), agent.temperature)
    result.steps = total_steps
    return result


def write_curves(curves, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_HEADER)
        for row in curves:
            writer.writerow([row["episode"]] + [repr(float(row[k])) for k in CURVE_HEADER[1:]])


def read_curves(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{"episode": int(r["episode"]), **{k: float(r[k]) for k in CURVE_HEADER[1:]}} for r in reader]
