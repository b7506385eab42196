"""Soft actor-critic with twin critics and automatic temperature tuning.

The actor maps an observation to the mean and log standard deviation of a
Gaussian whose samples are squashed by ``tanh`` into ``(-1, 1)``. Every loss
below is written as an explicit function of its parameters plus frozen
Gaussian noise so it can be checked against finite differences.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exceptions import DomainError, TrainingDivergenceError
from .network import Mlp, backward, forward

LOG_STD_MIN, LOG_STD_MAX = -20.0, 2.0
# tanh rounds to exactly 1.0 beyond |u| ~ 19; keep actions strictly inside the box
_ACTION_MAX = float(np.nextafter(1.0, 0.0))
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
MAGIC = b"SACV1"


@dataclass
class SacConfig:
    """Learner hyperparameters; defaults are standard small-scale SAC settings."""

    hidden: tuple = (64, 64)
    batch_size: int = 256
    buffer_size: int = 100_000
    gamma: float = 0.99
    tau: float = 0.005
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    temperature_lr: float = 3e-4
    target_entropy: Optional[float] = None   # None -> -act_dim
    init_temperature: float = 1.0
    auto_temperature: bool = True
    warmup_steps: int = 1000
    updates_per_step: int = 1


class Adam:
    def __init__(self, arrays, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def step(self, arrays, grads, lr):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for a, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            a -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class SacAgent:
    actor: Mlp
    critic1: Mlp
    critic2: Mlp
    target1: Mlp
    target2: Mlp
    log_temperature: float
    gamma: float = 0.99
    tau: float = 0.005
    target_entropy: float = -3.0
    auto_temperature: bool = True
    optimizers: dict = field(default_factory=dict, repr=False)

    @classmethod
    def create(cls, obs_dim: int, act_dim: int, config: SacConfig = None, rng=None) -> "SacAgent":
        config = config or SacConfig()
        rng = np.random.default_rng(0) if rng is None else rng
        hidden = tuple(config.hidden)
        actor = Mlp.init((obs_dim, *hidden, 2 * act_dim), rng, out_scale=0.1)
        critic1 = Mlp.init((obs_dim + act_dim, *hidden, 1), rng)
        critic2 = Mlp.init((obs_dim + act_dim, *hidden, 1), rng)
        target = -float(act_dim) if config.target_entropy is None else float(config.target_entropy)
        return cls(actor, critic1, critic2, critic1.copy(), critic2.copy(),
                   log_temperature=float(np.log(config.init_temperature)), gamma=config.gamma,
                   tau=config.tau, target_entropy=target, auto_temperature=config.auto_temperature)

    @property
    def obs_dim(self) -> int:
        return self.actor.widths[0]

    @property
    def act_dim(self) -> int:
        return self.actor.widths[-1] // 2

    @property
    def temperature(self) -> float:
        return float(np.exp(self.log_temperature))

    def networks(self) -> list:
        return [self.actor, self.critic1, self.critic2, self.target1, self.target2]

    def copy(self) -> "SacAgent":
        return SacAgent(*(n.copy() for n in self.networks()), log_temperature=self.log_temperature,
                        gamma=self.gamma, tau=self.tau, target_entropy=self.target_entropy,
                        auto_temperature=self.auto_temperature)

    def all_finite(self) -> bool:
        return all(n.all_finite() for n in self.networks()) and np.isfinite(self.log_temperature)

    def policy(self, deterministic=True, rng=None):
        """Observation -> action callable for rollouts."""
        mode = "deterministic" if deterministic else "stochastic"
        return lambda obs: sample_action(self, obs, mode, rng)[0]


def log1m_tanh2(u):
    """``log(1 - tanh(u)**2)`` without cancellation for large ``|u|``."""
    return 2.0 * (np.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


@dataclass
class PolicyTerms:
    mu: np.ndarray
    raw_log_std: np.ndarray
    log_std: np.ndarray
    std: np.ndarray
    eps: np.ndarray
    u: np.ndarray
    action: np.ndarray
    logp: np.ndarray
    cache: list


def policy_terms(actor: Mlp, obs, eps) -> PolicyTerms:
    """Reparameterised squashed-Gaussian sample for a batch of observations."""
    out, cache = forward(actor, obs, return_cache=True)
    act_dim = out.shape[1] // 2
    mu, raw = out[:, :act_dim], out[:, act_dim:]
    log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
    std = np.exp(log_std)
    u = mu + std * eps
    action = np.clip(np.tanh(u), -_ACTION_MAX, _ACTION_MAX)
    logp = np.sum(-0.5 * eps ** 2 - log_std - _HALF_LOG_2PI - log1m_tanh2(u), axis=1)
    return PolicyTerms(mu, raw, log_std, std, eps, u, action, logp, cache)


def sample_action(agent: SacAgent, observation, mode="stochastic", rng=None):
    """Return ``(action, log_probability)`` for one observation.

    ``deterministic`` mode returns ``tanh(mean)`` and ignores ``rng``.
    """
    obs = np.asarray(observation, dtype=float).reshape(1, -1)
    if mode == "deterministic":
        eps = np.zeros((1, agent.act_dim))
    elif mode == "stochastic":
        rng = np.random.default_rng() if rng is None else rng
        eps = rng.standard_normal((1, agent.act_dim))
    else:
        raise DomainError(f"unknown sampling mode {mode!r}")
    terms = policy_terms(agent.actor, obs, eps)
    return terms.action[0], float(terms.logp[0])


def q_values(critic: Mlp, obs, act):
    x = np.concatenate([obs, act], axis=1)
    out, cache = forward(critic, x, return_cache=True)
    return out[:, 0], x, cache


def critic_targets(agent: SacAgent, reward, next_obs, done, eps_next):
    """``r + gamma (1 - done) (min target Q(s', a') - temp * log pi(a'|s'))``."""
    terms = policy_terms(agent.actor, next_obs, eps_next)
    q1, _, _ = q_values(agent.target1, next_obs, terms.action)
    q2, _, _ = q_values(agent.target2, next_obs, terms.action)
    soft = np.minimum(q1, q2) - agent.temperature * terms.logp
    return reward + agent.gamma * (1.0 - done) * soft


def critic_loss(critic: Mlp, obs, act, targets):
    """Mean squared error to the fixed targets and its parameter gradients."""
    q, x, cache = q_values(critic, obs, act)
    diff = q - targets
    loss = float(np.mean(diff ** 2))
    grads, _ = backward(critic, x, (2.0 * diff / diff.size)[:, None], cache=cache)
    return loss, grads


def actor_loss(actor: Mlp, critic1: Mlp, critic2: Mlp, obs, eps, temperature):
    """``mean(temp * log pi(a|s) - min(Q1, Q2)(s, a))`` with ``a`` reparameterised.

    Returns ``(loss, actor_grads, terms)``.
    """
    terms = policy_terms(actor, obs, eps)
    batch = obs.shape[0]
    q1, x1, cache1 = q_values(critic1, obs, terms.action)
    q2, x2, cache2 = q_values(critic2, obs, terms.action)
    first = q1 <= q2
    qmin = np.where(first, q1, q2)
    loss = float(np.mean(temperature * terms.logp - qmin))

    act_dim = terms.action.shape[1]
    _, gin1 = backward(critic1, x1, (-first.astype(float) / batch)[:, None], cache=cache1)
    _, gin2 = backward(critic2, x2, (-(~first).astype(float) / batch)[:, None], cache=cache2)
    d_action = gin1[:, -act_dim:] + gin2[:, -act_dim:]
    d_u = d_action * (1.0 - terms.action ** 2)
    tanh_u = np.tanh(terms.u)
    d_mu = temperature / batch * 2.0 * tanh_u + d_u
    d_log_std = (temperature / batch * (-1.0 + 2.0 * tanh_u * terms.std * eps)
                 + d_u * terms.std * eps)
    inside = (terms.raw_log_std > LOG_STD_MIN) & (terms.raw_log_std < LOG_STD_MAX)
    grad_out = np.concatenate([d_mu, d_log_std * inside], axis=1)
    grads, _ = backward(actor, obs, grad_out, cache=terms.cache)
    return loss, grads, terms


def temperature_loss(log_temperature: float, logp, target_entropy: float):
    """``-mean(log_temp * (log pi + target_entropy))`` and its derivative."""
    slack = np.asarray(logp) + target_entropy
    return float(-log_temperature * np.mean(slack)), float(-np.mean(slack))


def soft_update(target: Mlp, source: Mlp, tau: float) -> None:
    for t, s in zip(target.arrays(), source.arrays()):
        t *= 1.0 - tau
        t += tau * s


def _optimizer(agent: SacAgent, name: str, arrays):
    if name not in agent.optimizers:
        agent.optimizers[name] = Adam(arrays)
    return agent.optimizers[name]


def update(agent: SacAgent, batch, rng, actor_lr=3e-4, critic_lr=3e-4, temperature_lr=3e-4) -> dict:
    """One gradient step on critics, actor and temperature, then soft target update.

    ``batch`` is a mapping with ``obs, act, rew, next_obs, done`` arrays.
    """
    obs, act = batch["obs"], batch["act"]
    size = obs.shape[0]
    if size == 0:
        raise DomainError("empty batch")
    eps_next = rng.standard_normal((size, agent.act_dim))
    targets = critic_targets(agent, batch["rew"], batch["next_obs"], batch["done"], eps_next)

    l1, g1 = critic_loss(agent.critic1, obs, act, targets)
    l2, g2 = critic_loss(agent.critic2, obs, act, targets)
    eps = rng.standard_normal((size, agent.act_dim))
    la, ga, terms = actor_loss(agent.actor, agent.critic1, agent.critic2, obs, eps, agent.temperature)
    lt, gt = temperature_loss(agent.log_temperature, terms.logp, agent.target_entropy)

    losses = {"critic1": l1, "critic2": l2, "actor": la, "temperature": lt}
    if not all(np.isfinite(v) for v in losses.values()):
        raise TrainingDivergenceError(
            "non-finite SAC loss",
            {"losses": losses, "temperature": agent.temperature,
             "max_abs_target": float(np.max(np.abs(targets)))},
        )

    _optimizer(agent, "critic1", agent.critic1.arrays()).step(agent.critic1.arrays(), g1, critic_lr)
    _optimizer(agent, "critic2", agent.critic2.arrays()).step(agent.critic2.arrays(), g2, critic_lr)
    _optimizer(agent, "actor", agent.actor.arrays()).step(agent.actor.arrays(), ga, actor_lr)
    if agent.auto_temperature:
        holder = [np.array([agent.log_temperature])]
        _optimizer(agent, "temperature", holder).step(holder, [np.array([gt])], temperature_lr)
        agent.log_temperature = float(holder[0][0])
    soft_update(agent.target1, agent.critic1, agent.tau)
    soft_update(agent.target2, agent.critic2, agent.tau)

    if not agent.all_finite():
        raise TrainingDivergenceError("non-finite parameter after update", {"losses": losses})
    return losses


# --- checkpoint file -------------------------------------------------------
#
# MAGIC | uint32 LE header length | UTF-8 JSON header | float64 LE arrays
# arrays in order: actor, critic1, critic2, target1, target2 (each W0, b0, ...)
# followed by one float64 holding the log temperature.

def save_agent(agent: SacAgent, path, n_trains: int) -> None:
    header = {
        "version": 1,
        "n_trains": int(n_trains),
        "activation": "tanh",
        "actor": list(agent.actor.widths),
        "critic": list(agent.critic1.widths),
        "gamma": agent.gamma,
        "tau": agent.tau,
        "target_entropy": agent.target_entropy,
        "auto_temperature": agent.auto_temperature,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for net in agent.networks():
            for arr in net.arrays():
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        fh.write(np.array([agent.log_temperature], dtype="<f8").tobytes())


def load_agent(path):
    """Return ``(agent, header)`` from a checkpoint written by :func:`save_agent`."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:len(MAGIC)] != MAGIC:
        raise DomainError(f"{path}: not a SACV1 checkpoint")
    (length,) = struct.unpack("<I", data[len(MAGIC):len(MAGIC) + 4])
    pos = len(MAGIC) + 4
    header = json.loads(data[pos:pos + length].decode())
    pos += length
    values = np.frombuffer(data[pos:], dtype="<f8").astype(float)

    nets = [Mlp.zeros(header["actor"])] + [Mlp.zeros(header["critic"]) for _ in range(4)]
    expected = sum(n.n_params() for n in nets) + 1
    if values.size != expected:
        raise DomainError(f"{path}: expected {expected} parameters, found {values.size}")
    offset = 0
    for net in nets:
        for arr in net.arrays():
            arr[...] = values[offset:offset + arr.size].reshape(arr.shape)
            offset += arr.size
    agent = SacAgent(*nets, log_temperature=float(values[offset]), gamma=header["gamma"],
                     tau=header["tau"], target_entropy=header["target_entropy"],
                     auto_temperature=header["auto_temperature"])
    return agent, header
