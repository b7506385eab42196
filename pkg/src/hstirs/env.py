"""Episodic UAV trajectory environment.

State: positions of the base station, UAV and every train. Action: a
normalised displacement ``(dx, dl, dz)`` with ``dl`` the altitude change,
mapped to ``(x, z, y)`` in the z-up frame. Reward, in ``reward_scale`` units:

* ``-1`` and terminate when the altitude leaves ``[l_min, l_max]``;
* the increase of the minimum train rate when it increased and stays at or
  above ``r0``;
* ``0`` and terminate otherwise.

Trains advance by ``v_train * slot_dt`` every ``inner_steps`` UAV moves.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import assignment as asg
from .channel import cascaded_link, compute_geometry, per_reflector_rate_matrix, rate, snr_all
from .config import ScenarioConfig
from .exceptions import ConfigError

TRACE_HEADER = ["k", "t", "uav_x", "uav_y", "uav_z", "min_rate", "surrogate_z", "reward", "done"]

ASSIGNERS = ("exact", "static", "random")


@dataclass
class WorldState:
    bs: np.ndarray
    uav: np.ndarray
    hsts: np.ndarray
    k: int = 0
    t: int = 0

    def copy(self) -> "WorldState":
        return WorldState(self.bs.copy(), self.uav.copy(), self.hsts.copy(), self.k, self.t)


@dataclass
class RateReport:
    """Outcome of one assignment + phase solve at fixed positions."""

    min_rate: float
    solution: asg.AssignmentSolution
    phases: np.ndarray
    train_rates: np.ndarray
    feasible: bool
    solve_ms: float

    @property
    def surrogate_z(self) -> float:
        return self.solution.bottleneck


@dataclass
class StepOutcome:
    next_state: WorldState
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


def scale_action(action, cfg: ScenarioConfig) -> np.ndarray:
    """Clamp to ``[-1, 1]^3``, project onto the unit ball and convert to a
    z-up displacement in metres. The norm never exceeds ``cfg.step_length``.
    """
    a = np.clip(np.nan_to_num(np.asarray(action, dtype=float).reshape(3)), -1.0, 1.0)
    norm = np.linalg.norm(a)
    if norm > 1.0:
        a = a / norm
    dx, dl, dz = a
    return cfg.step_length * np.array([dx, dz, dl])


def min_rate(state: WorldState, cfg: ScenarioConfig, assigner: str = "exact", rng=None,
             fixed=None) -> RateReport:
    """Smallest coherent train rate after assigning reflectors and phases.

    ``assigner`` selects the reflector split: ``"exact"`` (branch-and-bound
    within ``cfg.solver_node_limit`` nodes, co-phased), ``"static"`` (equal
    contiguous blocks, co-phased) or ``"random"`` (random split and random
    phases drawn from ``rng``, or reused from ``fixed=(assignment, phases)``).
    """
    geom = compute_geometry(state.bs, state.uav, state.hsts, cfg.panel)
    link = cascaded_link(geom, cfg.panel, cfg)
    rates = per_reflector_rate_matrix(link, cfg.tx_power, cfg.sigma2, cfg.bandwidth)
    n_refl, n_trains = rates.shape

    start = time.perf_counter()
    if assigner == "exact":
        solution = asg.solve_exact(rates, node_limit=cfg.solver_node_limit)
        phases = asg.co_phase(link, solution.indicator)
    elif assigner == "static":
        solution = asg.solution_for(asg.equal_block_assignment(n_refl, n_trains), rates)
        phases = asg.co_phase(link, solution.indicator)
    elif assigner == "random":
        if fixed is None:
            if rng is None:
                raise ValueError("random assigner needs an rng or fixed draws")
            fixed = random_configuration(n_refl, n_trains, rng)
        solution = asg.solution_for(fixed[0], rates)
        phases = np.asarray(fixed[1], dtype=float)
    else:
        raise ValueError(f"unknown assigner {assigner!r}; choose from {ASSIGNERS}")
    solve_ms = (time.perf_counter() - start) * 1e3

    train_rates = rate(snr_all(link, solution.indicator, phases, cfg.tx_power, cfg.sigma2), cfg.bandwidth)
    train_rates = np.atleast_1d(train_rates)
    return RateReport(
        min_rate=float(train_rates.min()),
        solution=solution,
        phases=phases,
        train_rates=train_rates,
        feasible=bool(np.all(train_rates >= cfg.r0)),
        solve_ms=solve_ms,
    )


def random_configuration(n_refl, n_trains, rng):
    """Uniform row-valid split and uniform phases in ``[0, 2pi)``."""
    return asg.random_assignment(n_refl, n_trains, rng), rng.uniform(0.0, 2 * np.pi, size=n_refl)


class HstEnv:
    """Single-worker environment instance; owns its RNG and ``R_pre``."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.state: Optional[WorldState] = None
        self.prev_rate = 0.0
        self.initial_rate = 0.0
        self._track_start = np.asarray(cfg.track_start, dtype=float)
        self._direction = self._unit(cfg.track_end, cfg.track_start)
        self._low = np.asarray(cfg.scene_low, dtype=float)
        self._high = np.asarray(cfg.scene_high, dtype=float)

    @staticmethod
    def _unit(end, start):
        d = np.asarray(end, dtype=float) - np.asarray(start, dtype=float)
        return d / np.linalg.norm(d)

    @property
    def obs_dim(self) -> int:
        return 3 * (self.cfg.n_trains + 2)

    act_dim = 3

    def train_positions(self, k: int) -> np.ndarray:
        along = self.cfg.offsets() + self.cfg.v_train * self.cfg.slot_dt * k
        return self._track_start[None, :] + along[:, None] * self._direction[None, :]

    def reset(self, randomize: bool = False, rng_seed=None, start_slot: int = 0,
              uav_start=None, jitter: float = 0.0) -> WorldState:
        """Start an episode.

        ``randomize`` draws the BS and the track endpoints uniformly on the
        ground inside the scene bounds; otherwise the configured scene is
        used. ``jitter`` perturbs the UAV start uniformly by up to that many
        metres per horizontal axis.
        """
        cfg = self.cfg
        rng = np.random.default_rng(cfg.seed if rng_seed is None else rng_seed)
        if not 0 <= start_slot < cfg.n_slots:
            raise ConfigError(f"start_slot {start_slot} outside [0, {cfg.n_slots})")
        if randomize:
            lo, hi = self._low[:2], self._high[:2]
            bs = np.append(rng.uniform(lo, hi), 0.0)
            while True:
                a = np.append(rng.uniform(lo, hi), 0.0)
                b = np.append(rng.uniform(lo, hi), 0.0)
                if np.linalg.norm(b - a) > 0.25 * np.linalg.norm(hi - lo):
                    break
            self._track_start, self._direction = a, self._unit(b, a)
        else:
            bs = np.asarray(cfg.bs_position, dtype=float)
            self._track_start = np.asarray(cfg.track_start, dtype=float)
            self._direction = self._unit(cfg.track_end, cfg.track_start)

        uav = np.array(cfg.uav_start if uav_start is None else uav_start, dtype=float)
        if jitter > 0:
            uav[:2] += rng.uniform(-jitter, jitter, size=2)
        self.state = WorldState(bs=bs, uav=uav, hsts=self.train_positions(start_slot), k=start_slot, t=0)
        self.prev_rate = min_rate(self.state, cfg).min_rate
        self.initial_rate = self.prev_rate
        return self.state.copy()

    def observe(self, state: Optional[WorldState] = None) -> np.ndarray:
        """Positions of BS, UAV and trains scaled so the scene box maps to ``[-1, 1]``."""
        s = self.state if state is None else state
        pts = np.vstack([s.bs[None, :], s.uav[None, :], s.hsts])
        return (2.0 * (pts - self._low) / (self._high - self._low) - 1.0).reshape(-1)

    def step(self, action) -> StepOutcome:
        cfg = self.cfg
        s = self.state
        s.uav = s.uav + scale_action(action, cfg)
        s.t += 1
        if s.t == cfg.inner_steps:
            s.t = 0
            s.k += 1
            s.hsts = self.train_positions(s.k)
        horizon = s.k >= cfg.n_slots

        altitude = s.uav[2]
        if altitude > cfg.l_max or altitude < cfg.l_min:
            info = {"case": "altitude", "min_rate": float("nan"), "surrogate_z": float("nan"),
                    "assignment": None, "feasible": False, "truncated": False}
            return StepOutcome(s.copy(), -1.0, True, info)

        report = min_rate(s, cfg)
        delta = report.min_rate - self.prev_rate
        if delta > 0 and report.min_rate >= cfg.r0:
            reward, done, case = delta * cfg.reward_scale, False, "improved"
        else:
            reward, done, case = 0.0, True, "stalled"
        self.prev_rate = report.min_rate
        truncated = horizon and not done
        info = {
            "case": case,
            "min_rate": report.min_rate,
            "surrogate_z": report.surrogate_z,
            "assignment": report.solution.assignment,
            "feasible": report.feasible,
            "truncated": truncated,
        }
        return StepOutcome(s.copy(), reward, done or truncated, info)


def zero_policy(obs):
    return np.zeros(3)


@dataclass
class AlgorithmResult:
    trajectory: np.ndarray          # UAV position at every inner step, (K*T, 3)
    phase_schedule: list            # phase vector used at every inner step
    records: list                   # one dict per inner step

    def slot_records(self) -> list:
        """The last inner-step record of every slot."""
        last = {}
        for rec in self.records:
            last[rec["k"]] = rec
        return [last[k] for k in sorted(last)]


def run_algorithm1(policy: Callable, cfg: ScenarioConfig, assigner: str = "exact", seed: int = 0,
                   uav_start=None, fixed_altitude: Optional[float] = None, jitter: Optional[float] = None,
                   randomize: bool = False) -> AlgorithmResult:
    """Alternate reflector assignment and trajectory steps over all slots.

    Every inner step first solves the phase configuration at the current
    positions, then applies one policy move. Episodes are not terminated;
    reward cases are only logged. The altitude is kept inside
    ``[l_min, l_max]`` (or pinned to ``fixed_altitude``).
    """
    env = HstEnv(cfg)
    rng = np.random.default_rng(seed)
    jitter = cfg.uav_jitter if jitter is None else jitter
    start = np.array(cfg.uav_start if uav_start is None else uav_start, dtype=float)
    if fixed_altitude is not None:
        if not cfg.l_min <= fixed_altitude <= cfg.l_max:
            raise ConfigError(f"fixed altitude {fixed_altitude} outside [{cfg.l_min}, {cfg.l_max}]")
        start[2] = fixed_altitude
    state = env.reset(randomize=randomize, rng_seed=seed, uav_start=start, jitter=jitter)

    trajectory, phases, records = [], [], []
    prev = None
    random_draw = None
    for k in range(cfg.n_slots):
        state.hsts = env.train_positions(k)
        state.k = k
        if assigner == "random":
            random_draw = random_configuration(cfg.n_reflectors, cfg.n_trains, rng)
        for t in range(cfg.inner_steps):
            state.t = t
            report = min_rate(state, cfg, assigner=assigner, fixed=random_draw)
            if prev is None:
                reward, case = 0.0, "initial"
            else:
                delta = report.min_rate - prev
                if delta > 0 and report.min_rate >= cfg.r0:
                    reward, case = delta * cfg.reward_scale, "improved"
                else:
                    reward, case = 0.0, "stalled"
            prev = report.min_rate
            trajectory.append(state.uav.copy())
            phases.append(report.phases)
            records.append({
                "k": k, "t": t,
                "uav_x": float(state.uav[0]), "uav_y": float(state.uav[1]), "uav_z": float(state.uav[2]),
                "min_rate": report.min_rate, "surrogate_z": report.surrogate_z,
                "reward": reward, "done": case == "stalled", "case": case,
                "feasible": report.feasible, "solve_ms": report.solve_ms,
                "optimal": report.solution.optimal,
            })

            action = np.asarray(policy(env.observe(state)), dtype=float)
            move = scale_action(action, cfg)
            new = state.uav + move
            if fixed_altitude is not None:
                new[2] = fixed_altitude
            else:
                new[2] = min(max(new[2], cfg.l_min), cfg.l_max)
            state.uav = new
    return AlgorithmResult(np.array(trajectory), phases, records)


def write_trace(records, path) -> None:
    """Episode trace CSV: one row per step with the columns of ``TRACE_HEADER``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for rec in records:
            writer.writerow([rec["k"], rec["t"], repr(rec["uav_x"]), repr(rec["uav_y"]), repr(rec["uav_z"]),
                             repr(rec["min_rate"]), repr(rec["surrogate_z"]), repr(rec["reward"]),
                             int(bool(rec["done"]))])
