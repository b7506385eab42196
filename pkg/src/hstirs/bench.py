"""Method baselines, solver-scaling study and comparison reports.

Methods (UAV trajectory / reflector phases):

``OU_OI``  learned trajectory, optimal assignment with co-phasing
``OU_SI``  learned trajectory, equal contiguous blocks with co-phasing
``OU_RI``  learned trajectory, random split and random phases per slot
``SU_OI``  UAV parked at the static position, optimal assignment
``FIXED_ALT(h)``  ``OU_OI`` with the altitude pinned to ``h`` metres
"""
from __future__ import annotations

import csv
import os
import re
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import assignment as asg
from .channel import IrsPanel, cascaded_link, compute_geometry, per_reflector_rate_matrix
from .config import ScenarioConfig
from .env import run_algorithm1, zero_policy

RECORD_HEADER = ["method", "seed", "k", "t", "min_rate", "surrogate_z", "uav_x", "uav_y", "uav_z", "solve_ms"]
SCALING_HEADER = ["n_reflectors", "mean_solve_ms", "mean_z", "mean_nodes", "optimal_fraction", "oracle_z"]
SUMMARY_HEADER = ["method", "mean_min_rate", "min_min_rate", "max_min_rate", "n_records", "ou_oi_gain_pct"]

_FIXED_RE = re.compile(r"^FIXED_ALT\((\d+(?:\.\d+)?)\)$")


class UsageError(ValueError):
    """Invalid combination of benchmark inputs."""


@dataclass(frozen=True)
class MethodVariant:
    kind: str
    altitude: Optional[float] = None

    KINDS = ("OU_OI", "OU_SI", "OU_RI", "SU_OI", "FIXED_ALT")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise UsageError(f"unknown method {self.kind!r}")
        if (self.kind == "FIXED_ALT") != (self.altitude is not None):
            raise UsageError("FIXED_ALT needs an altitude and only FIXED_ALT takes one")

    @classmethod
    def parse(cls, text: str) -> "MethodVariant":
        text = text.strip()
        match = _FIXED_RE.match(text)
        if match:
            return cls("FIXED_ALT", float(match.group(1)))
        return cls(text)

    @property
    def needs_agent(self) -> bool:
        return self.kind != "SU_OI"

    def __str__(self):
        if self.kind == "FIXED_ALT":
            return f"FIXED_ALT({self.altitude:g})"
        return self.kind


OU_OI, OU_SI, OU_RI, SU_OI = (MethodVariant(k) for k in ("OU_OI", "OU_SI", "OU_RI", "SU_OI"))


def FIXED_ALT(h) -> MethodVariant:
    return MethodVariant("FIXED_ALT", float(h))


@dataclass
class BenchmarkRecord:
    method: str
    seed: int
    k: int
    t: int
    min_rate: float
    surrogate_z: float
    uav_x: float
    uav_y: float
    uav_z: float
    solve_ms: Optional[float] = None


def run_method(variant: MethodVariant, cfg: ScenarioConfig, agent=None, seed: int = 0,
               timing: bool = False) -> list:
    """Roll out one method for ``cfg.n_slots`` slots; one record per slot.

    The seed jitters the UAV start (``cfg.uav_jitter``) and drives the random
    phases of ``OU_RI``. Records hold the last inner step of each slot.
    ``solve_ms`` is filled only when ``timing`` is set, keeping default
    outputs reproducible byte for byte.
    """
    if isinstance(variant, str):
        variant = MethodVariant.parse(variant)
    if variant.needs_agent and agent is None:
        raise UsageError(f"{variant} needs a trained agent")
    policy = agent.policy(deterministic=True) if agent is not None else zero_policy

    kind = variant.kind
    kwargs = {"seed": seed}
    if kind == "OU_SI":
        kwargs["assigner"] = "static"
    elif kind == "OU_RI":
        kwargs["assigner"] = "random"
    elif kind == "SU_OI":
        policy = zero_policy
        kwargs["uav_start"] = cfg.static_position()
    elif kind == "FIXED_ALT":
        kwargs["fixed_altitude"] = variant.altitude
    result = run_algorithm1(policy, cfg, **kwargs)

    records = []
    for rec in result.slot_records():
        records.append(BenchmarkRecord(
            method=str(variant), seed=int(seed), k=rec["k"], t=rec["t"],
            min_rate=rec["min_rate"], surrogate_z=rec["surrogate_z"],
            uav_x=rec["uav_x"], uav_y=rec["uav_y"], uav_z=rec["uav_z"],
            solve_ms=rec["solve_ms"] if timing else None,
        ))
    return records


def write_records(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_HEADER)
        for r in records:
            writer.writerow([
                r.method, r.seed, r.k, r.t, repr(float(r.min_rate)), repr(float(r.surrogate_z)),
                repr(float(r.uav_x)), repr(float(r.uav_y)), repr(float(r.uav_z)),
                "" if r.solve_ms is None else repr(float(r.solve_ms)),
            ])


def read_records(path) -> list:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECORD_HEADER:
            raise UsageError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            out.append(BenchmarkRecord(
                method=row["method"], seed=int(row["seed"]), k=int(row["k"]), t=int(row["t"]),
                min_rate=float(row["min_rate"]), surrogate_z=float(row["surrogate_z"]),
                uav_x=float(row["uav_x"]), uav_y=float(row["uav_y"]), uav_z=float(row["uav_z"]),
                solve_ms=float(row["solve_ms"]) if row["solve_ms"] else None,
            ))
    return out


def method_tag(method) -> str:
    """File-name friendly method name: ``FIXED_ALT(200)`` becomes ``FIXED_ALT_200``."""
    return re.sub(r"[^A-Za-z0-9_.-]", "", str(method).replace("(", "_"))


def group_by_method(records) -> dict:
    grouped = {}
    for r in records:
        grouped.setdefault(r.method, []).append(r)
    return grouped


def mean_min_rate(records) -> float:
    return float(np.mean([r.min_rate for r in records]))


def per_seed_means(records) -> dict:
    by_seed = {}
    for r in records:
        by_seed.setdefault(r.seed, []).append(r.min_rate)
    return {s: float(np.mean(v)) for s, v in sorted(by_seed.items())}


def compare_report(by_method: dict, out_dir=None, reference: str = "OU_OI"):
    """Summaries per method and OU_OI's percentage gain over each of them.

    Returns ``(summary_rows, series)`` where ``series[method]`` is a list of
    ``(k, mean min-rate over seeds)``. With ``out_dir`` the summary goes to
    ``summary.csv`` and each series to ``series_<method>.csv``.
    """
    if len(by_method) < 2:
        raise UsageError("comparison needs at least two methods")
    seed_sets = {m: sorted({r.seed for r in recs}) for m, recs in by_method.items()}
    first = next(iter(seed_sets.values()))
    if any(s != first for s in seed_sets.values()):
        raise UsageError(f"methods were run on different seeds: {seed_sets}")

    ref_mean = mean_min_rate(by_method[reference]) if reference in by_method else None
    rows, series = [], {}
    for method in by_method:
        recs = by_method[method]
        values = np.array([r.min_rate for r in recs])
        mean = float(values.mean())
        gain = None
        if ref_mean is not None and mean > 0:
            gain = 100.0 * (ref_mean - mean) / mean
        rows.append({
            "method": method, "mean_min_rate": mean, "min_min_rate": float(values.min()),
            "max_min_rate": float(values.max()), "n_records": int(values.size), "ou_oi_gain_pct": gain,
        })
        by_k = {}
        for r in recs:
            by_k.setdefault(r.k, []).append(r.min_rate)
        series[method] = [(k, float(np.mean(v))) for k, v in sorted(by_k.items())]

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SUMMARY_HEADER)
            for row in rows:
                writer.writerow([row["method"], repr(row["mean_min_rate"]), repr(row["min_min_rate"]),
                                 repr(row["max_min_rate"]), row["n_records"],
                                 "" if row["ou_oi_gain_pct"] is None else repr(row["ou_oi_gain_pct"])])
        for method, points in series.items():
            with open(os.path.join(out_dir, f"series_{method_tag(method)}.csv"), "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["k", "min_rate"])
                for k, v in points:
                    writer.writerow([k, repr(v)])
    return rows, series


def _panel_for(n: int, spacing: float) -> IrsPanel:
    side = int(round(np.sqrt(n)))
    if side * side == n:
        return IrsPanel(grid_nx=side, grid_ny=side, spacing_x=spacing, spacing_y=spacing)
    return IrsPanel(grid_nx=n, grid_ny=1, spacing_x=spacing, spacing_y=spacing)


def scenario_rate_matrix(cfg: ScenarioConfig, n_reflectors: int, rng) -> np.ndarray:
    """Rate matrix for a UAV placed at random above the configured scene with
    the trains at a random slot; the panel is resized to ``n_reflectors``."""
    panel = _panel_for(n_reflectors, cfg.panel.spacing_x)
    k = int(rng.integers(cfg.n_slots))
    from .env import HstEnv
    env = HstEnv(cfg)
    hsts = env.train_positions(k)
    bs = np.asarray(cfg.bs_position, dtype=float)
    mid = 0.5 * (bs + hsts.mean(axis=0))
    uav = np.array([mid[0] + rng.uniform(-100, 100), mid[1] + rng.uniform(-60, 60),
                    rng.uniform(cfg.l_min, cfg.l_max)])
    geom = compute_geometry(bs, uav, hsts, panel)
    link = cascaded_link(geom, panel, cfg)
    return per_reflector_rate_matrix(link, cfg.tx_power, cfg.sigma2, cfg.bandwidth)


def solver_scaling_study(cfg: ScenarioConfig, counts, seeds, node_limit: int = asg.DEFAULT_NODE_LIMIT,
                         timing: bool = True) -> list:
    """Exact-solver effort versus panel size on scenario rate matrices.

    ``oracle_z`` is the brute-force optimum, filled when enumeration is
    within the brute-force size limit.
    """
    counts = list(counts)
    if counts != sorted(counts):
        raise UsageError("reflector counts must be sorted ascending")
    rows = []
    for n in counts:
        times, zs, nodes, optimal, oracle = [], [], [], [], []
        for seed in seeds:
            rates = scenario_rate_matrix(cfg, n, np.random.default_rng([int(seed), int(n)]))
            start = time.perf_counter()
            sol = asg.solve_exact(rates, node_limit=node_limit)
            times.append((time.perf_counter() - start) * 1e3)
            zs.append(sol.bottleneck)
            nodes.append(sol.nodes)
            optimal.append(sol.optimal)
            if rates.shape[1] ** rates.shape[0] <= asg.BRUTE_FORCE_LIMIT:
                oracle.append(asg.solve_brute_force(rates).bottleneck)
        rows.append({
            "n_reflectors": n,
            "mean_solve_ms": float(np.mean(times)) if timing else None,
            "mean_z": float(np.mean(zs)),
            "mean_nodes": float(np.mean(nodes)),
            "optimal_fraction": float(np.mean(optimal)),
            "oracle_z": float(np.mean(oracle)) if oracle else None,
        })
    return rows


def write_scaling(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCALING_HEADER)
        for row in rows:
            writer.writerow(["" if row[h] is None else (row[h] if isinstance(row[h], int) else repr(row[h]))
                             for h in SCALING_HEADER])
