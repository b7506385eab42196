"""The ten acceptance criteria, each at its stated tolerance.

Every test records a single ``PASS``/``FAIL`` line (printed in the terminal
summary and to stdout) before asserting. Criteria 5 to 7 share one
2000-episode training run.
"""
import os
import subprocess
import sys
import time

import numpy as np
import pytest

import conftest
import gradcheck
from hstirs import assignment as asg
from hstirs import bench
from hstirs.channel import (IrsPanel, cascaded_link, compute_geometry, path_power_gain, per_reflector_rate_matrix,
                            radiation_pattern, rate)
from hstirs.cli import main as cli_main
from hstirs.config import ScenarioConfig
from hstirs.env import HstEnv
from hstirs.sac import SacConfig, train

CFG = ScenarioConfig()
N_SEEDS = 10


def verdict(number, title, ok, detail):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    conftest.VERDICTS[number] = line
    print(line)
    assert ok, line


# --- 1 -----------------------------------------------------------------------

def test_c01_solver_matches_brute_force():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    mismatches, count = 0, 0
    for _ in range(500):
        n, m = int(rng.integers(4, 11)), int(rng.integers(2, 4))
        rates = rng.uniform(0, 1, (n, m))
        if asg.solve_exact(rates).bottleneck != asg.solve_brute_force(rates).bottleneck:
            mismatches += 1
        count += 1
    elapsed = time.perf_counter() - start
    verdict(1, "exact solver equals brute force", mismatches == 0 and elapsed < 60,
            f"{count} instances, {mismatches} mismatches, {elapsed:.1f} s (limit 60 s)")


# --- 2 -----------------------------------------------------------------------

def random_geometry(rng):
    bs = np.array([rng.uniform(0, 1100), rng.uniform(0, 700), 0.0])
    uav = np.array([rng.uniform(0, 1100), rng.uniform(0, 700), rng.uniform(50, 400)])
    hsts = np.column_stack([rng.uniform(0, 1100, 4), rng.uniform(0, 700, 4), np.zeros(4)])
    return bs, uav, hsts


def test_c02_co_phasing_beats_random_phases():
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst, violations, geometries = np.inf, 0, 0
    while geometries < 100:
        bs, uav, hsts = random_geometry(rng)
        geom = compute_geometry(bs, uav, hsts, CFG.panel)
        link = cascaded_link(geom, CFG.panel, CFG)
        if not np.any(link.amplitude > 0):
            continue  # base station behind the panel: every SNR is zero
        geometries += 1
        ind = asg.indicator_from_assignment(rng.integers(0, 4, CFG.n_reflectors), 4)
        co = asg.co_phase(link, ind)

        def snr(theta):
            # theta: (K, N) -> (K, M)
            field = np.einsum("nm,knm->km", ind * link.amplitude,
                              np.exp(1j * (theta[:, :, None] - link.path_phase[None])))
            return CFG.tx_power * np.abs(field) ** 2 / CFG.sigma2

        best = snr(co[None, :])[0]
        trial = snr(rng.uniform(0, 2 * np.pi, (1000, CFG.n_reflectors)))
        violations += int(np.sum(trial > best[None, :]))
        nz = best > 0
        if np.any(nz):
            worst = min(worst, float(np.min(best[nz] / trial[:, nz].max(axis=0))))
    elapsed = time.perf_counter() - start
    verdict(2, "co-phasing maximises every train's SNR", violations == 0 and elapsed < 60,
            f"{geometries} geometries x 1000 phase vectors x 4 trains, {violations} violations, "
            f"smallest co-phased/best-random ratio {worst:.3f}, {elapsed:.1f} s")


# --- 3 -----------------------------------------------------------------------

def test_c03_channel_closed_forms():
    checks = [
        (radiation_pattern(0.0, 1.0), 1.0),
        (radiation_pattern(np.pi / 3, 0.0), 0.125),
        (radiation_pattern(2.0, 0.0), 0.0),
        (path_power_gain(1.0, 0.01, 1.0, 2.6), 0.01),
        (path_power_gain(10.0, 0.01, 1.0, 2.6), 0.01 * 10.0 ** -2.6),
        (path_power_gain(3.7, 0.05, 3.7, 2.8), 0.05),
        (rate(0.0, 20e6), 0.0),
        (rate(1.0, 20e6), 2.0e7),
        (rate(3.0, 20e6), 4.0e7),
    ]
    errors = [abs(got - want) / abs(want) if want else abs(got) for got, want in checks]
    verdict(3, "channel closed forms", max(errors) <= 1e-12,
            f"{len(checks)} tabulated points, worst relative error {max(errors):.1e} (limit 1e-12)")


# --- 4 -----------------------------------------------------------------------

def test_c04_gradient_checks():
    start = time.perf_counter()
    worst = {"network": 0.0, "critic1": 0.0, "critic2": 0.0, "actor": 0.0, "temperature": 0.0}
    seeds = range(20)
    for seed in seeds:
        worst["network"] = max(worst["network"], gradcheck.check_network(seed))
        worst["critic1"] = max(worst["critic1"], gradcheck.check_critic(seed))
        worst["critic2"] = max(worst["critic2"], gradcheck.check_critic(10_000 + seed))
        worst["actor"] = max(worst["actor"], gradcheck.check_actor(seed))
        worst["temperature"] = max(worst["temperature"], gradcheck.check_temperature(seed))
    # default-size networks on sampled parameters
    for seed in range(3):
        worst["network"] = max(worst["network"], gradcheck.check_network(seed, widths=(21, 64, 64, 1), sample=40))
        worst["critic1"] = max(worst["critic1"], gradcheck.check_critic(seed, hidden=(64, 64), obs_dim=18,
                                                                         size=32, sample=40))
        worst["actor"] = max(worst["actor"], gradcheck.check_actor(seed, hidden=(64, 64), obs_dim=18,
                                                                   size=32, sample=40))
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 1e-3 and elapsed < 300
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    verdict(4, "finite-difference gradient checks", ok,
            f"{len(seeds)} seeds, worst relative errors: {detail} (limit 1e-3), {elapsed:.1f} s")


# --- 5 to 7 --------------------------------------------------------------------

@pytest.fixture(scope="module")
def trained():
    start = time.perf_counter()
    result = train(CFG, SacConfig(), episodes=2000, seed=0)
    return result, time.perf_counter() - start


@pytest.mark.slow
def test_c05_learning_signal(trained):
    result, elapsed = trained
    returns = result.returns()
    tenth = len(returns) // 10
    first, last = returns[:tenth].mean(), returns[-tenth:].mean()
    verdict(5, "learning signal over 2000 episodes", len(returns) == 2000 and last > first,
            f"first-decile mean return {first:.3f}, last-decile {last:.3f}, {result.steps} steps, "
            f"{elapsed:.0f} s")


@pytest.fixture(scope="module")
def method_means(trained):
    agent = trained[0].best_agent
    methods = ["OU_OI", "OU_SI", "OU_RI", "SU_OI", "FIXED_ALT(100)", "FIXED_ALT(200)", "FIXED_ALT(300)"]
    out = {}
    for name in methods:
        variant = bench.MethodVariant.parse(name)
        recs = [r for s in range(N_SEEDS) for r in bench.run_method(variant, CFG, agent, s)]
        out[name] = bench.per_seed_means(recs)
    return out


def _ordering(means, better, worse):
    a = np.array(list(means[better].values()))
    b = np.array(list(means[worse].values()))
    return a.mean(), b.mean(), int(np.sum(a < b))


@pytest.mark.slow
def test_c06_method_ordering(method_means):
    pairs = [("OU_OI", "OU_SI"), ("OU_OI", "SU_OI"), ("OU_OI", "OU_RI"), ("OU_SI", "OU_RI"), ("SU_OI", "OU_RI")]
    ok, parts = True, []
    for better, worse in pairs:
        ma, mb, bad = _ordering(method_means, better, worse)
        good = ma > mb and bad <= 0.2 * N_SEEDS
        ok &= good
        parts.append(f"{better} {ma:.0f} > {worse} {mb:.0f} ({bad}/{N_SEEDS} seed violations)")
    verdict(6, "method ordering", ok, "; ".join(parts))


@pytest.mark.slow
def test_c07_altitude_study(method_means):
    m = {k: float(np.mean(list(v.values()))) for k, v in method_means.items()}
    ok = (m["FIXED_ALT(200)"] > m["FIXED_ALT(100)"] and m["FIXED_ALT(200)"] > m["FIXED_ALT(300)"]
          and m["OU_OI"] >= m["FIXED_ALT(200)"])
    verdict(7, "altitude study", ok,
            f"100 m {m['FIXED_ALT(100)']:.0f}, 200 m {m['FIXED_ALT(200)']:.0f}, 300 m {m['FIXED_ALT(300)']:.0f}, "
            f"unclamped OU_OI {m['OU_OI']:.0f} bit/s over {N_SEEDS} seeds")


# --- 8 -----------------------------------------------------------------------

@pytest.mark.slow
def test_c08_solver_scaling():
    rows = bench.solver_scaling_study(CFG, [25, 49, 100], seeds=range(3))
    times = [r["mean_solve_ms"] for r in rows]
    ok = all(b >= a / 2 for a, b in zip(times, times[1:]))
    detail = ", ".join(f"N={r['n_reflectors']} {r['mean_solve_ms']:.0f} ms "
                       f"(optimal {r['optimal_fraction']:.0%})" for r in rows)
    monotone = all(b >= a for a, b in zip(times, times[1:]))
    verdict(8, "solver scaling", ok, f"{detail}; non-decreasing: {'yes' if monotone else 'no'}")


# --- 9 -----------------------------------------------------------------------

def _cli_session(out):
    common = ["--seed", "11", "--out-dir", str(out)]
    agent = str(out / "agent.sacv1")
    codes = [
        cli_main(["train", "--episodes", "30", *common]),
        cli_main(["eval", "--agent", agent, *common]),
        cli_main(["bench", "--agent", agent, "--n-seeds", "2",
                  "--methods", "OU_OI,OU_SI,OU_RI,SU_OI,FIXED_ALT(200)", *common]),
        cli_main(["scaling", "--counts", "4,9,25", "--n-seeds", "2", *common]),
        cli_main(["report", *common]),
    ]
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "hstirs", "bench", "--methods", "SU_OI", "--n-seeds", "3",
                           "--out-dir", str(out / "sub")], capture_output=True, env=env)
    codes.append(proc.returncode)
    return codes


def test_c09_cli_determinism(tmp_path, capsys):
    codes_a = _cli_session(tmp_path / "a")
    codes_b = _cli_session(tmp_path / "b")
    capsys.readouterr()
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    differing = [str(f) for f in files if (tmp_path / "a" / f).read_bytes() != (tmp_path / "b" / f).read_bytes()]
    ok = codes_a == codes_b == [0] * 6 and not differing and len(files) >= 10
    verdict(9, "CLI determinism", ok,
            f"{len(files)} CSV files from train/eval/bench/scaling/report, {len(differing)} differ"
            + (f" ({', '.join(differing)})" if differing else ""))


# --- 10 ----------------------------------------------------------------------

@pytest.mark.slow
def test_c10_environment_invariants():
    # invariants do not depend on solver optimality, so a small node budget keeps 1e5 steps fast
    cfg = CFG.replace(solver_node_limit=50)
    env = HstEnv(cfg)
    rng = np.random.default_rng(99)
    steps, episodes = 0, 0
    failures = {"displacement": 0, "altitude": 0, "telescoping": 0, "ground": 0}

    def fresh():
        slot = int(rng.integers(cfg.n_slots))
        uav = (rng.uniform(200, 1000), rng.uniform(100, 500), rng.uniform(cfg.l_min, cfg.l_max))
        env.reset(randomize=bool(rng.integers(2)), rng_seed=int(rng.integers(2**31)), start_slot=slot,
                  uav_start=uav)
        return env.initial_rate

    start_rate = fresh()
    acc, last_rate = 0.0, start_rate
    while steps < 100_000:
        before = env.state.uav.copy()
        out = env.step(rng.uniform(-1, 1, 3))
        steps += 1
        s = out.next_state
        if np.linalg.norm(s.uav - before) > cfg.step_length * (1 + 1e-12):
            failures["displacement"] += 1
        outside = s.uav[2] > cfg.l_max or s.uav[2] < cfg.l_min
        if outside != (out.reward == -1.0) or (outside and not out.done):
            failures["altitude"] += 1
        if s.bs[2] != 0 or np.any(s.hsts[:, 2] != 0):
            failures["ground"] += 1
        if out.info["case"] == "improved":
            acc += out.reward
            last_rate = out.info["min_rate"]
        if out.done:
            expected = (last_rate - start_rate) * cfg.reward_scale
            if abs(acc - expected) > 1e-9 * max(1.0, abs(expected)):
                failures["telescoping"] += 1
            episodes += 1
            start_rate = fresh()
            acc, last_rate = 0.0, start_rate
    ok = not any(failures.values())
    detail = ", ".join(f"{k} {v}" for k, v in failures.items())
    verdict(10, "environment invariants", ok, f"{steps} random steps over {episodes} episodes; violations: {detail}")
