"""Max-min reflector-to-train assignment and IRS phase configuration.

Every reflector serves exactly one train. A train's surrogate rate is the sum
of the single-reflector rates of the reflectors it receives, and the solvers
maximise the smallest surrogate rate (the bottleneck ``Z``).
"""
from __future__ import annotations

import csv
import sys
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, InstanceTooLargeError

DEFAULT_NODE_LIMIT = 10**6
BRUTE_FORCE_LIMIT = 10**7


@dataclass
class AssignmentSolution:
    indicator: np.ndarray       # (N, M) of 0/1
    per_train_rate: np.ndarray  # (M,) surrogate rates
    bottleneck: float
    optimal: bool = True
    nodes: int = 0

    @property
    def assignment(self) -> np.ndarray:
        """Train index of each reflector."""
        return self.indicator.argmax(axis=1)


def _check_rates(rates) -> np.ndarray:
    r = np.asarray(rates, dtype=float)
    if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
        raise DomainError(f"rate matrix must be 2-D and non-empty, got shape {r.shape}")
    if np.any(~np.isfinite(r)) or np.any(r < 0):
        raise DomainError("rates must be finite and non-negative")
    return r


def indicator_from_assignment(assignment, n_trains: int) -> np.ndarray:
    a = np.asarray(assignment, dtype=int)
    ind = np.zeros((a.size, n_trains), dtype=np.int8)
    ind[np.arange(a.size), a] = 1
    return ind


def validate_indicator(indicator, n_trains=None) -> np.ndarray:
    ind = np.asarray(indicator)
    if ind.ndim != 2:
        raise DomainError("indicator must be a 2-D matrix")
    if n_trains is not None and ind.shape[1] != n_trains:
        raise DomainError(f"indicator has {ind.shape[1]} columns, expected {n_trains}")
    if not np.all((ind == 0) | (ind == 1)):
        raise DomainError("indicator entries must be 0 or 1")
    if not np.all(ind.sum(axis=1) == 1):
        raise DomainError("every reflector must be assigned to exactly one train")
    return ind


def evaluate(assignment, rates) -> np.ndarray:
    """Surrogate per-train rates, summed in reflector index order.

    All solvers report through this function so that equal assignments give
    bit-identical bottleneck values.
    """
    r = np.asarray(rates, dtype=float)
    per_train = np.zeros(r.shape[1])
    for n, m in enumerate(np.asarray(assignment, dtype=int)):
        per_train[m] += r[n, m]
    return per_train


def _solution(assignment, rates, optimal=True, nodes=0) -> AssignmentSolution:
    per_train = evaluate(assignment, rates)
    return AssignmentSolution(
        indicator=indicator_from_assignment(assignment, rates.shape[1]),
        per_train_rate=per_train,
        bottleneck=float(per_train.min()),
        optimal=optimal,
        nodes=nodes,
    )


def _reflector_order(r: np.ndarray) -> np.ndarray:
    # descending row maximum, ties -> lowest index
    return np.argsort(-r.max(axis=1), kind="stable")


def solve_greedy(rates) -> AssignmentSolution:
    """Hand each reflector, strongest first, to the currently weakest train."""
    r = _check_rates(rates)
    n_refl, n_trains = r.shape
    current = np.zeros(n_trains)
    assignment = np.zeros(n_refl, dtype=int)
    for n in _reflector_order(r):
        m = int(np.argmin(current))
        assignment[n] = m
        current[m] += r[n, m]
    return _solution(assignment, r, optimal=n_trains == 1)


def solve_exact(rates, node_limit: int = DEFAULT_NODE_LIMIT) -> AssignmentSolution:
    """Depth-first branch-and-bound for the max-min assignment.

    Reflectors are branched in descending order of their best rate; children
    are visited weakest-train first, so the first leaf equals the greedy
    solution. A node is pruned when its upper bound does not exceed the
    incumbent. The bound is the smaller of

    * ``min_m (current_m + remaining_m)``, every train taking all unassigned
      reflectors, and
    * ``sum_m w_m current_m + sum_n max_m w_m R[n, m]`` for fixed weights on
      the simplex (inverse column totals), a valid bound because the minimum
      never exceeds a weighted mean.

    If more than ``node_limit`` nodes are expanded the incumbent is returned
    with ``optimal=False``; the first leaf is always completed.
    """
    r = _check_rates(rates)
    n_refl, n_trains = r.shape
    if n_trains == 1:
        return _solution(np.zeros(n_refl, dtype=int), r, optimal=True, nodes=1)

    col_tot = r.sum(axis=0)
    if np.any(col_tot == 0):
        # some train can never receive anything: every assignment has Z = 0
        return _solution(solve_greedy(r).assignment, r, optimal=True, nodes=1)

    order = _reflector_order(r)
    rows = r[order].tolist()
    suffix = np.zeros((n_refl + 1, n_trains))
    suffix[:-1] = np.cumsum(r[order][::-1], axis=0)[::-1]
    suffix_rows = suffix.tolist()
    w = (1.0 / col_tot) / (1.0 / col_tot).sum()
    wmax = (r[order] * w).max(axis=1)
    wsuffix = np.zeros(n_refl + 1)
    wsuffix[:-1] = np.cumsum(wmax[::-1])[::-1]
    wsuffix = wsuffix.tolist()
    weights = w.tolist()
    trains = range(n_trains)

    current = [0.0] * n_trains
    choice = [0] * n_refl
    best = {"value": -1.0, "choice": None}
    nodes = 0
    aborted = False

    def bound(depth):
        rem = suffix_rows[depth]
        b1 = min(current[m] + rem[m] for m in trains)
        b2 = sum(weights[m] * current[m] for m in trains) + wsuffix[depth]
        return b1 if b1 < b2 else b2

    def dfs(depth):
        nonlocal nodes, aborted
        nodes += 1
        if nodes > node_limit and best["choice"] is not None:
            aborted = True
            return
        if depth == n_refl:
            value = min(current)
            if value > best["value"]:
                best["value"] = value
                best["choice"] = list(choice)
            return
        if bound(depth) <= best["value"]:
            return
        row = rows[depth]
        for m in sorted(trains, key=current.__getitem__):
            current[m] += row[m]
            choice[depth] = m
            dfs(depth + 1)
            current[m] -= row[m]
            if aborted:
                return

    limit = sys.getrecursionlimit()
    if limit < n_refl + 100:
        sys.setrecursionlimit(n_refl + 100)
    try:
        dfs(0)
    finally:
        sys.setrecursionlimit(limit)

    assignment = np.zeros(n_refl, dtype=int)
    assignment[order] = best["choice"]
    return _solution(assignment, r, optimal=not aborted, nodes=nodes)


def solve_brute_force(rates, max_size: int = BRUTE_FORCE_LIMIT, chunk: int = 1 << 16) -> AssignmentSolution:
    """Enumerate all ``M**N`` assignments.

    Ties go to the lexicographically smallest flattened indicator, which is
    the lexicographically largest assignment vector.
    """
    r = _check_rates(rates)
    n_refl, n_trains = r.shape
    total = n_trains ** n_refl
    if total > max_size:
        raise InstanceTooLargeError(f"{n_trains}**{n_refl} = {total} assignments exceeds {max_size}")

    powers = n_trains ** np.arange(n_refl - 1, -1, -1)
    best_value, best_code = -1.0, -1
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        digits = (codes[:, None] // powers[None, :]) % n_trains
        sums = np.zeros((codes.size, n_trains))
        idx = np.arange(codes.size)
        for n in range(n_refl):
            sums[idx, digits[:, n]] += r[n, digits[:, n]]
        z = sums.min(axis=1)
        top = z.max()
        if top >= best_value:
            best_value = top
            best_code = int(codes[np.flatnonzero(z == top)[-1]])
    assignment = (best_code // powers) % n_trains
    return _solution(assignment, r, optimal=True, nodes=total)


def equal_block_assignment(n_reflectors: int, n_trains: int) -> np.ndarray:
    """Contiguous blocks of ``N // M`` reflectors; the first ``N % M`` trains get one extra."""
    sizes = [n_reflectors // n_trains + (1 if m < n_reflectors % n_trains else 0) for m in range(n_trains)]
    return np.repeat(np.arange(n_trains), sizes)


def random_assignment(n_reflectors: int, n_trains: int, rng) -> np.ndarray:
    return rng.integers(0, n_trains, size=n_reflectors)


def solution_for(assignment, rates) -> AssignmentSolution:
    """Wrap a fixed assignment (e.g. a baseline) as a solution record."""
    return _solution(np.asarray(assignment, dtype=int), _check_rates(rates), optimal=False)


def co_phase(link, indicator) -> np.ndarray:
    """Phase of each reflector cancelling its path phase towards its own train."""
    ind = validate_indicator(indicator, link.path_phase.shape[1])
    m = ind.argmax(axis=1)
    theta = np.mod(link.path_phase[np.arange(ind.shape[0]), m], 2 * np.pi)
    return np.where(theta >= 2 * np.pi, 0.0, theta)


def build_phase_matrix(theta, indicator, alpha) -> np.ndarray:
    """Per-train masked diagonal reflection matrices, shape ``(M, N, N)``.

    Entry ``(m, n, n)`` is ``alpha * exp(1j * theta[n])`` when reflector ``n``
    serves train ``m`` and zero otherwise.
    """
    theta = np.asarray(theta, dtype=float)
    ind = np.asarray(indicator)
    if ind.ndim != 2 or theta.shape != (ind.shape[0],):
        raise DomainError(f"phase vector of shape {theta.shape} does not match indicator {ind.shape}")
    diag = alpha * np.exp(1j * theta)[None, :] * ind.T
    out = np.zeros((ind.shape[1], ind.shape[0], ind.shape[0]), dtype=complex)
    idx = np.arange(ind.shape[0])
    out[:, idx, idx] = diag
    return out


def phases_within_quarter_turn(theta) -> bool:
    """Optional validity check: every phase strictly inside ``(0, pi/2)``."""
    theta = np.asarray(theta, dtype=float)
    return bool(np.all((theta > 0) & (theta < np.pi / 2)))


def save_instance(path, rates) -> None:
    """Write a rate matrix as CSV: ``reflector,train_0,...`` one row per reflector."""
    r = _check_rates(rates)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["reflector"] + [f"train_{m}" for m in range(r.shape[1])])
        for n, row in enumerate(r):
            writer.writerow([n] + [repr(float(v)) for v in row])


def load_instance(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in line[1:]] for line in reader if line]
    r = np.array(rows, dtype=float).reshape(len(rows), len(header) - 1)
    return _check_rates(r)
