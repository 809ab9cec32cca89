"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately take different routes than the library:
tour lengths by permutation enumeration, allocations by bisection /
generic constrained minimization over the full stop-time matrix.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np
import pytest
from scipy.optimize import minimize

from ugv_backscatter import PhysicalParams, Scenario
from ugv_backscatter.allocation import LN2

# --- scenario builders ---------------------------------------------------------


def make_scenario(
    link_gain,
    demand,
    distances=None,
    params: PhysicalParams | None = None,
) -> Scenario:
    """Hand-built instance: gains and demands given, geometry synthetic."""
    link_gain = np.atleast_2d(np.asarray(link_gain, dtype=float))
    demand = np.asarray(demand, dtype=float)
    K, M = link_gain.shape
    if distances is None:
        distances = np.zeros((M, M))
    return Scenario(
        vertex_xy=np.zeros((M, 2)),
        user_xy=np.zeros((K, 2)),
        distances=np.asarray(distances, dtype=float),
        link_gain=link_gain,
        demand=demand,
        params=params or PhysicalParams(),
    )


def unit_gain_params(**overrides) -> PhysicalParams:
    """Params making effective gain equal to link gain (loss factors = 1)."""
    base = dict(noise_w=1.0, modulation_loss=1.0, scatter_efficiency=1.0)
    base.update(overrides)
    return PhysicalParams(**base)


# --- tour oracle ----------------------------------------------------------------


def brute_tour_length(distances, chosen) -> float:
    """Minimum closed tour depot -> chosen stops -> depot by full enumeration."""
    D = np.asarray(distances, dtype=float)
    interior = [int(v) for v in chosen if v != 0]
    if not interior:
        return 0.0
    best = math.inf
    for perm in permutations(interior):
        length = D[0, perm[0]]
        for a, b in zip(perm[:-1], perm[1:]):
            length += D[a, b]
        length += D[perm[-1], 0]
        if length < best:
            best = length
    return best


# --- allocation oracles ------------------------------------------------------------


def min_energy_bisect(stop_time: float, demand: float, gain: float) -> float:
    """Smallest energy meeting a single-user single-stop demand (bisection)."""
    hi = 1.0
    def collected(q):
        return stop_time * math.log2(1.0 + gain * q / stop_time)
    while collected(hi) < demand:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if collected(mid) >= demand:
            hi = mid
        else:
            lo = mid
    return hi


def min_energy_given_times(t_row, demand, gain_row) -> float:
    """Cheapest energy for one user once its stop times are fixed.

    Classic water-filling over the served stops: power max(0, mu/ln2 - 1/A)
    with the level mu found by bisection on the collected-bits target.
    """
    t_row = np.asarray(t_row, dtype=float)
    gain_row = np.asarray(gain_row, dtype=float)
    if demand <= 0:
        return 0.0
    served = (t_row > 1e-12) & (gain_row > 0)
    if not served.any():
        return math.inf
    t = t_row[served]
    A = gain_row[served]

    def collected(mu):
        p = np.maximum(0.0, mu / LN2 - 1.0 / A)
        return float((t * np.log2(1.0 + A * p)).sum())

    lo = LN2 / A.max()
    hi = 2.0 * lo
    for _ in range(400):
        if collected(hi) >= demand:
            break
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if collected(mid) >= demand:
            hi = mid
        else:
            lo = mid
    p = np.maximum(0.0, hi / LN2 - 1.0 / A)
    return float((t * p).sum())


def oracle_min_total_energy(demand, gain, total_time, equality=True) -> float:
    """Numeric optimum of the allocation problem over the full time matrix.

    Generic SLSQP over all (user, stop) stop times with the exact inner
    water-fill per user; free to spread time across stops, so it checks the
    solver without assuming its concentration structure.  ``equality``
    selects sum(t) == total_time versus sum(t) <= total_time.
    """
    demand = np.asarray(demand, dtype=float)
    gain = np.asarray(gain, dtype=float)
    K, M = gain.shape

    def objective(tvec):
        t = tvec.reshape(K, M)
        return sum(min_energy_given_times(t[k], demand[k], gain[k]) for k in range(K))

    if equality:
        cons = [{"type": "eq", "fun": lambda tv: tv.sum() - total_time}]
    else:
        cons = [{"type": "ineq", "fun": lambda tv: total_time - tv.sum()}]
    best = math.inf
    for scale in (1.0, 0.5, 0.9):
        x0 = np.full(K * M, scale * total_time / (K * M))
        res = minimize(
            objective,
            x0,
            method="SLSQP",
            bounds=[(0.0, total_time)] * (K * M),
            constraints=cons,
            options={"maxiter": 400, "ftol": 1e-12},
        )
        if res.success:
            best = min(best, float(res.fun))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
