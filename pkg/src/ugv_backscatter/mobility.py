"""Tours over the stopping-point graph: representation, cost, exact solver.

The vehicle picks a subset of stops (the depot, index 0, is mandatory) and
drives a closed tour through them.  This module holds the tour data types,
the motion time/energy accounting, an exact Held-Karp solver for the
minimum-length tour over a selected subset, and a verifier for the degree
and Miller-Tucker-Zemlin (MTZ) subtour-elimination constraints that define
tour feasibility.

All operations are pure functions of their inputs; the Held-Karp working
table is per-call local state, so concurrent solves are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scenario import PhysicalParams

__all__ = [
    "MTZ_BIG",
    "HELD_KARP_MAX",
    "TourPlan",
    "TspResult",
    "MtzCheck",
    "depot_only",
    "all_vertices",
    "selection_mask",
    "selection_from_mask",
    "validate_selection",
    "plan_from_order",
    "tour_length",
    "motion_time",
    "motion_energy",
    "solve_tsp",
    "check_mtz",
]

# Big constant deactivating MTZ inequalities at unselected vertices.
MTZ_BIG = 1e6

# Held-Karp keeps a 2^(S-1) x (S-1) float table; refuse beyond this size.
HELD_KARP_MAX = 24


# --- selection vectors -------------------------------------------------------

def depot_only(num_vertices: int) -> np.ndarray:
    """Selection visiting nothing but the depot."""
    v = np.zeros(num_vertices, dtype=np.int8)
    v[0] = 1
    return v


def all_vertices(num_vertices: int) -> np.ndarray:
    """Selection visiting every stop."""
    return np.ones(num_vertices, dtype=np.int8)


def validate_selection(selection: np.ndarray) -> np.ndarray:
    """Check the binary selection vector (depot bit set) and return it as int8."""
    v = np.asarray(selection)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("selection must be a 1-D vector")
    if not np.all((v == 0) | (v == 1)):
        raise ValueError("selection entries must be 0 or 1")
    if v[0] != 1:
        raise ValueError("the depot (index 0) must always be selected")
    return v.astype(np.int8)


def selection_mask(selection: np.ndarray) -> int:
    """Pack a selection vector into an int bitmask (bit i = vertex i)."""
    mask = 0
    for i in np.flatnonzero(np.asarray(selection)):
        mask |= 1 << int(i)
    return mask


def selection_from_mask(mask: int, num_vertices: int) -> np.ndarray:
    v = np.zeros(num_vertices, dtype=np.int8)
    for i in range(num_vertices):
        if mask >> i & 1:
            v[i] = 1
    return v


# --- tour plans --------------------------------------------------------------

@dataclass
class TourPlan:
    """A concrete closed tour.

    ``order`` lists the visit sequence starting and ending at the depot
    (just ``[0]`` when only the depot is selected, in which case ``edges``
    is all-zero).  ``mtz_rank`` holds the per-vertex slack used by the MTZ
    subtour-elimination inequalities; it may be None, in which case
    :func:`check_mtz` reconstructs it from the visit order.
    """

    selection: np.ndarray
    edges: np.ndarray
    order: list[int]
    mtz_rank: np.ndarray | None = None


def plan_from_order(order: list[int], num_vertices: int) -> TourPlan:
    """Build a TourPlan (selection, edge matrix, MTZ ranks) from a visit order.

    ``order`` must start and end at the depot and contain no repeated
    interior vertex, e.g. ``[0, 3, 1, 0]``; a bare ``[0]`` is the
    stay-at-depot plan.
    """
    order = [int(x) for x in order]
    if not order or order[0] != 0:
        raise ValueError("visit order must start at the depot (vertex 0)")
    if len(order) == 1:
        sel = depot_only(num_vertices)
        return TourPlan(sel, np.zeros((num_vertices, num_vertices), dtype=np.int8), [0],
                        np.zeros(num_vertices))
    if order[-1] != 0:
        raise ValueError("visit order must end at the depot (vertex 0)")
    interior = order[1:-1]
    if len(set(interior)) != len(interior) or 0 in interior:
        raise ValueError("visit order must not repeat a vertex")
    sel = np.zeros(num_vertices, dtype=np.int8)
    sel[order] = 1
    edges = np.zeros((num_vertices, num_vertices), dtype=np.int8)
    rank = np.zeros(num_vertices)
    for pos in range(len(order) - 1):
        edges[order[pos], order[pos + 1]] = 1
    for pos, vtx in enumerate(order[:-1]):
        rank[vtx] = pos
    return TourPlan(sel, edges, order, rank)


@dataclass
class TspResult:
    """Outcome of the minimum-tour solve for one selection.

    ``comm_time`` is the mission time left for communication after driving
    the optimal tour: ``time_budget - tour_length / speed``.  When no finite
    tour exists (forbidden edges disconnect the selection) ``tour_length``
    is ``inf``, ``comm_time`` is ``-inf`` and ``plan`` is None.
    """

    plan: TourPlan | None
    tour_length: float
    comm_time: float

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.tour_length)


# --- motion accounting -------------------------------------------------------

def tour_length(plan: TourPlan, distances: np.ndarray) -> float:
    """Total driven distance of the plan; ``inf`` if a forbidden edge is used."""
    used = plan.edges.astype(bool)
    if not used.any():
        return 0.0
    return float(np.asarray(distances, dtype=float)[used].sum())


def motion_time(plan: TourPlan, distances: np.ndarray, speed: float) -> float:
    """Seconds spent driving the plan at the given speed."""
    if not speed > 0:
        raise ValueError("speed must be positive")
    return tour_length(plan, distances) / speed


def motion_energy(plan: TourPlan, distances: np.ndarray, params: PhysicalParams) -> float:
    """Joules spent driving the plan."""
    return params.motion_energy_rate * tour_length(plan, distances)


# --- exact tour solver -------------------------------------------------------

def _popcounts(n_bits: int) -> np.ndarray:
    masks = np.arange(1 << n_bits, dtype=np.int64)
    counts = np.zeros(1 << n_bits, dtype=np.int64)
    for b in range(n_bits):
        counts += (masks >> b) & 1
    return counts


def solve_tsp(selection: np.ndarray, distances: np.ndarray, params: PhysicalParams) -> TspResult:
    """Exact minimum closed tour through the selected stops.

    Held-Karp dynamic programming over vertex subsets, O(S^2 2^S) for S
    selected stops; asymmetric distance matrices are supported.  Among
    equal-length optima the lexicographically smallest visit order is
    returned, so results are reproducible.  Selections larger than
    :data:`HELD_KARP_MAX` are refused rather than approximated.
    """
    sel = validate_selection(selection)
    D = np.asarray(distances, dtype=float)
    chosen = np.flatnonzero(sel)
    S = len(chosen)
    if S > HELD_KARP_MAX:
        raise ValueError(f"refusing to solve tours over {S} stops (cap {HELD_KARP_MAX})")

    T = params.time_budget_s
    if S == 1:
        plan = plan_from_order([0], len(sel))
        plan.selection = sel.copy()
        return TspResult(plan, 0.0, T)

    interior = chosen[1:]  # ascending vertex ids
    n = S - 1
    cost = D[np.ix_(interior, interior)]
    to_depot = D[interior, 0]
    from_depot = D[0, interior]

    # table[mask, j] = cheapest walk starting at interior j, visiting exactly
    # the vertices in mask (j included), then returning to the depot
    size = 1 << n
    table = np.full((size, n), np.inf)
    idx = np.arange(n)
    table[np.int64(1) << idx, idx] = to_depot
    counts = _popcounts(n)
    masks = np.arange(size, dtype=np.int64)
    for subset_size in range(2, n + 1):
        of_size = masks[counts == subset_size]
        for j in range(n):
            with_j = of_size[(of_size >> j) & 1 == 1]
            if len(with_j) == 0:
                continue
            prev = with_j ^ (1 << j)
            table[with_j, j] = np.min(table[prev] + cost[j], axis=1)

    full = size - 1
    totals = from_depot + table[full]
    best = float(totals.min())
    if not math.isfinite(best):
        return TspResult(None, math.inf, -math.inf)

    # forward reconstruction picking the smallest vertex id at every step,
    # which yields the lexicographically smallest optimal order
    j = int(np.flatnonzero(totals == best)[0])
    mask = full
    order = [0]
    while True:
        order.append(int(interior[j]))
        if mask == (1 << j):
            break
        prev = mask ^ (1 << j)
        candidates = cost[j] + table[prev]
        j = int(np.flatnonzero(candidates == table[mask, j])[0])
        mask = prev
    order.append(0)

    plan = plan_from_order(order, len(sel))
    return TspResult(plan, best, T - best / params.speed_mps)


# --- feasibility verification -------------------------------------------------

@dataclass
class MtzCheck:
    """Verdict of the tour-constraint verifier with per-violation detail."""

    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _cycles_of(successor: dict[int, int]) -> list[list[int]]:
    seen: set[int] = set()
    cycles = []
    for start in sorted(successor):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        cur = successor[start]
        while cur not in seen and cur in successor:
            cycle.append(cur)
            seen.add(cur)
            cur = successor[cur]
        cycles.append(cycle)
    return cycles


def check_mtz(plan: TourPlan, big: float = MTZ_BIG) -> MtzCheck:
    """Verify degree and MTZ subtour-elimination constraints for a plan.

    Checks, in order: binary edge matrix with a zero diagonal and the depot
    selected; per-vertex in/out degree equal to the selection bit; a single
    cycle through the depot covering every selected vertex (disjoint cycles
    are reported explicitly); and the MTZ inequalities with constant ``big``
    for the plan's rank slacks.  When ``plan.mtz_rank`` is None the ranks
    are reconstructed from the visit order (position in the tour), which is
    always feasible for a genuine single loop.
    """
    violations: list[str] = []
    v = np.asarray(plan.selection)
    W = np.asarray(plan.edges)
    M = len(v)

    if not np.all((v == 0) | (v == 1)) or v[0] != 1:
        violations.append("selection must be binary with the depot bit set")
    if W.shape != (M, M) or not np.all((W == 0) | (W == 1)):
        violations.append("edge matrix must be binary and square")
        return MtzCheck(False, violations)
    if np.any(np.diagonal(W) != 0):
        violations.append("edge matrix has a self-loop")

    S = int(v.sum())
    if S == 1:
        if W.any():
            violations.append("single selected vertex but edge matrix is not all-zero")
        return MtzCheck(not violations, violations)

    out_deg = W.sum(axis=1)
    in_deg = W.sum(axis=0)
    degrees_ok = True
    for m in range(M):
        if out_deg[m] != v[m]:
            violations.append(f"out-degree of vertex {m} is {int(out_deg[m])}, expected {int(v[m])}")
            degrees_ok = False
        if in_deg[m] != v[m]:
            violations.append(f"in-degree of vertex {m} is {int(in_deg[m])}, expected {int(v[m])}")
            degrees_ok = False

    depot_cycle: list[int] | None = None
    if degrees_ok:
        successor = {m: int(np.flatnonzero(W[m])[0]) for m in range(M) if v[m]}
        cycles = _cycles_of(successor)
        if len(cycles) > 1:
            listing = "; ".join("(" + ", ".join(map(str, c)) + ")" for c in cycles)
            violations.append(f"selected vertices split into {len(cycles)} disjoint cycles: {listing}")
        else:
            depot_cycle = cycles[0]

    # rank slacks: use the provided ones, else reconstruct from order/cycle
    if plan.mtz_rank is not None:
        rank = np.asarray(plan.mtz_rank, dtype=float)
    else:
        rank = np.zeros(M)
        source = plan.order[:-1] if len(plan.order) > 1 else (depot_cycle or [])
        for pos, vtx in enumerate(source):
            rank[vtx] = pos

    for m in range(1, M):
        lo, hi = v[m], (S - 1) * v[m]
        if not (lo <= rank[m] <= hi):
            violations.append(f"rank slack of vertex {m} is {rank[m]!r}, outside [{lo}, {hi}]")
    for m in range(1, M):
        for j in range(1, M):
            if m == j:
                continue
            lhs = rank[m] - rank[j] + (S - 1) * W[m, j] + (S - 3) * W[j, m]
            rhs = S - 2 + big * (2 - v[m] - v[j])
            if lhs > rhs + 1e-9:
                violations.append(
                    f"subtour-elimination inequality violated for pair ({m}, {j}): {lhs} > {rhs}"
                )

    return MtzCheck(not violations, violations)
