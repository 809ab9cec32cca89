"""Outer search over which stops to visit.

Evaluating a candidate selection composes the two inner solves: the exact
minimum tour fixes the motion energy and the communication time left, and
the allocation solve fixes the radiated energy.  The total is minimized by
a successive local search over the binary selection vector: starting from
the stay-at-depot plan, sample a yet-untried selection within Hamming
distance ``flip_radius`` of the incumbent, accept it whenever it is no
worse, and stop at the iteration cap or once a whole neighborhood has been
tried without improvement (a certified local optimum).  An exhaustive
enumerator over all selections doubles as the ground-truth oracle on small
maps, and the two fixed policies (never move / visit everything) are
exposed as baselines; the search result is never worse than either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .allocation import Allocation, KktReport, KktTolerances, solve_allocation
from .mobility import (
    TspResult,
    all_vertices,
    depot_only,
    motion_energy,
    selection_from_mask,
    selection_mask,
    solve_tsp,
    validate_selection,
)
from .scenario import Scenario

__all__ = [
    "EXHAUSTIVE_MAX",
    "SolverConfig",
    "PlanOutcome",
    "SearchResult",
    "PlanEvaluator",
    "evaluate_selection",
    "NeighborhoodSampler",
    "local_search",
    "exhaustive_search",
    "baseline_no_move",
    "baseline_visit_all",
]

EXHAUSTIVE_MAX = 12


@dataclass(frozen=True)
class SolverConfig:
    """Tunables of the selection search."""

    flip_radius: int = 3
    iteration_cap: int = 50
    rng_seed: object = 0
    tolerances: KktTolerances = field(default_factory=KktTolerances)
    cache_enabled: bool = True

    def __post_init__(self) -> None:
        if self.flip_radius < 1:
            raise ValueError("flip_radius must be >= 1")
        if self.iteration_cap < 1:
            raise ValueError("iteration_cap must be >= 1")


@dataclass
class PlanOutcome:
    """One full evaluation of a candidate selection.

    ``total_energy`` is motion plus communication energy in joules, ``inf``
    when either inner stage is infeasible (no finite tour, no communication
    time left, or an unreachable user), in which case ``allocation`` and
    ``kkt`` are None.
    """

    selection: np.ndarray
    tsp: TspResult
    allocation: Allocation | None
    kkt: KktReport | None
    energy_motion: float
    energy_comm: float
    total_energy: float

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.total_energy)


class PlanEvaluator:
    """Memoized selection -> outcome evaluation.

    Outcomes are cached by selection bitmask when the config enables it.
    ``tsp_cache`` may be shared between evaluators that use the same
    distance matrix, speed and time budget (e.g. across noise levels on
    fixed channels); it maps bitmask -> TspResult.
    """

    def __init__(
        self,
        scenario: Scenario,
        config: SolverConfig | None = None,
        tsp_cache: dict[int, TspResult] | None = None,
    ):
        self.scenario = scenario
        self.config = config or SolverConfig()
        self._tsp_cache = tsp_cache if tsp_cache is not None else {}
        self._outcomes: dict[int, PlanOutcome] = {}
        self.evaluations = 0

    def evaluate(self, selection: np.ndarray) -> PlanOutcome:
        sel = validate_selection(selection)
        mask = selection_mask(sel)
        if self.config.cache_enabled and mask in self._outcomes:
            return self._outcomes[mask]

        tsp = self._tsp_cache.get(mask)
        if tsp is None:
            tsp = solve_tsp(sel, self.scenario.distances, self.scenario.params)
            self._tsp_cache[mask] = tsp
        self.evaluations += 1

        if not tsp.feasible:
            outcome = PlanOutcome(sel, tsp, None, None, math.inf, math.inf, math.inf)
        else:
            e_motion = motion_energy(tsp.plan, self.scenario.distances, self.scenario.params)
            result = None
            if tsp.comm_time > 0:
                result = solve_allocation(self.scenario, sel, tsp.comm_time)
            if result is None:
                outcome = PlanOutcome(sel, tsp, None, None, e_motion, math.inf, math.inf)
            else:
                e_comm = result.allocation.total_energy
                outcome = PlanOutcome(
                    sel, tsp, result.allocation, result.kkt, e_motion, e_comm, e_motion + e_comm
                )
        if self.config.cache_enabled:
            self._outcomes[mask] = outcome
        return outcome


def evaluate_selection(
    scenario: Scenario, selection: np.ndarray, config: SolverConfig | None = None
) -> PlanOutcome:
    """One-shot evaluation of a selection (tour solve + allocation solve)."""
    return PlanEvaluator(scenario, config).evaluate(selection)


class NeighborhoodSampler:
    """Uniform without-replacement sampling from a Hamming ball.

    Candidates are all selections within Hamming distance ``flip_radius`` of
    the base (depot bit fixed, base itself excluded).  Each call to
    :meth:`sample` returns a candidate not seen before from this sampler;
    once the ball is exhausted it returns None.
    """

    def __init__(self, base_selection: np.ndarray, flip_radius: int, rng: np.random.Generator):
        base = validate_selection(base_selection)
        self._m = len(base)
        self._base_mask = selection_mask(base)
        self._radius = min(flip_radius, self._m - 1)
        self._rng = rng
        self._flip_counts = np.arange(1, self._radius + 1)
        weights = np.array([math.comb(self._m - 1, int(j)) for j in self._flip_counts], dtype=float)
        self.size = int(weights.sum())
        self._weights = weights / weights.sum() if self.size else weights
        self._used: set[int] = set()

    @property
    def exhausted(self) -> bool:
        return len(self._used) >= self.size

    def _draw_mask(self) -> int:
        flips = int(self._rng.choice(self._flip_counts, p=self._weights))
        positions = self._rng.choice(self._m - 1, size=flips, replace=False)
        flip_mask = 0
        for pos in positions:
            flip_mask |= 1 << (int(pos) + 1)  # bit 0 is the depot, never flipped
        return self._base_mask ^ flip_mask

    def _remaining(self) -> list[int]:
        masks = []
        for flips in range(1, self._radius + 1):
            for positions in combinations(range(1, self._m), flips):
                flip_mask = 0
                for pos in positions:
                    flip_mask |= 1 << pos
                mask = self._base_mask ^ flip_mask
                if mask not in self._used:
                    masks.append(mask)
        return masks

    def sample(self) -> np.ndarray | None:
        if self.exhausted:
            return None
        for _ in range(64):
            mask = self._draw_mask()
            if mask not in self._used:
                self._used.add(mask)
                return selection_from_mask(mask, self._m)
        # dense used set: fall back to enumerating what is left
        remaining = self._remaining()
        mask = remaining[int(self._rng.integers(len(remaining)))]
        self._used.add(mask)
        return selection_from_mask(mask, self._m)


@dataclass
class SearchResult:
    """Local-search outcome.

    ``trace`` has exactly ``iteration_cap`` entries: the incumbent energy
    after each iteration, padded with the final value if the search stopped
    early because a whole neighborhood was exhausted without improvement
    (``exit_reason == "local_optimum"``); ``iterations_used`` counts the
    candidates actually evaluated.  ``best`` is the final incumbent or the
    visit-everything baseline if that happens to be better, so the search
    never loses to either fixed policy.
    """

    best: PlanOutcome
    trace: np.ndarray
    initial_energy: float
    iterations_used: int
    exit_reason: str


def local_search(
    scenario: Scenario,
    config: SolverConfig | None = None,
    tsp_cache: dict[int, TspResult] | None = None,
) -> SearchResult:
    """Successive local search over the stop selection, starting at the depot."""
    config = config or SolverConfig()
    evaluator = PlanEvaluator(scenario, config, tsp_cache)
    rng = np.random.default_rng(config.rng_seed)
    M = scenario.num_vertices

    incumbent = evaluator.evaluate(depot_only(M))
    initial = incumbent.total_energy
    trace = np.empty(config.iteration_cap)
    sampler = NeighborhoodSampler(incumbent.selection, config.flip_radius, rng)
    iterations_used = config.iteration_cap
    exit_reason = "iteration_cap"

    for it in range(config.iteration_cap):
        candidate = sampler.sample()
        if candidate is None:
            trace[it:] = incumbent.total_energy
            iterations_used = it
            exit_reason = "local_optimum"
            break
        outcome = evaluator.evaluate(candidate)
        if outcome.total_energy <= incumbent.total_energy:
            incumbent = outcome
            sampler = NeighborhoodSampler(incumbent.selection, config.flip_radius, rng)
        trace[it] = incumbent.total_energy

    best = incumbent
    visit_all = evaluator.evaluate(all_vertices(M))
    if visit_all.total_energy < best.total_energy:
        best = visit_all
    return SearchResult(best, trace, initial, iterations_used, exit_reason)


def exhaustive_search(
    scenario: Scenario,
    config: SolverConfig | None = None,
    tsp_cache: dict[int, TspResult] | None = None,
) -> PlanOutcome:
    """Global optimum by enumerating every selection; refused above 12 stops.

    Ties are broken toward fewer selected stops, then toward the
    lexicographically smallest selection vector.
    """
    M = scenario.num_vertices
    if M > EXHAUSTIVE_MAX:
        raise ValueError(f"refusing exhaustive search over {M} stops (cap {EXHAUSTIVE_MAX})")
    evaluator = PlanEvaluator(scenario, config, tsp_cache)
    best: PlanOutcome | None = None
    best_key: tuple | None = None
    for free_bits in range(1 << (M - 1)):
        mask = (free_bits << 1) | 1
        sel = selection_from_mask(mask, M)
        outcome = evaluator.evaluate(sel)
        key = (outcome.total_energy, int(sel.sum()), tuple(int(b) for b in sel))
        if best_key is None or key < best_key:
            best, best_key = outcome, key
    return best


def baseline_no_move(scenario: Scenario, config: SolverConfig | None = None) -> PlanOutcome:
    """Serve everyone from the depot; motion energy is always zero."""
    return evaluate_selection(scenario, depot_only(scenario.num_vertices), config)


def baseline_visit_all(scenario: Scenario, config: SolverConfig | None = None) -> PlanOutcome:
    """Drive the minimum tour through every stop (the fixed-path policy)."""
    return evaluate_selection(scenario, all_vertices(scenario.num_vertices), config)
