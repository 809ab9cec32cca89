"""Mission planning for a mobile backscatter data collector.

Plans which stops a data-collecting vehicle should visit, the exact tour
through them, and how to split the remaining mission time and transmit
energy across users so every data demand is met at minimum total (motion +
communication) energy.
"""

from .scenario import (
    ChannelConfig,
    PhysicalParams,
    Scenario,
    ScenarioError,
    dbm_to_watt,
    generate_scenario,
    load_scenario,
    pathloss,
    save_scenario,
    watt_to_dbm,
)
from .mobility import (
    HELD_KARP_MAX,
    MTZ_BIG,
    MtzCheck,
    TourPlan,
    TspResult,
    all_vertices,
    check_mtz,
    depot_only,
    motion_energy,
    motion_time,
    plan_from_order,
    selection_from_mask,
    selection_mask,
    solve_tsp,
    tour_length,
)
from .allocation import (
    FSK_MODULATION_LOSS,
    Allocation,
    AllocationResult,
    KktReport,
    KktTolerances,
    bits_collected,
    bits_collected_dt,
    effective_gain,
    fit_ook_modulation_loss,
    link_rate,
    solve_allocation,
)
from .planner import (
    EXHAUSTIVE_MAX,
    NeighborhoodSampler,
    PlanEvaluator,
    PlanOutcome,
    SearchResult,
    SolverConfig,
    baseline_no_move,
    baseline_visit_all,
    evaluate_selection,
    exhaustive_search,
    local_search,
)
from .cli import ExperimentSpec, ResultRow, run_sweep, spawn_seed

__version__ = "0.1.0"
