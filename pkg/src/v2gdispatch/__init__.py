"""Fair, privacy-aware V2G discharge dispatch: simulator and benchmark harness."""

from .baselines import (
    PenaltyConfig,
    consensus_spread,
    cwoa_solve,
    gwo_solve,
    make_penalized_fitness,
    penalized_fitness,
)
from .config import (
    ConfigError,
    Instance,
    ScenarioConfig,
    build_instance,
    load_config,
    parse_config,
    resolve_departures,
)
from .costs import (
    AggCostParams,
    CostOracle,
    CostSet,
    EvCostParams,
    agg_consensus_cost,
    agg_net_cost,
    consensus_objective,
    ev_net_cost,
    grid_search_rate,
    oracle_evaluate,
    sample_ev_cost_params,
)
from .dwoa import (
    WhalePool,
    WoaCoefficients,
    advance_pool,
    alpha_schedule,
    clamp_to_bounds,
    init_pool,
    minimize_scalar,
    update_position,
)
from .fleet import (
    EvState,
    Fleet,
    FleetDistributions,
    apply_discharge,
    available_ids,
    distance_histogram,
    distance_home_km,
    export_fleet_snapshot,
    grid_power_kw,
    sample_fleet,
)
from .harness import (
    CompareRow,
    StatsRow,
    compare_solvers,
    export_comparison,
    export_stats,
    oracle_rate,
    run_seed,
    stats_harness,
)
from .orchestrator import (
    DepartureEvent,
    ecn_select_best,
    run_optimization,
    run_scenario,
)
from .records import IterationRow, RunRecord, StepRow, export_run, import_run
from .shuffle import (
    CandidateMapping,
    ProtocolError,
    SplitShares,
    candidate_totals,
    from_units,
    masking_check,
    shuffle_round,
    split_units,
    split_value,
    to_units,
)
from .topology import (
    AGGREGATOR_ID,
    ECN_ID,
    AgentId,
    AgentKind,
    Envelope,
    NeighborMap,
    TopologyError,
    build_topology,
    deliver_round,
    ev_agent,
    export_topology,
    reroute,
)

__version__ = "0.1.0"
