//! Two-phase solver for the multi-period vehicle routing problem with
//! workload balance.
//!
//! Phase 1 finds minimum-distance routes for each period of the planning
//! horizon (a CVRP per period). Phase 2 allocates the resulting routes to a
//! fixed pool of drivers, one route per driver per period, minimizing the
//! maximum total distance any driver travels over the horizon. The optimum
//! is located by binary search between the perfect-equity bound
//! ceil(total distance / drivers) and an LPT-style construction, deciding
//! each candidate cap with an exact feasibility search.
//!
//! The crate also ships an instance generator (client subsampling and demand
//! perturbation from a single-period seed instance), a parser for the
//! classical CVRP benchmark format, and a study harness that measures how
//! workload equity improves with longer planning horizons.
//!
//! Periods are independent in phase 1 and solve in parallel under the
//! default `parallel` feature; disabling it falls back to sequential loops
//! with identical output.

pub mod balance;
pub mod cvrp;
pub mod generate;
pub mod harness;
pub mod model;
pub mod parse;
pub mod seeds;
pub mod validate;

pub use balance::{
    brute_force_balance, construct_initial, feasible, gap_percent, optimize_balance,
    workload_lower_bound, BalanceResult, BalanceStatus, FeasibilityOutcome, Verdict,
};
pub use cvrp::{
    solve_all_periods, solve_all_periods_seq, solve_exact_small, solve_heuristic, PeriodView,
    SolveBudget, SolveMode,
};
pub use generate::{derive_driver_count, generate_mvrpb, truncate_horizon};
pub use harness::{emit_reports, run_horizon_study, run_pipeline, RunRecord, StudyConfig};
pub use model::{
    route_distance, Assignment, ClientId, CvrpBase, DistanceMatrix, MvrpbInstance, PeriodDemand,
    PeriodPlan, Route,
};
pub use parse::parse_cvrp;
pub use validate::{validate_solution, Violation};
