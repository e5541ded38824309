//! Phase 1: one CVRP per period. A seeded metaheuristic handles realistic
//! sizes; an exact subset-DP solver covers small periods and provides proven
//! optima. Periods are independent and solve concurrently when the
//! `parallel` feature is enabled, with identical output either way.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ClientId, DistanceMatrix, MvrpbInstance, PeriodPlan};
use crate::seeds::{stream_seed, STREAM_SOLVER};

mod exact;
mod heuristic;

pub use exact::solve_exact_small;
pub use heuristic::solve_heuristic;

/// Default client cap for the exact solver (bitmask DP width).
pub const EXACT_CLIENT_CAP: usize = 12;

pub const PLANS_SCHEMA: &str = "mvrpb-plans/1";

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("client {client} demand {demand} exceeds capacity {capacity}")]
    InfeasibleClient {
        client: ClientId,
        demand: u64,
        capacity: u64,
    },
    #[error("{clients} clients exceed the exact-solver cap of {cap}")]
    TooLarge { clients: usize, cap: usize },
    #[error("time budget exhausted before a proven optimum")]
    Timeout,
    #[error("period {period}: {source}")]
    Period {
        period: usize,
        #[source]
        source: Box<SolveError>,
    },
    #[error("unsupported plans schema `{0}`, expected `{PLANS_SCHEMA}`")]
    BadSchema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Heuristic,
    Exact,
}

/// Limits for a single-period solve. `restarts` bounds the heuristic's
/// perturbation rounds (the deterministic budget); `time_limit` is a
/// safety cap that, when hit, may cut the search short.
#[derive(Debug, Clone, Copy)]
pub struct SolveBudget {
    pub restarts: u32,
    pub time_limit: Option<Duration>,
    pub exact_client_cap: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            restarts: 20,
            time_limit: None,
            exact_client_cap: EXACT_CLIENT_CAP,
        }
    }
}

/// Read-only view of one period: the shared distance matrix plus the
/// period's clients and demands.
#[derive(Debug, Clone, Copy)]
pub struct PeriodView<'a> {
    pub matrix: &'a DistanceMatrix,
    pub capacity: u64,
    pub clients: &'a [ClientId],
    pub demands: &'a [u64],
}

impl<'a> PeriodView<'a> {
    pub fn new(inst: &'a MvrpbInstance, matrix: &'a DistanceMatrix, period: usize) -> Self {
        PeriodView {
            matrix,
            capacity: inst.base.capacity,
            clients: &inst.periods[period].clients,
            demands: &inst.periods[period].demands,
        }
    }

    fn check_client_demands(&self) -> Result<(), SolveError> {
        for (&c, &q) in self.clients.iter().zip(self.demands) {
            if q > self.capacity {
                return Err(SolveError::InfeasibleClient {
                    client: c,
                    demand: q,
                    capacity: self.capacity,
                });
            }
        }
        Ok(())
    }
}

fn solve_period(
    view: &PeriodView<'_>,
    mode: SolveMode,
    budget: &SolveBudget,
    seed: u64,
) -> Result<PeriodPlan, SolveError> {
    match mode {
        SolveMode::Heuristic => solve_heuristic(view, budget, seed),
        SolveMode::Exact => {
            let deadline = budget.time_limit.map(|l| Instant::now() + l);
            solve_exact_small(view, budget.exact_client_cap, deadline)
        }
    }
}

/// Solves every period of the instance. Per-period seeds are derived from
/// the master seed and the period index, so the result does not depend on
/// execution order or thread count.
pub fn solve_all_periods(
    inst: &MvrpbInstance,
    mode: SolveMode,
    budget: &SolveBudget,
    seed: u64,
) -> Result<Vec<PeriodPlan>, SolveError> {
    let matrix = DistanceMatrix::from_coords(&inst.base.coords);
    run_periods(inst, &matrix, mode, budget, seed, cfg!(feature = "parallel"))
}

/// Sequential variant, always available; the benchmark suite compares the
/// two paths.
pub fn solve_all_periods_seq(
    inst: &MvrpbInstance,
    mode: SolveMode,
    budget: &SolveBudget,
    seed: u64,
) -> Result<Vec<PeriodPlan>, SolveError> {
    let matrix = DistanceMatrix::from_coords(&inst.base.coords);
    run_periods(inst, &matrix, mode, budget, seed, false)
}

fn run_periods(
    inst: &MvrpbInstance,
    matrix: &DistanceMatrix,
    mode: SolveMode,
    budget: &SolveBudget,
    seed: u64,
    parallel: bool,
) -> Result<Vec<PeriodPlan>, SolveError> {
    let solve_one = |t: usize| -> Result<PeriodPlan, SolveError> {
        let view = PeriodView::new(inst, matrix, t);
        solve_period(&view, mode, budget, stream_seed(seed, STREAM_SOLVER, t as u64)).map_err(
            |e| SolveError::Period {
                period: t,
                source: Box::new(e),
            },
        )
    };

    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..inst.horizon())
            .into_par_iter()
            .map(solve_one)
            .collect();
    }
    let _ = parallel;
    (0..inst.horizon()).map(solve_one).collect()
}

#[derive(Serialize, Deserialize)]
struct PlansFile {
    schema: String,
    instance: String,
    periods: Vec<PeriodPlan>,
}

/// Serializes period plans to the versioned JSON text schema: per period the
/// route client lists, distances, loads, and the optimality flag.
pub fn plans_to_json(instance_name: &str, plans: &[PeriodPlan]) -> String {
    let file = PlansFile {
        schema: PLANS_SCHEMA.to_string(),
        instance: instance_name.to_string(),
        periods: plans.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("plans serialization");
    s.push('\n');
    s
}

pub fn plans_from_json(text: &str) -> Result<(String, Vec<PeriodPlan>), SolveError> {
    let file: PlansFile = serde_json::from_str(text)?;
    if file.schema != PLANS_SCHEMA {
        return Err(SolveError::BadSchema(file.schema));
    }
    Ok((file.instance, file.periods))
}

pub fn save_plans(path: &Path, instance_name: &str, plans: &[PeriodPlan]) -> Result<(), SolveError> {
    fs::write(path, plans_to_json(instance_name, plans))?;
    Ok(())
}

pub fn load_plans(path: &Path) -> Result<(String, Vec<PeriodPlan>), SolveError> {
    plans_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate_mvrpb;
    use crate::model::CvrpBase;
    use crate::validate::validate_solution;

    fn grid_base(n_clients: usize, demand: u64, capacity: u64) -> CvrpBase {
        let mut coords = vec![(0i64, 0i64)];
        let mut demands = vec![0u64];
        for i in 0..n_clients {
            let v = i as i64 + 1;
            coords.push(((v * 37) % 101, (v * 73) % 89));
            demands.push(demand);
        }
        CvrpBase::new("grid", coords, demands, capacity).unwrap()
    }

    fn single_period(base: &CvrpBase, clients: Vec<ClientId>, demands: Vec<u64>) -> MvrpbInstance {
        MvrpbInstance {
            name: "test".into(),
            base: base.clone(),
            periods: vec![crate::model::PeriodDemand { clients, demands }],
            drivers: None,
        }
    }

    #[test]
    fn one_client_gets_an_out_and_back_route() {
        let base = grid_base(5, 2, 10);
        let inst = single_period(&base, vec![3], vec![2]);
        let matrix = DistanceMatrix::from_coords(&base.coords);
        let view = PeriodView::new(&inst, &matrix, 0);
        let budget = SolveBudget::default();
        let plan = solve_heuristic(&view, &budget, 1).unwrap();
        assert_eq!(plan.routes.len(), 1);
        assert_eq!(plan.total_distance, 2 * matrix.dist(0, 3));
        let exact = solve_exact_small(&view, 12, None).unwrap();
        assert_eq!(exact.total_distance, plan.total_distance);
        assert!(exact.proven_optimal && !plan.proven_optimal);
    }

    #[test]
    fn full_demand_clients_force_singleton_routes() {
        let base = grid_base(3, 10, 10);
        let inst = single_period(&base, vec![1, 2, 3], vec![10, 10, 10]);
        let matrix = DistanceMatrix::from_coords(&base.coords);
        let view = PeriodView::new(&inst, &matrix, 0);
        let plan = solve_heuristic(&view, &SolveBudget::default(), 5).unwrap();
        assert_eq!(plan.routes.len(), 3);
        let exact = solve_exact_small(&view, 12, None).unwrap();
        assert_eq!(exact.routes.len(), 3);
        assert_eq!(plan.total_distance, exact.total_distance);
    }

    #[test]
    fn two_client_exact_matches_forced_formula() {
        let base = grid_base(2, 3, 10);
        let inst = single_period(&base, vec![1, 2], vec![3, 3]);
        let matrix = DistanceMatrix::from_coords(&base.coords);
        let view = PeriodView::new(&inst, &matrix, 0);
        let exact = solve_exact_small(&view, 12, None).unwrap();
        let separate = 2 * matrix.dist(0, 1) + 2 * matrix.dist(0, 2);
        let joint = matrix.dist(0, 1) + matrix.dist(1, 2) + matrix.dist(2, 0);
        assert_eq!(exact.total_distance, separate.min(joint));
    }

    #[test]
    fn infeasible_demand_is_an_error() {
        let base = grid_base(3, 5, 10);
        let inst = single_period(&base, vec![1, 2], vec![5, 11]);
        let matrix = DistanceMatrix::from_coords(&base.coords);
        let view = PeriodView::new(&inst, &matrix, 0);
        assert!(matches!(
            solve_heuristic(&view, &SolveBudget::default(), 0),
            Err(SolveError::InfeasibleClient { client: 2, .. })
        ));
        assert!(matches!(
            solve_exact_small(&view, 12, None),
            Err(SolveError::InfeasibleClient { .. })
        ));
    }

    #[test]
    fn exact_cap_enforced() {
        let base = grid_base(15, 1, 100);
        let clients: Vec<ClientId> = (1..=15).collect();
        let demands = vec![1; 15];
        let inst = single_period(&base, clients, demands);
        let matrix = DistanceMatrix::from_coords(&base.coords);
        let view = PeriodView::new(&inst, &matrix, 0);
        assert!(matches!(
            solve_exact_small(&view, 12, None),
            Err(SolveError::TooLarge { clients: 15, cap: 12 })
        ));
    }

    #[test]
    fn emitted_plans_validate_and_are_deterministic() {
        let base = grid_base(20, 4, 15);
        let inst = generate_mvrpb(&base, 3, 8, 42).unwrap().instance;
        let budget = SolveBudget::default();
        let a = solve_all_periods(&inst, SolveMode::Heuristic, &budget, 7).unwrap();
        let b = solve_all_periods(&inst, SolveMode::Heuristic, &budget, 7).unwrap();
        let seq = solve_all_periods_seq(&inst, SolveMode::Heuristic, &budget, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, seq);
        assert!(validate_solution(&inst, &a, None).is_empty());
    }

    #[test]
    fn exact_mode_equals_independent_per_period_calls() {
        let base = grid_base(12, 4, 12);
        let inst = generate_mvrpb(&base, 3, 6, 11).unwrap().instance;
        let budget = SolveBudget::default();
        let all = solve_all_periods(&inst, SolveMode::Exact, &budget, 0).unwrap();
        let matrix = DistanceMatrix::from_coords(&inst.base.coords);
        for t in 0..3 {
            let view = PeriodView::new(&inst, &matrix, t);
            let single = solve_exact_small(&view, 12, None).unwrap();
            assert_eq!(all[t].total_distance, single.total_distance);
            assert!(all[t].proven_optimal);
        }
        assert!(validate_solution(&inst, &all, None).is_empty());
    }

    #[test]
    fn heuristic_never_beats_exact() {
        let base = grid_base(9, 3, 9);
        for seed in 0..8u64 {
            let inst = generate_mvrpb(&base, 1, 7, seed).unwrap().instance;
            let matrix = DistanceMatrix::from_coords(&inst.base.coords);
            let view = PeriodView::new(&inst, &matrix, 0);
            let h = solve_heuristic(&view, &SolveBudget::default(), seed).unwrap();
            let e = solve_exact_small(&view, 12, None).unwrap();
            assert!(h.total_distance >= e.total_distance);
        }
    }

    #[test]
    fn plans_file_round_trips() {
        let base = grid_base(10, 3, 9);
        let inst = generate_mvrpb(&base, 2, 6, 1).unwrap().instance;
        let plans = solve_all_periods(&inst, SolveMode::Heuristic, &SolveBudget::default(), 3)
            .unwrap();
        let json = plans_to_json(&inst.name, &plans);
        let (name, reloaded) = plans_from_json(&json).unwrap();
        assert_eq!(name, inst.name);
        assert_eq!(reloaded, plans);
    }
}
