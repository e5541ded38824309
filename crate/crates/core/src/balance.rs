//! Phase 2: equitable allocation of fixed per-period routes to drivers.
//!
//! The workload of a driver is its total route distance over the horizon.
//! `optimize_balance` locates the minimum achievable maximum workload by
//! binary search on the answer, deciding each candidate cap exactly with a
//! depth-first feasibility search over the period-layered schedule structure
//! (one choice arc per route per period plus an idle arc per driver).

use std::cmp::Reverse;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, PeriodPlan};

pub const BALANCE_SCHEMA: &str = "mvrpb-balance/1";

/// Assignment-count cap for the exhaustive test oracle.
pub const BRUTE_FORCE_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum BalanceError {
    #[error("{available} drivers cannot cover a period with {needed} routes")]
    InsufficientDrivers { needed: usize, available: u32 },
    #[error("lower bound is zero; gap undefined")]
    DegenerateBound,
    #[error("{assignments} assignments exceed the brute-force cap of {cap}")]
    TooLarge { assignments: u64, cap: u64 },
    #[error("unsupported balance schema `{0}`, expected `{BALANCE_SCHEMA}`")]
    BadSchema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
    /// Probe aborted by its node budget; nothing proven.
    Unknown,
}

/// Outcome of one exact feasibility question: does an assignment exist whose
/// maximum driver workload is at most the queried cap?
#[derive(Debug, Clone)]
pub struct FeasibilityOutcome {
    pub verdict: Verdict,
    pub witness: Option<Assignment>,
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub delta: u64,
    pub verdict: Verdict,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceStatus {
    /// `opt` is the exact minimum maximum workload.
    Proven,
    /// A probe ran out of budget: the optimum lies in `lo + 1 ..= opt`.
    Bracket { lo: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeconds {
    pub construct: f64,
    pub search: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceResult {
    pub lb: u64,
    pub ub: u64,
    pub opt: u64,
    pub status: BalanceStatus,
    /// Number of feasibility probes solved.
    pub iterations: u32,
    pub assignment: Assignment,
    pub probes: Vec<ProbeRecord>,
    pub phase_seconds: PhaseSeconds,
}

fn check_driver_count(plans: &[PeriodPlan], m: u32) -> Result<(), BalanceError> {
    let needed = plans.iter().map(|p| p.routes.len()).max().unwrap_or(0);
    if m == 0 || (m as usize) < needed {
        return Err(BalanceError::InsufficientDrivers {
            needed,
            available: m,
        });
    }
    Ok(())
}

fn total_distance(plans: &[PeriodPlan]) -> u64 {
    plans.iter().map(|p| p.total_distance).sum()
}

/// Perfect-equity bound: ceil(total distance / m).
pub fn workload_lower_bound(plans: &[PeriodPlan], m: u32) -> Result<u64, BalanceError> {
    check_driver_count(plans, m)?;
    Ok(total_distance(plans).div_ceil(m as u64))
}

/// LPT with conflicts: routes in decreasing distance order (ties: lower
/// period, then lower route index), each placed on the least-loaded driver
/// that is still free in the route's period (ties: lowest driver index).
/// Returns the assignment and its maximum workload.
pub fn construct_initial(
    plans: &[PeriodPlan],
    m: u32,
) -> Result<(Assignment, u64), BalanceError> {
    check_driver_count(plans, m)?;
    let mut items: Vec<(u64, usize, usize)> = Vec::new();
    for (t, plan) in plans.iter().enumerate() {
        for (r, route) in plan.routes.iter().enumerate() {
            items.push((route.distance, t, r));
        }
    }
    items.sort_by_key(|&(d, t, r)| (Reverse(d), t, r));

    let m = m as usize;
    let mut loads = vec![0u64; m];
    let mut used: Vec<Vec<bool>> = plans.iter().map(|_| vec![false; m]).collect();
    let mut drivers_by_period: Vec<Vec<u32>> =
        plans.iter().map(|p| vec![0u32; p.routes.len()]).collect();

    for (d, t, r) in items {
        let driver = (0..m)
            .filter(|&k| !used[t][k])
            .min_by_key(|&k| (loads[k], k))
            .expect("driver count precondition keeps a free driver per period");
        used[t][driver] = true;
        loads[driver] += d;
        drivers_by_period[t][r] = driver as u32;
    }
    let ub = loads.into_iter().max().unwrap_or(0);
    Ok((Assignment { drivers_by_period }, ub))
}

/// Exact feasibility for workload cap `delta`; never a false positive or
/// negative. See [`feasible_with_budget`] for the abortable variant.
pub fn feasible(
    plans: &[PeriodPlan],
    m: u32,
    delta: u64,
) -> Result<FeasibilityOutcome, BalanceError> {
    feasible_with_budget(plans, m, delta, None)
}

/// Depth-first search assigning each period's routes (periods in input
/// order, routes by decreasing distance) to drivers. Pruning:
/// (a) a placement may not push a driver past `delta`;
/// (b) total remaining distance must fit in the drivers' summed slack;
/// (c) among equally loaded drivers free in the current period only the
///     lowest-indexed is branched on.
/// A node budget turns the answer into `Unknown` instead of running long.
pub fn feasible_with_budget(
    plans: &[PeriodPlan],
    m: u32,
    delta: u64,
    max_nodes: Option<u64>,
) -> Result<FeasibilityOutcome, BalanceError> {
    check_driver_count(plans, m)?;

    // processing order: flat item list, routes within a period by
    // decreasing distance (tie: lower route index)
    let mut items: Vec<(usize, usize, u64)> = Vec::new();
    for (t, plan) in plans.iter().enumerate() {
        let mut order: Vec<usize> = (0..plan.routes.len()).collect();
        order.sort_by_key(|&r| (Reverse(plan.routes[r].distance), r));
        for r in order {
            items.push((t, r, plan.routes[r].distance));
        }
    }
    let mut suffix = vec![0u64; items.len() + 1];
    for i in (0..items.len()).rev() {
        suffix[i] = suffix[i + 1] + items[i].2;
    }

    let mut search = Dfs {
        items,
        suffix,
        m: m as usize,
        delta,
        loads: vec![0; m as usize],
        total_load: 0,
        used_stamp: vec![usize::MAX; m as usize],
        assign: plans.iter().map(|p| vec![0u32; p.routes.len()]).collect(),
        nodes: 0,
        max_nodes,
    };
    let verdict = search.run(0);
    let witness = (verdict == Verdict::Feasible).then(|| Assignment {
        drivers_by_period: search.assign,
    });
    Ok(FeasibilityOutcome {
        verdict,
        witness,
        nodes_explored: search.nodes,
    })
}

struct Dfs {
    items: Vec<(usize, usize, u64)>,
    suffix: Vec<u64>,
    m: usize,
    delta: u64,
    loads: Vec<u64>,
    total_load: u64,
    /// `used_stamp[k] == t` means driver k already has a route in period t.
    used_stamp: Vec<usize>,
    assign: Vec<Vec<u32>>,
    nodes: u64,
    max_nodes: Option<u64>,
}

impl Dfs {
    fn run(&mut self, pos: usize) -> Verdict {
        if pos == self.items.len() {
            return Verdict::Feasible;
        }
        // (b): summed slack must cover everything still unplaced
        if (self.m as u64) * self.delta - self.total_load < self.suffix[pos] {
            return Verdict::Infeasible;
        }
        let (t, r, d) = self.items[pos];
        let mut tried_loads: Vec<u64> = Vec::with_capacity(self.m);
        for k in 0..self.m {
            if self.used_stamp[k] == t || self.loads[k] + d > self.delta {
                continue;
            }
            if tried_loads.contains(&self.loads[k]) {
                continue; // (c): symmetric to a lower-indexed free driver
            }
            tried_loads.push(self.loads[k]);

            self.nodes += 1;
            if let Some(cap) = self.max_nodes {
                if self.nodes > cap {
                    return Verdict::Unknown;
                }
            }
            let prev_stamp = self.used_stamp[k];
            self.used_stamp[k] = t;
            self.loads[k] += d;
            self.total_load += d;
            self.assign[t][r] = k as u32;

            let verdict = self.run(pos + 1);

            self.used_stamp[k] = prev_stamp;
            self.loads[k] -= d;
            self.total_load -= d;

            match verdict {
                Verdict::Feasible => return Verdict::Feasible,
                Verdict::Unknown => return Verdict::Unknown,
                Verdict::Infeasible => {}
            }
        }
        Verdict::Infeasible
    }
}

/// Binary search for the optimal max workload. The first probe tests the
/// lower bound itself; only if that fails is the construction upper bound
/// used to bracket the search. `iterations` counts feasibility probes.
pub fn optimize_balance(plans: &[PeriodPlan], m: u32) -> Result<BalanceResult, BalanceError> {
    optimize_balance_with_budget(plans, m, None)
}

pub fn optimize_balance_with_budget(
    plans: &[PeriodPlan],
    m: u32,
    probe_max_nodes: Option<u64>,
) -> Result<BalanceResult, BalanceError> {
    let lb = workload_lower_bound(plans, m)?;

    let construct_start = Instant::now();
    let (initial_assignment, ub) = construct_initial(plans, m)?;
    let construct_seconds = construct_start.elapsed().as_secs_f64();

    let search_start = Instant::now();
    let mut probes = Vec::new();
    let mut iterations = 0u32;
    let mut probe = |delta: u64, probes: &mut Vec<ProbeRecord>| {
        let outcome = feasible_with_budget(plans, m, delta, probe_max_nodes)
            .expect("driver count already checked");
        iterations += 1;
        probes.push(ProbeRecord {
            delta,
            verdict: outcome.verdict,
            nodes: outcome.nodes_explored,
        });
        outcome
    };

    let first = probe(lb, &mut probes);
    let mut result = match first.verdict {
        Verdict::Feasible => BalanceResult {
            lb,
            ub,
            opt: lb,
            status: BalanceStatus::Proven,
            iterations: 0,
            assignment: first.witness.unwrap(),
            probes: Vec::new(),
            phase_seconds: PhaseSeconds::default(),
        },
        verdict => {
            // the construction witness is a known-feasible probe at `ub`
            let mut lo = lb;
            let mut hi = ub;
            let mut witness = initial_assignment;
            let mut status = BalanceStatus::Proven;
            if verdict == Verdict::Unknown {
                status = BalanceStatus::Bracket { lo: lb.saturating_sub(1) };
            } else {
                debug_assert!(ub > lb, "a feasible construction at lb contradicts the probe");
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    let outcome = probe(mid, &mut probes);
                    match outcome.verdict {
                        Verdict::Feasible => {
                            hi = mid;
                            witness = outcome.witness.unwrap();
                        }
                        Verdict::Infeasible => lo = mid,
                        Verdict::Unknown => {
                            status = BalanceStatus::Bracket { lo };
                            break;
                        }
                    }
                }
            }
            BalanceResult {
                lb,
                ub,
                opt: hi,
                status,
                iterations: 0,
                assignment: witness,
                probes: Vec::new(),
                phase_seconds: PhaseSeconds::default(),
            }
        }
    };
    result.iterations = iterations;
    result.probes = probes;
    result.phase_seconds = PhaseSeconds {
        construct: construct_seconds,
        search: search_start.elapsed().as_secs_f64(),
    };
    Ok(result)
}

/// Gap from perfect equity, in percent: 100 (opt - lb) / lb.
pub fn gap_percent(opt: u64, lb: u64) -> Result<f64, BalanceError> {
    if lb == 0 {
        return Err(BalanceError::DegenerateBound);
    }
    Ok(100.0 * (opt as f64 - lb as f64) / lb as f64)
}

/// Exhaustive reference: enumerates every assignment of routes to drivers
/// (respecting one route per driver per period) and returns the minimum
/// maximum workload. Intended for tests; refuses inputs whose assignment
/// count exceeds `cap`.
pub fn brute_force_balance(
    plans: &[PeriodPlan],
    m: u32,
    cap: u64,
) -> Result<u64, BalanceError> {
    check_driver_count(plans, m)?;
    let mut count: u64 = 1;
    for plan in plans {
        for i in 0..plan.routes.len() as u64 {
            count = count.saturating_mul(m as u64 - i);
            if count > cap {
                return Err(BalanceError::TooLarge {
                    assignments: count,
                    cap,
                });
            }
        }
    }

    fn recurse(
        plans: &[PeriodPlan],
        m: usize,
        t: usize,
        r: usize,
        loads: &mut Vec<u64>,
        used: &mut Vec<bool>,
        best: &mut u64,
    ) {
        if t == plans.len() {
            let max = loads.iter().copied().max().unwrap_or(0);
            if max < *best {
                *best = max;
            }
            return;
        }
        if r == plans[t].routes.len() {
            let mut next_used = vec![false; m];
            std::mem::swap(used, &mut next_used);
            recurse(plans, m, t + 1, 0, loads, used, best);
            std::mem::swap(used, &mut next_used);
            return;
        }
        let d = plans[t].routes[r].distance;
        for k in 0..m {
            if used[k] {
                continue;
            }
            used[k] = true;
            loads[k] += d;
            recurse(plans, m, t, r + 1, loads, used, best);
            loads[k] -= d;
            used[k] = false;
        }
    }

    let mut best = u64::MAX;
    let mut loads = vec![0u64; m as usize];
    let mut used = vec![false; m as usize];
    recurse(plans, m as usize, 0, 0, &mut loads, &mut used, &mut best);
    Ok(best)
}

#[derive(Serialize, Deserialize)]
struct BalanceFile {
    schema: String,
    drivers: u32,
    result: BalanceResult,
}

pub fn result_to_json(m: u32, result: &BalanceResult) -> String {
    let file = BalanceFile {
        schema: BALANCE_SCHEMA.to_string(),
        drivers: m,
        result: result.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("result serialization");
    s.push('\n');
    s
}

pub fn result_from_json(text: &str) -> Result<(u32, BalanceResult), BalanceError> {
    let file: BalanceFile = serde_json::from_str(text)?;
    if file.schema != BALANCE_SCHEMA {
        return Err(BalanceError::BadSchema(file.schema));
    }
    Ok((file.drivers, file.result))
}

pub fn save_result(path: &Path, m: u32, result: &BalanceResult) -> Result<(), BalanceError> {
    fs::write(path, result_to_json(m, result))?;
    Ok(())
}

pub fn load_result(path: &Path) -> Result<(u32, BalanceResult), BalanceError> {
    result_from_json(&fs::read_to_string(path)?)
}
