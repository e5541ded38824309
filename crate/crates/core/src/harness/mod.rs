//! End-to-end experiment runner: the two-phase pipeline on one instance, the
//! horizon study that measures equity against planning-horizon length, and
//! report emission.
//!
//! All CSV outputs are deterministic for a given seed; wall-clock timings
//! appear only in `summary.txt`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::balance::{gap_percent, optimize_balance, BalanceError, BalanceResult};
use crate::cvrp::{solve_all_periods, SolveBudget, SolveError, SolveMode};
use crate::generate::{derive_driver_count, generate_mvrpb, truncate_horizon, GenError};
use crate::model::{CvrpBase, MvrpbInstance, PeriodPlan};
use crate::seeds::{stream_seed, STREAM_STUDY};
use crate::validate::validate_solution;

mod stats;

pub use stats::{box_stats, quantile, round2, BoxStats};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("instance generation: {0}")]
    Gen(#[from] GenError),
    #[error("phase 1 (route optimization): {0}")]
    Solve(#[from] SolveError),
    #[error("phase 2 (workload balancing): {0}")]
    Balance(#[from] BalanceError),
    #[error("instance invalid: {0}")]
    Model(#[from] crate::model::ModelError),
    #[error("pipeline produced an invalid solution: {0}")]
    InvalidSolution(String),
    #[error("bad study configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One pipeline run, flattened for reporting. `gap_percent` is stored
/// rounded to two decimals; aggregates are computed from these stored
/// values so they can be recomputed byte-identically from `raw.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub horizon: usize,
    pub clients_per_period: usize,
    pub drivers: u32,
    pub total_distance: u64,
    pub lb: u64,
    pub ub: u64,
    pub opt: u64,
    pub iterations: u32,
    pub gap_percent: f64,
    pub phase1_seconds: f64,
    pub phase2_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub record: RunRecord,
    pub plans: Vec<PeriodPlan>,
    pub balance: BalanceResult,
}

/// Runs the two phases on one instance: solve every period, derive the
/// driver count when the instance leaves it open, then balance workloads.
pub fn run_pipeline(
    inst: &MvrpbInstance,
    mode: SolveMode,
    budget: &SolveBudget,
    seed: u64,
) -> Result<PipelineOutput, HarnessError> {
    inst.check()?;

    let phase1_start = Instant::now();
    let plans = solve_all_periods(inst, mode, budget, seed)?;
    let phase1_seconds = phase1_start.elapsed().as_secs_f64();

    let m = match inst.drivers {
        Some(m) => m,
        None => derive_driver_count(&plans)?,
    };

    let phase2_start = Instant::now();
    let balance = optimize_balance(&plans, m)?;
    let phase2_seconds = phase2_start.elapsed().as_secs_f64();

    let checked = inst.clone().with_drivers(m);
    let violations = validate_solution(&checked, &plans, Some(&balance.assignment));
    if !violations.is_empty() {
        return Err(HarnessError::InvalidSolution(violations[0].to_string()));
    }

    let record = RunRecord {
        instance: inst.name.clone(),
        horizon: inst.horizon(),
        clients_per_period: inst.periods.iter().map(|p| p.clients.len()).max().unwrap_or(0),
        drivers: m,
        total_distance: plans.iter().map(|p| p.total_distance).sum(),
        lb: balance.lb,
        ub: balance.ub,
        opt: balance.opt,
        iterations: balance.iterations,
        gap_percent: round2(gap_percent(balance.opt, balance.lb)?),
        phase1_seconds,
        phase2_seconds,
    };
    Ok(PipelineOutput {
        record,
        plans,
        balance,
    })
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub clients_per_period: usize,
    pub horizons: Vec<usize>,
    pub replicates: u32,
    pub seed: u64,
    pub mode: SolveMode,
    pub budget: SolveBudget,
}

/// Per-horizon aggregate row. Means are over the records of that horizon in
/// canonical order; `gap_stats` is the boxplot summary of their gaps.
#[derive(Debug, Clone)]
pub struct HorizonRow {
    pub horizon: usize,
    pub instances: usize,
    pub mean_lb: f64,
    pub mean_ub: f64,
    pub mean_opt: f64,
    pub mean_iterations: f64,
    pub mean_gap_percent: f64,
    pub mean_seconds: f64,
    pub gap_stats: BoxStats,
}

#[derive(Debug, Clone)]
pub struct Study {
    pub records: Vec<RunRecord>,
    pub rows: Vec<HorizonRow>,
}

fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Generates `replicates` master instances at the longest horizon, fixes the
/// driver count from each master's phase-1 plans, truncates to every horizon
/// and runs the pipeline on each (replicate, horizon) pair. Record order is
/// canonical (instance name, then horizon) regardless of parallelism.
pub fn run_horizon_study(base: &CvrpBase, cfg: &StudyConfig) -> Result<Study, HarnessError> {
    if cfg.horizons.is_empty() {
        return Err(HarnessError::BadConfig("no horizons given".into()));
    }
    if cfg.replicates == 0 {
        return Err(HarnessError::BadConfig("zero replicates".into()));
    }
    let mut horizons = cfg.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    let t_max = *horizons.last().unwrap();

    // masters: generate at the longest horizon and pin m from its plans
    let masters: Vec<Result<(MvrpbInstance, u64), HarnessError>> =
        par_map((0..cfg.replicates).collect(), |rep| {
            let master_seed = stream_seed(cfg.seed, STREAM_STUDY, rep as u64);
            let mut generated = generate_mvrpb(base, t_max, cfg.clients_per_period, master_seed)?;
            generated.instance.name =
                format!("{}-c{}-r{:02}", base.name, cfg.clients_per_period, rep);
            let plans = solve_all_periods(&generated.instance, cfg.mode, &cfg.budget, master_seed)?;
            let m = derive_driver_count(&plans)?;
            Ok((generated.instance.with_drivers(m), master_seed))
        });

    let mut jobs = Vec::new();
    for master in masters {
        let (inst, master_seed) = master?;
        for &t in &horizons {
            jobs.push((truncate_horizon(&inst, t)?, master_seed));
        }
    }

    let results: Vec<Result<RunRecord, HarnessError>> = par_map(jobs, |(inst, master_seed)| {
        run_pipeline(&inst, cfg.mode, &cfg.budget, master_seed).map(|out| out.record)
    });
    let mut records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| a.instance.cmp(&b.instance).then(a.horizon.cmp(&b.horizon)));

    let rows = aggregate_by_horizon(&records);
    Ok(Study { records, rows })
}

/// Pure aggregation over records: group by horizon, average the reported
/// columns, and summarize the gap distribution.
pub fn aggregate_by_horizon(records: &[RunRecord]) -> Vec<HorizonRow> {
    let mut horizons: Vec<usize> = records.iter().map(|r| r.horizon).collect();
    horizons.sort_unstable();
    horizons.dedup();

    horizons
        .into_iter()
        .map(|t| {
            let group: Vec<&RunRecord> = records.iter().filter(|r| r.horizon == t).collect();
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&RunRecord) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            let gaps: Vec<f64> = group.iter().map(|r| r.gap_percent).collect();
            HorizonRow {
                horizon: t,
                instances: group.len(),
                mean_lb: mean(&|r| r.lb as f64),
                mean_ub: mean(&|r| r.ub as f64),
                mean_opt: mean(&|r| r.opt as f64),
                mean_iterations: mean(&|r| r.iterations as f64),
                mean_gap_percent: mean(&|r| r.gap_percent),
                mean_seconds: mean(&|r| r.phase1_seconds + r.phase2_seconds),
                gap_stats: box_stats(&gaps),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub raw: PathBuf,
    pub by_horizon: PathBuf,
    pub boxplot: PathBuf,
    pub summary: PathBuf,
}

/// Writes `raw.csv`, `by_horizon.csv`, `boxplot_data.csv` (all deterministic
/// for a given seed) and `summary.txt` (carries the wall-clock column).
/// Column names and order are frozen; see the README.
pub fn emit_reports(records: &[RunRecord], out_dir: &Path) -> Result<ReportPaths, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::BadConfig("no records to report".into()));
    }
    fs::create_dir_all(out_dir)?;
    let rows = aggregate_by_horizon(records);

    let mut raw = String::from(
        "instance,horizon,clients_per_period,drivers,total_distance,lb,ub,opt,iterations,gap_percent\n",
    );
    for r in records {
        raw.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:.2}\n",
            r.instance,
            r.horizon,
            r.clients_per_period,
            r.drivers,
            r.total_distance,
            r.lb,
            r.ub,
            r.opt,
            r.iterations,
            r.gap_percent,
        ));
    }

    let mut by_horizon = String::from(
        "horizon,instances,mean_lb,mean_ub,mean_opt,mean_iterations,mean_gap_percent\n",
    );
    for row in &rows {
        by_horizon.push_str(&format!(
            "{},{},{:.2},{:.2},{:.2},{:.2},{:.2}\n",
            row.horizon,
            row.instances,
            row.mean_lb,
            row.mean_ub,
            row.mean_opt,
            row.mean_iterations,
            row.mean_gap_percent,
        ));
    }

    let mut boxplot = String::from(
        "horizon,count,data_min,q1,median,q3,data_max,whisker_low,whisker_high,outliers\n",
    );
    for row in &rows {
        let s = &row.gap_stats;
        let outliers = s
            .outliers
            .iter()
            .map(|v| format!("{v:.2}"))
            .collect::<Vec<_>>()
            .join(" ");
        boxplot.push_str(&format!(
            "{},{},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{}\n",
            row.horizon,
            s.count,
            s.data_min,
            s.q1,
            s.median,
            s.q3,
            s.data_max,
            s.whisker_low,
            s.whisker_high,
            outliers,
        ));
    }

    let mut summary = String::new();
    summary.push_str(&format!(
        "{:>7}  {:>9}  {:>10}  {:>10}  {:>10}  {:>6}  {:>8}\n",
        "periods", "instances", "LB", "UB", "Opt", "#It", "T(s)"
    ));
    for row in &rows {
        summary.push_str(&format!(
            "{:>7}  {:>9}  {:>10.1}  {:>10.1}  {:>10.1}  {:>6.1}  {:>8.2}\n",
            row.horizon,
            row.instances,
            row.mean_lb,
            row.mean_ub,
            row.mean_opt,
            row.mean_iterations,
            row.mean_seconds,
        ));
    }

    let paths = ReportPaths {
        raw: out_dir.join("raw.csv"),
        by_horizon: out_dir.join("by_horizon.csv"),
        boxplot: out_dir.join("boxplot_data.csv"),
        summary: out_dir.join("summary.txt"),
    };
    fs::write(&paths.raw, raw)?;
    fs::write(&paths.by_horizon, by_horizon)?;
    fs::write(&paths.boxplot, boxplot)?;
    fs::write(&paths.summary, summary)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate_mvrpb;
    use crate::model::CvrpBase;

    fn base(n_clients: usize) -> CvrpBase {
        let mut coords = vec![(0i64, 0i64)];
        let mut demands = vec![0u64];
        for i in 0..n_clients {
            let v = i as i64 + 1;
            coords.push(((v * 41) % 97, (v * 59) % 83));
            demands.push(1 + (v as u64 * 3) % 7);
        }
        CvrpBase::new("unit", coords, demands, 15).unwrap()
    }

    #[test]
    fn pipeline_record_matches_module_calls() {
        let inst = generate_mvrpb(&base(15), 3, 6, 4).unwrap().instance;
        let budget = SolveBudget::default();
        let out = run_pipeline(&inst, SolveMode::Heuristic, &budget, 9).unwrap();

        let plans = solve_all_periods(&inst, SolveMode::Heuristic, &budget, 9).unwrap();
        let m = derive_driver_count(&plans).unwrap();
        let bal = optimize_balance(&plans, m).unwrap();
        assert_eq!(out.record.lb, bal.lb);
        assert_eq!(out.record.opt, bal.opt);
        assert_eq!(out.record.drivers, m);
        assert_eq!(
            out.record.gap_percent,
            round2(gap_percent(bal.opt, bal.lb).unwrap())
        );
        assert_eq!(
            out.record.total_distance,
            plans.iter().map(|p| p.total_distance).sum::<u64>()
        );
    }

    #[test]
    fn pipeline_is_deterministic_for_a_seed() {
        let inst = generate_mvrpb(&base(12), 2, 5, 8).unwrap().instance;
        let budget = SolveBudget::default();
        let a = run_pipeline(&inst, SolveMode::Heuristic, &budget, 3).unwrap();
        let b = run_pipeline(&inst, SolveMode::Heuristic, &budget, 3).unwrap();
        assert_eq!(a.plans, b.plans);
        assert_eq!(a.record.opt, b.record.opt);
        assert_eq!(a.record.gap_percent, b.record.gap_percent);
    }

    #[test]
    fn study_rows_recompute_from_records() {
        let cfg = StudyConfig {
            clients_per_period: 5,
            horizons: vec![1, 2, 3],
            replicates: 2,
            seed: 5,
            mode: SolveMode::Heuristic,
            budget: SolveBudget::default(),
        };
        let study = run_horizon_study(&base(12), &cfg).unwrap();
        assert_eq!(study.records.len(), 6);
        let rows = aggregate_by_horizon(&study.records);
        for (a, b) in rows.iter().zip(&study.rows) {
            assert_eq!(a.horizon, b.horizon);
            assert_eq!(a.mean_gap_percent, b.mean_gap_percent);
            assert_eq!(a.gap_stats, b.gap_stats);
        }
        // single-horizon study wraps a single pipeline run per replicate
        let tiny = StudyConfig {
            horizons: vec![2],
            replicates: 1,
            ..cfg
        };
        let s = run_horizon_study(&base(12), &tiny).unwrap();
        assert_eq!(s.records.len(), 1);
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].instances, 1);
    }

    #[test]
    fn reports_round_trip_through_the_raw_csv() {
        let cfg = StudyConfig {
            clients_per_period: 5,
            horizons: vec![1, 2],
            replicates: 2,
            seed: 11,
            mode: SolveMode::Heuristic,
            budget: SolveBudget::default(),
        };
        let study = run_horizon_study(&base(12), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_reports(&study.records, dir.path()).unwrap();

        let raw = fs::read_to_string(&paths.raw).unwrap();
        let mut reparsed = Vec::new();
        for line in raw.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            reparsed.push(RunRecord {
                instance: cols[0].to_string(),
                horizon: cols[1].parse().unwrap(),
                clients_per_period: cols[2].parse().unwrap(),
                drivers: cols[3].parse().unwrap(),
                total_distance: cols[4].parse().unwrap(),
                lb: cols[5].parse().unwrap(),
                ub: cols[6].parse().unwrap(),
                opt: cols[7].parse().unwrap(),
                iterations: cols[8].parse().unwrap(),
                gap_percent: cols[9].parse().unwrap(),
                phase1_seconds: 0.0,
                phase2_seconds: 0.0,
            });
        }
        // aggregates are a pure function of the emitted raw rows
        let recomputed = aggregate_by_horizon(&reparsed);
        let by_horizon = fs::read_to_string(&paths.by_horizon).unwrap();
        for (row, line) in recomputed.iter().zip(by_horizon.lines().skip(1)) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(format!("{:.2}", row.mean_gap_percent), cols[6]);
            assert_eq!(format!("{:.2}", row.mean_lb), cols[2]);
        }
    }
}
