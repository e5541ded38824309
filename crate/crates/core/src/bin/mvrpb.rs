//! Command-line entry point: generate instances, solve per-period routes,
//! balance workloads, and run horizon studies.

use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use mvrpb::balance::{optimize_balance, save_result};
use mvrpb::cvrp::{load_plans, save_plans, solve_all_periods, SolveBudget, SolveMode};
use mvrpb::generate::{generate_mvrpb, load_instance, save_instance};
use mvrpb::harness::{emit_reports, run_horizon_study, StudyConfig};
use mvrpb::parse::parse_cvrp;

#[derive(Parser)]
#[command(name = "mvrpb", version, about = "Multi-period VRP with workload balance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Heuristic,
    Exact,
}

impl From<Mode> for SolveMode {
    fn from(mode: Mode) -> SolveMode {
        match mode {
            Mode::Heuristic => SolveMode::Heuristic,
            Mode::Exact => SolveMode::Exact,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a multi-period instance from a CVRP benchmark file.
    Generate {
        /// CVRP benchmark file (NODE_COORD/DEMAND/DEPOT sections, EUC_2D)
        #[arg(long)]
        base: PathBuf,
        /// Number of periods in the planning horizon
        #[arg(long)]
        periods: usize,
        /// Clients drawn per period
        #[arg(long)]
        clients_per_period: usize,
        #[arg(long)]
        seed: u64,
        /// Output instance file (JSON)
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the per-period routing problems of an instance.
    Solve {
        /// Instance file produced by `generate`
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "heuristic")]
        mode: Mode,
        /// Wall-clock cap per period, in seconds
        #[arg(long)]
        time_limit: Option<f64>,
        /// Heuristic perturbation rounds
        #[arg(long, default_value_t = 20)]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output plans file (JSON)
        #[arg(long)]
        out: PathBuf,
    },
    /// Allocate routes to drivers, minimizing the maximum workload.
    Balance {
        /// Plans file produced by `solve`
        #[arg(long)]
        plans: PathBuf,
        #[arg(long)]
        drivers: u32,
        /// Node budget per feasibility probe (unlimited when omitted)
        #[arg(long)]
        probe_nodes: Option<u64>,
        /// Output result file (JSON)
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate replicate instances, truncate over horizons, and report
    /// workload equity per horizon length.
    Study {
        /// CVRP benchmark file used as the generation base
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        clients_per_period: usize,
        /// Comma-separated horizon lengths, e.g. 2,3,5,7,10
        #[arg(long, value_delimiter = ',')]
        horizons: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        replicates: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "heuristic")]
        mode: Mode,
        #[arg(long, default_value_t = 20)]
        restarts: u32,
        /// Output directory for raw.csv, by_horizon.csv, boxplot_data.csv,
        /// summary.txt
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate {
            base,
            periods,
            clients_per_period,
            seed,
            out,
        } => {
            let text = fs::read_to_string(&base)
                .with_context(|| format!("reading {}", base.display()))?;
            let base_instance = parse_cvrp(&text)?;
            let generated = generate_mvrpb(&base_instance, periods, clients_per_period, seed)?;
            if generated.clamped_demands > 0 {
                eprintln!(
                    "warning: {} demands clamped to capacity {}",
                    generated.clamped_demands, base_instance.capacity
                );
            }
            save_instance(&out, &generated.instance, generated.clamped_demands)?;
            println!(
                "wrote {} ({} periods, {} clients/period)",
                out.display(),
                periods,
                clients_per_period
            );
        }
        Command::Solve {
            instance,
            mode,
            time_limit,
            restarts,
            seed,
            out,
        } => {
            let (inst, _) = load_instance(&instance)?;
            let budget = SolveBudget {
                restarts,
                time_limit: time_limit.map(Duration::from_secs_f64),
                ..SolveBudget::default()
            };
            let plans = solve_all_periods(&inst, mode.into(), &budget, seed)?;
            let total: u64 = plans.iter().map(|p| p.total_distance).sum();
            save_plans(&out, &inst.name, &plans)?;
            println!(
                "wrote {} (total distance {}, {} periods)",
                out.display(),
                total,
                plans.len()
            );
        }
        Command::Balance {
            plans,
            drivers,
            probe_nodes,
            out,
        } => {
            let (_, loaded) = load_plans(&plans)?;
            let result = match probe_nodes {
                None => optimize_balance(&loaded, drivers)?,
                Some(cap) => mvrpb::balance::optimize_balance_with_budget(
                    &loaded,
                    drivers,
                    Some(cap),
                )?,
            };
            save_result(&out, drivers, &result)?;
            println!(
                "LB {}  UB {}  Opt {}  probes {}",
                result.lb, result.ub, result.opt, result.iterations
            );
        }
        Command::Study {
            base,
            clients_per_period,
            horizons,
            replicates,
            seed,
            mode,
            restarts,
            out_dir,
        } => {
            if horizons.is_empty() {
                bail!("--horizons must list at least one horizon length");
            }
            let text = fs::read_to_string(&base)
                .with_context(|| format!("reading {}", base.display()))?;
            let base_instance = parse_cvrp(&text)?;
            let cfg = StudyConfig {
                clients_per_period,
                horizons,
                replicates,
                seed,
                mode: mode.into(),
                budget: SolveBudget {
                    restarts,
                    ..SolveBudget::default()
                },
            };
            let study = run_horizon_study(&base_instance, &cfg)?;
            let paths = emit_reports(&study.records, &out_dir)?;
            println!("wrote {}", paths.raw.display());
            println!("wrote {}", paths.by_horizon.display());
            println!("wrote {}", paths.boxplot.display());
            println!("wrote {}", paths.summary.display());
        }
    }
    Ok(())
}
