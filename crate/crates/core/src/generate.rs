//! Multi-period instance generation: per-period client subsampling and demand
//! perturbation from a single-period seed instance, horizon truncation, and
//! the versioned instance file format.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ClientId, CvrpBase, MvrpbInstance, PeriodDemand, PeriodPlan};
use crate::seeds::{stream_seed, STREAM_GENERATOR};

pub const INSTANCE_SCHEMA: &str = "mvrpb-instance/1";

#[derive(Debug, Error)]
pub enum GenError {
    #[error("requested {requested} clients per period, base has only {available}")]
    TooFewClients { requested: usize, available: usize },
    #[error("horizon {t2} outside 1..={horizon}")]
    InvalidHorizon { t2: usize, horizon: usize },
    #[error("period {0} has an empty plan")]
    InvalidPlan(usize),
    #[error("unsupported instance schema `{0}`, expected `{INSTANCE_SCHEMA}`")]
    BadSchema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A generated instance plus the number of demands that were clamped to the
/// vehicle capacity (so experiments can exclude affected instances).
#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: MvrpbInstance,
    pub clamped_demands: u64,
}

/// Draws `horizon` independent periods: a uniform subset of
/// `clients_per_period` distinct clients, each with a demand drawn uniformly
/// from {ceil(0.5 d), ..., ceil(1.5 d)} for base demand d, clamped to the
/// capacity. Fully determined by `seed`; period k depends only on
/// (seed, k), so periods may be generated in any order.
pub fn generate_mvrpb(
    base: &CvrpBase,
    horizon: usize,
    clients_per_period: usize,
    seed: u64,
) -> Result<Generated, GenError> {
    let available = base.client_count();
    if clients_per_period == 0 || clients_per_period > available {
        return Err(GenError::TooFewClients {
            requested: clients_per_period,
            available,
        });
    }
    let mut clamped = 0u64;
    let mut periods = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, STREAM_GENERATOR, t as u64));
        // partial Fisher-Yates over the client ids 1..=n
        let mut pool: Vec<ClientId> = (1..=available).collect();
        for i in 0..clients_per_period {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        let mut clients: Vec<ClientId> = pool[..clients_per_period].to_vec();
        clients.sort_unstable();
        let demands = clients
            .iter()
            .map(|&c| {
                let d = base.demands[c];
                let lo = d.div_ceil(2).max(1);
                let hi = (3 * d).div_ceil(2).max(lo);
                let q = rng.random_range(lo..=hi);
                if q > base.capacity {
                    clamped += 1;
                    base.capacity
                } else {
                    q
                }
            })
            .collect();
        periods.push(PeriodDemand { clients, demands });
    }
    let instance = MvrpbInstance {
        name: format!("{}-T{}-c{}-s{}", base.name, horizon, clients_per_period, seed),
        base: base.clone(),
        periods,
        drivers: None,
    };
    Ok(Generated {
        instance,
        clamped_demands: clamped,
    })
}

/// Keeps the first `t2` periods verbatim; the driver count is copied
/// unchanged.
pub fn truncate_horizon(inst: &MvrpbInstance, t2: usize) -> Result<MvrpbInstance, GenError> {
    if t2 == 0 || t2 > inst.horizon() {
        return Err(GenError::InvalidHorizon {
            t2,
            horizon: inst.horizon(),
        });
    }
    Ok(MvrpbInstance {
        name: inst.name.clone(),
        base: inst.base.clone(),
        periods: inst.periods[..t2].to_vec(),
        drivers: inst.drivers,
    })
}

/// Driver count for a routing solution: the maximum number of routes used in
/// any period.
pub fn derive_driver_count(plans: &[PeriodPlan]) -> Result<u32, GenError> {
    let mut m = 0usize;
    for (t, plan) in plans.iter().enumerate() {
        if plan.routes.is_empty() {
            return Err(GenError::InvalidPlan(t));
        }
        m = m.max(plan.routes.len());
    }
    if m == 0 {
        return Err(GenError::InvalidPlan(0));
    }
    Ok(m as u32)
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    schema: String,
    name: String,
    base_name: String,
    capacity: u64,
    coords: Vec<(i64, i64)>,
    base_demands: Vec<u64>,
    drivers: Option<u32>,
    clamped_demands: u64,
    periods: Vec<PeriodDemand>,
}

/// Serializes an instance (plus its clamp count) to the versioned JSON text
/// schema. Integers only; byte-stable for a given instance.
pub fn instance_to_json(inst: &MvrpbInstance, clamped_demands: u64) -> String {
    let file = InstanceFile {
        schema: INSTANCE_SCHEMA.to_string(),
        name: inst.name.clone(),
        base_name: inst.base.name.clone(),
        capacity: inst.base.capacity,
        coords: inst.base.coords.clone(),
        base_demands: inst.base.demands.clone(),
        drivers: inst.drivers,
        clamped_demands,
        periods: inst.periods.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serialization");
    s.push('\n');
    s
}

pub fn instance_from_json(text: &str) -> Result<(MvrpbInstance, u64), GenError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    if file.schema != INSTANCE_SCHEMA {
        return Err(GenError::BadSchema(file.schema));
    }
    let inst = MvrpbInstance {
        name: file.name,
        base: CvrpBase {
            name: file.base_name,
            coords: file.coords,
            demands: file.base_demands,
            capacity: file.capacity,
        },
        periods: file.periods,
        drivers: file.drivers,
    };
    Ok((inst, file.clamped_demands))
}

pub fn save_instance(path: &Path, inst: &MvrpbInstance, clamped_demands: u64) -> Result<(), GenError> {
    fs::write(path, instance_to_json(inst, clamped_demands))?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<(MvrpbInstance, u64), GenError> {
    instance_from_json(&fs::read_to_string(path)?)
}
