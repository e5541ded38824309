//! Domain types shared by every stage: instances, distance matrices, routes,
//! period plans, and route-to-driver assignments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index into the coordinate list of a [`CvrpBase`]. Index 0 is the depot.
pub type ClientId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("client index {0} out of range (instance has {1} vertices)")]
    InvalidClient(ClientId, usize),
    #[error("depot demand must be zero, found {0}")]
    DepotDemandNonzero(u64),
    #[error("demand {demand} of client {client} exceeds vehicle capacity {capacity}")]
    DemandExceedsCapacity {
        client: ClientId,
        demand: u64,
        capacity: u64,
    },
    #[error("instance needs a depot and at least one client")]
    TooFewVertices,
    #[error("coordinate and demand lists have different lengths ({coords} vs {demands})")]
    LengthMismatch { coords: usize, demands: usize },
}

/// A single-period CVRP seed instance: integer coordinates, per-client
/// demands, and a homogeneous vehicle capacity. Vertex 0 is the depot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvrpBase {
    pub name: String,
    pub coords: Vec<(i64, i64)>,
    pub demands: Vec<u64>,
    pub capacity: u64,
}

impl CvrpBase {
    pub fn new(
        name: impl Into<String>,
        coords: Vec<(i64, i64)>,
        demands: Vec<u64>,
        capacity: u64,
    ) -> Result<Self, ModelError> {
        if coords.len() != demands.len() {
            return Err(ModelError::LengthMismatch {
                coords: coords.len(),
                demands: demands.len(),
            });
        }
        if coords.len() < 2 {
            return Err(ModelError::TooFewVertices);
        }
        if demands[0] != 0 {
            return Err(ModelError::DepotDemandNonzero(demands[0]));
        }
        for (i, &d) in demands.iter().enumerate() {
            if d > capacity {
                return Err(ModelError::DemandExceedsCapacity {
                    client: i,
                    demand: d,
                    capacity,
                });
            }
        }
        Ok(CvrpBase {
            name: name.into(),
            coords,
            demands,
            capacity,
        })
    }

    /// Number of clients, excluding the depot.
    pub fn client_count(&self) -> usize {
        self.coords.len() - 1
    }
}

/// Symmetric integer distance matrix with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u64>,
}

impl DistanceMatrix {
    /// Builds the matrix of pairwise Euclidean distances rounded half-up to
    /// the nearest integer (the TSPLIB EUC_2D convention).
    pub fn from_coords(coords: &[(i64, i64)]) -> Self {
        assert!(coords.len() >= 2, "need at least two points");
        let n = coords.len();
        let mut d = vec![0u64; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = (coords[i].0 - coords[j].0) as f64;
                let dy = (coords[i].1 - coords[j].1) as f64;
                let dist = (dx * dx + dy * dy).sqrt();
                let rounded = (dist + 0.5).floor() as u64;
                d[i * n + j] = rounded;
                d[j * n + i] = rounded;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> u64 {
        self.d[i * self.n + j]
    }
}

/// Depot -> c1 -> ... -> ck -> depot edge sum. An empty route has distance 0.
pub fn route_distance(clients: &[ClientId], matrix: &DistanceMatrix) -> Result<u64, ModelError> {
    for &c in clients {
        if c >= matrix.n() {
            return Err(ModelError::InvalidClient(c, matrix.n()));
        }
    }
    let Some((&first, &last)) = clients.first().zip(clients.last()) else {
        return Ok(0);
    };
    let mut total = matrix.dist(0, first);
    for pair in clients.windows(2) {
        total += matrix.dist(pair[0], pair[1]);
    }
    total += matrix.dist(last, 0);
    Ok(total)
}

/// The clients requested in one period and their demands for that period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodDemand {
    pub clients: Vec<ClientId>,
    pub demands: Vec<u64>,
}

impl PeriodDemand {
    pub fn demand_of(&self, client: ClientId) -> Option<u64> {
        self.clients
            .iter()
            .position(|&c| c == client)
            .map(|i| self.demands[i])
    }
}

/// A multi-period instance: the seed CVRP plus one demand realization per
/// period and (once fixed) the number of drivers available over the horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MvrpbInstance {
    pub name: String,
    pub base: CvrpBase,
    pub periods: Vec<PeriodDemand>,
    /// Driver count `m`; `None` until derived from phase-1 plans or set.
    pub drivers: Option<u32>,
}

impl MvrpbInstance {
    pub fn horizon(&self) -> usize {
        self.periods.len()
    }

    pub fn with_drivers(mut self, m: u32) -> Self {
        self.drivers = Some(m);
        self
    }

    /// Checks the structural invariants: known clients, per-period demands
    /// within capacity, distinct clients per period, non-empty horizon.
    pub fn check(&self) -> Result<(), ModelError> {
        if self.periods.is_empty() {
            return Err(ModelError::TooFewVertices);
        }
        let n = self.base.coords.len();
        for period in &self.periods {
            if period.clients.len() != period.demands.len() {
                return Err(ModelError::LengthMismatch {
                    coords: period.clients.len(),
                    demands: period.demands.len(),
                });
            }
            let mut seen = vec![false; n];
            for (&c, &q) in period.clients.iter().zip(&period.demands) {
                if c == 0 || c >= n {
                    return Err(ModelError::InvalidClient(c, n));
                }
                if seen[c] {
                    return Err(ModelError::InvalidClient(c, n));
                }
                seen[c] = true;
                if q > self.base.capacity {
                    return Err(ModelError::DemandExceedsCapacity {
                        client: c,
                        demand: q,
                        capacity: self.base.capacity,
                    });
                }
            }
        }
        Ok(())
    }
}

/// One vehicle route: an ordered client sequence with its precomputed
/// distance and load under the owning period's demands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub clients: Vec<ClientId>,
    pub distance: u64,
    pub load: u64,
}

/// All routes of one period, with the total distance and whether the routing
/// was proven optimal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodPlan {
    pub routes: Vec<Route>,
    pub total_distance: u64,
    pub proven_optimal: bool,
}

impl PeriodPlan {
    pub fn new(routes: Vec<Route>, proven_optimal: bool) -> Self {
        let total_distance = routes.iter().map(|r| r.distance).sum();
        PeriodPlan {
            routes,
            total_distance,
            proven_optimal,
        }
    }
}

/// Route-to-driver mapping: `drivers_by_period[t][r]` is the driver index
/// (0..m) operating route `r` of period `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub drivers_by_period: Vec<Vec<u32>>,
}

impl Assignment {
    /// Total distance per driver over the horizon.
    pub fn driver_loads(&self, plans: &[PeriodPlan], m: u32) -> Vec<u64> {
        let mut loads = vec![0u64; m as usize];
        for (plan, drivers) in plans.iter().zip(&self.drivers_by_period) {
            for (route, &driver) in plan.routes.iter().zip(drivers) {
                loads[driver as usize] += route.distance;
            }
        }
        loads
    }

    pub fn max_load(&self, plans: &[PeriodPlan], m: u32) -> u64 {
        self.driver_loads(plans, m).into_iter().max().unwrap_or(0)
    }
}
