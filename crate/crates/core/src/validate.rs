//! Solution validity checking. Violations are data, not errors: an empty
//! report means the (plans, assignment) pair is a feasible solution.

use std::fmt;

use crate::model::{Assignment, ClientId, DistanceMatrix, MvrpbInstance, PeriodPlan};
use crate::route_distance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Plan list length differs from the instance horizon.
    PlanCountMismatch { expected: usize, actual: usize },
    /// A requested client is not visited in its period.
    MissingClient { period: usize, client: ClientId },
    /// A client is visited by more than one route in a period.
    DuplicateVisit { period: usize, client: ClientId },
    /// A route visits a client not requested in that period.
    UnknownClient { period: usize, client: ClientId },
    /// Plans must not contain empty routes.
    EmptyRoute { period: usize, route: usize },
    /// Route load exceeds the vehicle capacity.
    CapacityExceeded {
        period: usize,
        route: usize,
        load: u64,
        capacity: u64,
    },
    /// Stored route distance disagrees with the distance matrix.
    DistanceMismatch {
        period: usize,
        route: usize,
        stored: u64,
        actual: u64,
    },
    /// Stored route load disagrees with the period demands.
    LoadMismatch {
        period: usize,
        route: usize,
        stored: u64,
        actual: u64,
    },
    /// Plan total differs from the sum of its route distances.
    TotalDistanceMismatch {
        period: usize,
        stored: u64,
        actual: u64,
    },
    /// Assignment does not map every route of the period exactly once.
    RouteCountMismatch {
        period: usize,
        expected: usize,
        actual: usize,
    },
    /// A driver operates two routes in the same period.
    DriverConflict { period: usize, driver: u32 },
    /// Driver index outside 0..m.
    DriverOutOfRange {
        period: usize,
        route: usize,
        driver: u32,
    },
    /// The instance has no driver count but an assignment was supplied.
    DriverCountUnset,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PlanCountMismatch { expected, actual } => {
                write!(f, "expected {expected} period plans, got {actual}")
            }
            Violation::MissingClient { period, client } => {
                write!(f, "period {period}: client {client} not visited")
            }
            Violation::DuplicateVisit { period, client } => {
                write!(f, "period {period}: client {client} visited more than once")
            }
            Violation::UnknownClient { period, client } => {
                write!(f, "period {period}: client {client} not requested")
            }
            Violation::EmptyRoute { period, route } => {
                write!(f, "period {period}: route {route} is empty")
            }
            Violation::CapacityExceeded {
                period,
                route,
                load,
                capacity,
            } => write!(
                f,
                "period {period}: route {route} load {load} exceeds capacity {capacity}"
            ),
            Violation::DistanceMismatch {
                period,
                route,
                stored,
                actual,
            } => write!(
                f,
                "period {period}: route {route} stored distance {stored}, recomputed {actual}"
            ),
            Violation::LoadMismatch {
                period,
                route,
                stored,
                actual,
            } => write!(
                f,
                "period {period}: route {route} stored load {stored}, recomputed {actual}"
            ),
            Violation::TotalDistanceMismatch {
                period,
                stored,
                actual,
            } => write!(
                f,
                "period {period}: stored total {stored}, recomputed {actual}"
            ),
            Violation::RouteCountMismatch {
                period,
                expected,
                actual,
            } => write!(
                f,
                "period {period}: assignment covers {actual} routes, plan has {expected}"
            ),
            Violation::DriverConflict { period, driver } => {
                write!(f, "period {period}: driver {driver} has two routes")
            }
            Violation::DriverOutOfRange {
                period,
                route,
                driver,
            } => write!(
                f,
                "period {period}: route {route} assigned to unknown driver {driver}"
            ),
            Violation::DriverCountUnset => {
                write!(f, "assignment supplied but instance has no driver count")
            }
        }
    }
}

/// Checks a full solution against the instance: coverage (every requested
/// client served by exactly one route), capacity, stored-field consistency,
/// and per-period driver uniqueness when an assignment is given.
pub fn validate_solution(
    instance: &MvrpbInstance,
    plans: &[PeriodPlan],
    assignment: Option<&Assignment>,
) -> Vec<Violation> {
    let mut report = Vec::new();
    if plans.len() != instance.horizon() {
        report.push(Violation::PlanCountMismatch {
            expected: instance.horizon(),
            actual: plans.len(),
        });
        return report;
    }
    let matrix = DistanceMatrix::from_coords(&instance.base.coords);
    let n = instance.base.coords.len();

    for (t, (plan, demand)) in plans.iter().zip(&instance.periods).enumerate() {
        let mut visits = vec![0u32; n];
        let mut plan_total = 0u64;
        for (r, route) in plan.routes.iter().enumerate() {
            if route.clients.is_empty() {
                report.push(Violation::EmptyRoute { period: t, route: r });
                continue;
            }
            let mut load = 0u64;
            let mut bad_client = false;
            for &c in &route.clients {
                if c >= n {
                    report.push(Violation::UnknownClient { period: t, client: c });
                    bad_client = true;
                    continue;
                }
                visits[c] += 1;
                match demand.demand_of(c) {
                    Some(q) => load += q,
                    None => {
                        report.push(Violation::UnknownClient { period: t, client: c });
                        bad_client = true;
                    }
                }
            }
            if !bad_client {
                if load > instance.base.capacity {
                    report.push(Violation::CapacityExceeded {
                        period: t,
                        route: r,
                        load,
                        capacity: instance.base.capacity,
                    });
                }
                if route.load != load {
                    report.push(Violation::LoadMismatch {
                        period: t,
                        route: r,
                        stored: route.load,
                        actual: load,
                    });
                }
                let actual = route_distance(&route.clients, &matrix)
                    .expect("indices already range-checked");
                if route.distance != actual {
                    report.push(Violation::DistanceMismatch {
                        period: t,
                        route: r,
                        stored: route.distance,
                        actual,
                    });
                }
            }
            plan_total += route.distance;
        }
        if plan.total_distance != plan_total {
            report.push(Violation::TotalDistanceMismatch {
                period: t,
                stored: plan.total_distance,
                actual: plan_total,
            });
        }
        for &c in &demand.clients {
            match visits[c] {
                0 => report.push(Violation::MissingClient { period: t, client: c }),
                1 => {}
                _ => report.push(Violation::DuplicateVisit { period: t, client: c }),
            }
        }
    }

    if let Some(asg) = assignment {
        let Some(m) = instance.drivers else {
            report.push(Violation::DriverCountUnset);
            return report;
        };
        for (t, plan) in plans.iter().enumerate() {
            let drivers = asg.drivers_by_period.get(t).map_or(&[][..], |d| &d[..]);
            if drivers.len() != plan.routes.len() {
                report.push(Violation::RouteCountMismatch {
                    period: t,
                    expected: plan.routes.len(),
                    actual: drivers.len(),
                });
                continue;
            }
            let mut taken = vec![false; m as usize];
            for (r, &driver) in drivers.iter().enumerate() {
                if driver >= m {
                    report.push(Violation::DriverOutOfRange {
                        period: t,
                        route: r,
                        driver,
                    });
                    continue;
                }
                if taken[driver as usize] {
                    report.push(Violation::DriverConflict { period: t, driver });
                } else {
                    taken[driver as usize] = true;
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CvrpBase, PeriodDemand, Route};

    fn two_route_instance() -> (MvrpbInstance, Vec<PeriodPlan>, Assignment) {
        let base = CvrpBase::new(
            "tiny",
            vec![(0, 0), (3, 4), (0, 7), (6, 0)],
            vec![0, 2, 3, 4],
            5,
        )
        .unwrap();
        let inst = MvrpbInstance {
            name: "tiny-T1".into(),
            base,
            periods: vec![PeriodDemand {
                clients: vec![1, 2, 3],
                demands: vec![2, 3, 4],
            }],
            drivers: Some(2),
        };
        let matrix = DistanceMatrix::from_coords(&inst.base.coords);
        let mk = |clients: Vec<ClientId>, load| Route {
            distance: route_distance(&clients, &matrix).unwrap(),
            clients,
            load,
        };
        let plans = vec![PeriodPlan::new(vec![mk(vec![1, 2], 5), mk(vec![3], 4)], false)];
        let asg = Assignment {
            drivers_by_period: vec![vec![0, 1]],
        };
        (inst, plans, asg)
    }

    #[test]
    fn feasible_solution_has_empty_report() {
        let (inst, plans, asg) = two_route_instance();
        assert!(validate_solution(&inst, &plans, Some(&asg)).is_empty());
    }

    #[test]
    fn dropped_client_reported_by_name() {
        let (inst, mut plans, asg) = two_route_instance();
        plans[0].routes[0].clients.pop(); // drop client 2
        let report = validate_solution(&inst, &plans, Some(&asg));
        assert!(report.contains(&Violation::MissingClient { period: 0, client: 2 }));
    }

    #[test]
    fn shared_driver_reported_once() {
        let (inst, plans, mut asg) = two_route_instance();
        asg.drivers_by_period[0] = vec![0, 0];
        let report = validate_solution(&inst, &plans, Some(&asg));
        assert_eq!(
            report,
            vec![Violation::DriverConflict { period: 0, driver: 0 }]
        );
    }

    #[test]
    fn stale_distance_field_detected() {
        let (inst, mut plans, _) = two_route_instance();
        plans[0].routes[1].distance += 1;
        plans[0].total_distance += 1;
        let report = validate_solution(&inst, &plans, None);
        assert!(matches!(report[0], Violation::DistanceMismatch { .. }));
    }

    #[test]
    fn empty_route_rejected() {
        let (inst, mut plans, _) = two_route_instance();
        plans[0].routes.push(Route {
            clients: vec![],
            distance: 0,
            load: 0,
        });
        let report = validate_solution(&inst, &plans, None);
        assert!(report.contains(&Violation::EmptyRoute { period: 0, route: 2 }));
    }

    #[test]
    fn capacity_overflow_detected() {
        let (inst, mut plans, _) = two_route_instance();
        // merge everything into one route: load 9 > Q=5
        let matrix = DistanceMatrix::from_coords(&inst.base.coords);
        let clients = vec![1, 2, 3];
        let route = Route {
            distance: route_distance(&clients, &matrix).unwrap(),
            clients,
            load: 9,
        };
        plans[0] = PeriodPlan::new(vec![route], false);
        let report = validate_solution(&inst, &plans, None);
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::CapacityExceeded { load: 9, .. })));
    }
}
