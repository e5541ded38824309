//! Shared test fixtures and independent reference implementations. The
//! oracles here deliberately avoid the library's solver code paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mvrpb::model::{Assignment, CvrpBase, DistanceMatrix, PeriodPlan, Route};

/// Exhaustive CVRP reference: enumerates every permutation of the clients
/// and every way of cutting it into consecutive routes, keeps the
/// capacity-feasible ones, and returns the minimum total distance.
/// Factorial time; callers keep the client count at 7 or below.
pub fn cvrp_brute_force(
    matrix: &DistanceMatrix,
    capacity: u64,
    clients: &[usize],
    demands: &[u64],
) -> u64 {
    let k = clients.len();
    assert!(k >= 1 && k <= 8, "oracle is factorial time");
    let mut order: Vec<usize> = (0..k).collect();
    let mut best = u64::MAX;
    permute(&mut order, 0, &mut |perm| {
        for cuts in 0u32..(1 << (k - 1)) {
            let mut total = 0u64;
            let mut load = 0u64;
            let mut prev: Option<usize> = None;
            let mut feasible = true;
            for (i, &p) in perm.iter().enumerate() {
                let c = clients[p];
                match prev {
                    None => {
                        total += matrix.dist(0, c);
                        load = demands[p];
                    }
                    Some(pc) => {
                        total += matrix.dist(pc, c);
                        load += demands[p];
                    }
                }
                if load > capacity {
                    feasible = false;
                    break;
                }
                let cut_here = i + 1 == k || (cuts >> i) & 1 == 1;
                if cut_here {
                    total += matrix.dist(c, 0);
                    prev = None;
                } else {
                    prev = Some(c);
                }
            }
            if feasible && total < best {
                best = total;
            }
        }
    });
    best
}

fn permute<F: FnMut(&[usize])>(arr: &mut Vec<usize>, i: usize, visit: &mut F) {
    if i == arr.len() {
        visit(arr);
        return;
    }
    for j in i..arr.len() {
        arr.swap(i, j);
        permute(arr, i + 1, visit);
        arr.swap(i, j);
    }
}

/// Synthetic Euclidean base instance with seeded coordinates and demands.
pub fn synthetic_base(
    name: &str,
    n_clients: usize,
    coord_range: i64,
    demand_range: (u64, u64),
    capacity: u64,
    seed: u64,
) -> CvrpBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![(coord_range / 2, coord_range / 2)];
    let mut demands = vec![0u64];
    for _ in 0..n_clients {
        coords.push((
            rng.random_range(0..=coord_range),
            rng.random_range(0..=coord_range),
        ));
        demands.push(rng.random_range(demand_range.0..=demand_range.1));
    }
    CvrpBase::new(name, coords, demands, capacity).unwrap()
}

/// Random allocation input within the acceptance bounds: T <= 4, at most 3
/// routes per period, integer distances <= 50, and m between the per-period
/// maximum and 3.
pub fn random_allocation(rng: &mut ChaCha8Rng) -> (Vec<PeriodPlan>, u32) {
    let t = rng.random_range(1..=4usize);
    let dists: Vec<Vec<u64>> = (0..t)
        .map(|_| {
            let r = rng.random_range(1..=3usize);
            (0..r).map(|_| rng.random_range(1..=50u64)).collect()
        })
        .collect();
    let max_routes = dists.iter().map(|p| p.len()).max().unwrap() as u32;
    let m = rng.random_range(max_routes..=3);
    (plans_from_distances(&dists), m)
}

pub fn plans_from_distances(dists: &[Vec<u64>]) -> Vec<PeriodPlan> {
    dists
        .iter()
        .map(|period| {
            PeriodPlan::new(
                period
                    .iter()
                    .enumerate()
                    .map(|(j, &d)| Route {
                        clients: vec![j + 1],
                        distance: d,
                        load: 1,
                    })
                    .collect(),
                true,
            )
        })
        .collect()
}

/// Structural witness check: every route of every period assigned to exactly
/// one driver, no driver with two routes in a period, and the maximum driver
/// load equal to `expected_max`.
pub fn assert_witness_valid(
    plans: &[PeriodPlan],
    m: u32,
    assignment: &Assignment,
    expected_max: u64,
) {
    assert_eq!(assignment.drivers_by_period.len(), plans.len());
    for (t, plan) in plans.iter().enumerate() {
        let drivers = &assignment.drivers_by_period[t];
        assert_eq!(drivers.len(), plan.routes.len(), "period {t} route count");
        let mut taken = vec![false; m as usize];
        for &k in drivers {
            assert!((k as usize) < m as usize, "driver index out of range");
            assert!(!taken[k as usize], "driver conflict in period {t}");
            taken[k as usize] = true;
        }
    }
    assert_eq!(assignment.max_load(plans, m), expected_max);
}
