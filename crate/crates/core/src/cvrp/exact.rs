//! Exact small-instance CVRP solving: optimal tours for every
//! capacity-feasible client subset by dynamic programming over bitmasks,
//! then a minimum-cost cover by set-partition DP.

use std::time::Instant;

use crate::cvrp::{PeriodView, SolveError, EXACT_CLIENT_CAP};
use crate::model::{PeriodPlan, Route};

const INF: u64 = u64::MAX / 4;

/// Provably minimum-distance plan for one period. `max_clients` caps the
/// client count (bitmask width); `deadline` aborts with `Timeout`.
pub fn solve_exact_small(
    view: &PeriodView<'_>,
    max_clients: usize,
    deadline: Option<Instant>,
) -> Result<PeriodPlan, SolveError> {
    let k = view.clients.len();
    if k > max_clients || k > EXACT_CLIENT_CAP.max(max_clients) {
        return Err(SolveError::TooLarge {
            clients: k,
            cap: max_clients,
        });
    }
    view.check_client_demands()?;
    if k == 0 {
        return Ok(PeriodPlan::new(Vec::new(), true));
    }

    let full: usize = (1 << k) - 1;
    let ld = |i: usize, j: usize| view.matrix.dist(view.clients[i], view.clients[j]);
    let d0 = |i: usize| view.matrix.dist(0, view.clients[i]);

    // subset loads; a subset of a feasible subset is feasible
    let mut load = vec![0u64; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        load[mask] = load[mask & (mask - 1)] + view.demands[low];
    }

    // tsp[mask * k + last]: cheapest depot -> (visit mask) -> last path
    let mut tsp = vec![INF; (full + 1) * k];
    for i in 0..k {
        if load[1 << i] <= view.capacity {
            tsp[(1 << i) * k + i] = d0(i);
        }
    }
    for mask in 1..=full {
        if load[mask] > view.capacity {
            continue;
        }
        if mask % 512 == 0 {
            if let Some(dl) = deadline {
                if Instant::now() > dl {
                    return Err(SolveError::Timeout);
                }
            }
        }
        for last in 0..k {
            let cur = tsp[mask * k + last];
            if cur >= INF || mask & (1 << last) == 0 {
                continue;
            }
            let mut rest = full & !mask;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let next = mask | (1 << j);
                if load[next] > view.capacity {
                    continue;
                }
                let cand = cur + ld(last, j);
                let slot = &mut tsp[next * k + j];
                if cand < *slot {
                    *slot = cand;
                }
            }
        }
    }

    // closed-tour cost per feasible subset
    let mut tour = vec![INF; full + 1];
    tour[0] = 0;
    for mask in 1..=full {
        if load[mask] > view.capacity {
            continue;
        }
        let mut best = INF;
        for last in 0..k {
            if mask & (1 << last) != 0 {
                let c = tsp[mask * k + last];
                if c < INF && c + d0(last) < best {
                    best = c + d0(last);
                }
            }
        }
        tour[mask] = best;
    }

    // partition DP over the client set; each block is one route
    let mut best = vec![INF; full + 1];
    let mut choice = vec![0usize; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let low = 1usize << mask.trailing_zeros();
        let mut sub = mask;
        while sub != 0 {
            if sub & low != 0 && tour[sub] < INF && best[mask ^ sub] < INF {
                let cand = tour[sub] + best[mask ^ sub];
                if cand < best[mask] {
                    best[mask] = cand;
                    choice[mask] = sub;
                }
            }
            sub = (sub - 1) & mask;
        }
    }
    debug_assert!(best[full] < INF, "singletons are always feasible");

    // extract routes and their tour orders
    let mut routes = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let sub = choice[mask];
        routes.push(extract_route(view, &tsp, sub, tour[sub], k));
        mask ^= sub;
    }
    routes.sort_by_key(|r: &Route| r.clients[0]);
    Ok(PeriodPlan::new(routes, true))
}

/// Rebuilds the optimal visiting order of one subset by walking the DP table
/// backwards from the argmin end vertex.
fn extract_route(view: &PeriodView<'_>, tsp: &[u64], sub: usize, cost: u64, k: usize) -> Route {
    let ld = |i: usize, j: usize| view.matrix.dist(view.clients[i], view.clients[j]);
    let d0 = |i: usize| view.matrix.dist(0, view.clients[i]);

    let mut last = usize::MAX;
    for i in 0..k {
        if sub & (1 << i) != 0 && tsp[sub * k + i] + d0(i) == cost {
            last = i;
            break;
        }
    }
    debug_assert!(last != usize::MAX);

    let mut order = vec![last];
    let mut mask = sub;
    while mask.count_ones() > 1 {
        let target = tsp[mask * k + last];
        let prev_mask = mask & !(1 << last);
        let mut prev = usize::MAX;
        for i in 0..k {
            if prev_mask & (1 << i) != 0 && tsp[prev_mask * k + i] + ld(i, last) == target {
                prev = i;
                break;
            }
        }
        debug_assert!(prev != usize::MAX);
        order.push(prev);
        mask = prev_mask;
        last = prev;
    }
    order.reverse();

    let load = order.iter().map(|&i| view.demands[i]).sum();
    let mut clients: Vec<usize> = order.into_iter().map(|i| view.clients[i]).collect();
    if clients.first() > clients.last() {
        clients.reverse();
    }
    Route {
        clients,
        distance: cost,
        load,
    }
}
