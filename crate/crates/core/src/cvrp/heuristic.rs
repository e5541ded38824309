//! Metaheuristic CVRP solving for one period: Clarke-Wright savings
//! construction, first-improvement local search over relocate / swap /
//! intra-route 2-opt / inter-route 2-opt*, and seeded ruin-and-recreate
//! restarts that keep the incumbent.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cvrp::{PeriodView, SolveBudget, SolveError};
use crate::model::{PeriodPlan, Route};

/// Best plan found within the budget. Deterministic for a given seed as long
/// as the time limit does not cut the restart loop short.
pub fn solve_heuristic(
    view: &PeriodView<'_>,
    budget: &SolveBudget,
    seed: u64,
) -> Result<PeriodPlan, SolveError> {
    view.check_client_demands()?;
    let k = view.clients.len();
    if k == 0 {
        return Ok(PeriodPlan::new(Vec::new(), false));
    }

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut current = Working::savings_construction(view);
    current.local_search();
    let mut best = current.clone();

    for _ in 0..budget.restarts {
        if let Some(limit) = budget.time_limit {
            if start.elapsed() > limit {
                break;
            }
        }
        current.perturb(&mut rng);
        current.local_search();
        if current.total() < best.total() {
            best = current.clone();
        } else {
            current = best.clone();
        }
    }
    Ok(best.into_plan())
}

/// Mutable solution state over local client indices 0..k.
#[derive(Clone)]
struct Working<'a> {
    view: &'a PeriodView<'a>,
    routes: Vec<Vec<usize>>,
    loads: Vec<u64>,
    dists: Vec<u64>,
}

impl<'a> Working<'a> {
    fn total(&self) -> u64 {
        self.dists.iter().sum()
    }

    /// Distance between two local clients, `None` meaning the depot.
    #[inline]
    fn d(&self, a: Option<usize>, b: Option<usize>) -> u64 {
        let ga = a.map_or(0, |i| self.view.clients[i]);
        let gb = b.map_or(0, |i| self.view.clients[i]);
        self.view.matrix.dist(ga, gb)
    }

    fn route_dist(&self, seq: &[usize]) -> u64 {
        let Some((&first, &last)) = seq.first().zip(seq.last()) else {
            return 0;
        };
        let mut total = self.d(None, Some(first));
        for w in seq.windows(2) {
            total += self.d(Some(w[0]), Some(w[1]));
        }
        total + self.d(Some(last), None)
    }

    fn route_load(&self, seq: &[usize]) -> u64 {
        seq.iter().map(|&i| self.view.demands[i]).sum()
    }

    fn refresh(&mut self, r: usize) {
        self.loads[r] = self.route_load(&self.routes[r]);
        self.dists[r] = self.route_dist(&self.routes[r]);
    }

    fn drop_empty(&mut self) {
        let mut r = 0;
        while r < self.routes.len() {
            if self.routes[r].is_empty() {
                self.routes.remove(r);
                self.loads.remove(r);
                self.dists.remove(r);
            } else {
                r += 1;
            }
        }
    }

    /// Parallel-savings construction: start from singleton routes and merge
    /// endpoint pairs by decreasing saving while capacity allows.
    fn savings_construction(view: &'a PeriodView<'a>) -> Self {
        let k = view.clients.len();
        let mut w = Working {
            view,
            routes: (0..k).map(|i| vec![i]).collect(),
            loads: (0..k).map(|i| view.demands[i]).collect(),
            dists: Vec::new(),
        };
        w.dists = (0..k).map(|i| 2 * w.d(None, Some(i))).collect();

        let mut savings = Vec::with_capacity(k * (k.saturating_sub(1)) / 2);
        for i in 0..k {
            for j in (i + 1)..k {
                let s = w.d(None, Some(i)) as i64 + w.d(None, Some(j)) as i64
                    - w.d(Some(i), Some(j)) as i64;
                if s > 0 {
                    savings.push((s, i, j));
                }
            }
        }
        savings.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut route_of: Vec<usize> = (0..k).collect();
        for &(_, i, j) in &savings {
            let (ra, rb) = (route_of[i], route_of[j]);
            if ra == rb || w.loads[ra] + w.loads[rb] > view.capacity {
                continue;
            }
            let a_end = *w.routes[ra].last().unwrap() == i || w.routes[ra][0] == i;
            let b_end = *w.routes[rb].last().unwrap() == j || w.routes[rb][0] == j;
            if !a_end || !b_end {
                continue;
            }
            if w.routes[ra][0] == i {
                w.routes[ra].reverse();
            }
            if *w.routes[rb].last().unwrap() == j {
                w.routes[rb].reverse();
            }
            let tail = std::mem::take(&mut w.routes[rb]);
            for &c in &tail {
                route_of[c] = ra;
            }
            w.routes[ra].extend(tail);
            w.loads[ra] += w.loads[rb];
            w.loads[rb] = 0;
        }
        w.drop_empty();
        for r in 0..w.routes.len() {
            w.refresh(r);
        }
        w
    }

    /// First-improvement sweeps over all four neighborhoods until no move
    /// improves the total distance. Strictly decreasing integer totals, so
    /// this always terminates.
    fn local_search(&mut self) {
        loop {
            if self.try_relocate() || self.try_swap() || self.try_two_opt() || self.try_two_opt_star()
            {
                continue;
            }
            break;
        }
        self.drop_empty();
    }

    fn try_relocate(&mut self) -> bool {
        let nr = self.routes.len();
        for a in 0..nr {
            for p in 0..self.routes[a].len() {
                let c = self.routes[a][p];
                let prev = if p == 0 { None } else { Some(self.routes[a][p - 1]) };
                let next = self.routes[a].get(p + 1).copied();
                let gain = self.d(prev, Some(c)) as i64 + self.d(Some(c), next) as i64
                    - self.d(prev, next) as i64;
                for b in 0..nr {
                    if b == a {
                        // intra-route move: try every other slot by rebuild
                        if self.try_intra_relocate(a, p) {
                            return true;
                        }
                        continue;
                    }
                    if self.loads[b] + self.view.demands[c] > self.view.capacity {
                        continue;
                    }
                    for q in 0..=self.routes[b].len() {
                        let u = if q == 0 { None } else { Some(self.routes[b][q - 1]) };
                        let v = self.routes[b].get(q).copied();
                        let cost = self.d(u, Some(c)) as i64 + self.d(Some(c), v) as i64
                            - self.d(u, v) as i64;
                        if cost - gain < 0 {
                            self.routes[a].remove(p);
                            self.routes[b].insert(q, c);
                            self.refresh(a);
                            self.refresh(b);
                            self.drop_empty();
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn try_intra_relocate(&mut self, a: usize, p: usize) -> bool {
        let len = self.routes[a].len();
        if len < 3 {
            return false;
        }
        let old = self.dists[a];
        let mut seq = self.routes[a].clone();
        let c = seq.remove(p);
        for q in 0..len {
            if q == p {
                continue;
            }
            seq.insert(q, c);
            if self.route_dist(&seq) < old {
                self.routes[a] = seq;
                self.refresh(a);
                return true;
            }
            seq.remove(q);
        }
        false
    }

    fn try_swap(&mut self) -> bool {
        let nr = self.routes.len();
        for a in 0..nr {
            for p in 0..self.routes[a].len() {
                let c1 = self.routes[a][p];
                for b in a..nr {
                    let q_start = if b == a { p + 1 } else { 0 };
                    for q in q_start..self.routes[b].len() {
                        let c2 = self.routes[b][q];
                        if b == a {
                            if self.try_intra_swap(a, p, q) {
                                return true;
                            }
                            continue;
                        }
                        let la = self.loads[a] - self.view.demands[c1] + self.view.demands[c2];
                        let lb = self.loads[b] - self.view.demands[c2] + self.view.demands[c1];
                        if la > self.view.capacity || lb > self.view.capacity {
                            continue;
                        }
                        let pa = if p == 0 { None } else { Some(self.routes[a][p - 1]) };
                        let na = self.routes[a].get(p + 1).copied();
                        let pb = if q == 0 { None } else { Some(self.routes[b][q - 1]) };
                        let nb = self.routes[b].get(q + 1).copied();
                        let delta = self.d(pa, Some(c2)) as i64
                            + self.d(Some(c2), na) as i64
                            + self.d(pb, Some(c1)) as i64
                            + self.d(Some(c1), nb) as i64
                            - self.d(pa, Some(c1)) as i64
                            - self.d(Some(c1), na) as i64
                            - self.d(pb, Some(c2)) as i64
                            - self.d(Some(c2), nb) as i64;
                        if delta < 0 {
                            self.routes[a][p] = c2;
                            self.routes[b][q] = c1;
                            self.refresh(a);
                            self.refresh(b);
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn try_intra_swap(&mut self, a: usize, p: usize, q: usize) -> bool {
        let old = self.dists[a];
        let mut seq = self.routes[a].clone();
        seq.swap(p, q);
        if self.route_dist(&seq) < old {
            self.routes[a] = seq;
            self.refresh(a);
            return true;
        }
        false
    }

    fn try_two_opt(&mut self) -> bool {
        for a in 0..self.routes.len() {
            let len = self.routes[a].len();
            if len < 2 {
                continue;
            }
            for cut1 in 0..len {
                for cut2 in (cut1 + 1)..=len {
                    if cut1 == 0 && cut2 == len {
                        continue; // full reversal, symmetric
                    }
                    let u1 = if cut1 == 0 { None } else { Some(self.routes[a][cut1 - 1]) };
                    let v1 = Some(self.routes[a][cut1]);
                    let u2 = Some(self.routes[a][cut2 - 1]);
                    let v2 = self.routes[a].get(cut2).copied();
                    let delta = self.d(u1, u2) as i64 + self.d(v1, v2) as i64
                        - self.d(u1, v1) as i64
                        - self.d(u2, v2) as i64;
                    if delta < 0 {
                        self.routes[a][cut1..cut2].reverse();
                        self.refresh(a);
                        return true;
                    }
                }
            }
        }
        false
    }

    fn try_two_opt_star(&mut self) -> bool {
        let nr = self.routes.len();
        for a in 0..nr {
            for b in (a + 1)..nr {
                let (la, lb) = (self.routes[a].len(), self.routes[b].len());
                for cut_a in 0..=la {
                    let tail_a_load: u64 = self.routes[a][cut_a..]
                        .iter()
                        .map(|&i| self.view.demands[i])
                        .sum();
                    for cut_b in 0..=lb {
                        if cut_a == la && cut_b == lb {
                            continue;
                        }
                        if cut_a == 0 && cut_b == 0 {
                            continue; // swaps whole routes, relabeling only
                        }
                        let tail_b_load: u64 = self.routes[b][cut_b..]
                            .iter()
                            .map(|&i| self.view.demands[i])
                            .sum();
                        let new_a = self.loads[a] - tail_a_load + tail_b_load;
                        let new_b = self.loads[b] - tail_b_load + tail_a_load;
                        if new_a > self.view.capacity || new_b > self.view.capacity {
                            continue;
                        }
                        let end_a = if cut_a == 0 { None } else { Some(self.routes[a][cut_a - 1]) };
                        let end_b = if cut_b == 0 { None } else { Some(self.routes[b][cut_b - 1]) };
                        let head_a = self.routes[a].get(cut_a).copied();
                        let head_b = self.routes[b].get(cut_b).copied();
                        let delta = self.d(end_a, head_b) as i64 + self.d(end_b, head_a) as i64
                            - self.d(end_a, head_a) as i64
                            - self.d(end_b, head_b) as i64;
                        if delta < 0 {
                            let tail_a: Vec<usize> = self.routes[a].split_off(cut_a);
                            let tail_b: Vec<usize> = self.routes[b].split_off(cut_b);
                            self.routes[a].extend(tail_b);
                            self.routes[b].extend(tail_a);
                            self.refresh(a);
                            self.refresh(b);
                            self.drop_empty();
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Ruin-and-recreate: remove a fifth of the clients at random and
    /// reinsert them (decreasing demand) at their cheapest feasible slot,
    /// opening a new route only when no existing route can take them.
    fn perturb(&mut self, rng: &mut ChaCha8Rng) {
        let k = self.view.clients.len();
        if k < 3 {
            return;
        }
        let remove_n = (k / 5).max(2).min(k - 1);
        let mut pool: Vec<usize> = (0..k).collect();
        for i in 0..remove_n {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        let mut removed: Vec<usize> = pool[..remove_n].to_vec();
        for route in &mut self.routes {
            route.retain(|c| !removed.contains(c));
        }
        self.drop_empty();
        for r in 0..self.routes.len() {
            self.refresh(r);
        }
        removed.sort_by(|&x, &y| {
            self.view.demands[y]
                .cmp(&self.view.demands[x])
                .then(x.cmp(&y))
        });
        for c in removed {
            self.insert_cheapest(c);
        }
    }

    fn insert_cheapest(&mut self, c: usize) {
        let mut best: Option<(i64, usize, usize)> = None;
        for r in 0..self.routes.len() {
            if self.loads[r] + self.view.demands[c] > self.view.capacity {
                continue;
            }
            for q in 0..=self.routes[r].len() {
                let u = if q == 0 { None } else { Some(self.routes[r][q - 1]) };
                let v = self.routes[r].get(q).copied();
                let cost =
                    self.d(u, Some(c)) as i64 + self.d(Some(c), v) as i64 - self.d(u, v) as i64;
                if best.is_none_or(|(bc, _, _)| cost < bc) {
                    best = Some((cost, r, q));
                }
            }
        }
        match best {
            Some((_, r, q)) => {
                self.routes[r].insert(q, c);
                self.refresh(r);
            }
            None => {
                self.routes.push(vec![c]);
                self.loads.push(self.view.demands[c]);
                self.dists.push(2 * self.d(None, Some(c)));
            }
        }
    }

    /// Canonical plan: global ids, each route oriented with its smaller
    /// endpoint first, routes sorted by first client.
    fn into_plan(mut self) -> PeriodPlan {
        self.drop_empty();
        let mut routes: Vec<Route> = self
            .routes
            .iter()
            .map(|seq| {
                let mut clients: Vec<usize> =
                    seq.iter().map(|&i| self.view.clients[i]).collect();
                if clients.first() > clients.last() {
                    clients.reverse();
                }
                Route {
                    distance: self.route_dist(seq),
                    load: self.route_load(seq),
                    clients,
                }
            })
            .collect();
        routes.sort_by_key(|r| r.clients[0]);
        PeriodPlan::new(routes, false)
    }
}
