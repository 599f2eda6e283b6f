//! Maximum-weight bipartite matching via the Hungarian method over any
//! [`Weight`], followed by a deterministic choice among the optima.

use std::collections::VecDeque;

use super::weight::Weight;
use crate::model::Matching;

/// Returns a matching of maximum total weight. Non-edges behave as
/// zero-weight slack, so the matching need not be perfect.
///
/// Among all optima the result is the one that, scanning agents in index
/// order, gives each agent the lowest-index object it can have (leaving it
/// unmatched ranks after every object).
///
/// Panics if an edge endpoint is `>= n` or a weight is negative.
pub fn max_weight_matching<W: Weight>(n: usize, edges: &[(usize, usize, W)]) -> Matching {
    if n == 0 {
        return Matching::empty(0);
    }
    let zero = W::zero();
    let mut weight: Vec<Option<W>> = vec![None; n * n];
    for (a, o, w) in edges {
        assert!(*a < n && *o < n, "edge ({a}, {o}) out of range for n = {n}");
        assert!(*w >= zero, "negative edge weight {w:?}");
        let slot = &mut weight[a * n + o];
        match slot {
            Some(old) if *old >= *w => {}
            _ => *slot = Some(w.clone()),
        }
    }
    let real: Vec<bool> = weight.iter().map(Option::is_some).collect();
    let cost: Vec<W> = weight
        .into_iter()
        .map(|w| w.map_or_else(W::zero, |w| w.neg()))
        .collect();

    let (row, u, v) = hungarian(n, &cost);

    let mut tight = vec![false; n * n];
    let mut scratch = W::zero();
    for i in 0..n {
        for j in 0..n {
            scratch.clone_from(&u[i + 1]);
            scratch.add_assign(&v[j + 1]);
            tight[i * n + j] = scratch == cost[i * n + j];
        }
    }
    debug_assert!((0..n).all(|i| tight[i * n + row[i]]));

    let row = Refiner::new(n, &real, &tight, row).run();
    let mut m = Matching::empty(n);
    for (a, &o) in row.iter().enumerate() {
        if real[a * n + o] {
            m.insert(a, o).expect("assignment is a permutation");
        }
    }
    m
}

/// Square min-cost assignment (1-indexed potentials). Returns the
/// row-to-column assignment and the dual potentials `u`, `v`.
fn hungarian<W: Weight>(n: usize, cost: &[W]) -> (Vec<usize>, Vec<W>, Vec<W>) {
    let mut u = vec![W::zero(); n + 1];
    let mut v = vec![W::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv: Vec<Option<W>> = vec![None; n + 1];
    let mut used = vec![false; n + 1];
    let mut cur = W::zero();
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = None);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut j1 = 0usize;
            let mut best: Option<usize> = None;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                cur.clone_from(&cost[(i0 - 1) * n + (j - 1)]);
                cur.sub_assign(&u[i0]);
                cur.sub_assign(&v[j]);
                let improve = match &minv[j] {
                    None => true,
                    Some(m) => cur < *m,
                };
                if improve {
                    match &mut minv[j] {
                        Some(m) => m.clone_from(&cur),
                        slot => *slot = Some(cur.clone()),
                    }
                    way[j] = j0;
                }
                let better = match best {
                    None => true,
                    Some(b) => minv[j] < minv[b],
                };
                if better {
                    best = Some(j);
                    j1 = j;
                }
            }
            let delta = minv[j1].clone().expect("some column is unused");
            for j in 0..=n {
                if used[j] {
                    u[p[j]].add_assign(&delta);
                    v[j].sub_assign(&delta);
                } else if let Some(m) = &mut minv[j] {
                    m.sub_assign(&delta);
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row = vec![0usize; n];
    for j in 1..=n {
        row[p[j] - 1] = j - 1;
    }
    (row, u, v)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fix {
    Free,
    Exact(usize),
    NonEdge,
}

/// Walks agents in order and pins each to the best object still reachable
/// through alternating paths in the tight subgraph.
struct Refiner<'a> {
    n: usize,
    real: &'a [bool],
    adj: Vec<Vec<usize>>,
    row: Vec<usize>,
    col: Vec<usize>,
    fix: Vec<Fix>,
}

impl<'a> Refiner<'a> {
    fn new(n: usize, real: &'a [bool], tight: &[bool], row: Vec<usize>) -> Self {
        let adj = (0..n)
            .map(|i| (0..n).filter(|&j| tight[i * n + j]).collect())
            .collect();
        let mut col = vec![0usize; n];
        for (i, &j) in row.iter().enumerate() {
            col[j] = i;
        }
        Refiner { n, real, adj, row, col, fix: vec![Fix::Free; n] }
    }

    fn allowed(&self, agent: usize, object: usize) -> bool {
        match self.fix[agent] {
            Fix::Free => true,
            Fix::Exact(j) => j == object,
            Fix::NonEdge => !self.real[agent * self.n + object],
        }
    }

    fn run(mut self) -> Vec<usize> {
        let n = self.n;
        for i in 0..n {
            let current = self.row[i];
            let current_real = self.real[i * n + current];
            let candidates: Vec<usize> = self.adj[i]
                .iter()
                .copied()
                .filter(|&j| self.real[i * n + j] && (!current_real || j < current))
                .collect();
            let mut pinned = false;
            for j in candidates {
                if self.try_move(i, j) {
                    self.fix[i] = Fix::Exact(j);
                    pinned = true;
                    break;
                }
            }
            if !pinned {
                self.fix[i] = if current_real { Fix::Exact(current) } else { Fix::NonEdge };
            }
        }
        self.row
    }

    /// Moves agent `i` onto object `j` if the displaced agent can reach the
    /// object `i` vacates along an allowed alternating path.
    fn try_move(&mut self, i: usize, j: usize) -> bool {
        let n = self.n;
        let vacated = self.row[i];
        let start = self.col[j];
        let mut taker = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[j] = true;
        let mut queue = VecDeque::from([start]);
        let mut found = false;
        'bfs: while let Some(x) = queue.pop_front() {
            for &o in &self.adj[x] {
                if seen[o] || !self.allowed(x, o) {
                    continue;
                }
                seen[o] = true;
                taker[o] = x;
                if o == vacated {
                    found = true;
                    break 'bfs;
                }
                queue.push_back(self.col[o]);
            }
        }
        if !found {
            return false;
        }
        let mut o = vacated;
        loop {
            let x = taker[o];
            let prev = self.row[x];
            self.row[x] = o;
            self.col[o] = x;
            if x == start {
                break;
            }
            o = prev;
        }
        self.row[i] = j;
        self.col[j] = i;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::weight::CompositeWeight;

    fn brute_best(n: usize, w: &[Option<i64>]) -> i64 {
        fn go(a: usize, n: usize, w: &[Option<i64>], used: &mut [bool]) -> i64 {
            if a == n {
                return 0;
            }
            let mut best = go(a + 1, n, w, used);
            for o in 0..n {
                if let (false, Some(x)) = (used[o], w[a * n + o]) {
                    used[o] = true;
                    best = best.max(x + go(a + 1, n, w, used));
                    used[o] = false;
                }
            }
            best
        }
        go(0, n, w, &mut vec![false; n])
    }

    #[test]
    fn empty_and_single_edge() {
        assert!(max_weight_matching::<i64>(3, &[]).is_empty());
        let m = max_weight_matching(2, &[(0, 0, 5i64)]);
        assert_eq!(m.pairs().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn table1_pareto_weights() {
        let vals = [[0.9, 0.1, 0.0], [0.9, 0.1, 0.0], [0.51, 0.49, 0.0]];
        let mut edges = Vec::new();
        for (a, row) in vals.iter().enumerate() {
            for (o, &v) in row.iter().enumerate() {
                edges.push((a, o, CompositeWeight::new(vec![], v)));
            }
        }
        let m = max_weight_matching(3, &edges);
        assert_eq!(m.object_of(2), Some(1));
        assert_eq!(m.object_of(0), Some(0));
        assert_eq!(m.object_of(1), Some(2));
    }

    #[test]
    fn tie_break_prefers_low_objects_for_early_agents() {
        // Every perfect matching has weight 2.
        let edges = [(0, 0, 1i64), (0, 1, 1), (1, 0, 1), (1, 1, 1)];
        let m = max_weight_matching(2, &edges);
        assert_eq!(m.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn tie_break_matches_early_agent_over_late() {
        // Either agent 0 or agent 1 takes object 0.
        let edges = [(1, 0, 3i64), (0, 0, 3)];
        let m = max_weight_matching(2, &edges);
        assert_eq!(m.pairs().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn zero_weight_edges_may_be_used() {
        let m = max_weight_matching(2, &[(0, 1, 0i64), (1, 0, 0)]);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn matches_brute_force_on_small_grids() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.random_range(1..=5);
            let mut w = vec![None; n * n];
            let mut edges = Vec::new();
            for a in 0..n {
                for o in 0..n {
                    if rng.random_bool(0.6) {
                        let x = rng.random_range(0..4i64);
                        w[a * n + o] = Some(x);
                        edges.push((a, o, x));
                    }
                }
            }
            let m = max_weight_matching(n, &edges);
            let got: i64 = m.pairs().map(|(a, o)| w[a * n + o].unwrap()).sum();
            assert_eq!(got, brute_best(n, &w));
        }
    }
}
