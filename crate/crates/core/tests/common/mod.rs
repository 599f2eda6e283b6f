#![allow(dead_code)]

use tqmatch::engine::{max_weight_matching, priority_matching};
use tqmatch::experiment::{cell_seed, gen_cell};
use tqmatch::oracle::{in_class, ENUM_MAX_N};
use tqmatch::{signature, Instance, Matching, PriorityKind, ValuationKind, ValuationProfile};

/// `count` seeded cells cycling through `sizes`.
pub fn corpus(
    seed: u64,
    count: usize,
    sizes: &[usize],
    kind: ValuationKind,
    tie_prob: f64,
    acc_prob: f64,
) -> Vec<(Instance, ValuationProfile)> {
    (0..count)
        .map(|i| {
            let n = sizes[i % sizes.len()];
            gen_cell(cell_seed(seed, n, i), n, tie_prob, acc_prob, kind).expect("corpus cell")
        })
        .collect()
}

/// Pareto optimality for any `n`: no matching keeps every matched agent
/// matched at a weakly better object while improving someone.
pub fn po_certificate(inst: &Instance, m: &Matching) -> bool {
    let n = inst.n();
    let keep = (n + 1) as i64;
    let cur = |a: usize| m.object_of(a).map(|o| inst.rank_of(a, o).unwrap());
    let mut edges = Vec::new();
    for (a, o, r) in inst.edges() {
        match cur(a) {
            Some(c) if r < c => edges.push((a, o, keep + 1)),
            Some(c) if r == c => edges.push((a, o, keep)),
            Some(_) => {}
            None => edges.push((a, o, 1)),
        }
    }
    let best = max_weight_matching(n, &edges);
    let score: i64 = best
        .pairs()
        .map(|(a, o)| edges.iter().find(|e| e.0 == a && e.1 == o).unwrap().2)
        .sum();
    score == keep * m.len() as i64
}

/// Class membership: enumeration when small, else the certificate for
/// Pareto optimality and the solver's signature for the rest.
pub fn member(inst: &Instance, m: &Matching, kind: PriorityKind) -> bool {
    if inst.n() <= ENUM_MAX_N {
        return in_class(inst, m, kind).unwrap();
    }
    match kind {
        PriorityKind::ParetoOnly => po_certificate(inst, m),
        _ => {
            let best = priority_matching(inst, kind, |_, _| 0.0).unwrap();
            signature(inst, m, kind).unwrap() == signature(inst, &best, kind).unwrap()
        }
    }
}

/// Agents matched at rank at most `k`.
pub fn matched_within(inst: &Instance, m: &Matching, k: usize) -> usize {
    m.pairs().filter(|&(a, o)| inst.rank_of(a, o).unwrap() <= k).count()
}
