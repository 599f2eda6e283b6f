//! Top trading cycles from an endowment, with newcomers and vacant objects
//! allowed, followed by a repair step that restores Pareto optimality when
//! preferences contain ties.

use super::hungarian::max_weight_matching;
use crate::error::Result;
use crate::model::{Instance, Matching};

/// Runs TTC on `endowment`. The result is individually rational (every
/// endowed agent weakly prefers its outcome) and Pareto optimal.
///
/// Agents point at the lowest-index object of their best remaining tier,
/// except that an agent whose own endowment is in that tier points at it.
/// Owned objects point at their owner, vacant objects at the lowest-index
/// remaining agent. An agent with no acceptable object left leaves
/// unmatched.
pub fn ttc(instance: &Instance, endowment: &Matching) -> Result<Matching> {
    endowment.check_against(instance)?;
    let first = trading_cycles(instance, endowment);
    Ok(repair(instance, &first))
}

fn trading_cycles(instance: &Instance, endowment: &Matching) -> Matching {
    let n = instance.n();
    let mut agent_left = vec![true; n];
    let mut object_left = vec![true; n];
    let mut out = Matching::empty(n);
    let mut remaining = n;

    while remaining > 0 {
        let mut points_to = vec![usize::MAX; n];
        for a in 0..n {
            if !agent_left[a] {
                continue;
            }
            match choose(instance, a, endowment.object_of(a), &object_left) {
                Some(o) => points_to[a] = o,
                None => {
                    agent_left[a] = false;
                    remaining -= 1;
                }
            }
        }
        if remaining == 0 {
            break;
        }
        let lowest = (0..n).find(|&a| agent_left[a]).expect("an agent remains");
        let object_points = |o: usize| match endowment.agent_of(o) {
            Some(owner) if agent_left[owner] => owner,
            _ => lowest,
        };

        // Follow agent -> object -> agent from each unvisited agent; mark
        // cycles as they close.
        let mut state = vec![0u8; n];
        for s in 0..n {
            if !agent_left[s] || state[s] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut a = s;
            while state[a] == 0 {
                state[a] = 1;
                path.push(a);
                a = object_points(points_to[a]);
            }
            if state[a] == 1 {
                let start = path.iter().position(|&x| x == a).expect("on path");
                for &x in &path[start..] {
                    let o = points_to[x];
                    out.insert(x, o).expect("cycle objects are distinct");
                }
            }
            for &x in &path {
                state[x] = 2;
            }
        }
        for (a, o) in out.pairs().collect::<Vec<_>>() {
            if agent_left[a] {
                agent_left[a] = false;
                object_left[o] = false;
                remaining -= 1;
            }
        }
    }
    out
}

fn choose(instance: &Instance, agent: usize, own: Option<usize>, object_left: &[bool]) -> Option<usize> {
    for tier in instance.order(agent).tiers() {
        if let Some(o) = own {
            if object_left[o] && tier.contains(&o) {
                return Some(o);
            }
        }
        if let Some(&o) = tier.iter().find(|&&o| object_left[o]) {
            return Some(o);
        }
    }
    None
}

/// Max-weight re-matching over pairs each agent weakly prefers to its
/// current outcome. Currently matched agents stay matched; among those
/// matchings the total of `n + 1 - rank` is maximized, which is Pareto
/// optimal and weakly improves everyone.
fn repair(instance: &Instance, current: &Matching) -> Matching {
    let n = instance.n() as i64;
    let keep = (n + 1) * (n + 1);
    let edges: Vec<(usize, usize, i64)> = instance
        .edges()
        .filter(|&(a, o, _)| instance.weakly_prefers(a, Some(o), current.object_of(a)))
        .map(|(a, o, r)| {
            let base = if current.object_of(a).is_some() { keep } else { 0 };
            (a, o, base + n + 1 - r as i64)
        })
        .collect();
    max_weight_matching(instance.n(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WeakOrder;

    #[test]
    fn identity_on_po_strict() {
        let inst = Instance::from_strict(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let e = Matching::from_pairs(2, [(0, 0), (1, 1)]).unwrap();
        assert_eq!(ttc(&inst, &e).unwrap(), e);
    }

    #[test]
    fn two_cycle_swaps() {
        let inst = Instance::from_strict(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let e = Matching::from_pairs(2, [(0, 1), (1, 0)]).unwrap();
        let out = ttc(&inst, &e).unwrap();
        assert_eq!(out.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn table1_endowment_is_kept() {
        // a1 holds h2, a2 holds h3, a3 holds h1; a3 tops h1 and keeps it,
        // after which a1 and a2 have nothing better to trade.
        let inst = Instance::from_strict(3, &[vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        let e = Matching::from_pairs(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(ttc(&inst, &e).unwrap(), e);
    }

    #[test]
    fn newcomer_takes_vacant_object() {
        let inst = Instance::from_strict(2, &[vec![0], vec![1, 0]]).unwrap();
        let out = ttc(&inst, &Matching::empty(2)).unwrap();
        assert_eq!(out.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn ties_are_repaired() {
        let tie = WeakOrder::new(vec![vec![0, 1]]).unwrap();
        let only = WeakOrder::new(vec![vec![0]]).unwrap();
        let inst = Instance::new(2, vec![tie, only]).unwrap();
        let out = ttc(&inst, &Matching::empty(2)).unwrap();
        assert_eq!(out.pairs().collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn rejects_unacceptable_endowment() {
        let inst = Instance::from_strict(2, &[vec![0], vec![1]]).unwrap();
        let e = Matching::from_pairs(2, [(0, 1)]).unwrap();
        assert!(ttc(&inst, &e).is_err());
    }
}
