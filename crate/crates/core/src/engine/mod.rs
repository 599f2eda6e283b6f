//! Exact combinatorial solvers.

mod hungarian;
mod ttc;
mod weight;

pub use hungarian::max_weight_matching;
pub use ttc::ttc;
pub use weight::{edge_weight, fixed_point, CompositeWeight, Weight, VALUE_BITS};

use crate::error::{Error, Result};
use crate::model::{Instance, Matching, PriorityKind};

/// Max-weight matching with `edge_weight(kind, n, rank, value(a, o))` on
/// every acceptable pair.
pub fn priority_matching(
    instance: &Instance,
    kind: PriorityKind,
    mut value: impl FnMut(usize, usize) -> f64,
) -> Result<Matching> {
    let n = instance.n();
    let edges = instance
        .edges()
        .map(|(a, o, r)| Ok((a, o, edge_weight(kind, n, r, value(a, o))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(max_weight_matching(n, &edges))
}

/// Maximum-cardinality matching using only edges of rank at most `k`.
pub fn max_cardinality_rank_bounded(instance: &Instance, k: usize) -> Result<Matching> {
    let n = instance.n();
    if k == 0 || k > n {
        return Err(Error::RankOutOfRange { rank: k, n });
    }
    let edges: Vec<(usize, usize, i64)> = instance
        .edges()
        .filter(|&(_, _, r)| r <= k)
        .map(|(a, o, _)| (a, o, 1))
        .collect();
    Ok(max_weight_matching(n, &edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::signature;

    pub(crate) fn example_2_1() -> Instance {
        Instance::from_strict(
            7,
            &[
                vec![0, 3, 2, 6],
                vec![1, 4, 5],
                vec![0, 2],
                vec![2, 5],
                vec![0, 3, 4],
                vec![0, 1, 3],
                vec![0, 1, 4],
            ],
        )
        .unwrap()
    }

    #[test]
    fn shared_top_rank_one_size_one() {
        let inst = Instance::from_strict(3, &[vec![0, 1], vec![0, 2], vec![0]]).unwrap();
        assert_eq!(max_cardinality_rank_bounded(&inst, 1).unwrap().len(), 1);
    }

    #[test]
    fn disjoint_tops_perfect() {
        let inst = Instance::from_strict(3, &[vec![2, 0], vec![0], vec![1, 2]]).unwrap();
        let m = max_cardinality_rank_bounded(&inst, 1).unwrap();
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn example_rank_one_bound() {
        let m = max_cardinality_rank_bounded(&example_2_1(), 1).unwrap();
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn rank_bound_range_checked() {
        let inst = example_2_1();
        assert!(max_cardinality_rank_bounded(&inst, 0).is_err());
        assert!(max_cardinality_rank_bounded(&inst, 8).is_err());
    }

    #[test]
    fn example_rank_maximal_signature() {
        // The rank-maximal signature here is (3,1,1,1,0,0,0): a3-h1, a2-h2,
        // a4-h3, a5-h4, a7-h5, a1-h7 reaches it.
        let inst = example_2_1();
        let m = priority_matching(&inst, PriorityKind::RankMaximal, |_, _| 0.0).unwrap();
        assert_eq!(
            signature(&inst, &m, PriorityKind::RankMaximal).unwrap().0,
            vec![3, 1, 1, 1, 0, 0, 0]
        );
    }

    #[test]
    fn example_fair_signature() {
        let inst = example_2_1();
        let m = priority_matching(&inst, PriorityKind::Fair, |_, _| 0.0).unwrap();
        assert_eq!(m.len(), 7);
        assert_eq!(
            signature(&inst, &m, PriorityKind::Fair).unwrap().0,
            vec![7, 0, 0, 0, -1, 0, -5, -1]
        );
    }
}
