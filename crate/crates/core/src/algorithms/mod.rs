//! Matching algorithms: the full-information optimum, the adaptive
//! approximation, the one-query-per-pair algorithms and an ordinal baseline.

mod adaptive;
mod nonadaptive;

pub use adaptive::{adaptive_approx, adaptive_c, adaptive_thresholds};
pub use nonadaptive::{
    nonadaptive_po_unit_sum, nonadaptive_priority_unit_sum, nonadaptive_unit_range, po_rank_bound,
    unit_range_thresholds, unit_sum_thresholds, OneQueryPerPair, UnitRange, UnitSumPareto,
    UnitSumPriority,
};

use serde::Serialize;

use crate::elicitation::{LedgerMode, QueryLedger};
use crate::engine::{priority_matching, ttc};
use crate::error::{Error, Result};
use crate::model::{validate, welfare, Instance, Matching, PriorityKind, ValuationProfile};

/// Output of one algorithm run.
#[derive(Debug, Clone)]
pub struct AlgoResult {
    pub algorithm: &'static str,
    pub kind: PriorityKind,
    pub matching: Matching,
    /// Empty for full-information and ordinal algorithms.
    pub ledger: QueryLedger,
}

#[derive(Serialize)]
struct QuerySummary {
    total: usize,
    max_per_agent: usize,
    forced: usize,
    per_agent: Vec<usize>,
}

#[derive(Serialize)]
struct Report<'a> {
    algorithm: &'a str,
    kind: PriorityKind,
    matching: &'a Matching,
    queries: QuerySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    welfare: Option<f64>,
}

impl AlgoResult {
    fn without_queries(algorithm: &'static str, kind: PriorityKind, matching: Matching) -> Self {
        let n = matching.n();
        AlgoResult {
            algorithm,
            kind,
            matching,
            ledger: QueryLedger::new(LedgerMode::Adaptive, n),
        }
    }

    /// JSON summary; `welfare` is included when true valuations are given.
    pub fn report(&self, valuations: Option<&ValuationProfile>) -> serde_json::Value {
        let report = Report {
            algorithm: self.algorithm,
            kind: self.kind,
            matching: &self.matching,
            queries: QuerySummary {
                total: self.ledger.len(),
                max_per_agent: self.ledger.max_per_agent(),
                forced: self.ledger.forced_count(),
                per_agent: self.ledger.counts_per_agent(),
            },
            welfare: valuations.map(|v| welfare(&self.matching, v)),
        };
        serde_json::to_value(report).expect("report serializes")
    }
}

/// Welfare-optimal matching within the class of `kind`, using the true
/// valuations. For `ParetoOnly` the max-weight matching is passed through
/// TTC, which keeps its welfare and guarantees Pareto optimality when some
/// values are zero.
pub fn welfare_optimal_priority(
    instance: &Instance,
    kind: PriorityKind,
    valuations: &ValuationProfile,
) -> Result<AlgoResult> {
    validate(instance, Some(valuations)).map_err(Error::InvalidValuations)?;
    let mut m = priority_matching(instance, kind, |a, o| valuations.value(a, o))?;
    if kind == PriorityKind::ParetoOnly {
        m = ttc(instance, &m)?;
    }
    Ok(AlgoResult::without_queries("welfare_optimal", kind, m))
}

/// Ordinal rule: priority weights with zero value parts. `ParetoOnly` uses
/// a rank-maximal matching, which is already Pareto optimal, then TTC.
pub fn ordinal_baseline(instance: &Instance, kind: PriorityKind) -> Result<AlgoResult> {
    let m = match kind {
        PriorityKind::ParetoOnly => {
            let m = priority_matching(instance, PriorityKind::RankMaximal, |_, _| 0.0)?;
            ttc(instance, &m)?
        }
        _ => priority_matching(instance, kind, |_, _| 0.0)?,
    };
    Ok(AlgoResult::without_queries("ordinal_baseline", kind, m))
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::model::{signature, ValuationKind};

    #[test]
    fn table1_welfare_optimal_po() {
        let (inst, v) = table1();
        let r = welfare_optimal_priority(&inst, PriorityKind::ParetoOnly, &v).unwrap();
        assert!((welfare(&r.matching, &v) - 1.39).abs() < 1e-12);
        assert_eq!(r.matching.object_of(2), Some(1));
        assert!(r.ledger.is_empty());
    }

    #[test]
    fn disjoint_tops_everyone_first() {
        let inst = Instance::from_strict(3, &[vec![1, 0], vec![2, 1], vec![0, 2]]).unwrap();
        let v = ValuationProfile::new(
            ValuationKind::UnitSum,
            vec![vec![0.3, 0.7, 0.0], vec![0.0, 0.2, 0.8], vec![0.6, 0.0, 0.4]],
        );
        for kind in PriorityKind::ALL {
            let r = welfare_optimal_priority(&inst, kind, &v).unwrap();
            for a in 0..3 {
                assert_eq!(inst.rank_of(a, r.matching.object_of(a).unwrap()), Some(1));
            }
            let b = ordinal_baseline(&inst, kind).unwrap();
            assert_eq!(b.matching.len(), 3);
        }
    }

    #[test]
    fn example_rank_maximal_with_values() {
        let inst = example_2_1();
        let v = harmonic(&inst);
        let r = welfare_optimal_priority(&inst, PriorityKind::RankMaximal, &v).unwrap();
        assert_eq!(
            signature(&inst, &r.matching, PriorityKind::RankMaximal).unwrap().0,
            vec![3, 1, 1, 1, 0, 0, 0]
        );
    }

    #[test]
    fn rejects_inconsistent_valuations() {
        let (inst, _) = table1();
        let bad = ValuationProfile::new(
            ValuationKind::UnitSum,
            vec![vec![0.1, 0.9, 0.0], vec![0.9, 0.1, 0.0], vec![0.51, 0.49, 0.0]],
        );
        assert!(matches!(
            welfare_optimal_priority(&inst, PriorityKind::Fair, &bad),
            Err(Error::InvalidValuations(_))
        ));
    }

    #[test]
    fn baseline_table1_is_some_po_matching() {
        let (inst, v) = table1();
        let r = ordinal_baseline(&inst, PriorityKind::ParetoOnly).unwrap();
        assert_eq!(r.matching.len(), 3);
        assert!(welfare(&r.matching, &v) >= 0.61 - 1e-12);
    }

    #[test]
    fn report_shape() {
        let (inst, v) = table1();
        let r = welfare_optimal_priority(&inst, PriorityKind::ParetoOnly, &v).unwrap();
        let j = r.report(Some(&v));
        assert_eq!(j["kind"], "pareto_only");
        assert_eq!(j["queries"]["total"], 0);
        assert_eq!(j["matching"][0], serde_json::json!([1, 1]));
        assert!((j["welfare"].as_f64().unwrap() - 1.39).abs() < 1e-12);
    }
}
