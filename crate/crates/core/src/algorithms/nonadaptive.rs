//! One-query-per-pair algorithms. Each is split into a query plan fixed up
//! front and a decision rule over the answers, so the plan can be inspected
//! (and the answers replayed) without running the algorithm.

use super::AlgoResult;
use crate::elicitation::{HiddenValuations, LedgerMode, QueryLedger, ThresholdQuery};
use crate::engine::{max_cardinality_rank_bounded, max_weight_matching, priority_matching, ttc, CompositeWeight};
use crate::error::{Error, Result};
use crate::model::{Instance, Matching, PriorityKind};

/// A non-adaptive algorithm asking at most one query per pair.
pub trait OneQueryPerPair {
    fn name(&self) -> &'static str;
    fn kind(&self) -> PriorityKind;

    /// The full query set, fixed before any answer is seen.
    fn plan(&self, instance: &Instance) -> Result<Vec<ThresholdQuery>>;

    /// The output matching given answers aligned with `queries`.
    fn decide(&self, instance: &Instance, queries: &[ThresholdQuery], answers: &[bool]) -> Result<Matching>;

    fn run(&self, instance: &Instance, oracle: &HiddenValuations<'_>) -> Result<AlgoResult> {
        let queries = self.plan(instance)?;
        let mut ledger = QueryLedger::new(LedgerMode::NonAdaptiveOnePerPair, instance.n());
        let answers = ledger.ask_batch(oracle, &queries)?;
        let matching = self.decide(instance, &queries, &answers)?;
        Ok(AlgoResult { algorithm: self.name(), kind: self.kind(), matching, ledger })
    }
}

/// Largest `m` with `m^3 <= n`.
fn icbrt(n: usize) -> usize {
    let mut m = (n as f64).cbrt().round() as usize;
    while m * m * m > n {
        m -= 1;
    }
    while (m + 1) * (m + 1) * (m + 1) <= n {
        m += 1;
    }
    m
}

/// `floor(n^(1/3) / 2)`, the rank bound of the auxiliary matching.
pub fn po_rank_bound(n: usize) -> usize {
    icbrt(n) / 2
}

/// Thresholds by rank (index `r - 1`): `t_1 = n^(-1/3)` and
/// `t_i = 1 / (min(i, n^(1/3)) * n^(2/3))`.
pub fn unit_sum_thresholds(n: usize) -> Vec<f64> {
    let cb = (n as f64).cbrt();
    (1..=n)
        .map(|i| if i == 1 { 1.0 / cb } else { 1.0 / ((i as f64).min(cb) * cb * cb) })
        .collect()
}

/// Thresholds by rank: `t_1 = 1` and `t_i = 1 / sqrt(n)`.
pub fn unit_range_thresholds(n: usize) -> Vec<f64> {
    let s = 1.0 / (n as f64).sqrt();
    (1..=n).map(|i| if i == 1 { 1.0 } else { s }).collect()
}

/// One query per acceptable pair at the threshold for its rank.
fn rank_queries(instance: &Instance, t: &[f64], forced_top: bool) -> Result<Vec<ThresholdQuery>> {
    instance
        .edges()
        .map(|(a, o, r)| {
            let q = ThresholdQuery::new(a, o, t[r - 1])?;
            Ok(if forced_top && r == 1 { q.mark_forced() } else { q })
        })
        .collect()
}

/// Edge value parts: the asked threshold on "yes", zero otherwise.
fn answered_values(n: usize, queries: &[ThresholdQuery], answers: &[bool]) -> Result<Vec<f64>> {
    if queries.len() != answers.len() {
        return Err(Error::BudgetViolation(format!(
            "{} answers for {} queries",
            answers.len(),
            queries.len()
        )));
    }
    let mut value = vec![0.0; n * n];
    for (q, &yes) in queries.iter().zip(answers) {
        if yes {
            value[q.agent * n + q.object] = q.threshold;
        }
    }
    Ok(value)
}

/// Priority matching with one query per pair, for unit-sum valuations.
#[derive(Debug, Clone, Copy)]
pub struct UnitSumPriority {
    pub kind: PriorityKind,
}

impl UnitSumPriority {
    pub fn new(kind: PriorityKind) -> Result<Self> {
        if !kind.is_signature_based() {
            return Err(Error::UnsupportedKind { algorithm: "nonadaptive_priority_unit_sum", kind });
        }
        Ok(UnitSumPriority { kind })
    }
}

impl OneQueryPerPair for UnitSumPriority {
    fn name(&self) -> &'static str {
        "nonadaptive_priority_unit_sum"
    }

    fn kind(&self) -> PriorityKind {
        self.kind
    }

    fn plan(&self, instance: &Instance) -> Result<Vec<ThresholdQuery>> {
        rank_queries(instance, &unit_sum_thresholds(instance.n()), false)
    }

    fn decide(&self, instance: &Instance, queries: &[ThresholdQuery], answers: &[bool]) -> Result<Matching> {
        let n = instance.n();
        let value = answered_values(n, queries, answers)?;
        priority_matching(instance, self.kind, |a, o| value[a * n + o])
    }
}

/// Pareto optimal matching with one query per pair, for unit-sum
/// valuations; requires `n >= 8`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitSumPareto;

impl OneQueryPerPair for UnitSumPareto {
    fn name(&self) -> &'static str {
        "nonadaptive_po_unit_sum"
    }

    fn kind(&self) -> PriorityKind {
        PriorityKind::ParetoOnly
    }

    fn plan(&self, instance: &Instance) -> Result<Vec<ThresholdQuery>> {
        if instance.n() < 8 {
            return Err(Error::InstanceTooSmall { what: self.name(), n: instance.n(), min: 8 });
        }
        rank_queries(instance, &unit_sum_thresholds(instance.n()), false)
    }

    fn decide(&self, instance: &Instance, queries: &[ThresholdQuery], answers: &[bool]) -> Result<Matching> {
        let n = instance.n();
        if n < 8 {
            return Err(Error::InstanceTooSmall { what: self.name(), n, min: 8 });
        }
        let value = answered_values(n, queries, answers)?;

        // Main matching on the answered weights, minus zero-weight edges.
        let edges: Vec<_> = instance
            .edges()
            .map(|(a, o, _)| (a, o, CompositeWeight::new(Vec::new(), value[a * n + o])))
            .collect();
        let main = max_weight_matching(n, &edges);
        let mut union = Matching::empty(n);
        for (a, o) in main.pairs() {
            if value[a * n + o] > 0.0 {
                union.insert(a, o)?;
            }
        }

        let has_top = union.pairs().any(|(a, o)| instance.rank_of(a, o) == Some(1));
        let bound = if has_top { 1 } else { po_rank_bound(n) };
        let aux = max_cardinality_rank_bounded(instance, bound)?;
        let main_agents: Vec<bool> = (0..n).map(|a| union.object_of(a).is_some()).collect();
        let main_objects: Vec<bool> = (0..n).map(|o| union.agent_of(o).is_some()).collect();
        for (a, o) in aux.pairs() {
            if !main_agents[a] && !main_objects[o] {
                union.insert(a, o)?;
            }
        }

        // Leftovers: ascending agents take their lowest-index free object.
        for a in 0..n {
            if union.object_of(a).is_some() {
                continue;
            }
            let free = (0..n).find(|&o| instance.is_acceptable(a, o) && union.agent_of(o).is_none());
            if let Some(o) = free {
                union.insert(a, o)?;
            }
        }
        ttc(instance, &union)
    }
}

/// One query per pair for unit-range valuations, any kind.
#[derive(Debug, Clone, Copy)]
pub struct UnitRange {
    pub kind: PriorityKind,
}

impl OneQueryPerPair for UnitRange {
    fn name(&self) -> &'static str {
        "nonadaptive_unit_range"
    }

    fn kind(&self) -> PriorityKind {
        self.kind
    }

    fn plan(&self, instance: &Instance) -> Result<Vec<ThresholdQuery>> {
        rank_queries(instance, &unit_range_thresholds(instance.n()), true)
    }

    fn decide(&self, instance: &Instance, queries: &[ThresholdQuery], answers: &[bool]) -> Result<Matching> {
        let n = instance.n();
        let value = answered_values(n, queries, answers)?;
        let m = priority_matching(instance, self.kind, |a, o| value[a * n + o])?;
        if self.kind == PriorityKind::ParetoOnly {
            ttc(instance, &m)
        } else {
            Ok(m)
        }
    }
}

pub fn nonadaptive_priority_unit_sum(
    instance: &Instance,
    kind: PriorityKind,
    oracle: &HiddenValuations<'_>,
) -> Result<AlgoResult> {
    UnitSumPriority::new(kind)?.run(instance, oracle)
}

pub fn nonadaptive_po_unit_sum(instance: &Instance, oracle: &HiddenValuations<'_>) -> Result<AlgoResult> {
    UnitSumPareto.run(instance, oracle)
}

pub fn nonadaptive_unit_range(
    instance: &Instance,
    kind: PriorityKind,
    oracle: &HiddenValuations<'_>,
) -> Result<AlgoResult> {
    UnitRange { kind }.run(instance, oracle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ValuationKind, ValuationProfile};

    fn complete(n: usize) -> Instance {
        let lists: Vec<Vec<usize>> = (0..n).map(|_| (0..n).collect()).collect();
        Instance::from_strict(n, &lists).unwrap()
    }

    fn profile(n: usize, row: impl Fn(usize) -> Vec<f64>, kind: ValuationKind) -> ValuationProfile {
        ValuationProfile::new(kind, (0..n).map(row).collect())
    }

    #[test]
    fn thresholds_n8() {
        let t = unit_sum_thresholds(8);
        assert_eq!(t[0], 0.5);
        assert!(t[1..].iter().all(|&x| x == 0.125));
    }

    #[test]
    fn thresholds_unit_range_n16() {
        let t = unit_range_thresholds(16);
        assert_eq!(t[0], 1.0);
        assert!(t[1..].iter().all(|&x| x == 0.25));
    }

    #[test]
    fn cube_roots() {
        assert_eq!(icbrt(7), 1);
        assert_eq!(icbrt(8), 2);
        assert_eq!(icbrt(26), 2);
        assert_eq!(icbrt(27), 3);
        assert_eq!(icbrt(1000), 10);
        assert_eq!(po_rank_bound(8), 1);
        assert_eq!(po_rank_bound(63), 1);
        assert_eq!(po_rank_bound(64), 2);
    }

    #[test]
    fn all_no_reduces_to_ordinal() {
        // Uniform values sit below every threshold except the last ranks'.
        let n = 8;
        let inst = complete(n);
        let v = profile(n, |_| vec![1.0 / 8.0 - 1e-3; 8], ValuationKind::UnitSum);
        let oracle = HiddenValuations::new(&v);
        let r = nonadaptive_priority_unit_sum(&inst, PriorityKind::RankMaximal, &oracle).unwrap();
        assert_eq!(r.ledger.len(), n * n);
        assert!(r.ledger.is_one_per_pair());
        assert_eq!(r.matching.len(), n);
        let tops = r.matching.pairs().filter(|&(a, o)| inst.rank_of(a, o) == Some(1)).count();
        assert_eq!(tops, 1);
    }

    #[test]
    fn po_rejects_small_n() {
        let inst = complete(7);
        let v = profile(7, |_| vec![1.0 / 7.0; 7], ValuationKind::UnitSum);
        let oracle = HiddenValuations::new(&v);
        assert!(matches!(
            nonadaptive_po_unit_sum(&inst, &oracle),
            Err(Error::InstanceTooSmall { .. })
        ));
    }

    #[test]
    fn po_all_yes_on_top_uses_rank1_branch() {
        let n = 8;
        let lists: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|o| (o + a) % n).collect()).collect();
        let inst = Instance::from_strict(n, &lists).unwrap();
        let v = profile(
            n,
            |a| {
                let mut row = vec![0.0; n];
                row[a] = 0.9;
                row[(a + 1) % n] = 0.1;
                row
            },
            ValuationKind::UnitSum,
        );
        let oracle = HiddenValuations::new(&v);
        let r = nonadaptive_po_unit_sum(&inst, &oracle).unwrap();
        assert!((0..n).all(|a| r.matching.object_of(a) == Some(a)));
    }

    #[test]
    fn po_all_no_still_perfect() {
        let n = 8;
        let inst = complete(n);
        let v = profile(n, |_| vec![1.0 / 8.0 - 1e-3; 8], ValuationKind::UnitSum);
        let oracle = HiddenValuations::new(&v);
        let r = nonadaptive_po_unit_sum(&inst, &oracle).unwrap();
        assert_eq!(r.matching.len(), n);
        assert!(r.ledger.is_one_per_pair());
    }

    #[test]
    fn unit_range_top_queries_forced_yes() {
        let n = 4;
        let inst = complete(n);
        let v = profile(
            n,
            |a| (0..n).map(|o| if o == 0 { 1.0 } else if o == n - 1 { 0.0 } else { 0.5 / (o + a) as f64 }).collect(),
            ValuationKind::UnitRange,
        );
        let oracle = HiddenValuations::new(&v);
        let r = nonadaptive_unit_range(&inst, PriorityKind::Fair, &oracle).unwrap();
        assert_eq!(r.ledger.forced_count(), n);
        for e in r.ledger.entries() {
            if e.query.forced {
                assert!(e.answer);
                assert_eq!(e.query.threshold, 1.0);
            }
        }
    }

    #[test]
    fn priority_rejects_pareto_kind() {
        assert!(UnitSumPriority::new(PriorityKind::ParetoOnly).is_err());
    }

    #[test]
    fn decide_checks_answer_count() {
        let inst = complete(3);
        let alg = UnitRange { kind: PriorityKind::RankMaximal };
        let q = alg.plan(&inst).unwrap();
        assert!(alg.decide(&inst, &q, &[true]).is_err());
    }
}
