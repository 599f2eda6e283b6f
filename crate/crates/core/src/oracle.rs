//! Brute-force ground truth for small instances.

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::algorithms::AlgoResult;
use crate::engine::{fixed_point, max_weight_matching, priority_matching, VALUE_BITS};
use crate::error::{Error, Result};
use crate::model::{
    rank_key, signature, welfare, Instance, Matching, PriorityKind, Signature, ValuationProfile,
};

/// Largest `n` for matching enumeration.
pub const ENUM_MAX_N: usize = 8;
/// Largest `n` for the big-integer cross-check.
pub const BIGINT_MAX_N: usize = 6;

fn guard(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::InstanceTooLarge { what, n, max })
    } else {
        Ok(())
    }
}

/// Iterator over every matching of the acceptability graph, empty one
/// first. Agents are assigned in index order; "unmatched" comes before
/// any object.
pub struct Matchings<'a> {
    instance: &'a Instance,
    options: Vec<Vec<usize>>,
    // choice[a] == 0 means unmatched, otherwise options[a][choice[a] - 1].
    choice: Vec<usize>,
    used: Vec<bool>,
    started: bool,
    done: bool,
}

impl<'a> Matchings<'a> {
    fn new(instance: &'a Instance) -> Self {
        let n = instance.n();
        let options = (0..n).map(|a| instance.order(a).objects().collect()).collect();
        Matchings {
            instance,
            options,
            choice: vec![0; n],
            used: vec![false; n],
            started: false,
            done: false,
        }
    }

    fn current(&self) -> Vec<Option<usize>> {
        self.choice
            .iter()
            .enumerate()
            .map(|(a, &c)| if c == 0 { None } else { Some(self.options[a][c - 1]) })
            .collect()
    }

    /// Advances to the next assignment; `false` once exhausted.
    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            return true;
        }
        for a in (0..self.choice.len()).rev() {
            if self.choice[a] > 0 {
                self.used[self.options[a][self.choice[a] - 1]] = false;
            }
            let mut c = self.choice[a] + 1;
            while c <= self.options[a].len() && self.used[self.options[a][c - 1]] {
                c += 1;
            }
            if c <= self.options[a].len() {
                self.choice[a] = c;
                self.used[self.options[a][c - 1]] = true;
                return true;
            }
            self.choice[a] = 0;
        }
        self.done = true;
        false
    }
}

impl Iterator for Matchings<'_> {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.done || !self.advance() {
            return None;
        }
        Some(Matching::from_assignment(self.instance.n(), &self.current()).expect("valid by construction"))
    }
}

/// Every matching exactly once, including the empty one. Limited to
/// `n <= 8`.
pub fn enumerate_matchings(instance: &Instance) -> Result<Matchings<'_>> {
    guard("matching enumeration", instance.n(), ENUM_MAX_N)?;
    Ok(Matchings::new(instance))
}

/// Calls `f` on each assignment vector without building `Matching`s.
fn for_each_assignment(instance: &Instance, mut f: impl FnMut(&[Option<usize>])) {
    let mut it = Matchings::new(instance);
    while it.advance() {
        f(&it.current());
    }
}

/// True iff no matching weakly improves every agent and strictly improves
/// one. Limited to `n <= 8`.
pub fn is_pareto_optimal(instance: &Instance, matching: &Matching) -> Result<bool> {
    guard("Pareto check", instance.n(), ENUM_MAX_N)?;
    matching.check_against(instance)?;
    let n = instance.n();
    let current: Vec<usize> = (0..n).map(|a| rank_key(instance, a, matching.object_of(a))).collect();
    let mut used = vec![false; n];
    Ok(!dominated(instance, &current, 0, false, &mut used))
}

fn dominated(instance: &Instance, current: &[usize], a: usize, strict: bool, used: &mut [bool]) -> bool {
    if a == current.len() {
        return strict;
    }
    let unmatched = instance.n() + 1;
    for o in instance.order(a).objects() {
        let r = instance.rank_of(a, o).expect("acceptable");
        if r > current[a] {
            break;
        }
        if used[o] {
            continue;
        }
        used[o] = true;
        let hit = dominated(instance, current, a + 1, strict || r < current[a], used);
        used[o] = false;
        if hit {
            return true;
        }
    }
    current[a] == unmatched && dominated(instance, current, a + 1, strict, used)
}

/// Best welfare within a matching class.
#[derive(Debug, Clone)]
pub struct ClassOptimum {
    pub kind: PriorityKind,
    pub best_matching: Matching,
    pub best_welfare: f64,
    pub class_size: u64,
    /// The class signature; `None` for `ParetoOnly`.
    pub signature: Option<Signature>,
}

fn assignment_sig(instance: &Instance, assignment: &[Option<usize>], kind: PriorityKind) -> Vec<i64> {
    let n = instance.n();
    let mut s = vec![0i64; n];
    for (a, o) in assignment.iter().enumerate() {
        if let Some(o) = o {
            s[instance.rank_of(a, *o).expect("acceptable") - 1] += 1;
        }
    }
    let total: i64 = s.iter().sum();
    match kind {
        PriorityKind::ParetoOnly => Vec::new(),
        PriorityKind::RankMaximal => s,
        PriorityKind::MaxCardRankMaximal => std::iter::once(total).chain(s).collect(),
        PriorityKind::Fair => std::iter::once(total).chain(s.into_iter().rev().map(|x| -x)).collect(),
    }
}

fn assignment_value(valuations: &ValuationProfile, assignment: &[Option<usize>]) -> i128 {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(a, o)| o.map(|o| fixed_point(valuations.value(a, o))))
        .sum()
}

/// Enumerates the class of `kind` and returns its welfare optimum. Ties in
/// welfare keep the first matching in enumeration order. Limited to
/// `n <= 8`.
pub fn optimal_within_class(
    instance: &Instance,
    valuations: &ValuationProfile,
    kind: PriorityKind,
) -> Result<ClassOptimum> {
    guard("class enumeration", instance.n(), ENUM_MAX_N)?;
    let n = instance.n();
    let (best, class_size, sig) = if kind == PriorityKind::ParetoOnly {
        let (best, size) = pareto_class_optimum(instance, valuations);
        (best, size, None)
    } else {
        let mut best_sig: Option<Vec<i64>> = None;
        let mut best: Vec<Option<usize>> = vec![None; n];
        let mut best_val = i128::MIN;
        let mut size = 0u64;
        for_each_assignment(instance, |asg| {
            let s = assignment_sig(instance, asg, kind);
            let val = assignment_value(valuations, asg);
            let better_sig = best_sig.as_ref().map_or(true, |b| s > *b);
            if better_sig {
                best_sig = Some(s);
                best = asg.to_vec();
                best_val = val;
                size = 1;
            } else if best_sig.as_ref() == Some(&s) {
                size += 1;
                if val > best_val {
                    best = asg.to_vec();
                    best_val = val;
                }
            }
        });
        (best, size, best_sig.map(Signature))
    };
    let best_matching = Matching::from_assignment(n, &best)?;
    Ok(ClassOptimum {
        kind,
        best_welfare: welfare(&best_matching, valuations),
        best_matching,
        class_size,
        signature: sig,
    })
}

struct RankGroup {
    count: u64,
    best: Vec<Option<usize>>,
    best_val: i128,
    order: usize,
}

/// Groups matchings by rank vector, keeps the Pareto frontier of rank
/// vectors and maximizes welfare over matchings on it.
fn pareto_class_optimum(instance: &Instance, valuations: &ValuationProfile) -> (Vec<Option<usize>>, u64) {
    let mut groups: HashMap<Vec<u8>, RankGroup> = HashMap::new();
    let mut seen = 0usize;
    for_each_assignment(instance, |asg| {
        let key: Vec<u8> = (0..asg.len()).map(|a| rank_key(instance, a, asg[a]) as u8).collect();
        let val = assignment_value(valuations, asg);
        let g = groups.entry(key).or_insert_with(|| {
            seen += 1;
            RankGroup { count: 0, best: asg.to_vec(), best_val: val, order: seen }
        });
        g.count += 1;
        if val > g.best_val {
            g.best = asg.to_vec();
            g.best_val = val;
        }
    });
    let mut keys: Vec<&Vec<u8>> = groups.keys().collect();
    keys.sort_by_key(|k| (k.iter().map(|&x| x as usize).sum::<usize>(), groups[*k].order));
    let mut frontier: Vec<&Vec<u8>> = Vec::new();
    for k in keys {
        let beaten = frontier
            .iter()
            .any(|f| f.iter().zip(k.iter()).all(|(x, y)| x <= y) && *f != k);
        if !beaten {
            frontier.push(k);
        }
    }
    let mut size = 0u64;
    let mut best: Option<&RankGroup> = None;
    for k in &frontier {
        let g = &groups[*k];
        size += g.count;
        let better = match best {
            None => true,
            Some(b) => g.best_val > b.best_val || (g.best_val == b.best_val && g.order < b.order),
        };
        if better {
            best = Some(g);
        }
    }
    (best.expect("the empty matching always exists").best.clone(), size)
}

/// True when `matching` belongs to the class of `kind`.
pub fn in_class(instance: &Instance, matching: &Matching, kind: PriorityKind) -> Result<bool> {
    if kind == PriorityKind::ParetoOnly {
        return is_pareto_optimal(instance, matching);
    }
    guard("class enumeration", instance.n(), ENUM_MAX_N)?;
    let mut best: Option<Vec<i64>> = None;
    for_each_assignment(instance, |asg| {
        let s = assignment_sig(instance, asg, kind);
        if best.as_ref().map_or(true, |b| s > *b) {
            best = Some(s);
        }
    });
    Ok(signature(instance, matching, kind)?.0 == best.expect("nonempty"))
}

/// Class-optimal welfare over the result's welfare, or 1 when both are 0.
/// Fails with `ClassViolation` when the result is outside its class.
pub fn welfare_loss_ratio(result: &AlgoResult, instance: &Instance, valuations: &ValuationProfile) -> Result<f64> {
    let opt = optimal_within_class(instance, valuations, result.kind)?;
    let member = match &opt.signature {
        None => is_pareto_optimal(instance, &result.matching)?,
        Some(sig) => signature(instance, &result.matching, result.kind)? == *sig,
    };
    if !member {
        return Err(Error::ClassViolation(result.kind));
    }
    Ok(ratio(opt.best_welfare, welfare(&result.matching, valuations)))
}

/// `opt / got` with `0 / 0 = 1`.
pub fn ratio(opt: f64, got: f64) -> f64 {
    if opt == 0.0 && got == 0.0 {
        1.0
    } else {
        opt / got
    }
}

/// Literal priorities `p_1..p_n` for a signature-based kind.
pub fn priority_vector(kind: PriorityKind, n: usize) -> Result<Vec<BigInt>> {
    let nn = BigInt::from(n);
    let pow = |e: usize| nn.pow(e as u32);
    let p = (1..=n)
        .map(|j| match kind {
            PriorityKind::ParetoOnly => Err(Error::SignatureUndefined),
            PriorityKind::RankMaximal => Ok(pow(2 * (n - j + 1))),
            PriorityKind::MaxCardRankMaximal => Ok(pow(2 * n) + pow(2 * (n - j))),
            PriorityKind::Fair => Ok(BigInt::from(4) * pow(2 * n) - BigInt::from(2) * pow(j - 1)),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(p)
}

/// Sum of literal priorities over a matching's edges.
pub fn bigint_weight(instance: &Instance, matching: &Matching, kind: PriorityKind) -> Result<BigInt> {
    let p = priority_vector(kind, instance.n())?;
    Ok(matching
        .pairs()
        .map(|(a, o)| p[instance.rank_of(a, o).expect("acceptable") - 1].clone())
        .sum())
}

/// Solves with literal big-integer weights `p_r * 2^60 + value` and checks
/// that the lexicographic solver finds the same signature and welfare.
/// Limited to `n <= 6`.
pub fn bigint_priority_check(
    instance: &Instance,
    kind: PriorityKind,
    valuations: Option<&ValuationProfile>,
) -> Result<bool> {
    guard("big-integer check", instance.n(), BIGINT_MAX_N)?;
    let n = instance.n();
    let p = priority_vector(kind, n)?;
    let value = |a: usize, o: usize| valuations.map_or(0.0, |v| v.value(a, o));
    let edges: Vec<(usize, usize, BigInt)> = instance
        .edges()
        .map(|(a, o, r)| {
            let w: BigInt = (p[r - 1].clone() << VALUE_BITS) + BigInt::from(fixed_point(value(a, o)));
            (a, o, w)
        })
        .collect();
    let big = max_weight_matching(n, &edges);
    let lex = priority_matching(instance, kind, value)?;
    let fixed = |m: &Matching| -> i128 { m.pairs().map(|(a, o)| fixed_point(value(a, o))).sum() };
    Ok(signature(instance, &big, kind)? == signature(instance, &lex, kind)? && fixed(&big) == fixed(&lex))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{ordinal_baseline, welfare_optimal_priority};
    use crate::model::{ValuationKind, WeakOrder};

    fn table1() -> (Instance, ValuationProfile) {
        let inst = Instance::from_strict(3, &[vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        let v = ValuationProfile::new(
            ValuationKind::UnitSum,
            vec![vec![0.9, 0.1, 0.0], vec![0.9, 0.1, 0.0], vec![0.51, 0.49, 0.0]],
        );
        (inst, v)
    }

    fn complete(n: usize) -> Instance {
        let lists: Vec<Vec<usize>> = (0..n).map(|_| (0..n).collect()).collect();
        Instance::from_strict(n, &lists).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let one = Instance::from_strict(1, &[vec![0]]).unwrap();
        assert_eq!(enumerate_matchings(&one).unwrap().count(), 2);
        assert_eq!(enumerate_matchings(&complete(2)).unwrap().count(), 7);
        assert_eq!(enumerate_matchings(&complete(3)).unwrap().count(), 34);
        assert_eq!(enumerate_matchings(&complete(4)).unwrap().count(), 209);
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(
            enumerate_matchings(&complete(9)),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn enumeration_is_distinct() {
        let inst = Instance::from_strict(3, &[vec![0, 2], vec![1, 0], vec![2]]).unwrap();
        let all: Vec<Matching> = enumerate_matchings(&inst).unwrap().collect();
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len(), set.len());
        assert!(all.iter().all(|m| m.check_against(&inst).is_ok()));
    }

    #[test]
    fn po_checks() {
        let (inst, _) = table1();
        let m = Matching::from_pairs(3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        assert!(is_pareto_optimal(&inst, &m).unwrap());
        assert!(!is_pareto_optimal(&inst, &Matching::empty(3)).unwrap());
        let disjoint = Instance::from_strict(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let tops = Matching::from_pairs(2, [(0, 0), (1, 1)]).unwrap();
        assert!(is_pareto_optimal(&disjoint, &tops).unwrap());
        let swapped = Matching::from_pairs(2, [(0, 1), (1, 0)]).unwrap();
        assert!(!is_pareto_optimal(&disjoint, &swapped).unwrap());
    }

    #[test]
    fn po_with_ties_needs_strict_gain() {
        let tie = WeakOrder::new(vec![vec![0, 1]]).unwrap();
        let inst = Instance::new(2, vec![tie.clone(), tie]).unwrap();
        let m = Matching::from_pairs(2, [(0, 1), (1, 0)]).unwrap();
        assert!(is_pareto_optimal(&inst, &m).unwrap());
    }

    #[test]
    fn table1_classes() {
        let (inst, v) = table1();
        let po = optimal_within_class(&inst, &v, PriorityKind::ParetoOnly).unwrap();
        assert!((po.best_welfare - 1.39).abs() < 1e-12);
        assert_eq!(po.class_size, 6);
        for kind in PriorityKind::SIGNATURE_KINDS {
            let c = optimal_within_class(&inst, &v, kind).unwrap();
            assert!((c.best_welfare - 1.39).abs() < 1e-12);
            assert_eq!(c.class_size, 6);
        }
    }

    #[test]
    fn unique_class_member() {
        let inst = Instance::from_strict(2, &[vec![0], vec![1]]).unwrap();
        let v = ValuationProfile::new(ValuationKind::UnitSum, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let c = optimal_within_class(&inst, &v, PriorityKind::Fair).unwrap();
        assert_eq!(c.class_size, 1);
        assert_eq!(c.best_matching.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn example_class_signature() {
        let inst = Instance::from_strict(
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
        .unwrap();
        let v = ValuationProfile::new(ValuationKind::UnitSum, vec![vec![0.0; 7]; 7]);
        let c = optimal_within_class(&inst, &v, PriorityKind::RankMaximal).unwrap();
        assert_eq!(c.signature.unwrap().0, vec![3, 1, 1, 1, 0, 0, 0]);
        let f = optimal_within_class(&inst, &v, PriorityKind::Fair).unwrap();
        assert_eq!(f.signature.unwrap().0, vec![7, 0, 0, 0, -1, 0, -5, -1]);
    }

    #[test]
    fn ratios() {
        let (inst, v) = table1();
        let opt = welfare_optimal_priority(&inst, PriorityKind::ParetoOnly, &v).unwrap();
        assert_eq!(welfare_loss_ratio(&opt, &inst, &v).unwrap(), 1.0);

        let mut worst = ordinal_baseline(&inst, PriorityKind::ParetoOnly).unwrap();
        worst.matching = Matching::from_pairs(3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        assert!((welfare_loss_ratio(&worst, &inst, &v).unwrap() - 1.39).abs() < 1e-12);

        worst.matching = Matching::from_pairs(3, [(0, 0), (1, 1)]).unwrap();
        assert!(matches!(
            welfare_loss_ratio(&worst, &inst, &v),
            Err(Error::ClassViolation(PriorityKind::ParetoOnly))
        ));
        assert_eq!(ratio(0.0, 0.0), 1.0);
    }

    #[test]
    fn literal_priorities() {
        let p = priority_vector(PriorityKind::RankMaximal, 3).unwrap();
        assert_eq!(p, vec![BigInt::from(729), BigInt::from(81), BigInt::from(9)]);
        let p = priority_vector(PriorityKind::Fair, 2).unwrap();
        assert_eq!(p, vec![BigInt::from(62), BigInt::from(60)]);
        let p = priority_vector(PriorityKind::MaxCardRankMaximal, 2).unwrap();
        assert_eq!(p, vec![BigInt::from(20), BigInt::from(17)]);
        assert!(priority_vector(PriorityKind::ParetoOnly, 2).is_err());
    }

    #[test]
    fn bigint_agrees_on_table1() {
        let (inst, v) = table1();
        for kind in PriorityKind::SIGNATURE_KINDS {
            assert!(bigint_priority_check(&inst, kind, Some(&v)).unwrap());
            assert!(bigint_priority_check(&inst, kind, None).unwrap());
        }
        assert!(bigint_priority_check(&complete(7), PriorityKind::Fair, None).is_err());
    }
}
