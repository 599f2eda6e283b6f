//! Core domain types: instances, weak preference orders, valuation
//! profiles, matchings, ranks and signatures.
//!
//! Agents and objects are 0-indexed everywhere in the library. The JSON
//! file format (see [`InstanceFile`]) is 1-indexed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the unit-sum normalization check.
pub const UNIT_SUM_TOL: f64 = 1e-9;
/// Tolerance for the unit-range endpoint checks.
pub const UNIT_RANGE_TOL: f64 = 1e-9;

/// The economic-efficiency notion a matching must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityKind {
    /// Pareto optimality; corresponds to the all-zero priority vector.
    ParetoOnly,
    RankMaximal,
    MaxCardRankMaximal,
    Fair,
}

impl PriorityKind {
    pub const ALL: [PriorityKind; 4] = [
        PriorityKind::ParetoOnly,
        PriorityKind::RankMaximal,
        PriorityKind::MaxCardRankMaximal,
        PriorityKind::Fair,
    ];

    /// The three signature-based kinds.
    pub const SIGNATURE_KINDS: [PriorityKind; 3] = [
        PriorityKind::RankMaximal,
        PriorityKind::MaxCardRankMaximal,
        PriorityKind::Fair,
    ];

    /// True for the signature-based kinds, false for `ParetoOnly`.
    pub fn is_signature_based(self) -> bool {
        self != PriorityKind::ParetoOnly
    }

    /// Length of the signature (and of the priority key) for `n` agents.
    pub fn key_len(self, n: usize) -> usize {
        match self {
            PriorityKind::ParetoOnly => 0,
            PriorityKind::RankMaximal => n,
            PriorityKind::MaxCardRankMaximal | PriorityKind::Fair => n + 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PriorityKind::ParetoOnly => "pareto_only",
            PriorityKind::RankMaximal => "rank_maximal",
            PriorityKind::MaxCardRankMaximal => "max_card_rank_maximal",
            PriorityKind::Fair => "fair",
        }
    }
}

impl fmt::Display for PriorityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A weak order over an agent's acceptable set, as a list of indifference
/// classes (tiers), most preferred first. Objects outside every tier are
/// unacceptable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeakOrder {
    tiers: Vec<Vec<usize>>,
}

impl WeakOrder {
    /// Builds a weak order; each tier is stored sorted by object index.
    pub fn new(tiers: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut tiers = tiers;
        for tier in &mut tiers {
            if tier.is_empty() {
                return Err(Error::InvalidInstance("empty indifference class".into()));
            }
            tier.sort_unstable();
            for &o in tier.iter() {
                if !seen.insert(o) {
                    return Err(Error::InvalidInstance(format!(
                        "object {} appears twice in one preference order",
                        o + 1
                    )));
                }
            }
        }
        Ok(WeakOrder { tiers })
    }

    /// A strict order over `objects`, most preferred first.
    pub fn strict(objects: &[usize]) -> Result<Self> {
        Self::new(objects.iter().map(|&o| vec![o]).collect())
    }

    pub fn tiers(&self) -> &[Vec<usize>] {
        &self.tiers
    }

    /// Number of acceptable objects.
    pub fn len(&self) -> usize {
        self.tiers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tiers.is_empty()
    }

    /// Acceptable objects in preference order (ties by ascending index).
    pub fn objects(&self) -> impl Iterator<Item = usize> + '_ {
        self.tiers.iter().flatten().copied()
    }

    pub fn contains(&self, object: usize) -> bool {
        self.tiers.iter().any(|t| t.contains(&object))
    }
}

/// A one-sided matching instance: `n` agents, `n` objects and a weak order
/// per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    prefs: Vec<WeakOrder>,
    // rank[a * n + o]; 0 marks an unacceptable pair.
    rank: Vec<u32>,
}

impl Instance {
    pub fn new(n: usize, prefs: Vec<WeakOrder>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("n must be positive".into()));
        }
        if prefs.len() != n {
            return Err(Error::InvalidInstance(format!(
                "expected {} preference orders, got {}",
                n,
                prefs.len()
            )));
        }
        let mut rank = vec![0u32; n * n];
        for (a, order) in prefs.iter().enumerate() {
            if order.is_empty() {
                return Err(Error::InvalidInstance(format!(
                    "agent {} has an empty acceptable set",
                    a + 1
                )));
            }
            let mut r = 1u32;
            for tier in order.tiers() {
                for &o in tier {
                    if o >= n {
                        return Err(Error::IndexOutOfBounds {
                            what: "object",
                            index: o,
                            n,
                        });
                    }
                    rank[a * n + o] = r;
                }
                r += tier.len() as u32;
            }
        }
        Ok(Instance { n, prefs, rank })
    }

    /// Convenience constructor for strict orders; `lists[a]` is agent `a`'s
    /// acceptable objects, most preferred first.
    pub fn from_strict(n: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let prefs = lists
            .iter()
            .map(|l| WeakOrder::strict(l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, prefs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn preferences(&self) -> &[WeakOrder] {
        &self.prefs
    }

    pub fn order(&self, agent: usize) -> &WeakOrder {
        &self.prefs[agent]
    }

    /// Rank of `object` for `agent`, `None` when unacceptable. Panics on
    /// out-of-range indices; see [`rank`] for the checked variant.
    #[inline]
    pub fn rank_of(&self, agent: usize, object: usize) -> Option<usize> {
        match self.rank[agent * self.n + object] {
            0 => None,
            r => Some(r as usize),
        }
    }

    pub fn is_acceptable(&self, agent: usize, object: usize) -> bool {
        self.rank[agent * self.n + object] != 0
    }

    /// All acceptable `(agent, object, rank)` triples, agent-major, objects
    /// in preference order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.prefs.iter().enumerate().flat_map(move |(a, order)| {
            order
                .objects()
                .map(move |o| (a, o, self.rank_of(a, o).expect("listed object is acceptable")))
        })
    }

    /// `true` when `x` is weakly preferred to `y` by `agent`; `None` stands
    /// for being unmatched, which is worse than any acceptable object.
    pub fn weakly_prefers(&self, agent: usize, x: Option<usize>, y: Option<usize>) -> bool {
        rank_key(self, agent, x) <= rank_key(self, agent, y)
    }

    pub fn strictly_prefers(&self, agent: usize, x: Option<usize>, y: Option<usize>) -> bool {
        rank_key(self, agent, x) < rank_key(self, agent, y)
    }
}

/// Rank of an allocation with unmatched (or unacceptable) mapped past every
/// acceptable rank.
pub(crate) fn rank_key(instance: &Instance, agent: usize, object: Option<usize>) -> usize {
    object
        .and_then(|o| instance.rank_of(agent, o))
        .unwrap_or(instance.n() + 1)
}

/// Checked rank lookup: `Ok(None)` means unacceptable.
pub fn rank(instance: &Instance, agent: usize, object: usize) -> Result<Option<usize>> {
    let n = instance.n();
    if agent >= n {
        return Err(Error::IndexOutOfBounds { what: "agent", index: agent, n });
    }
    if object >= n {
        return Err(Error::IndexOutOfBounds { what: "object", index: object, n });
    }
    Ok(instance.rank_of(agent, object))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationKind {
    #[default]
    UnitSum,
    UnitRange,
}

impl fmt::Display for ValuationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValuationKind::UnitSum => "unit_sum",
            ValuationKind::UnitRange => "unit_range",
        })
    }
}

/// Cardinal utilities: `values[a][o]` is agent `a`'s value for object `o`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationProfile {
    kind: ValuationKind,
    values: Vec<Vec<f64>>,
}

impl ValuationProfile {
    /// Wraps a value matrix without validation; see [`validate`].
    pub fn new(kind: ValuationKind, values: Vec<Vec<f64>>) -> Self {
        ValuationProfile { kind, values }
    }

    /// Builds a profile and checks it against `instance`.
    pub fn checked(instance: &Instance, kind: ValuationKind, values: Vec<Vec<f64>>) -> Result<Self> {
        let profile = Self::new(kind, values);
        validate(instance, Some(&profile)).map_err(Error::InvalidValuations)?;
        Ok(profile)
    }

    pub fn kind(&self) -> ValuationKind {
        self.kind
    }

    #[inline]
    pub fn value(&self, agent: usize, object: usize) -> f64 {
        self.values[agent][object]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// A partial injective assignment of agents to objects.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    by_agent: Vec<Option<usize>>,
    by_object: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching {
            by_agent: vec![None; n],
            by_object: vec![None; n],
        }
    }

    /// Builds a matching from `(agent, object)` pairs, rejecting pairs that
    /// reuse an agent or an object.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = Matching::empty(n);
        for (a, o) in pairs {
            m.insert(a, o)?;
        }
        Ok(m)
    }

    /// Builds a matching from a per-agent assignment vector.
    pub fn from_assignment(n: usize, assignment: &[Option<usize>]) -> Result<Self> {
        Self::from_pairs(
            n,
            assignment
                .iter()
                .enumerate()
                .filter_map(|(a, o)| o.map(|o| (a, o))),
        )
    }

    pub fn insert(&mut self, agent: usize, object: usize) -> Result<()> {
        let n = self.n();
        if agent >= n {
            return Err(Error::IndexOutOfBounds { what: "agent", index: agent, n });
        }
        if object >= n {
            return Err(Error::IndexOutOfBounds { what: "object", index: object, n });
        }
        if self.by_agent[agent].is_some() {
            return Err(Error::InvalidMatching(format!("agent {} matched twice", agent + 1)));
        }
        if self.by_object[object].is_some() {
            return Err(Error::InvalidMatching(format!("object {} matched twice", object + 1)));
        }
        self.by_agent[agent] = Some(object);
        self.by_object[object] = Some(agent);
        Ok(())
    }

    pub fn remove_agent(&mut self, agent: usize) -> Option<usize> {
        let o = self.by_agent[agent].take()?;
        self.by_object[o] = None;
        Some(o)
    }

    pub fn n(&self) -> usize {
        self.by_agent.len()
    }

    pub fn object_of(&self, agent: usize) -> Option<usize> {
        self.by_agent[agent]
    }

    pub fn agent_of(&self, object: usize) -> Option<usize> {
        self.by_object[object]
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.by_agent
    }

    pub fn len(&self) -> usize {
        self.by_agent.iter().filter(|o| o.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pairs sorted by agent index.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.by_agent
            .iter()
            .enumerate()
            .filter_map(|(a, o)| o.map(|o| (a, o)))
    }

    /// Fails when some pair is unacceptable or the size differs from the
    /// instance.
    pub fn check_against(&self, instance: &Instance) -> Result<()> {
        if self.n() != instance.n() {
            return Err(Error::InvalidMatching(format!(
                "matching has size parameter {}, instance has n = {}",
                self.n(),
                instance.n()
            )));
        }
        for (a, o) in self.pairs() {
            if !instance.is_acceptable(a, o) {
                return Err(Error::UnacceptablePair { agent: a, object: o });
            }
        }
        Ok(())
    }
}

impl Serialize for Matching {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[usize; 2]> = self.pairs().map(|(a, o)| [a + 1, o + 1]).collect();
        pairs.serialize(s)
    }
}

/// Lexicographically compared signature tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Signature(pub Vec<i64>);

/// `s[r - 1]` = number of agents matched along a rank-`r` edge.
pub fn rank_counts(instance: &Instance, matching: &Matching) -> Vec<usize> {
    let mut counts = vec![0usize; instance.n()];
    for (a, o) in matching.pairs() {
        if let Some(r) = instance.rank_of(a, o) {
            counts[r - 1] += 1;
        }
    }
    counts
}

pub fn signature(instance: &Instance, matching: &Matching, kind: PriorityKind) -> Result<Signature> {
    matching.check_against(instance)?;
    let s = rank_counts(instance, matching);
    let total: i64 = s.iter().map(|&x| x as i64).sum();
    let key = match kind {
        PriorityKind::ParetoOnly => return Err(Error::SignatureUndefined),
        PriorityKind::RankMaximal => s.iter().map(|&x| x as i64).collect(),
        PriorityKind::MaxCardRankMaximal => std::iter::once(total)
            .chain(s.iter().map(|&x| x as i64))
            .collect(),
        PriorityKind::Fair => std::iter::once(total)
            .chain(s.iter().rev().map(|&x| -(x as i64)))
            .collect(),
    };
    Ok(Signature(key))
}

/// Social welfare: the sum of matched agents' values.
pub fn welfare(matching: &Matching, valuations: &ValuationProfile) -> f64 {
    matching.pairs().map(|(a, o)| valuations.value(a, o)).sum()
}

/// One violated invariant, with 0-based indices (displayed 1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub agent: Option<usize>,
    pub object: Option<usize>,
    pub detail: String,
}

impl Violation {
    fn agent(agent: usize, detail: impl Into<String>) -> Self {
        Violation { agent: Some(agent), object: None, detail: detail.into() }
    }

    fn pair(agent: usize, object: usize, detail: impl Into<String>) -> Self {
        Violation { agent: Some(agent), object: Some(object), detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.agent, self.object) {
            (Some(a), Some(o)) => write!(f, "agent {}, object {}: {}", a + 1, o + 1, self.detail),
            (Some(a), None) => write!(f, "agent {}: {}", a + 1, self.detail),
            _ => f.write_str(&self.detail),
        }
    }
}

/// Checks the instance invariants and, when given, the valuation profile
/// against the instance. Every violation is reported.
pub fn validate(
    instance: &Instance,
    valuations: Option<&ValuationProfile>,
) -> std::result::Result<(), Vec<Violation>> {
    let n = instance.n();
    let mut out = Vec::new();
    for a in 0..n {
        if instance.order(a).is_empty() {
            out.push(Violation::agent(a, "empty acceptable set"));
        }
    }
    if let Some(v) = valuations {
        validate_values(instance, v, &mut out);
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn validate_values(instance: &Instance, v: &ValuationProfile, out: &mut Vec<Violation>) {
    let n = instance.n();
    if v.values.len() != n || v.values.iter().any(|row| row.len() != n) {
        out.push(Violation {
            agent: None,
            object: None,
            detail: format!("value matrix must be {n}x{n}"),
        });
        return;
    }
    for a in 0..n {
        let row = &v.values[a];
        for (o, &x) in row.iter().enumerate() {
            if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                out.push(Violation::pair(a, o, format!("value {x} outside [0, 1]")));
            } else if !instance.is_acceptable(a, o) && x != 0.0 {
                out.push(Violation::pair(a, o, format!("unacceptable object has value {x}")));
            }
        }
        let tiers = instance.order(a).tiers();
        for tier in tiers {
            let first = row[tier[0]];
            for &o in &tier[1..] {
                if row[o] != first {
                    out.push(Violation::pair(
                        a,
                        o,
                        format!("tied objects valued {} and {}", first, row[o]),
                    ));
                }
            }
        }
        for w in tiers.windows(2) {
            let hi = w[0].iter().map(|&o| row[o]).fold(f64::INFINITY, f64::min);
            let lo = w[1].iter().map(|&o| row[o]).fold(f64::NEG_INFINITY, f64::max);
            if hi <= lo {
                out.push(Violation::agent(
                    a,
                    format!("strict preference not reflected in values ({hi} <= {lo})"),
                ));
            }
        }
        let acc: Vec<f64> = instance.order(a).objects().map(|o| row[o]).collect();
        match v.kind {
            ValuationKind::UnitSum => {
                let sum: f64 = acc.iter().sum();
                if (sum - 1.0).abs() > UNIT_SUM_TOL {
                    out.push(Violation::agent(a, format!("sum = {sum}")));
                }
            }
            ValuationKind::UnitRange => {
                let max = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = acc.iter().copied().fold(f64::INFINITY, f64::min);
                if (max - 1.0).abs() > UNIT_RANGE_TOL {
                    out.push(Violation::agent(a, format!("max ≠ 1 (max = {max})")));
                }
                if min.abs() > UNIT_RANGE_TOL {
                    out.push(Violation::agent(a, format!("min ≠ 0 (min = {min})")));
                }
                if tiers.len() < 2 {
                    out.push(Violation::agent(a, "no strictly preferred pair"));
                }
            }
        }
    }
}

/// JSON instance file:
/// `{"n": 3, "preferences": [[[1], [2, 3]], ...], "valuations": {...}}`,
/// with 1-indexed objects; the outer list holds agents, the inner lists
/// their tiers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub preferences: Vec<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuations: Option<ValuationsFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValuationsFile {
    pub kind: ValuationKind,
    pub values: Vec<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_parts(instance: &Instance, valuations: Option<&ValuationProfile>) -> Self {
        InstanceFile {
            n: instance.n(),
            preferences: instance
                .preferences()
                .iter()
                .map(|p| {
                    p.tiers()
                        .iter()
                        .map(|t| t.iter().map(|&o| o + 1).collect())
                        .collect()
                })
                .collect(),
            valuations: valuations.map(|v| ValuationsFile {
                kind: v.kind(),
                values: v.rows().to_vec(),
            }),
        }
    }

    /// Converts to library types, validating both the instance and any
    /// valuations.
    pub fn into_parts(self) -> Result<(Instance, Option<ValuationProfile>)> {
        let n = self.n;
        let prefs = self
            .preferences
            .into_iter()
            .map(|tiers| {
                let tiers = tiers
                    .into_iter()
                    .map(|t| {
                        t.into_iter()
                            .map(|o| {
                                if o == 0 || o > n {
                                    Err(Error::IndexOutOfBounds { what: "object", index: o, n })
                                } else {
                                    Ok(o - 1)
                                }
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                WeakOrder::new(tiers)
            })
            .collect::<Result<Vec<_>>>()?;
        let instance = Instance::new(n, prefs)?;
        let valuations = match self.valuations {
            Some(v) => Some(ValuationProfile::checked(&instance, v.kind, v.values)?),
            None => None,
        };
        Ok((instance, valuations))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> (Instance, ValuationProfile) {
        let inst = Instance::from_strict(3, &[vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        let v = ValuationProfile::new(
            ValuationKind::UnitSum,
            vec![vec![0.9, 0.1, 0.0], vec![0.9, 0.1, 0.0], vec![0.51, 0.49, 0.0]],
        );
        (inst, v)
    }

    #[test]
    fn rank_strict_order() {
        let inst = Instance::from_strict(3, &[vec![0, 1, 2], vec![0], vec![0]]).unwrap();
        assert_eq!(rank(&inst, 0, 1).unwrap(), Some(2));
    }

    #[test]
    fn rank_after_tie_skips_tier_size() {
        let order = WeakOrder::new(vec![vec![0, 1], vec![2]]).unwrap();
        let inst = Instance::new(3, vec![order.clone(), order.clone(), order]).unwrap();
        assert_eq!(rank(&inst, 0, 0).unwrap(), Some(1));
        assert_eq!(rank(&inst, 0, 1).unwrap(), Some(1));
        assert_eq!(rank(&inst, 0, 2).unwrap(), Some(3));
    }

    #[test]
    fn rank_unacceptable_and_out_of_bounds() {
        let inst = Instance::from_strict(3, &[vec![0, 1], vec![0], vec![0]]).unwrap();
        assert_eq!(rank(&inst, 0, 2).unwrap(), None);
        assert!(matches!(rank(&inst, 3, 0), Err(Error::IndexOutOfBounds { .. })));
        assert!(matches!(rank(&inst, 0, 7), Err(Error::IndexOutOfBounds { .. })));
    }

    #[test]
    fn instance_rejects_empty_acceptable_set() {
        let err = Instance::new(1, vec![WeakOrder::new(vec![]).unwrap()]).unwrap_err();
        assert!(matches!(err, Error::InvalidInstance(_)));
    }

    #[test]
    fn weak_order_rejects_duplicates() {
        assert!(WeakOrder::new(vec![vec![0], vec![0, 1]]).is_err());
        assert!(WeakOrder::new(vec![vec![0], vec![]]).is_err());
    }

    #[test]
    fn signature_layouts() {
        let inst = Instance::from_strict(3, &[vec![0, 1], vec![1, 0], vec![2]]).unwrap();
        let all_top = Matching::from_pairs(3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(
            signature(&inst, &all_top, PriorityKind::Fair).unwrap(),
            Signature(vec![3, 0, 0, -3])
        );
        let empty = Matching::empty(3);
        assert_eq!(
            signature(&inst, &empty, PriorityKind::RankMaximal).unwrap(),
            Signature(vec![0, 0, 0])
        );
        let mixed = Matching::from_pairs(3, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(
            signature(&inst, &mixed, PriorityKind::MaxCardRankMaximal).unwrap(),
            Signature(vec![2, 0, 2, 0])
        );
        assert_eq!(
            signature(&inst, &mixed, PriorityKind::Fair).unwrap(),
            Signature(vec![2, 0, -2, 0])
        );
        assert!(matches!(
            signature(&inst, &mixed, PriorityKind::ParetoOnly),
            Err(Error::SignatureUndefined)
        ));
    }

    #[test]
    fn welfare_table1() {
        let (_, v) = table1();
        let m = Matching::from_pairs(3, [(0, 0), (2, 1), (1, 2)]).unwrap();
        assert!((welfare(&m, &v) - 1.39).abs() < 1e-12);
        let m = Matching::from_pairs(3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        assert!((welfare(&m, &v) - 1.0).abs() < 1e-12);
        assert_eq!(welfare(&Matching::empty(3), &v), 0.0);
    }

    #[test]
    fn validate_table1_and_bad_rows() {
        let (inst, v) = table1();
        assert!(validate(&inst, Some(&v)).is_ok());

        let bad_sum = ValuationProfile::new(
            ValuationKind::UnitSum,
            vec![vec![0.5, 0.4, 0.0], vec![0.9, 0.1, 0.0], vec![0.51, 0.49, 0.0]],
        );
        let errs = validate(&inst, Some(&bad_sum)).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].agent, Some(0));
        assert!(errs[0].detail.starts_with("sum = 0.9"));

        let bad_range = ValuationProfile::new(
            ValuationKind::UnitRange,
            vec![vec![0.9, 0.1, 0.0], vec![1.0, 0.1, 0.0], vec![1.0, 0.49, 0.0]],
        );
        let errs = validate(&inst, Some(&bad_range)).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].detail.starts_with("max ≠ 1"));
    }

    #[test]
    fn validate_flags_inconsistent_order() {
        let inst = Instance::from_strict(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let v = ValuationProfile::new(ValuationKind::UnitSum, vec![vec![0.4, 0.6], vec![0.3, 0.7]]);
        let errs = validate(&inst, Some(&v)).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].agent, Some(0));
    }

    #[test]
    fn matching_rejects_reuse() {
        assert!(Matching::from_pairs(2, [(0, 0), (1, 0)]).is_err());
        assert!(Matching::from_pairs(2, [(0, 0), (0, 1)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let (inst, v) = table1();
        let file = InstanceFile::from_parts(&inst, Some(&v));
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.contains("\"unit_sum\""));
        let back: InstanceFile = serde_json::from_str(&text).unwrap();
        let (inst2, v2) = back.into_parts().unwrap();
        assert_eq!(inst, inst2);
        assert_eq!(Some(v), v2);
    }

    #[test]
    fn json_rejects_zero_index() {
        let text = r#"{"n": 2, "preferences": [[[0]], [[1]]]}"#;
        let file: InstanceFile = serde_json::from_str(text).unwrap();
        assert!(file.into_parts().is_err());
    }
}
