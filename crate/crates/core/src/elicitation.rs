//! Threshold queries against hidden valuations, with budget accounting.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ValuationProfile, WeakOrder};

/// "Is agent's value for object at least `threshold`?"
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdQuery {
    pub agent: usize,
    pub object: usize,
    pub threshold: f64,
    /// Set when the answer is known in advance (reported, still counted).
    pub forced: bool,
}

impl ThresholdQuery {
    pub fn new(agent: usize, object: usize, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::ThresholdOutOfRange(threshold));
        }
        Ok(ThresholdQuery { agent, object, threshold, forced: false })
    }

    pub fn mark_forced(mut self) -> Self {
        self.forced = true;
        self
    }
}

/// Truthful answer: `v >= t`, compared exactly.
pub fn answer(hidden: &ValuationProfile, q: &ThresholdQuery) -> bool {
    hidden.value(q.agent, q.object) >= q.threshold
}

/// Read-only handle that exposes answers but not the values themselves.
#[derive(Clone, Copy)]
pub struct HiddenValuations<'a> {
    profile: &'a ValuationProfile,
}

impl<'a> HiddenValuations<'a> {
    pub fn new(profile: &'a ValuationProfile) -> Self {
        HiddenValuations { profile }
    }

    pub fn n(&self) -> usize {
        self.profile.rows().len()
    }

    fn answer(&self, q: &ThresholdQuery) -> Result<bool> {
        let n = self.n();
        if q.agent >= n {
            return Err(Error::IndexOutOfBounds { what: "agent", index: q.agent, n });
        }
        if q.object >= n {
            return Err(Error::IndexOutOfBounds { what: "object", index: q.object, n });
        }
        Ok(answer(self.profile, q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerMode {
    Adaptive,
    /// One batch of queries fixed up front, at most one per pair.
    NonAdaptiveOnePerPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub query: ThresholdQuery,
    pub answer: bool,
}

#[derive(Serialize)]
struct EntryLine {
    agent: usize,
    object: usize,
    t: f64,
    ans: u8,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    forced: bool,
}

/// Every query asked so far, in order.
#[derive(Debug, Clone)]
pub struct QueryLedger {
    mode: LedgerMode,
    n: usize,
    entries: Vec<LedgerEntry>,
    committed: bool,
}

impl QueryLedger {
    pub fn new(mode: LedgerMode, n: usize) -> Self {
        QueryLedger { mode, n, entries: Vec::new(), committed: false }
    }

    pub fn mode(&self) -> LedgerMode {
        self.mode
    }

    /// Asks one query; only allowed on an adaptive ledger.
    pub fn ask(&mut self, oracle: &HiddenValuations<'_>, q: ThresholdQuery) -> Result<bool> {
        if self.mode != LedgerMode::Adaptive {
            return Err(Error::BudgetViolation(
                "single adaptive query on a non-adaptive ledger".into(),
            ));
        }
        let ans = oracle.answer(&q)?;
        self.entries.push(LedgerEntry { query: q, answer: ans });
        Ok(ans)
    }

    /// Asks a whole batch at once. On a non-adaptive ledger this may happen
    /// only once and the batch may not repeat an (agent, object) pair.
    pub fn ask_batch(&mut self, oracle: &HiddenValuations<'_>, queries: &[ThresholdQuery]) -> Result<Vec<bool>> {
        if self.mode == LedgerMode::NonAdaptiveOnePerPair {
            if self.committed {
                return Err(Error::BudgetViolation("second non-adaptive batch".into()));
            }
            let mut seen = HashSet::new();
            for q in queries {
                if !seen.insert((q.agent, q.object)) {
                    return Err(Error::BudgetViolation(format!(
                        "pair (agent {}, object {}) queried twice",
                        q.agent + 1,
                        q.object + 1
                    )));
                }
            }
            self.committed = true;
        }
        let answers = queries
            .iter()
            .map(|q| oracle.answer(q))
            .collect::<Result<Vec<_>>>()?;
        self.entries.extend(
            queries
                .iter()
                .zip(&answers)
                .map(|(q, &a)| LedgerEntry { query: *q, answer: a }),
        );
        Ok(answers)
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn counts_per_agent(&self) -> Vec<usize> {
        let mut c = vec![0; self.n];
        for e in &self.entries {
            c[e.query.agent] += 1;
        }
        c
    }

    pub fn max_per_agent(&self) -> usize {
        self.counts_per_agent().into_iter().max().unwrap_or(0)
    }

    pub fn forced_count(&self) -> usize {
        self.entries.iter().filter(|e| e.query.forced).count()
    }

    /// True when no (agent, object) pair appears twice.
    pub fn is_one_per_pair(&self) -> bool {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .all(|e| seen.insert((e.query.agent, e.query.object)))
    }

    pub fn answers(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.answer).collect()
    }

    /// JSON lines, 1-indexed: `{"agent":1,"object":2,"t":0.5,"ans":1}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = EntryLine {
                agent: e.query.agent + 1,
                object: e.query.object + 1,
                t: e.query.threshold,
                ans: e.answer as u8,
                forced: e.query.forced,
            };
            out.push_str(&serde_json::to_string(&line).expect("plain struct"));
            out.push('\n');
        }
        out
    }
}

/// Checks that thresholds are strictly descending and inside (0, 1).
pub fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    let inside = thresholds.iter().all(|&t| t > 0.0 && t < 1.0);
    let descending = thresholds.windows(2).all(|w| w[0] > w[1]);
    if inside && descending {
        Ok(())
    } else {
        Err(Error::InvalidThresholds)
    }
}

/// Assigns each acceptable object of `agent` its band: `k` when the value
/// lies in `[t_k, t_{k-1})` (with `t_0 = 1` included), `0` below `t_c`.
///
/// For each threshold in turn, binary-searches the tier sequence for the
/// longest prefix of tiers valued at least `t_k`, starting from the prefix
/// found for the previous threshold. Tier representatives are the
/// lowest-index object of each tier. The result is indexed by object;
/// unacceptable objects get band 0.
pub fn locate_bands(
    oracle: &HiddenValuations<'_>,
    ledger: &mut QueryLedger,
    agent: usize,
    order: &WeakOrder,
    thresholds: &[f64],
) -> Result<Vec<usize>> {
    check_thresholds(thresholds)?;
    let tiers = order.tiers();
    let m = tiers.len();
    let mut prefix = Vec::with_capacity(thresholds.len());
    let mut lo = 0usize;
    for &t in thresholds {
        let mut hi = m;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            let q = ThresholdQuery::new(agent, tiers[mid - 1][0], t)?;
            if ledger.ask(oracle, q)? {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        prefix.push(lo);
    }
    let mut bands = vec![0usize; oracle.n()];
    for (x, tier) in tiers.iter().enumerate() {
        let band = prefix.iter().position(|&l| x < l).map_or(0, |k| k + 1);
        for &o in tier {
            bands[o] = band;
        }
    }
    Ok(bands)
}

/// `ceil(log2(x + 1))`, the per-threshold binary-search budget over `x` tiers.
pub fn search_budget(x: usize) -> usize {
    (usize::BITS - x.leading_zeros()) as usize
}
