//! Random instance generation and the experiment runners behind the CLI.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{run_adversary, AdversaryReport};
use crate::algorithms::{
    adaptive_approx, adaptive_c, ordinal_baseline, welfare_optimal_priority, AlgoResult, OneQueryPerPair,
    UnitRange, UnitSumPareto, UnitSumPriority,
};
use crate::elicitation::HiddenValuations;
use crate::engine::priority_matching;
use crate::error::{Error, Result};
use crate::model::{
    signature, validate, welfare, Instance, PriorityKind, ValuationKind, ValuationProfile, WeakOrder,
};
use crate::oracle::{
    bigint_priority_check, is_pareto_optimal, optimal_within_class, ratio, ClassOptimum, BIGINT_MAX_N,
    ENUM_MAX_N,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    WelfareOptimal,
    Adaptive,
    NonadaptivePriorityUnitSum,
    NonadaptivePoUnitSum,
    NonadaptiveUnitRange,
    OrdinalBaseline,
}

impl AlgorithmName {
    pub const ALL: [AlgorithmName; 6] = [
        AlgorithmName::WelfareOptimal,
        AlgorithmName::Adaptive,
        AlgorithmName::NonadaptivePriorityUnitSum,
        AlgorithmName::NonadaptivePoUnitSum,
        AlgorithmName::NonadaptiveUnitRange,
        AlgorithmName::OrdinalBaseline,
    ];
}

fn default_trials() -> usize {
    1
}
fn default_algorithms() -> Vec<AlgorithmName> {
    AlgorithmName::ALL.to_vec()
}
fn default_kinds() -> Vec<PriorityKind> {
    PriorityKind::ALL.to_vec()
}
fn default_epsilons() -> Vec<f64> {
    vec![0.5]
}
fn default_acceptability() -> f64 {
    1.0
}
fn default_adversary_sizes() -> Vec<usize> {
    vec![20, 45, 80, 125, 180]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub valuation_kind: ValuationKind,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<AlgorithmName>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<PriorityKind>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub tie_prob: f64,
    #[serde(default = "default_acceptability")]
    pub acceptability_prob: f64,
    #[serde(default = "default_adversary_sizes")]
    pub adversary_sizes: Vec<usize>,
    #[serde(default)]
    pub out: Option<std::path::PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str(r#"{"sizes": [4]}"#).expect("defaults parse")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.sizes.iter().any(|&n| n == 0) {
            return bad("sizes must be >= 1");
        }
        if self.trials == 0 {
            return bad("trials must be >= 1");
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return bad("epsilon entries must be positive");
        }
        check_probs(self.tie_prob, self.acceptability_prob)
    }
}

fn check_probs(tie_prob: f64, acceptability_prob: f64) -> Result<()> {
    if !(0.0..1.0).contains(&tie_prob) {
        return Err(Error::Config(format!("tie_prob {tie_prob} outside [0, 1)")));
    }
    if !(acceptability_prob > 0.0 && acceptability_prob <= 1.0) {
        return Err(Error::Config(format!("acceptability_prob {acceptability_prob} outside (0, 1]")));
    }
    Ok(())
}

/// Seed for one `(n, trial)` cell, so cells are independent of run order.
pub fn cell_seed(seed: u64, n: usize, trial: usize) -> u64 {
    let mut x = seed ^ ((n as u64) << 32) ^ trial as u64;
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Random weak orders: independent acceptability (at least one object per
/// agent), a uniform order, adjacent objects tied with `tie_prob`.
pub fn gen_random_instance(seed: u64, n: usize, tie_prob: f64, acceptability_prob: f64) -> Result<Instance> {
    check_probs(tie_prob, acceptability_prob)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prefs = (0..n)
        .map(|_| {
            let mut acc: Vec<usize> = Vec::new();
            while acc.is_empty() {
                acc = (0..n).filter(|_| rng.random_bool(acceptability_prob)).collect();
            }
            acc.shuffle(&mut rng);
            let mut tiers: Vec<Vec<usize>> = vec![vec![acc[0]]];
            for &o in &acc[1..] {
                if rng.random_bool(tie_prob) {
                    tiers.last_mut().expect("nonempty").push(o);
                } else {
                    tiers.push(vec![o]);
                }
            }
            WeakOrder::new(tiers)
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(n, prefs)
}

/// Exponential draws sorted onto the weak order, averaged within tiers and
/// normalized to unit-sum or unit-range.
pub fn gen_random_valuations(seed: u64, instance: &Instance, kind: ValuationKind) -> Result<ValuationProfile> {
    let n = instance.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0; n]; n];
    for (a, row) in rows.iter_mut().enumerate() {
        let order = instance.order(a);
        if kind == ValuationKind::UnitRange && order.tiers().len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "agent {} has no strict pair; unit-range values impossible",
                a + 1
            )));
        }
        let mut draws: Vec<f64> = (0..order.len()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        draws.sort_by(|x, y| y.total_cmp(x));
        let mut tier_vals = Vec::with_capacity(order.tiers().len());
        let mut i = 0;
        for tier in order.tiers() {
            let avg = draws[i..i + tier.len()].iter().sum::<f64>() / tier.len() as f64;
            i += tier.len();
            tier_vals.push(avg);
        }
        let scaled: Vec<f64> = match kind {
            ValuationKind::UnitSum => {
                let total: f64 = order.tiers().iter().zip(&tier_vals).map(|(t, v)| v * t.len() as f64).sum();
                tier_vals.iter().map(|v| v / total).collect()
            }
            ValuationKind::UnitRange => {
                let hi = tier_vals[0];
                let lo = *tier_vals.last().expect("nonempty");
                let last = tier_vals.len() - 1;
                tier_vals
                    .iter()
                    .enumerate()
                    .map(|(k, v)| match k {
                        0 => 1.0,
                        k if k == last => 0.0,
                        _ => (v - lo) / (hi - lo),
                    })
                    .collect()
            }
        };
        for (tier, v) in order.tiers().iter().zip(scaled) {
            for &o in tier {
                row[o] = v;
            }
        }
    }
    let p = ValuationProfile::new(kind, rows);
    validate(instance, Some(&p)).map_err(Error::InvalidValuations)?;
    Ok(p)
}

/// Draws an instance usable with `kind`; unit-range needs every agent to
/// have two tiers, so later attempts use fresh sub-seeds.
pub fn gen_cell(seed: u64, n: usize, cfg_tie: f64, cfg_acc: f64, kind: ValuationKind) -> Result<(Instance, ValuationProfile)> {
    for attempt in 0..1000u64 {
        let s = cell_seed(seed, n, attempt as usize);
        let inst = gen_random_instance(s, n, cfg_tie, cfg_acc)?;
        if kind == ValuationKind::UnitRange && (0..n).any(|a| inst.order(a).tiers().len() < 2) {
            continue;
        }
        let v = gen_random_valuations(s.wrapping_add(1), &inst, kind)?;
        return Ok((inst, v));
    }
    Err(Error::Config(format!("could not draw a {kind} instance with n = {n}")))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteRow {
    pub n: usize,
    pub trial: usize,
    pub algorithm: &'static str,
    pub kind: PriorityKind,
    pub valuation_kind: ValuationKind,
    pub epsilon: Option<f64>,
    pub c: Option<usize>,
    pub welfare: f64,
    pub opt_welfare: f64,
    pub ratio: f64,
    pub max_queries_per_agent: usize,
    pub total_queries: usize,
    pub millis: f64,
}

/// Runs one algorithm; `None` when the (algorithm, kind, valuation) triple
/// is not supported.
fn run_one(
    name: AlgorithmName,
    kind: PriorityKind,
    eps: f64,
    inst: &Instance,
    v: &ValuationProfile,
) -> Option<Result<AlgoResult>> {
    let oracle = HiddenValuations::new(v);
    let unit_sum = v.kind() == ValuationKind::UnitSum;
    let r = match name {
        AlgorithmName::WelfareOptimal => welfare_optimal_priority(inst, kind, v),
        AlgorithmName::Adaptive => adaptive_approx(inst, kind, eps, &oracle),
        AlgorithmName::OrdinalBaseline => ordinal_baseline(inst, kind),
        AlgorithmName::NonadaptivePriorityUnitSum if unit_sum && kind.is_signature_based() => {
            UnitSumPriority::new(kind).and_then(|a| a.run(inst, &oracle))
        }
        AlgorithmName::NonadaptivePoUnitSum if unit_sum && kind == PriorityKind::ParetoOnly && inst.n() >= 8 => {
            UnitSumPareto.run(inst, &oracle)
        }
        AlgorithmName::NonadaptiveUnitRange if !unit_sum => UnitRange { kind }.run(inst, &oracle),
        _ => return None,
    };
    Some(r)
}

/// Per-cell comparator: the class optimum by enumeration when `n <= 8`,
/// else the full-information optimum.
struct Comparator<'a> {
    inst: &'a Instance,
    v: &'a ValuationProfile,
    cache: HashMap<PriorityKind, ClassOptimum>,
}

impl Comparator<'_> {
    fn opt(&mut self, kind: PriorityKind) -> Result<f64> {
        if self.inst.n() > ENUM_MAX_N {
            return Ok(welfare(&welfare_optimal_priority(self.inst, kind, self.v)?.matching, self.v));
        }
        if !self.cache.contains_key(&kind) {
            self.cache.insert(kind, optimal_within_class(self.inst, self.v, kind)?);
        }
        Ok(self.cache[&kind].best_welfare)
    }

    /// Class membership when the oracle applies; larger sizes are trusted.
    fn check_member(&mut self, r: &AlgoResult) -> Result<()> {
        if self.inst.n() > ENUM_MAX_N {
            return Ok(());
        }
        self.opt(r.kind)?;
        let ok = match &self.cache[&r.kind].signature {
            None => is_pareto_optimal(self.inst, &r.matching)?,
            Some(sig) => signature(self.inst, &r.matching, r.kind)? == *sig,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ClassViolation(r.kind))
        }
    }
}

fn run_cell(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<Vec<SuiteRow>> {
    let (inst, v) = gen_cell(cell_seed(cfg.seed, n, trial), n, cfg.tie_prob, cfg.acceptability_prob, cfg.valuation_kind)?;
    let mut cmp = Comparator { inst: &inst, v: &v, cache: HashMap::new() };
    let mut rows = Vec::new();
    for &name in &cfg.algorithms {
        for &kind in &cfg.kinds {
            let eps_list: Vec<Option<f64>> = if name == AlgorithmName::Adaptive {
                cfg.epsilons.iter().map(|&e| Some(e)).collect()
            } else {
                vec![None]
            };
            for eps in eps_list {
                let start = Instant::now();
                let Some(r) = run_one(name, kind, eps.unwrap_or(1.0), &inst, &v) else {
                    continue;
                };
                let r = r?;
                let millis = start.elapsed().as_secs_f64() * 1e3;
                cmp.check_member(&r)?;
                let w = welfare(&r.matching, &v);
                let opt = cmp.opt(kind)?;
                let rt = ratio(opt, w);
                if !(rt >= 1.0 - 1e-9) {
                    return Err(Error::InvalidMatching(format!(
                        "{} on n = {n}, trial {trial}: ratio {rt} below 1",
                        r.algorithm
                    )));
                }
                rows.push(SuiteRow {
                    n,
                    trial,
                    algorithm: r.algorithm,
                    kind,
                    valuation_kind: v.kind(),
                    epsilon: eps,
                    c: eps.map(|e| adaptive_c(n, e)).transpose()?,
                    welfare: w,
                    opt_welfare: opt,
                    ratio: rt,
                    max_queries_per_agent: r.ledger.max_per_agent(),
                    total_queries: r.ledger.len(),
                    millis,
                });
            }
        }
    }
    Ok(rows)
}

/// Every (size, trial) cell in parallel; rows come back in config order.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<SuiteRow>> {
    cfg.check()?;
    let cells: Vec<(usize, usize)> =
        cfg.sizes.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    let chunks = cells
        .par_iter()
        .map(|&(n, t)| run_cell(cfg, n, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversaryRow {
    pub n: usize,
    pub algorithm: &'static str,
    pub kind: PriorityKind,
    pub valuation_kind: ValuationKind,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub n4: usize,
    pub z: usize,
    pub sw_alg: f64,
    pub sw_benchmark: f64,
    pub sw_opt: f64,
    pub ratio: f64,
    pub ratio_opt: f64,
    pub benchmark_bound: f64,
    pub benchmark_ok: bool,
    pub alg_upper: Option<f64>,
    pub alg_upper_ok: Option<bool>,
    pub replay_identical: bool,
}

impl From<AdversaryReport> for AdversaryRow {
    fn from(r: AdversaryReport) -> Self {
        let [n1, n2, n3, n4] = r.block_counts;
        AdversaryRow {
            n: r.n,
            algorithm: r.algorithm,
            kind: r.kind,
            valuation_kind: r.valuation_kind,
            n1,
            n2,
            n3,
            n4,
            z: r.z,
            sw_alg: r.sw_alg,
            sw_benchmark: r.sw_benchmark,
            sw_opt: r.sw_opt,
            ratio: r.ratio,
            ratio_opt: r.ratio_opt,
            benchmark_bound: r.benchmark_bound,
            benchmark_ok: r.benchmark_ok,
            alg_upper: r.alg_upper,
            alg_upper_ok: r.alg_upper_ok,
            replay_identical: r.replay_identical,
        }
    }
}

/// The one-query-per-pair algorithm matching `kind` and the valuation
/// normalization.
pub fn one_per_pair_for(kind: PriorityKind, valuation_kind: ValuationKind) -> Result<Box<dyn OneQueryPerPair + Sync>> {
    Ok(match (valuation_kind, kind) {
        (ValuationKind::UnitRange, _) => Box::new(UnitRange { kind }),
        (ValuationKind::UnitSum, PriorityKind::ParetoOnly) => Box::new(UnitSumPareto),
        (ValuationKind::UnitSum, _) => Box::new(UnitSumPriority::new(kind)?),
    })
}

/// The adversary against each configured kind at each adversary size.
pub fn run_adversary_suite(cfg: &ExperimentConfig) -> Result<Vec<AdversaryRow>> {
    let jobs: Vec<(PriorityKind, usize)> = cfg
        .kinds
        .iter()
        .flat_map(|&k| cfg.adversary_sizes.iter().map(move |&n| (k, n)))
        .collect();
    jobs.par_iter()
        .map(|&(kind, n)| {
            let alg = one_per_pair_for(kind, cfg.valuation_kind)?;
            run_adversary(alg.as_ref(), n, cfg.valuation_kind).map(AdversaryRow::from)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheckRow {
    pub n: usize,
    pub trial: usize,
    pub kind: PriorityKind,
    pub valuation_kind: ValuationKind,
    pub signature_ok: Option<bool>,
    pub bigint_ok: Option<bool>,
    pub welfare_ok: bool,
}

impl OracleCheckRow {
    pub fn passed(&self) -> bool {
        self.welfare_ok && self.signature_ok != Some(false) && self.bigint_ok != Some(false)
    }
}

/// Cross-checks the solvers against enumeration on every cell with
/// `n <= 8`; the big-integer solve runs for `n <= 6`.
pub fn run_oracle_check(cfg: &ExperimentConfig) -> Result<Vec<OracleCheckRow>> {
    cfg.check()?;
    let cells: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .filter(|&&n| n <= ENUM_MAX_N)
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let chunks = cells
        .par_iter()
        .map(|&(n, trial)| {
            let (inst, v) =
                gen_cell(cell_seed(cfg.seed, n, trial), n, cfg.tie_prob, cfg.acceptability_prob, cfg.valuation_kind)?;
            cfg.kinds
                .iter()
                .map(|&kind| {
                    let opt = optimal_within_class(&inst, &v, kind)?;
                    let best = welfare_optimal_priority(&inst, kind, &v)?;
                    let welfare_ok = (welfare(&best.matching, &v) - opt.best_welfare).abs() <= 1e-9;
                    let signature_ok = match &opt.signature {
                        None => None,
                        Some(sig) => {
                            let m = priority_matching(&inst, kind, |_, _| 0.0)?;
                            Some(signature(&inst, &m, kind)? == *sig)
                        }
                    };
                    let bigint_ok = (kind.is_signature_based() && n <= BIGINT_MAX_N)
                        .then(|| bigint_priority_check(&inst, kind, Some(&v)))
                        .transpose()?;
                    Ok(OracleCheckRow { n, trial, kind, valuation_kind: v.kind(), signature_ok, bigint_ok, welfare_ok })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Writes rows as CSV with a header line.
pub fn write_csv<W: std::io::Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))?;
    Ok(())
}
