//! Lower-bound constructions against one-query-per-pair algorithms: the
//! blocked instance, the two utility banks, block typing from the query
//! thresholds and the adversarial valuation picker.

use serde::Serialize;

use crate::algorithms::{welfare_optimal_priority, OneQueryPerPair};
use crate::elicitation::{HiddenValuations, QueryLedger, ThresholdQuery};
use crate::engine::priority_matching;
use crate::error::{Error, Result};
use crate::model::{welfare, Instance, Matching, PriorityKind, ValuationKind, ValuationProfile, WeakOrder};

pub const MIN_N: usize = 18;
const BLOCK: usize = 5;

/// Thresholds asked per (agent, object); `None` when never asked.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMatrix {
    n: usize,
    t: Vec<Option<f64>>,
}

impl ThresholdMatrix {
    pub fn from_queries(n: usize, queries: &[ThresholdQuery]) -> Result<Self> {
        let mut t = vec![None; n * n];
        for q in queries {
            if q.agent >= n || q.object >= n {
                return Err(Error::IndexOutOfBounds { what: "query", index: q.agent.max(q.object), n });
            }
            let slot = &mut t[q.agent * n + q.object];
            if slot.is_some() {
                return Err(Error::BudgetViolation(format!(
                    "pair ({}, {}) asked twice",
                    q.agent + 1,
                    q.object + 1
                )));
            }
            *slot = Some(q.threshold);
        }
        Ok(ThresholdMatrix { n, t })
    }

    pub fn from_ledger(ledger: &QueryLedger, n: usize) -> Result<Self> {
        let qs: Vec<ThresholdQuery> = ledger.entries().iter().map(|e| e.query).collect();
        Self::from_queries(n, &qs)
    }

    pub fn get(&self, agent: usize, object: usize) -> Option<f64> {
        self.t[agent * self.n + object]
    }

    /// Threshold on the agent's rank-`r` object (first object of the tier).
    /// Never-asked pairs read as 1, which constrains nothing.
    pub fn at_rank(&self, instance: &Instance, agent: usize, r: usize) -> f64 {
        instance
            .order(agent)
            .tiers()
            .get(r - 1)
            .and_then(|tier| self.get(agent, tier[0]))
            .unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AgentType {
    Type1,
    Type2,
    Type3,
    Type4,
}

impl AgentType {
    pub const ALL: [AgentType; 4] = [AgentType::Type1, AgentType::Type2, AgentType::Type3, AgentType::Type4];

    /// 1..=4.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    /// Region of `(t1, t2)`, with `c1 = 1/sqrt(n)`.
    pub fn classify(t1: f64, t2: f64, c1: f64) -> AgentType {
        if t2 <= c1 {
            if t1 < 0.5 {
                AgentType::Type1
            } else {
                AgentType::Type2
            }
        } else if t1 < c1 {
            AgentType::Type3
        } else {
            AgentType::Type4
        }
    }
}

fn c1(n: usize) -> f64 {
    1.0 / (n as f64).sqrt()
}

/// `h_1` first, the block object second, every other object tied last.
/// Blocks of five; leftover agents prefer object `n - 1` (1-indexed)
/// second.
pub fn build_lb_instance_unit_sum(n: usize) -> Result<Instance> {
    if n < MIN_N {
        return Err(Error::InstanceTooSmall { what: "lower-bound instance", n, min: MIN_N });
    }
    let prefs = (0..n)
        .map(|a| {
            let second = block_object(n, a / BLOCK);
            let rest: Vec<usize> = (1..n).filter(|&o| o != second).collect();
            WeakOrder::new(vec![vec![0], vec![second], rest])
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(n, prefs)
}

/// Same instance, paired with the unit-range bank.
pub fn build_lb_instance_unit_range(n: usize) -> Result<(Instance, UtilityBank)> {
    let inst = build_lb_instance_unit_sum(n)?;
    Ok((inst, utility_bank_unit_range(n, canonical_epsilon(n))?))
}

fn blocks(n: usize) -> usize {
    n / BLOCK
}

/// Second choice of agents in block `b` (0-based); the leftover group uses
/// `n - 2`.
fn block_object(n: usize, b: usize) -> usize {
    if b < blocks(n) {
        b + 1
    } else {
        n - 2
    }
}

/// `1 / (2 n^4)`.
pub fn canonical_epsilon(n: usize) -> f64 {
    0.5 / (n as f64).powi(4)
}

/// The nine functions `u_0..u_8`, each as (first, second, rest) values.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityBank {
    pub kind: ValuationKind,
    pub epsilon: f64,
    pub u: [[f64; 3]; 9],
}

impl UtilityBank {
    /// Row for `agent` with function `u_j` laid onto its three tiers.
    pub fn row(&self, instance: &Instance, agent: usize, j: usize) -> Vec<f64> {
        let mut row = vec![0.0; instance.n()];
        for (slot, tier) in instance.order(agent).tiers().iter().enumerate() {
            for &o in tier {
                row[o] = self.u[j][slot.min(2)];
            }
        }
        row
    }
}

fn check_bank_args(n: usize, epsilon: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::InstanceTooSmall { what: "utility bank", n, min: 3 });
    }
    if !(epsilon > 0.0 && epsilon < 1.0 / (n as f64).powi(4)) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// Unit-sum bank; needs `0 < epsilon < 1/n^4`.
pub fn utility_bank_unit_sum(n: usize, epsilon: f64) -> Result<UtilityBank> {
    check_bank_args(n, epsilon)?;
    let e = epsilon;
    let c1 = c1(n);
    let c1sq = c1 * c1;
    let c2 = 1.0 / (2.0 * (n as f64 - 2.0));
    let c3 = (1.0 - c1) / (n as f64 - 2.0);
    Ok(UtilityBank {
        kind: ValuationKind::UnitSum,
        epsilon,
        u: [
            [c1sq + e / 2.0, c1sq, c1sq - c2 * e],
            [1.0 - c1, c1, 0.0],
            [0.5 + e, 0.5 - e, 0.0],
            [0.5 - c1 - e, c1 + e, c2],
            [0.25 + e, 0.25 - e, c2],
            [1.0 - c1sq, c1sq, 0.0],
            [1.0 - c1 + e, c1 - e, 0.0],
            [c1 - c1sq, c1sq, c3],
            [0.75 * c1, 0.25 * c1, c3],
        ],
    })
}

/// Unit-range bank: every top is 1 and every tail 0.
pub fn utility_bank_unit_range(n: usize, epsilon: f64) -> Result<UtilityBank> {
    check_bank_args(n, epsilon)?;
    let e = epsilon;
    let c1 = c1(n);
    let c1sq = c1 * c1;
    let seconds = [c1sq, c1, 0.5, c1 + e, 0.25 - e, c1sq, c1 - e, c1sq, 0.25 * c1];
    let mut u = [[0.0; 3]; 9];
    for (row, s) in u.iter_mut().zip(seconds) {
        *row = [1.0, s, 0.0];
    }
    Ok(UtilityBank { kind: ValuationKind::UnitRange, epsilon, u })
}

/// A full block with its type and two special agents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub index: usize,
    pub object: usize,
    pub block_type: AgentType,
    pub specials: [usize; 2],
}

/// Types every agent from its rank-1 and rank-2 thresholds and every full
/// block by the first type held by two of its agents.
pub fn classify_blocks(instance: &Instance, t: &ThresholdMatrix) -> (Vec<AgentType>, Vec<Block>) {
    let n = instance.n();
    let c1 = c1(n);
    let types: Vec<AgentType> = (0..n)
        .map(|a| AgentType::classify(t.at_rank(instance, a, 1), t.at_rank(instance, a, 2), c1))
        .collect();
    let blocks = (0..blocks(n))
        .map(|b| {
            let members = b * BLOCK..(b + 1) * BLOCK;
            let (block_type, of_type) = AgentType::ALL
                .iter()
                .map(|&ty| (ty, members.clone().filter(|&a| types[a] == ty).collect::<Vec<_>>()))
                .find(|(_, v)| v.len() >= 2)
                .expect("five agents, four types");
            Block { index: b, object: b + 1, block_type, specials: [of_type[0], of_type[1]] }
        })
        .collect();
    (types, blocks)
}

/// Bank index per agent: `u_0` everywhere, and `u_{2j-1}` / `u_{2j}` on the
/// specials of a Type-j block. `odd[b]` names the special (0 or 1) holding
/// the odd function.
fn assignment(n: usize, blocks: &[Block], odd: &[usize]) -> Vec<usize> {
    let mut which = vec![0; n];
    for (b, &o) in blocks.iter().zip(odd) {
        let j = b.block_type.index();
        which[b.specials[o]] = 2 * j - 1;
        which[b.specials[1 - o]] = 2 * j;
    }
    which
}

fn profile(instance: &Instance, bank: &UtilityBank, which: &[usize]) -> ValuationProfile {
    let rows = which.iter().enumerate().map(|(a, &j)| bank.row(instance, a, j)).collect();
    ValuationProfile::new(bank.kind, rows)
}

/// The profile used for the first run: the first special of each block
/// holds the odd function.
pub fn seed_profile(instance: &Instance, bank: &UtilityBank, blocks: &[Block]) -> ValuationProfile {
    profile(instance, bank, &assignment(instance.n(), blocks, &vec![0; blocks.len()]))
}

/// Which special (0 or 1) of each block the picker gives the odd
/// function: the one that received the block object, else the seed choice.
fn odd_holders(blocks: &[Block], matching: &Matching) -> Vec<usize> {
    blocks
        .iter()
        .map(|b| usize::from(matching.object_of(b.specials[1]) == Some(b.object)))
        .collect()
}

/// Whichever special received the block object gets the odd function;
/// blocks where neither did keep the seed assignment.
pub fn adversarial_profile(
    instance: &Instance,
    bank: &UtilityBank,
    t: &ThresholdMatrix,
    matching: &Matching,
) -> Result<ValuationProfile> {
    matching.check_against(instance)?;
    let (_, blocks) = classify_blocks(instance, t);
    let odd = odd_holders(&blocks, matching);
    Ok(profile(instance, bank, &assignment(instance.n(), &blocks, &odd)))
}

/// Counts and checks from one adversary run.
#[derive(Debug, Clone, Serialize)]
pub struct AdversaryReport {
    pub algorithm: &'static str,
    pub kind: PriorityKind,
    pub valuation_kind: ValuationKind,
    pub n: usize,
    pub epsilon: f64,
    /// Type-1..Type-4 block counts.
    pub block_counts: [usize; 4],
    /// Agents outside special pairs.
    pub z: usize,
    pub sw_alg: f64,
    pub sw_benchmark: f64,
    pub sw_opt: f64,
    /// Benchmark welfare over the algorithm's welfare.
    pub ratio: f64,
    /// Class-optimal welfare over the algorithm's welfare.
    pub ratio_opt: f64,
    /// Lower bound on the benchmark's welfare; unit-sum only.
    pub benchmark_lower: Option<f64>,
    pub benchmark_bound: f64,
    pub benchmark_ok: bool,
    /// Upper bound on the algorithm's welfare; unit-sum only.
    pub alg_upper: Option<f64>,
    pub alg_upper_ok: Option<bool>,
    pub replay_identical: bool,
}

/// Builds the instance, runs `alg` once under the seed profile, picks the
/// adversarial profile from its output and replays the run under it.
pub fn run_adversary(alg: &dyn OneQueryPerPair, n: usize, valuation_kind: ValuationKind) -> Result<AdversaryReport> {
    let instance = build_lb_instance_unit_sum(n)?;
    let eps = canonical_epsilon(n);
    let bank = match valuation_kind {
        ValuationKind::UnitSum => utility_bank_unit_sum(n, eps)?,
        ValuationKind::UnitRange => utility_bank_unit_range(n, eps)?,
    };
    let t = ThresholdMatrix::from_queries(n, &alg.plan(&instance)?)?;
    let (_, blocks) = classify_blocks(&instance, &t);

    let seed = seed_profile(&instance, &bank, &blocks);
    let first = alg.run(&instance, &HiddenValuations::new(&seed))?;
    let odd = odd_holders(&blocks, &first.matching);
    let adv = profile(&instance, &bank, &assignment(n, &blocks, &odd));
    let second = alg.run(&instance, &HiddenValuations::new(&adv))?;
    let replay_identical = first.ledger.entries() == second.ledger.entries() && first.matching == second.matching;

    let mut block_counts = [0usize; 4];
    for b in &blocks {
        block_counts[b.block_type.index() - 1] += 1;
    }
    let z = n - 2 * blocks.len();
    let bench = benchmark(&instance, alg.kind(), &blocks, &odd)?;
    let sw_alg = welfare(&second.matching, &adv);
    let sw_benchmark = welfare(&bench, &adv);
    let sw_opt = welfare(&welfare_optimal_priority(&instance, alg.kind(), &adv)?.matching, &adv);

    let c1 = c1(n);
    let c1sq = c1 * c1;
    let c2 = 1.0 / (2.0 * (n as f64 - 2.0));
    let [n1, n2, n3, n4] = block_counts.map(|x| x as f64);
    let zf = z as f64;
    let unit_sum = valuation_kind == ValuationKind::UnitSum;
    let benchmark_lower = unit_sum.then(|| {
        (c1sq + eps / 2.0)
        + (0.5 - eps) * n1
        + (0.25 - eps) * n2
        + (c1 - eps) * n3
        + c1 / 4.0 * n4
            + (c1sq - c2 * eps) * zf
    });
    let benchmark_bound = (n as f64).sqrt() / 28.0;
    let alg_upper = unit_sum.then(|| 1.0 + c1 * n1 + (c1 + eps) * n2 + c1sq * n3 + c1sq * n4 + c1sq * zf);

    Ok(AdversaryReport {
        algorithm: alg.name(),
        kind: alg.kind(),
        valuation_kind,
        n,
        epsilon: eps,
        block_counts,
        z,
        sw_alg,
        sw_benchmark,
        sw_opt,
        ratio: sw_benchmark / sw_alg,
        ratio_opt: sw_opt / sw_alg,
        benchmark_lower,
        benchmark_bound,
        benchmark_ok: sw_benchmark >= benchmark_bound,
        alg_upper,
        alg_upper_ok: alg_upper.map(|u| sw_alg <= u + 1e-12),
        replay_identical,
    })
}

/// A perfect class matching that gives each block object to the special
/// holding the even function and the leftover object to a leftover agent.
fn benchmark(instance: &Instance, kind: PriorityKind, blocks: &[Block], odd: &[usize]) -> Result<Matching> {
    let n = instance.n();
    let mut wanted = vec![None; n];
    for (b, &o) in blocks.iter().zip(odd) {
        wanted[b.specials[1 - o]] = Some(b.object);
    }
    if n % BLOCK > 0 {
        wanted[blocks.len() * BLOCK] = Some(n - 2);
    }
    let class = if kind == PriorityKind::ParetoOnly { PriorityKind::RankMaximal } else { kind };
    let m = priority_matching(instance, class, |a, o| if wanted[a] == Some(o) { 1.0 } else { 0.0 })?;
    for (a, w) in wanted.iter().enumerate() {
        if w.is_some() && m.object_of(a) != *w {
            return Err(Error::InvalidMatching(format!("benchmark misses agent {}", a + 1)));
        }
    }
    Ok(m)
}
