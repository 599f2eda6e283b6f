use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::model::PriorityKind;

/// Number of fractional bits in the fixed-point value part.
pub const VALUE_BITS: u32 = 60;

/// An ordered additive group, enough for Hungarian potentials.
pub trait Weight: Clone + Ord + fmt::Debug {
    fn zero() -> Self;
    fn add_assign(&mut self, other: &Self);
    fn sub_assign(&mut self, other: &Self);
    fn neg(&self) -> Self {
        let mut z = Self::zero();
        z.sub_assign(self);
        z
    }
}

impl Weight for i64 {
    fn zero() -> Self {
        0
    }
    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= *other;
    }
}

impl Weight for BigInt {
    fn zero() -> Self {
        BigInt::from(0)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= other;
    }
}

/// Converts a value in `[0, 1]` (or a sum of such) to fixed point.
pub fn fixed_point(value: f64) -> i128 {
    (value * (1u128 << VALUE_BITS) as f64).round() as i128
}

/// Lexicographic weight: an integer key compared first, then a fixed-point
/// value part. Missing trailing key entries count as zero, so the empty key
/// is the zero of every key length.
#[derive(Clone, Default)]
pub struct CompositeWeight {
    key: Vec<i64>,
    value: i128,
}

impl CompositeWeight {
    pub fn new(key: Vec<i64>, value: f64) -> Self {
        CompositeWeight { key, value: fixed_point(value) }
    }

    pub fn from_raw(key: Vec<i64>, value: i128) -> Self {
        CompositeWeight { key, value }
    }

    /// The key with trailing zeros trimmed.
    pub fn key(&self) -> &[i64] {
        let end = self.key.iter().rposition(|&x| x != 0).map_or(0, |p| p + 1);
        &self.key[..end]
    }

    /// Key entry `i`, zero when past the stored length.
    pub fn key_at(&self, i: usize) -> i64 {
        self.key.get(i).copied().unwrap_or(0)
    }

    pub fn raw_value(&self) -> i128 {
        self.value
    }

    pub fn value(&self) -> f64 {
        self.value as f64 / (1u128 << VALUE_BITS) as f64
    }

    fn widen(&mut self, len: usize) {
        if self.key.len() < len {
            self.key.resize(len, 0);
        }
    }
}

impl PartialEq for CompositeWeight {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CompositeWeight {}

impl PartialOrd for CompositeWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CompositeWeight {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.key.len().max(other.key.len());
        for i in 0..len {
            match self.key_at(i).cmp(&other.key_at(i)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.value.cmp(&other.value)
    }
}

impl fmt::Debug for CompositeWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}+{}", self.key(), self.value())
    }
}

impl Weight for CompositeWeight {
    fn zero() -> Self {
        CompositeWeight::default()
    }

    fn add_assign(&mut self, other: &Self) {
        self.widen(other.key.len());
        for (a, b) in self.key.iter_mut().zip(&other.key) {
            *a += *b;
        }
        self.value += other.value;
    }

    fn sub_assign(&mut self, other: &Self) {
        self.widen(other.key.len());
        for (a, b) in self.key.iter_mut().zip(&other.key) {
            *a -= *b;
        }
        self.value -= other.value;
    }
}

/// Weight of a rank-`r` edge whose value part is `value_part`.
///
/// Key slots: RankMaximal is `(s_1, .., s_n)`; MaxCardRankMaximal is
/// `(total, s_1, .., s_n)`; Fair is `(total, -s_n, .., -s_1)`.
pub fn edge_weight(kind: PriorityKind, n: usize, r: usize, value_part: f64) -> Result<CompositeWeight> {
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { rank: r, n });
    }
    if !(0.0..=1.0).contains(&value_part) {
        return Err(Error::ValueOutOfRange(value_part));
    }
    let mut key = vec![0i64; kind.key_len(n)];
    match kind {
        PriorityKind::ParetoOnly => {}
        PriorityKind::RankMaximal => key[r - 1] = 1,
        PriorityKind::MaxCardRankMaximal => {
            key[0] = 1;
            key[r] = 1;
        }
        PriorityKind::Fair => {
            key[0] = 1;
            key[n + 1 - r] = -1;
        }
    }
    Ok(CompositeWeight::new(key, value_part))
}
