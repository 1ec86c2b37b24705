//! Supersample and split-mask data model.
//!
//! A supersample holds `2n` labeled examples grouped into `n` pairs. A split
//! mask picks one member of every pair for training; the other member is held
//! out and stands in for the population when estimating the risk.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on the number of pairs for exhaustive split enumeration
/// (2^20 masks).
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: Vec<f64>,
    /// Class index in `[0, num_classes)`.
    pub y: usize,
}

impl LabeledExample {
    pub fn new(x: Vec<f64>, y: usize) -> Self {
        LabeledExample { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supersample {
    pairs: Vec<[LabeledExample; 2]>,
    num_classes: usize,
}

impl Supersample {
    pub fn new(pairs: Vec<[LabeledExample; 2]>, num_classes: usize) -> Result<Self> {
        let Some(first) = pairs.first() else {
            return Err(Error::InvalidArgument(
                "a supersample needs at least one pair".into(),
            ));
        };
        if num_classes == 0 {
            return Err(Error::InvalidArgument("num_classes must be positive".into()));
        }
        let dim = first[0].dim();
        for ex in pairs.iter().flatten() {
            if ex.dim() != dim {
                return Err(Error::LengthMismatch {
                    context: "supersample feature dimension",
                    expected: dim,
                    actual: ex.dim(),
                });
            }
            if ex.y >= num_classes {
                return Err(Error::SymbolOutOfRange {
                    symbol: ex.y,
                    size: num_classes,
                });
            }
        }
        Ok(Supersample { pairs, num_classes })
    }

    /// Pairs up `2n` examples in order: (e0, e1), (e2, e3), ...
    pub fn from_examples(examples: Vec<LabeledExample>, num_classes: usize) -> Result<Self> {
        if examples.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "need an even number of examples, got {}",
                examples.len()
            )));
        }
        let mut it = examples.into_iter();
        let mut pairs = Vec::new();
        while let (Some(a), Some(b)) = (it.next(), it.next()) {
            pairs.push([a, b]);
        }
        Supersample::new(pairs, num_classes)
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn dim(&self) -> usize {
        self.pairs[0][0].dim()
    }

    pub fn pairs(&self) -> &[[LabeledExample; 2]] {
        &self.pairs
    }

    pub fn example(&self, pair: usize, slot: usize) -> &LabeledExample {
        &self.pairs[pair][slot]
    }

    /// All `2n` examples in pair-major order: (0,0), (0,1), (1,0), ...
    pub fn examples(&self) -> impl Iterator<Item = &LabeledExample> {
        self.pairs.iter().flatten()
    }

    /// All `2n` inputs in pair-major order.
    pub fn inputs(&self) -> Vec<&[f64]> {
        self.examples().map(|e| e.x.as_slice()).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.examples().map(|e| e.y).collect()
    }

    fn check_mask(&self, s: &SplitMask) -> Result<()> {
        if s.len() != self.n() {
            return Err(Error::LengthMismatch {
                context: "split mask vs supersample",
                expected: self.n(),
                actual: s.len(),
            });
        }
        Ok(())
    }
}

/// Pair-major slot index of `(pair, slot)`.
#[inline]
pub fn slot_index(pair: usize, slot: usize) -> usize {
    2 * pair + slot
}

/// The training half: element `i` is member `s[i]` of pair `i`.
pub fn select_train_set<'a>(z: &'a Supersample, s: &SplitMask) -> Result<Vec<&'a LabeledExample>> {
    z.check_mask(s)?;
    Ok(z
        .pairs
        .iter()
        .zip(s.iter())
        .map(|(pair, bit)| &pair[bit as usize])
        .collect())
}

/// The held-out half: element `i` is member `1 - s[i]` of pair `i`.
pub fn complement_set<'a>(z: &'a Supersample, s: &SplitMask) -> Result<Vec<&'a LabeledExample>> {
    z.check_mask(s)?;
    Ok(z
        .pairs
        .iter()
        .zip(s.iter())
        .map(|(pair, bit)| &pair[1 - bit as usize])
        .collect())
}

/// The binary vector S in {0,1}^n.
///
/// Serialized as a bit string, most significant character first, over pair
/// indices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplitMask {
    bits: Vec<bool>,
}

impl SplitMask {
    pub fn new(bits: Vec<bool>) -> Self {
        SplitMask { bits }
    }

    pub fn zeros(n: usize) -> Self {
        SplitMask { bits: vec![false; n] }
    }

    /// Mask number `index` in lexicographic order, with pair 0 as the most
    /// significant bit.
    pub fn from_index(index: u64, n: usize) -> Self {
        SplitMask {
            bits: (0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect(),
        }
    }

    /// Inverse of [`SplitMask::from_index`]. Only meaningful for `n <= 64`.
    pub fn to_index(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> usize {
        self.bits[i] as usize
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn flipped(&self) -> SplitMask {
        SplitMask {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Copy with bit `i` set to `value`.
    pub fn with_bit(&self, i: usize, value: bool) -> SplitMask {
        let mut bits = self.bits.clone();
        bits[i] = value;
        SplitMask { bits }
    }

    /// Bits at `indices` packed into an integer, first index most significant.
    pub fn pack(&self, indices: &[usize]) -> u64 {
        indices
            .iter()
            .fold(0u64, |acc, &i| (acc << 1) | self.bits[i] as u64)
    }

    /// All bits except `skip`, packed.
    pub fn pack_without(&self, skip: usize) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .fold(0u64, |acc, (_, &b)| (acc << 1) | b as u64)
    }

    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        SplitMask {
            bits: (0..n).map(|_| rng.random::<bool>()).collect(),
        }
    }
}

impl fmt::Display for SplitMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for SplitMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "split mask character {other:?} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(SplitMask::new)
    }
}

impl Serialize for SplitMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SplitMask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every mask in {0,1}^n, lexicographic order.
pub fn enumerate_splits(n: usize) -> Result<Vec<SplitMask>> {
    enumerate_splits_with_limit(n, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_splits_with_limit(n: usize, limit: usize) -> Result<Vec<SplitMask>> {
    check_enumerable(n, limit)?;
    Ok((0..1u64 << n).map(|k| SplitMask::from_index(k, n)).collect())
}

pub(crate) fn check_enumerable(n: usize, limit: usize) -> Result<()> {
    if n > limit || n >= 64 {
        return Err(Error::TooLarge {
            what: "split enumeration (pairs)",
            size: n as u128,
            limit: limit.min(63) as u128,
        });
    }
    Ok(())
}

/// A subset u of pair indices, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SubsetIndex {
    indices: Vec<usize>,
}

impl SubsetIndex {
    /// Sorts the input; rejects duplicates and the empty set.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.is_empty() {
            return Err(Error::InvalidArgument("subset must be nonempty".into()));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "subset has duplicate indices: {indices:?}"
            )));
        }
        Ok(SubsetIndex { indices })
    }

    pub fn within(self, n: usize) -> Result<Self> {
        match self.indices.last() {
            Some(&last) if last >= n => Err(Error::InvalidArgument(format!(
                "subset index {last} out of range for n = {n}"
            ))),
            _ => Ok(self),
        }
    }

    pub fn singleton(i: usize) -> Self {
        SubsetIndex { indices: vec![i] }
    }

    pub fn full(n: usize) -> Self {
        SubsetIndex {
            indices: (0..n).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Copy with `k` removed; `None` if that would leave it empty.
    pub fn without(&self, k: usize) -> Option<Self> {
        let indices: Vec<usize> = self.indices.iter().copied().filter(|&i| i != k).collect();
        (!indices.is_empty()).then_some(SubsetIndex { indices })
    }
}

impl TryFrom<Vec<usize>> for SubsetIndex {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        SubsetIndex::new(v)
    }
}

impl From<SubsetIndex> for Vec<usize> {
    fn from(s: SubsetIndex) -> Self {
        s.indices
    }
}

/// All size-`m` subsets of `0..n` in lexicographic order.
pub fn subsets_of_size(n: usize, m: usize) -> Vec<SubsetIndex> {
    let mut out = Vec::new();
    if m == 0 || m > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        out.push(SubsetIndex {
            indices: idx.clone(),
        });
        // Advance to the next combination.
        let mut k = m;
        while k > 0 && idx[k - 1] == n - m + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return out;
        }
        idx[k - 1] += 1;
        for j in k..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ex(v: f64, y: usize) -> LabeledExample {
        LabeledExample::new(vec![v], y)
    }

    fn abcd() -> Supersample {
        Supersample::new(
            vec![[ex(0.0, 0), ex(1.0, 1)], [ex(2.0, 0), ex(3.0, 1)]],
            2,
        )
        .unwrap()
    }

    fn xs(v: &[&LabeledExample]) -> Vec<f64> {
        v.iter().map(|e| e.x[0]).collect()
    }

    #[test]
    fn selection_examples() {
        let one = Supersample::new(vec![[ex(0.0, 0), ex(1.0, 1)]], 2).unwrap();
        let s0: SplitMask = "0".parse().unwrap();
        let s1: SplitMask = "1".parse().unwrap();
        assert_eq!(xs(&select_train_set(&one, &s0).unwrap()), [0.0]);
        assert_eq!(xs(&select_train_set(&one, &s1).unwrap()), [1.0]);
        assert_eq!(xs(&complement_set(&one, &s0).unwrap()), [1.0]);
        assert_eq!(xs(&complement_set(&one, &s1).unwrap()), [0.0]);

        let z = abcd();
        let s: SplitMask = "10".parse().unwrap();
        assert_eq!(xs(&select_train_set(&z, &s).unwrap()), [1.0, 2.0]);
        assert_eq!(xs(&complement_set(&z, &s).unwrap()), [0.0, 3.0]);
    }

    #[test]
    fn selection_rejects_wrong_length() {
        let z = abcd();
        let s: SplitMask = "1".parse().unwrap();
        assert!(matches!(
            select_train_set(&z, &s),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(complement_set(&z, &s).is_err());
    }

    #[test]
    fn supersample_rejects_mixed_dims_and_bad_labels() {
        let bad = Supersample::new(vec![[ex(0.0, 0), LabeledExample::new(vec![1.0, 2.0], 0)]], 2);
        assert!(bad.is_err());
        let bad = Supersample::new(vec![[ex(0.0, 0), ex(1.0, 2)]], 2);
        assert!(matches!(bad, Err(Error::SymbolOutOfRange { .. })));
        assert!(Supersample::new(vec![], 2).is_err());
    }

    #[test]
    fn enumerate_small() {
        let to_s = |v: Vec<SplitMask>| v.iter().map(|m| m.to_string()).collect::<Vec<_>>();
        assert_eq!(to_s(enumerate_splits(1).unwrap()), ["0", "1"]);
        assert_eq!(to_s(enumerate_splits(2).unwrap()), ["00", "01", "10", "11"]);
        let three = to_s(enumerate_splits(3).unwrap());
        assert_eq!(three.len(), 8);
        assert_eq!(three[0], "000");
        assert_eq!(three[7], "111");
    }

    #[test]
    fn enumerate_refuses_above_limit() {
        assert!(matches!(
            enumerate_splits(21),
            Err(Error::TooLarge { .. })
        ));
        assert!(enumerate_splits_with_limit(5, 4).is_err());
    }

    #[test]
    fn enumerate_has_no_duplicates() {
        for n in 0..=12 {
            let all = enumerate_splits(n).unwrap();
            assert_eq!(all.len(), 1 << n);
            let set: std::collections::HashSet<_> = all.iter().collect();
            assert_eq!(set.len(), all.len());
            assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn subset_validation() {
        assert_eq!(SubsetIndex::new(vec![3, 1]).unwrap().indices(), &[1, 3]);
        assert!(SubsetIndex::new(vec![]).is_err());
        assert!(SubsetIndex::new(vec![2, 2]).is_err());
        assert!(SubsetIndex::new(vec![4]).unwrap().within(4).is_err());
    }

    #[test]
    fn subsets_match_binomial() {
        for n in 1..=8 {
            for m in 1..=n {
                let subs = subsets_of_size(n, m);
                assert_eq!(subs.len() as u128, binomial(n, m));
                assert!(subs.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert_eq!(binomial(20, 10), 184_756);
    }

    #[test]
    fn mask_packing() {
        let s: SplitMask = "1011".parse().unwrap();
        assert_eq!(s.to_index(), 0b1011);
        assert_eq!(SplitMask::from_index(0b1011, 4), s);
        assert_eq!(s.pack(&[0, 2]), 0b11);
        assert_eq!(s.pack_without(1), 0b111);
        assert_eq!(serde_json::to_string(&s).unwrap(), "\"1011\"");
        assert!("10x".parse::<SplitMask>().is_err());
    }

    proptest! {
        #[test]
        fn halves_partition_the_supersample(bits in proptest::collection::vec(any::<bool>(), 1..12)) {
            let n = bits.len();
            let pairs = (0..n).map(|i| [ex(2.0 * i as f64, 0), ex(2.0 * i as f64 + 1.0, 1)]).collect();
            let z = Supersample::new(pairs, 2).unwrap();
            let s = SplitMask::new(bits);
            let train = xs(&select_train_set(&z, &s).unwrap());
            let test = xs(&complement_set(&z, &s).unwrap());
            let mut all: Vec<f64> = train.iter().chain(&test).copied().collect();
            all.sort_by(f64::total_cmp);
            let expected: Vec<f64> = (0..2 * n).map(|v| v as f64).collect();
            prop_assert_eq!(all, expected);

            let flipped = s.flipped();
            prop_assert_eq!(xs(&select_train_set(&z, &flipped).unwrap()), test);
            prop_assert_eq!(xs(&complement_set(&z, &flipped).unwrap()), train);
        }
    }
}
