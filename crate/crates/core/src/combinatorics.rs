//! Ground-set parameters, k-sets, families and exact binomials.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest ground set a [`KSet`] mask can hold.
pub const MAX_GROUND: usize = 128;

/// `C(a, b)`, zero when `b < 0` or `b > a`.
pub fn binomial(a: u64, b: i64) -> BigUint {
    if b < 0 || b as u64 > a {
        return BigUint::zero();
    }
    let b = (b as u64).min(a - b as u64);
    let mut acc = BigUint::one();
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// `C(a, b)` for unsigned arguments.
pub fn choose(a: usize, b: usize) -> BigUint {
    binomial(a as u64, b as i64)
}

/// `C(a, b)` as a machine integer, `None` on overflow.
pub fn choose_u64(a: usize, b: usize) -> Option<u64> {
    choose(a, b).to_u64()
}

/// A finite subset of `[128]`, encoded with bit `e - 1` set for element `e`.
///
/// The derived order compares masks numerically, which is the
/// colexicographic order on sets.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KSet(u128);

impl KSet {
    pub const EMPTY: KSet = KSet(0);

    pub const fn from_mask(mask: u128) -> Self {
        KSet(mask)
    }

    pub const fn mask(self) -> u128 {
        self.0
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(elements: I) -> Result<Self> {
        let mut mask = 0u128;
        for e in elements {
            if e == 0 || e > MAX_GROUND {
                return Err(Error::shape(format!("element {e} outside [1, {MAX_GROUND}]")));
            }
            mask |= 1u128 << (e - 1);
        }
        Ok(KSet(mask))
    }

    /// The interval `[lo, hi]` (empty when `lo > hi`).
    pub fn interval(lo: usize, hi: usize) -> Self {
        let hi = hi.min(MAX_GROUND);
        if lo == 0 || lo > hi {
            return KSet::EMPTY;
        }
        KSet(prefix_mask(hi) & !prefix_mask(lo - 1))
    }

    /// `[l] = {1, .., l}`.
    pub fn prefix(l: usize) -> Self {
        KSet(prefix_mask(l))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, e: usize) -> bool {
        (1..=MAX_GROUND).contains(&e) && self.0 >> (e - 1) & 1 == 1
    }

    pub fn with(self, e: usize) -> Self {
        debug_assert!((1..=MAX_GROUND).contains(&e));
        KSet(self.0 | 1u128 << (e - 1))
    }

    pub fn without(self, e: usize) -> Self {
        debug_assert!((1..=MAX_GROUND).contains(&e));
        KSet(self.0 & !(1u128 << (e - 1)))
    }

    pub fn union(self, other: KSet) -> Self {
        KSet(self.0 | other.0)
    }

    pub fn intersection(self, other: KSet) -> Self {
        KSet(self.0 & other.0)
    }

    pub fn difference(self, other: KSet) -> Self {
        KSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: KSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: KSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn min_element(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize + 1)
    }

    pub fn max_element(self) -> Option<usize> {
        (self.0 != 0).then(|| 128 - self.0.leading_zeros() as usize)
    }

    /// `|A ∩ [l]|`.
    pub fn count_upto(self, l: usize) -> usize {
        (self.0 & prefix_mask(l)).count_ones() as usize
    }

    pub fn elements(self) -> Elements {
        Elements(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.elements().collect()
    }

    /// All subsets of `self` with exactly `size` elements, in colex order.
    pub fn subsets_of_size(self, size: usize) -> Vec<KSet> {
        let elements = self.to_vec();
        if size > elements.len() {
            return Vec::new();
        }
        combinations_colex(elements.len(), size)
            .map(|local| {
                let mut mask = 0u128;
                let mut bits = local;
                while bits != 0 {
                    let idx = bits.trailing_zeros() as usize;
                    mask |= 1u128 << (elements[idx] - 1);
                    bits &= bits - 1;
                }
                KSet(mask)
            })
            .collect()
    }
}

pub(crate) fn prefix_mask(l: usize) -> u128 {
    match l {
        0 => 0,
        l if l >= 128 => u128::MAX,
        l => (1u128 << l) - 1,
    }
}

pub struct Elements(u128);

impl Iterator for Elements {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let e = self.0.trailing_zeros() as usize + 1;
        self.0 &= self.0 - 1;
        Some(e)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl fmt::Debug for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elements().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for KSet {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(self.elements())
    }
}

impl<'de> Deserialize<'de> for KSet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let elements = Vec::<usize>::deserialize(de)?;
        KSet::from_elements(elements).map_err(serde::de::Error::custom)
    }
}

/// Masks of `size`-subsets of `{0, .., width-1}` in increasing (colex) order.
fn combinations_colex(width: usize, size: usize) -> impl Iterator<Item = u128> {
    let limit = if width >= 128 { None } else { Some(1u128 << width) };
    let first = prefix_mask(size);
    let mut next = (size <= width).then_some(first);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 {
            None
        } else {
            // Gosper's hack; `checked_add` catches the final 128-bit pattern.
            let low = current & current.wrapping_neg();
            match current.checked_add(low) {
                Some(ripple) => {
                    let candidate = (((current ^ ripple) >> 2) / low) | ripple;
                    match limit {
                        Some(limit) if candidate >= limit => None,
                        _ => Some(candidate),
                    }
                }
                None => None,
            }
        };
        Some(current)
    })
}

/// All `k`-subsets of `[n]` in colexicographic order; empty when `k > n`.
pub fn enumerate_ksets(n: usize, k: usize) -> Vec<KSet> {
    if k > n || n > MAX_GROUND {
        return Vec::new();
    }
    combinations_colex(n, k).map(KSet).collect()
}

/// Lazily yields the `k`-subsets of `[n]` in lexicographic order.
pub struct LexKSets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl LexKSets {
    pub fn new(n: usize, k: usize) -> Self {
        let current = (k <= n && n <= MAX_GROUND).then(|| (1..=k).collect());
        LexKSets { n, current }
    }
}

impl Iterator for LexKSets {
    type Item = KSet;

    fn next(&mut self) -> Option<KSet> {
        let current = self.current.as_mut()?;
        let out = KSet::from_elements(current.iter().copied()).expect("elements within ground");
        let k = current.len();
        // Rightmost position that can still move right.
        match (0..k).rev().find(|&i| current[i] < self.n - (k - 1 - i)) {
            Some(i) => {
                current[i] += 1;
                for j in i + 1..k {
                    current[j] = current[j - 1] + 1;
                }
            }
            None => self.current = None,
        }
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    #[default]
    Lex,
    Colex,
}

/// The first `m` k-sets of `[n]` in the given order.
pub fn lex_initial_family(n: usize, k: usize, m: usize, order: Order) -> Result<SetFamily> {
    let total = choose(n, k);
    if BigUint::from(m) > total {
        return Err(Error::InvalidCount {
            count: m.to_string(),
            max: total.to_string(),
        });
    }
    let members: Vec<KSet> = match order {
        Order::Lex => LexKSets::new(n, k).take(m).collect(),
        Order::Colex => combinations_colex(n, k).take(m).map(KSet).collect(),
    };
    SetFamily::new(n, k, members)
}

/// The `(n, k, s)` triple and the quantities derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub k: usize,
    pub s: usize,
}

impl Params {
    pub fn new(n: usize, k: usize, s: usize) -> Result<Self> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::shape(format!("need 1 <= k <= n, got n={n}, k={k}")));
        }
        Ok(Params { n, k, s })
    }

    /// `n' = n - s - 1` (zero when `n <= s`).
    pub fn n_prime(&self) -> usize {
        self.n.saturating_sub(self.s + 1)
    }

    /// `t = floor(n' / k)`.
    pub fn t(&self) -> usize {
        self.n_prime() / self.k
    }

    /// `X = [s + 2, n]`; needs `n <= 128`.
    pub fn x(&self) -> KSet {
        KSet::interval(self.s + 2, self.n)
    }

    pub fn x_bounds(&self) -> (usize, usize) {
        (self.s + 2, self.n)
    }
}

/// A k-uniform family over `[n]`, members kept sorted in colex order and
/// free of duplicates.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SetFamily {
    n: usize,
    k: usize,
    #[serde(rename = "sets")]
    members: Vec<KSet>,
}

impl SetFamily {
    pub fn new<I: IntoIterator<Item = KSet>>(n: usize, k: usize, members: I) -> Result<Self> {
        if n > MAX_GROUND {
            return Err(Error::shape(format!("ground size {n} exceeds {MAX_GROUND}")));
        }
        if k > n {
            return Err(Error::shape(format!("k={k} exceeds n={n}")));
        }
        let ground = KSet::prefix(n);
        let mut members: Vec<KSet> = members.into_iter().collect();
        for &m in &members {
            if m.len() != k {
                return Err(Error::shape(format!("member {m} does not have {k} elements")));
            }
            if !m.is_subset(ground) {
                return Err(Error::shape(format!("member {m} is not inside [{n}]")));
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(SetFamily { n, k, members })
    }

    pub fn empty(n: usize, k: usize) -> Self {
        SetFamily {
            n,
            k,
            members: Vec::new(),
        }
    }

    /// Builds a family from element lists, mostly for tests and examples.
    pub fn from_lists<L: AsRef<[usize]>>(n: usize, k: usize, lists: &[L]) -> Result<Self> {
        let members = lists
            .iter()
            .map(|l| KSet::from_elements(l.as_ref().iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        SetFamily::new(n, k, members)
    }

    /// The complete layer `([n] choose k)`.
    pub fn full(n: usize, k: usize) -> Result<Self> {
        SetFamily::new(n, k, enumerate_ksets(n, k))
    }

    /// Members must already be sorted, deduplicated and of the right shape.
    pub(crate) fn from_sorted(n: usize, k: usize, members: Vec<KSet>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(members.iter().all(|m| m.len() == k));
        SetFamily { n, k, members }
    }

    pub(crate) fn from_unsorted(n: usize, k: usize, mut members: Vec<KSet>) -> Self {
        members.sort_unstable();
        members.dedup();
        SetFamily::from_sorted(n, k, members)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[KSet] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, KSet> {
        self.members.iter()
    }

    pub fn contains(&self, set: KSet) -> bool {
        self.members.binary_search(&set).is_ok()
    }

    pub fn is_subfamily_of(&self, other: &SetFamily) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    /// Same members over a larger ground set.
    pub fn with_ground(&self, n: usize) -> Result<Self> {
        SetFamily::new(n, self.k, self.members.iter().copied())
    }

    /// Image under `A ↦ [n] \ A`.
    pub fn complement_image(&self) -> SetFamily {
        let ground = KSet::prefix(self.n);
        SetFamily::from_unsorted(
            self.n,
            self.n - self.k,
            self.members.iter().map(|m| ground.difference(*m)).collect(),
        )
    }

    /// Union of all members.
    pub fn support(&self) -> KSet {
        self.members.iter().fold(KSet::EMPTY, |acc, m| acc.union(*m))
    }
}

impl fmt::Debug for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetFamily(n={}, k={}) ", self.n, self.k)?;
        f.debug_list().entries(self.members.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a SetFamily {
    type Item = &'a KSet;
    type IntoIter = std::slice::Iter<'a, KSet>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// An ordered `(s + 1)`-tuple of families over the same `(n, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyTuple {
    families: Vec<SetFamily>,
}

impl FamilyTuple {
    pub fn new(families: Vec<SetFamily>) -> Result<Self> {
        let first = families
            .first()
            .ok_or_else(|| Error::shape("a family tuple needs at least one family"))?;
        let (n, k) = (first.n(), first.k());
        if let Some(bad) = families.iter().position(|f| f.n() != n || f.k() != k) {
            return Err(Error::shape(format!(
                "family {} has shape ({}, {}), expected ({n}, {k})",
                bad + 1,
                families[bad].n(),
                families[bad].k()
            )));
        }
        Ok(FamilyTuple { families })
    }

    /// `s`, one less than the number of families.
    pub fn s(&self) -> usize {
        self.families.len() - 1
    }

    pub fn n(&self) -> usize {
        self.families[0].n()
    }

    pub fn k(&self) -> usize {
        self.families[0].k()
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn families(&self) -> &[SetFamily] {
        &self.families
    }

    /// Family with 1-based index `i`.
    pub fn family(&self, i: usize) -> &SetFamily {
        &self.families[i - 1]
    }

    pub fn params(&self) -> Params {
        Params {
            n: self.n(),
            k: self.k(),
            s: self.s(),
        }
    }

    pub fn into_families(self) -> Vec<SetFamily> {
        self.families
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(family: &SetFamily) -> Vec<Vec<usize>> {
        family.iter().map(|m| m.to_vec()).collect()
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(4, 0), BigUint::from(1u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(3, -1), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
    }

    #[test]
    fn binomial_pascal_exhaustive() {
        for a in 1..=64u64 {
            for b in 1..=a as i64 {
                assert_eq!(binomial(a, b), binomial(a - 1, b - 1) + binomial(a - 1, b), "C({a},{b})");
            }
        }
    }

    #[test]
    fn binomial_is_exact_beyond_u64() {
        // C(100, 50) = 100891344545564193334812497256
        assert_eq!(
            binomial(100, 50).to_string(),
            "100891344545564193334812497256"
        );
    }

    #[test]
    fn enumerate_examples() {
        let pairs: Vec<Vec<usize>> = enumerate_ksets(3, 2).iter().map(|s| s.to_vec()).collect();
        assert_eq!(pairs, vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        let singles: Vec<Vec<usize>> = enumerate_ksets(4, 1).iter().map(|s| s.to_vec()).collect();
        assert_eq!(singles, vec![vec![1], vec![2], vec![3], vec![4]]);
        assert_eq!(enumerate_ksets(6, 2).len(), 15);
        assert!(enumerate_ksets(2, 3).is_empty());
        assert_eq!(enumerate_ksets(3, 0), vec![KSet::EMPTY]);
    }

    #[test]
    fn enumerate_counts_and_uniqueness() {
        for n in 0..=12 {
            for k in 0..=n {
                let all = enumerate_ksets(n, k);
                assert_eq!(BigUint::from(all.len()), choose(n, k));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
                assert!(all.iter().all(|s| s.len() == k && s.is_subset(KSet::prefix(n))));
            }
        }
    }

    #[test]
    fn enumerate_full_width() {
        assert_eq!(enumerate_ksets(128, 127).len(), 128);
        assert_eq!(enumerate_ksets(128, 128), vec![KSet::from_mask(u128::MAX)]);
    }

    #[test]
    fn lex_initial_examples() {
        let f = lex_initial_family(4, 2, 3, Order::Lex).unwrap();
        assert_eq!(sets(&f), vec![vec![1, 2], vec![1, 3], vec![1, 4]]);
        let f = lex_initial_family(4, 3, 4, Order::Colex).unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f, SetFamily::full(4, 3).unwrap());
        assert!(lex_initial_family(5, 2, 0, Order::Lex).unwrap().is_empty());
        assert!(matches!(
            lex_initial_family(4, 2, 7, Order::Lex),
            Err(Error::InvalidCount { .. })
        ));
    }

    #[test]
    fn lex_order_is_lexicographic() {
        let lex: Vec<Vec<usize>> = LexKSets::new(6, 3).map(|s| s.to_vec()).collect();
        let mut sorted = lex.clone();
        sorted.sort();
        assert_eq!(lex, sorted);
        assert_eq!(lex.len(), 20);
    }

    #[test]
    fn lex_initial_full_layer() {
        for n in 1..=10 {
            for k in 1..=n {
                let total = choose_u64(n, k).unwrap() as usize;
                for order in [Order::Lex, Order::Colex] {
                    let f = lex_initial_family(n, k, total, order).unwrap();
                    assert_eq!(f, SetFamily::full(n, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn params_derived_values() {
        let p = Params::new(196, 2, 11).unwrap();
        assert_eq!(p.n_prime(), 184);
        assert_eq!(p.t(), 92);
        let q = Params::new(60, 2, 3).unwrap();
        assert_eq!(q.x().len(), q.n_prime());
        assert_eq!(q.x().min_element(), Some(5));
        assert!(Params::new(3, 4, 1).is_err());
    }

    #[test]
    fn family_rejects_bad_shapes() {
        assert!(SetFamily::from_lists(4, 2, &[vec![1, 2, 3]]).is_err());
        assert!(SetFamily::from_lists(4, 2, &[vec![1, 5]]).is_err());
        let f = SetFamily::from_lists(4, 2, &[vec![3, 4], vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!(sets(&f), vec![vec![1, 2], vec![3, 4]]);
    }

    #[test]
    fn tuple_requires_common_shape() {
        let a = SetFamily::empty(5, 2);
        let b = SetFamily::empty(5, 3);
        assert!(FamilyTuple::new(vec![a.clone(), b]).is_err());
        assert!(FamilyTuple::new(vec![]).is_err());
        assert_eq!(FamilyTuple::new(vec![a.clone(), a]).unwrap().s(), 1);
    }

    #[test]
    fn kset_helpers() {
        let a = KSet::from_elements([2, 5, 9]).unwrap();
        assert_eq!(a.count_upto(5), 2);
        assert_eq!(a.max_element(), Some(9));
        assert_eq!(a.to_string(), "{2,5,9}");
        assert_eq!(a.subsets_of_size(2).len(), 3);
        assert_eq!(KSet::interval(3, 5).to_vec(), vec![3, 4, 5]);
        assert!(KSet::interval(5, 3).is_empty());
        assert!(KSet::from_elements([0]).is_err());
    }
}
