//! Trace decompositions `F(S, Y)`, density tables, β-parameters and the
//! shadow inequalities for families satisfying threshold conditions.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::combinatorics::{choose, FamilyTuple, KSet, SetFamily};
use crate::error::{Error, Result};
use crate::ratio::{self, Rational};
use crate::transforms::lower_shadow;

/// `S ↦ F(S, Y) = {A \ S : A ∈ F, A ∩ Y = S}` for every `S ⊆ Y` with `|S| <= k`.
pub fn decompose(family: &SetFamily, y: KSet) -> BTreeMap<KSet, SetFamily> {
    let (n, k) = (family.n(), family.k());
    let mut classes: BTreeMap<KSet, Vec<KSet>> = BTreeMap::new();
    for size in 0..=k.min(y.len()) {
        for s in y.subsets_of_size(size) {
            classes.insert(s, Vec::new());
        }
    }
    for &a in family {
        let trace = a.intersection(y);
        classes
            .get_mut(&trace)
            .expect("every trace has at most k elements")
            .push(a.difference(trace));
    }
    classes
        .into_iter()
        .map(|(s, members)| (s, SetFamily::from_unsorted(n, k - s.len(), members)))
        .collect()
}

/// The slices of a family relative to `[s + 1]`.
#[derive(Clone, Debug)]
pub struct Slices {
    /// `F(∅)`: members missing `[s + 1]`.
    pub empty: SetFamily,
    /// `single[j - 1] = F(j) = {A \ {j} : A ∩ [s+1] = {j}}`.
    pub single: Vec<SetFamily>,
}

impl Slices {
    pub fn new(family: &SetFamily, s: usize) -> Self {
        let (n, k) = (family.n(), family.k());
        let y = KSet::prefix(s + 1);
        let mut empty = Vec::new();
        let mut single = vec![Vec::new(); s + 1];
        for &a in family {
            let trace = a.intersection(y);
            match trace.len() {
                0 => empty.push(a),
                1 => {
                    let j = trace.min_element().unwrap();
                    single[j - 1].push(a.without(j));
                }
                _ => {}
            }
        }
        Slices {
            empty: SetFamily::from_sorted(n, k, empty),
            single: single
                .into_iter()
                .map(|m| SetFamily::from_unsorted(n, k.saturating_sub(1), m))
                .collect(),
        }
    }

    /// `F(j)` for `j ∈ [1, s + 1]`.
    pub fn slice(&self, j: usize) -> &SetFamily {
        &self.single[j - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityProfile {
    /// `alpha[i-1][j-1] = |F_i(j)| / C(n', k-1)`.
    #[serde(serialize_with = "crate::ratio::table::serialize")]
    pub alpha: Vec<Vec<Rational>>,
    /// `|F_i(∅)| / C(n', k)`.
    #[serde(with = "crate::ratio::vec")]
    pub alpha_empty: Vec<Rational>,
}

impl DensityProfile {
    pub fn alpha(&self, i: usize, j: usize) -> &Rational {
        &self.alpha[i - 1][j - 1]
    }
}

pub fn alpha_profile(tuple: &FamilyTuple) -> Result<DensityProfile> {
    let params = tuple.params();
    let (n, k, s) = (params.n, params.k, params.s);
    if n < s + k {
        return Err(Error::pre(format!("density table needs n >= s + k, got n={n}, s={s}, k={k}")));
    }
    let n_prime = params.n_prime();
    let single_denom = choose(n_prime, k - 1);
    let empty_denom = choose(n_prime, k);
    let mut alpha = Vec::with_capacity(s + 1);
    let mut alpha_empty = Vec::with_capacity(s + 1);
    for family in tuple.families() {
        let slices = Slices::new(family, s);
        alpha.push(
            slices
                .single
                .iter()
                .map(|f| ratio::uint_ratio(&BigUint::from(f.len()), &single_denom))
                .collect(),
        );
        alpha_empty.push(ratio::uint_ratio(&BigUint::from(slices.empty.len()), &empty_denom));
    }
    Ok(DensityProfile { alpha, alpha_empty })
}

/// `max_ℓ |A ∩ [ℓ]| / ℓ` over `ℓ ∈ [n]`, with the smallest maximizing ℓ.
pub fn best_prefix_density(member: KSet, n: usize) -> (Rational, usize) {
    let mut best = (Rational::zero(), 1);
    for l in 1..=n {
        let value = ratio::ratio(member.count_upto(l) as i64, l as i64);
        if value > best.0 {
            best = (value, l);
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaValue {
    #[serde(with = "crate::ratio")]
    pub value: Rational,
    /// A member whose best prefix density is exactly `value`.
    pub member: KSet,
    /// The ℓ attaining it.
    pub ell: usize,
}

/// `β(F) = min_{A ∈ F} max_{ℓ ∈ [n]} |A ∩ [ℓ]| / ℓ`.
pub fn beta_parameter(family: &SetFamily) -> Result<BetaValue> {
    family
        .iter()
        .map(|&a| {
            let (value, ell) = best_prefix_density(a, family.n());
            BetaValue { value, member: a, ell }
        })
        .min_by(|x, y| x.value.cmp(&y.value))
        .ok_or(Error::EmptyFamily("the β-parameter"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaSum {
    #[serde(with = "crate::ratio")]
    pub sum: Rational,
    pub betas: Vec<BetaValue>,
    /// `sum > 1`.
    pub exceeds_one: bool,
}

pub fn check_sum_beta(tuple: &FamilyTuple) -> Result<BetaSum> {
    let betas = tuple
        .families()
        .iter()
        .map(beta_parameter)
        .collect::<Result<Vec<_>>>()?;
    let sum: Rational = betas.iter().map(|b| b.value.clone()).sum();
    Ok(BetaSum {
        exceeds_one: sum > Rational::one(),
        sum,
        betas,
    })
}

/// Some `ℓ ∈ [1, |A|]` has `|A ∩ [3(s+1)ℓ - 1]| >= ℓ`.
pub fn ell_condition(a: KSet, s: usize) -> bool {
    (1..=a.len()).any(|l| a.count_upto(3 * (s + 1) * l - 1) >= l)
}

/// Some `i ∈ [b, k]` has `|A ∩ [α_i]| >= i`; `thresholds[i - b] = α_i`.
pub fn threshold_condition(a: KSet, b: usize, thresholds: &[usize]) -> bool {
    thresholds
        .iter()
        .enumerate()
        .any(|(offset, &alpha)| a.count_upto(alpha) >= b + offset)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShadowCheck {
    #[serde(with = "crate::ratio::big")]
    pub lhs: BigUint,
    #[serde(with = "crate::ratio::big")]
    pub rhs: BigUint,
    pub holds: bool,
}

impl ShadowCheck {
    fn new(lhs: BigUint, rhs: BigUint) -> Self {
        ShadowCheck {
            holds: lhs >= rhs,
            lhs,
            rhs,
        }
    }

    /// `lhs - rhs` as a signed value.
    pub fn slack(&self) -> num_bigint::BigInt {
        num_bigint::BigInt::from(self.lhs.clone()) - num_bigint::BigInt::from(self.rhs.clone())
    }
}

/// `(3s + 2)|∂F| >= |F|` for a family whose members all satisfy [`ell_condition`].
pub fn verify_lemma4(family: &SetFamily, s: usize) -> Result<ShadowCheck> {
    let (n, k) = (family.n(), family.k());
    if n + 1 < 3 * (s + 1) * k {
        return Err(Error::pre(format!(
            "need n >= 3(s+1)k - 1 = {}, got n={n}",
            3 * (s + 1) * k - 1
        )));
    }
    if let Some(&bad) = family.iter().find(|&&a| !ell_condition(a, s)) {
        return Err(Error::ConditionViolated {
            member: bad,
            condition: "ℓ-condition |A ∩ [3(s+1)ℓ-1]| >= ℓ",
        });
    }
    if k == 0 {
        return Ok(ShadowCheck::new(BigUint::zero(), BigUint::from(family.len())));
    }
    let shadow = lower_shadow(family, 1)?;
    Ok(ShadowCheck::new(
        BigUint::from((3 * s + 2) * shadow.len()),
        BigUint::from(family.len()),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem3Check {
    /// `min_{i ∈ [b,k]} C(α_i, i-b) / C(α_i, i)`.
    #[serde(with = "crate::ratio")]
    pub beta: Rational,
    pub shadow_size: usize,
    pub family_size: usize,
    pub holds: bool,
}

impl Theorem3Check {
    pub fn slack(&self) -> Rational {
        Rational::from_integer(self.shadow_size.into())
            - &self.beta * Rational::from_integer(self.family_size.into())
    }
}

/// `|∂^b F| >= β|F|` for thresholds `α_b < .. < α_k`.
pub fn verify_theorem3(family: &SetFamily, b: usize, thresholds: &[usize]) -> Result<Theorem3Check> {
    let k = family.k();
    if b > k {
        return Err(Error::pre(format!("b={b} exceeds k={k}")));
    }
    if thresholds.len() != k - b + 1 {
        return Err(Error::pre(format!(
            "expected {} thresholds α_b..α_k, got {}",
            k - b + 1,
            thresholds.len()
        )));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::pre("thresholds must be strictly increasing"));
    }
    if let Some(&bad) = family.iter().find(|&&a| !threshold_condition(a, b, thresholds)) {
        return Err(Error::ConditionViolated {
            member: bad,
            condition: "threshold condition |F ∩ [α_i]| >= i",
        });
    }
    let beta = thresholds
        .iter()
        .enumerate()
        .map(|(offset, &alpha)| {
            let i = b + offset;
            ratio::uint_ratio(&choose(alpha, i - b), &choose(alpha, i))
        })
        .min()
        .expect("at least one threshold");
    let shadow_size = lower_shadow(family, b)?.len();
    let holds = Rational::from_integer(shadow_size.into()) >= &beta * Rational::from_integer(family.len().into());
    Ok(Theorem3Check {
        beta,
        shadow_size,
        family_size: family.len(),
        holds,
    })
}

/// `(m - k + 1)|∂F| >= k|F|` for a k-uniform family over a ground of size `m = family.n()`.
pub fn local_lym_ratio(family: &SetFamily) -> ShadowCheck {
    let (m, k) = (family.n(), family.k());
    if k == 0 {
        return ShadowCheck::new(BigUint::zero(), BigUint::zero());
    }
    let shadow = lower_shadow(family, 1).expect("depth 1 <= k");
    ShadowCheck::new(
        BigUint::from((m - k + 1) * shadow.len()),
        BigUint::from(k * family.len()),
    )
}

/// Retry cap for [`sample_family_where`].
pub const REJECTION_RETRIES: usize = 1_000_000;

/// A random family of at most `size` distinct k-subsets of `[n]`, each drawn
/// uniformly and kept only if it satisfies `keep`.
pub fn sample_family_where<R: Rng, P: Fn(KSet) -> bool>(
    rng: &mut R,
    n: usize,
    k: usize,
    size: usize,
    keep: P,
) -> Result<SetFamily> {
    let mut members = Vec::with_capacity(size);
    let mut attempts = 0;
    while members.len() < size {
        if attempts == REJECTION_RETRIES {
            return Err(Error::Guard {
                what: "rejection sampling attempts",
                actual: attempts.to_string(),
                limit: REJECTION_RETRIES.to_string(),
            });
        }
        attempts += 1;
        let candidate = random_kset(rng, n, k);
        if keep(candidate) && !members.contains(&candidate) {
            members.push(candidate);
        }
    }
    SetFamily::new(n, k, members)
}

pub fn random_kset<R: Rng>(rng: &mut R, n: usize, k: usize) -> KSet {
    let picked = rand::seq::index::sample(rng, n, k);
    KSet::from_elements(picked.into_iter().map(|e| e + 1)).expect("elements within [n]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_ksets;
    use crate::constructions::{build_extremal, build_gap_set, dense_step, ExtremalKind, GapVariant};
    use crate::combinatorics::Params;
    use crate::transforms::{enumerate_shifted_families, is_shifted};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fam(n: usize, k: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_lists(n, k, sets).unwrap()
    }

    fn lists(f: &SetFamily) -> Vec<Vec<usize>> {
        f.iter().map(|m| m.to_vec()).collect()
    }

    fn ks(e: &[usize]) -> KSet {
        KSet::from_elements(e.iter().copied()).unwrap()
    }

    #[test]
    fn decompose_example() {
        let f = fam(4, 2, &[&[1, 3], &[2, 3], &[3, 4]]);
        let classes = decompose(&f, KSet::prefix(2));
        assert_eq!(classes.len(), 4);
        assert_eq!(lists(&classes[&KSet::EMPTY]), vec![vec![3, 4]]);
        assert_eq!(lists(&classes[&ks(&[1])]), vec![vec![3]]);
        assert_eq!(lists(&classes[&ks(&[2])]), vec![vec![3]]);
        assert!(classes[&ks(&[1, 2])].is_empty());
        assert_eq!(classes[&ks(&[1, 2])].k(), 0);

        let whole = decompose(&f, KSet::EMPTY);
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[&KSet::EMPTY], f);

        let empty = decompose(&SetFamily::empty(4, 2), KSet::prefix(2));
        assert!(empty.values().all(|c| c.is_empty()));
    }

    #[test]
    fn decompose_partitions_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.gen_range(2..=10);
            let k = rng.gen_range(1..=n.min(4));
            let members = enumerate_ksets(n, k).into_iter().filter(|_| rng.gen_bool(0.3));
            let f = SetFamily::new(n, k, members).unwrap();
            let y = KSet::prefix(rng.gen_range(0..=n));
            let classes = decompose(&f, y);
            let total: usize = classes.values().map(SetFamily::len).sum();
            assert_eq!(total, f.len());
            for (s, class) in &classes {
                assert_eq!(class.k(), k - s.len());
                assert!(class.iter().all(|m| m.is_disjoint(y)));
            }
        }
    }

    #[test]
    fn slices_are_nested_for_shifted_families() {
        for n in 2..=6 {
            for k in 1..=3.min(n) {
                for s in 0..=2 {
                    if s + 1 > n {
                        continue;
                    }
                    for f in enumerate_shifted_families(n, k).unwrap() {
                        let slices = Slices::new(&f, s);
                        for j in 1..=s {
                            assert!(slices.slice(j + 1).is_subfamily_of(slices.slice(j)));
                        }
                        if k >= 2 && !slices.empty.is_empty() {
                            let shadow = lower_shadow(&slices.empty, 1).unwrap();
                            assert!(shadow.is_subfamily_of(slices.slice(s + 1)), "{f:?} s={s}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_examples() {
        let a = build_extremal(&Params::new(6, 2, 1).unwrap(), ExtremalKind::A).unwrap();
        let tuple = FamilyTuple::new(vec![a.clone(), a]).unwrap();
        let profile = alpha_profile(&tuple).unwrap();
        assert_eq!(profile.alpha(1, 1), &ratio::ratio(1, 1));
        assert_eq!(profile.alpha(2, 2), &ratio::ratio(0, 1));
        assert!(profile.alpha_empty.iter().all(Zero::is_zero));

        let empty = FamilyTuple::new(vec![SetFamily::empty(6, 2); 3]).unwrap();
        let profile = alpha_profile(&empty).unwrap();
        assert!(profile.alpha.iter().flatten().all(Zero::is_zero));

        let full = FamilyTuple::new(vec![SetFamily::full(7, 3).unwrap(); 2]).unwrap();
        let profile = alpha_profile(&full).unwrap();
        assert!(profile.alpha.iter().flatten().all(One::is_one));
        assert!(profile.alpha_empty.iter().all(One::is_one));
    }

    #[test]
    fn alpha_is_monotone_for_shifted_families() {
        for f in enumerate_shifted_families(6, 3).unwrap() {
            let tuple = FamilyTuple::new(vec![f.clone(), f.clone(), f]).unwrap();
            let profile = alpha_profile(&tuple).unwrap();
            for row in &profile.alpha {
                assert!(row.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn beta_examples() {
        let b = beta_parameter(&fam(4, 2, &[&[1, 2]])).unwrap();
        assert_eq!((b.value.clone(), b.ell), (ratio::ratio(1, 1), 1));
        let b = beta_parameter(&fam(4, 2, &[&[2, 4]])).unwrap();
        assert_eq!(b.value, ratio::ratio(1, 2));
        assert_eq!(b.ell, 2);
        let b = beta_parameter(&fam(4, 2, &[&[1, 2], &[2, 4]])).unwrap();
        assert_eq!(b.value, ratio::ratio(1, 2));
        assert_eq!(b.member, ks(&[2, 4]));
        assert!(matches!(beta_parameter(&SetFamily::empty(4, 2)), Err(Error::EmptyFamily(_))));
    }

    #[test]
    fn beta_of_dense_gap_set_is_one_over_s_prime() {
        for s in [3usize, 7, 11, 15] {
            let sp = dense_step(s).unwrap();
            for k in 1..=4 {
                let n = k * sp + 3;
                let g = build_gap_set(&Params::new(n, k, s).unwrap(), GapVariant::Dense).unwrap();
                let (value, _) = best_prefix_density(g, n);
                assert_eq!(value, ratio::ratio(1, sp as i64));
                assert_eq!(value, ratio::ratio(4, 3 * (s as i64 + 1)));
                let family = SetFamily::new(n, k, [g]).unwrap();
                assert!(beta_parameter(&family).unwrap().value <= ratio::ratio(4, 3 * (s as i64 + 1)));
            }
        }
    }

    #[test]
    fn beta_sum_examples() {
        let single = fam(4, 2, &[&[1, 2]]);
        let t = FamilyTuple::new(vec![single.clone(), single.clone()]).unwrap();
        let r = check_sum_beta(&t).unwrap();
        assert_eq!(r.sum, ratio::ratio(2, 1));
        assert!(r.exceeds_one);

        let star = fam(4, 2, &[&[1, 2], &[1, 3], &[1, 4]]);
        let r = check_sum_beta(&FamilyTuple::new(vec![star.clone(), star]).unwrap()).unwrap();
        assert_eq!(r.sum, ratio::ratio(2, 1));

        let other = fam(4, 2, &[&[3, 4]]);
        let r = check_sum_beta(&FamilyTuple::new(vec![single, other]).unwrap()).unwrap();
        assert_eq!(r.sum, ratio::ratio(3, 2));

        let t = FamilyTuple::new(vec![SetFamily::empty(4, 2), fam(4, 2, &[&[1, 2]])]).unwrap();
        assert!(check_sum_beta(&t).is_err());
    }

    #[test]
    fn beta_sum_exceeds_one_for_cross_dependent_shifted_pairs() {
        use crate::matchings::find_rainbow;
        for n in 2..=6 {
            let shifted: Vec<SetFamily> = enumerate_shifted_families(n, 2)
                .unwrap()
                .into_iter()
                .filter(|f| !f.is_empty())
                .collect();
            for f1 in &shifted {
                for f2 in &shifted {
                    let t = FamilyTuple::new(vec![f1.clone(), f2.clone()]).unwrap();
                    if !find_rainbow(&t).complete {
                        assert!(check_sum_beta(&t).unwrap().exceeds_one, "{f1:?} {f2:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn ell_condition_examples() {
        assert!(ell_condition(ks(&[5, 10]), 1));
        assert!(!ell_condition(ks(&[6, 12]), 1));
        assert!(ell_condition(ks(&[1, 40, 90]), 7));
        let sparse = build_gap_set(&Params::new(60, 4, 4).unwrap(), GapVariant::Sparse).unwrap();
        assert!(!ell_condition(sparse, 4));
    }

    #[test]
    fn shadow_bound_examples() {
        let f = SetFamily::new(11, 2, enumerate_ksets(11, 2).into_iter().filter(|a| a.count_upto(5) > 0)).unwrap();
        let r = verify_lemma4(&f, 1).unwrap();
        assert_eq!(f.len(), 40);
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (BigUint::from(55u32), BigUint::from(40u32)));
        assert!(r.holds);

        let r = verify_lemma4(&fam(11, 2, &[&[1, 2]]), 1).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (BigUint::from(10u32), BigUint::from(1u32)));

        let r = verify_lemma4(&SetFamily::empty(11, 2), 1).unwrap();
        assert!(r.holds && r.lhs.is_zero());

        let err = verify_lemma4(&fam(12, 2, &[&[6, 12]]), 1).unwrap_err();
        assert!(matches!(err, Error::ConditionViolated { member, .. } if member == ks(&[6, 12])));
        assert!(matches!(verify_lemma4(&fam(10, 2, &[&[1, 2]]), 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn threshold_shadow_examples() {
        let f = SetFamily::new(6, 2, enumerate_ksets(6, 2).into_iter().filter(|a| threshold_condition(*a, 1, &[2, 5]))).unwrap();
        let r = verify_theorem3(&f, 1, &[2, 5]).unwrap();
        assert_eq!(r.beta, ratio::ratio(1, 2));
        assert!(r.holds);

        let f = fam(6, 2, &[&[1, 2], &[2, 3]]);
        let r = verify_theorem3(&f, 2, &[4]).unwrap();
        assert_eq!(r.beta, ratio::ratio(1, 6));
        assert_eq!(r.shadow_size, 1);
        assert!(r.holds);

        let r = verify_theorem3(&f, 0, &[3, 4, 5]).unwrap();
        assert_eq!(r.beta, ratio::ratio(1, 1));
        assert!(r.holds);

        assert!(verify_theorem3(&f, 1, &[5, 2]).is_err());
        assert!(verify_theorem3(&f, 1, &[2]).is_err());
        assert!(matches!(
            verify_theorem3(&fam(6, 2, &[&[5, 6]]), 1, &[2, 5]),
            Err(Error::ConditionViolated { .. })
        ));
    }

    #[test]
    fn linear_thresholds_give_one_over_three_s_plus_two() {
        for s in 1..=3usize {
            for k in 1..=3usize {
                let thresholds: Vec<usize> = (1..=k).map(|i| 3 * (s + 1) * i - 1).collect();
                let f = SetFamily::from_lists(3 * (s + 1) * k - 1, k, &[(1..=k).collect::<Vec<_>>()]).unwrap();
                let r = verify_theorem3(&f, 1, &thresholds).unwrap();
                assert_eq!(r.beta, ratio::ratio(1, 3 * s as i64 + 2));
            }
        }
    }

    #[test]
    fn local_lym_examples() {
        let r = local_lym_ratio(&fam(5, 3, &[&[1, 2, 3]]));
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (BigUint::from(9u32), BigUint::from(3u32)));
        let r = local_lym_ratio(&SetFamily::full(4, 2).unwrap());
        assert_eq!(r.lhs, r.rhs);
        assert_eq!(r.lhs, BigUint::from(12u32));
        assert!(local_lym_ratio(&SetFamily::empty(5, 2)).holds);
    }

    #[test]
    fn rejection_sampler_respects_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = sample_family_where(&mut rng, 11, 2, 20, |a| ell_condition(a, 1)).unwrap();
        assert_eq!(f.len(), 20);
        assert!(f.iter().all(|&a| ell_condition(a, 1)));
        assert!(sample_family_where(&mut rng, 4, 2, 1, |_| false).is_err());
        assert!(is_shifted(&SetFamily::empty(3, 1)));
    }
}
