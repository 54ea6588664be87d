//! The rearrangement rules and the greedy rainbow construction inside a fixed
//! matching `M` of (k-1)-sets of `X = [s+2, n]`.
//!
//! Families are referred to by their original 1-based index; positions are
//! 1-based places in the rearranged order. Fractional cardinalities are
//! floored: `|U| = floor(2(s+1)/3)`. Thresholds that involve `γ` compare the
//! exact part first and only the remainder against `γ` in floating point.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{choose, FamilyTuple, KSet, SetFamily};
use crate::concentration::{gamma_threshold, FLOAT_SLACK};
use crate::densities::Slices;
use crate::error::{Error, Result};
use crate::matchings::Matching;
use crate::ratio::{self, Rational};

/// Which condition triggers step (1').
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnePrimeGuard {
    /// Run (1') exactly when rule (R4) moved a family to the last position.
    #[default]
    R4Applied,
    /// Run (1') whenever `W1` is empty.
    W1Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    /// `|U|`, the number of places reserved by (R1).
    pub u_size: usize,
    /// (R1) keeps families with `|F(∅)| <= tau·|F(s+1)|`.
    #[serde(with = "crate::ratio")]
    pub tau: Rational,
    /// (R2) puts a family of `U` into `[s1]` when `t·α_{s+1} <= r2_base + gamma`.
    #[serde(with = "crate::ratio")]
    pub r2_base: Rational,
    pub gamma: f64,
    /// Rule (b): `|F(s+1) ∩ M| >= w1_hits`.
    #[serde(with = "crate::ratio")]
    pub w1_hits: Rational,
    /// Rule (c): `|F(w2_slice) ∩ M| >= w2_hits`.
    pub w2_slice: usize,
    pub w2_hits: usize,
    pub one_prime_guard: OnePrimeGuard,
}

impl ThresholdConfig {
    /// `|U| = floor(2(s+1)/3)`, `τ = 3s+2`, `(s+1)/6`, `γ = 10·sqrt(t ln s)`,
    /// `(s+1)/3`, slice `max(1, ceil((s+1)/3))` and `s+1` hits.
    pub fn defaults(s: usize, t: usize) -> Self {
        let s1 = s as i64 + 1;
        ThresholdConfig {
            u_size: 2 * (s + 1) / 3,
            tau: ratio::ratio(3 * s as i64 + 2, 1),
            r2_base: ratio::ratio(s1, 6),
            gamma: if s >= 2 { gamma_threshold(t as f64, s as f64) } else { 0.0 },
            w1_hits: ratio::ratio(s1, 3),
            w2_slice: (s + 1).div_ceil(3).max(1),
            w2_hits: s + 1,
            one_prime_guard: OnePrimeGuard::R4Applied,
        }
    }

    /// Defaults overlaid with the keys present in a JSON object.
    pub fn with_overrides(s: usize, t: usize, overrides: &serde_json::Value) -> Result<Self> {
        let mut base = serde_json::to_value(ThresholdConfig::defaults(s, t)).expect("config serializes");
        let Some(extra) = overrides.as_object() else {
            return Err(Error::pre("threshold overrides must be a JSON object"));
        };
        for (key, value) in extra {
            if base.get(key).is_none() {
                return Err(Error::pre(format!("unknown threshold `{key}`")));
            }
            base[key] = value.clone();
        }
        let config: ThresholdConfig = serde_json::from_value(base).map_err(|e| Error::pre(e.to_string()))?;
        config.validate(s)?;
        Ok(config)
    }

    pub fn validate(&self, s: usize) -> Result<()> {
        if self.tau < Rational::zero() || self.r2_base < Rational::zero() || self.w1_hits < Rational::zero() {
            return Err(Error::pre("thresholds must be nonnegative"));
        }
        if self.gamma.is_nan() || self.gamma < 0.0 {
            return Err(Error::pre("gamma must be nonnegative"));
        }
        if self.u_size > s + 1 || self.w2_slice == 0 || self.w2_slice > s + 1 {
            return Err(Error::pre("u_size and w2_slice must lie in [1, s+1]"));
        }
        Ok(())
    }
}

/// Hit counts of one family against `M`.
#[derive(Clone, Debug)]
struct Profile {
    slices: Slices,
    /// `hits[j - 1] = |F(j) ∩ M|`.
    hits: Vec<usize>,
}

impl Profile {
    fn new(family: &SetFamily, m: &Matching, s: usize) -> Self {
        let slices = Slices::new(family, s);
        let hits = slices.single.iter().map(|f| m.hits(f)).collect();
        Profile { slices, hits }
    }

    fn hits(&self, j: usize) -> usize {
        self.hits[j - 1]
    }
}

/// The smallest `j ∈ [1, s+1]` with `hits[j-1] <= s+1-j`; `None` stands for ∞.
pub fn m_from_hits(hits: &[usize], s: usize) -> Option<usize> {
    (1..=s + 1).find(|&j| hits[j - 1] <= s + 1 - j)
}

/// `m_i` for one family against `M`.
pub fn compute_m(family: &SetFamily, m: &Matching, s: usize) -> Option<usize> {
    m_from_hits(&Profile::new(family, m, s).hits, s)
}

/// `Σ_{i <= s1} ((3s+3)|F_i(s+1) ∩ M| + Σ_{j <= s} |F_i(j) ∩ M|)` over the
/// first `s1` families of the tuple as given.
pub fn xi_statistic(tuple: &FamilyTuple, m: &Matching, s1: usize) -> Result<u64> {
    let s = tuple.s();
    if s1 > s + 1 {
        return Err(Error::pre(format!("s1={s1} exceeds s+1={}", s + 1)));
    }
    Ok(tuple.families()[..s1]
        .iter()
        .map(|f| xi_term(&Profile::new(f, m, s).hits, s))
        .sum())
}

fn xi_term(hits: &[usize], s: usize) -> u64 {
    (3 * s as u64 + 3) * hits[s] as u64 + hits[..s].iter().map(|&h| h as u64).sum::<u64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    One,
    OnePrime,
    Two,
    Three,
}

/// One block taken by the procedure; the chosen member is `block ∪ {slice}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pick {
    pub step: Step,
    pub position: usize,
    pub family: usize,
    pub slice: usize,
    pub block: KSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Outcome {
    RainbowFound,
    /// Step (2) found no unused block for position `index`.
    Step2Failed { index: usize },
    AssumptionsUnmet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step2Failure {
    /// The failing position `R`.
    pub index: usize,
    /// The slice `s+2-r-R` it was drawn from.
    pub slice: usize,
    /// `m_R`; `None` stands for ∞.
    pub m: Option<usize>,
    /// `m_R <= s+2-r-R`.
    pub invariant_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcedureTrace {
    pub s: usize,
    pub t: usize,
    pub config: ThresholdConfig,
    /// `order[p - 1]` is the original index of the family at position `p`.
    pub order: Vec<usize>,
    /// Original indices satisfying the (R1) inequality.
    pub eligible: Vec<usize>,
    /// Original indices placed in `U`.
    pub u_set: Vec<usize>,
    pub s1: usize,
    /// `w_1 > w_2 > ..` as positions.
    pub w1: Vec<usize>,
    /// `v_1 < v_2 < ..` as positions.
    pub w2: Vec<usize>,
    pub u: usize,
    /// `m_i` for the positions in `[s1]`; `null` stands for ∞.
    pub m: Vec<Option<usize>>,
    pub r4_applied: bool,
    pub one_prime_applied: bool,
    pub r: usize,
    pub picks: Vec<Pick>,
    pub outcome: Outcome,
    pub failure: Option<Step2Failure>,
    /// Chosen member per original index when a rainbow matching was found.
    pub witness: Option<Vec<KSet>>,
    /// Rule guards that the instance does not satisfy.
    pub violations: Vec<String>,
    /// ξ over the first `s1` positions.
    pub xi: u64,
}

impl ProcedureTrace {
    /// `W1 ∪ W2 = [s1+1, s+1]` and the two parts are disjoint.
    pub fn split_is_partition(&self) -> bool {
        let mut all: Vec<usize> = self.w1.iter().chain(&self.w2).copied().collect();
        all.sort_unstable();
        all == (self.s1 + 1..=self.s + 1).collect::<Vec<_>>()
    }

    /// `r ∈ {0, 1, u}`; zero only when both (1) and (1') were skipped.
    pub fn r_is_consistent(&self) -> bool {
        self.r == if self.one_prime_applied { 1 } else { self.u }
    }
}

fn check_inputs(tuple: &FamilyTuple, m: &Matching) -> Result<()> {
    let params = tuple.params();
    if params.k < 2 {
        return Err(Error::pre("the procedure needs k >= 2"));
    }
    if !m.is_empty() && m.block_size() != params.k - 1 {
        return Err(Error::shape(format!("matching blocks must have size {}", params.k - 1)));
    }
    let x = params.x();
    if let Some(b) = m.blocks().iter().find(|b| !b.is_subset(x)) {
        return Err(Error::shape(format!("block {b} lies outside X = [{}, {}]", params.s + 2, params.n)));
    }
    Ok(())
}

struct Arrangement {
    order: Vec<usize>,
    eligible: Vec<usize>,
    u_set: Vec<usize>,
    s1: usize,
    w1: Vec<usize>,
    w2: Vec<usize>,
    m: Vec<Option<usize>>,
    r4_applied: bool,
    violations: Vec<String>,
}

fn arrange(tuple: &FamilyTuple, profiles: &[Profile], t: usize, config: &ThresholdConfig) -> Arrangement {
    let params = tuple.params();
    let s = params.s;
    let layer = choose(params.n_prime(), params.k - 1);
    let mut violations = Vec::new();

    // (R1)
    let eligible: Vec<usize> = (1..=s + 1)
        .filter(|&i| {
            let p = &profiles[i - 1].slices;
            ratio::from_uint(&BigUint::from(p.empty.len()))
                <= &config.tau * ratio::from_uint(&BigUint::from(p.slice(s + 1).len()))
        })
        .collect();
    if eligible.len() < config.u_size {
        violations.push(format!(
            "R1: only {} families satisfy |F(∅)| <= {}·|F(s+1)|, {} needed",
            eligible.len(),
            config.tau,
            config.u_size
        ));
    }
    let u_set: Vec<usize> = eligible.iter().copied().take(config.u_size).collect();

    // (R2)
    let small = |i: usize| {
        let size = BigUint::from(profiles[i - 1].slices.slice(s + 1).len());
        let excess = ratio::uint_ratio(&(size * BigUint::from(t)), &layer) - &config.r2_base;
        excess <= Rational::zero() || ratio::to_f64(&excess) <= config.gamma * (1.0 + FLOAT_SLACK)
    };
    let (mut first, large): (Vec<usize>, Vec<usize>) = u_set.iter().partition(|&&i| small(i));

    // (R3): descending m, ∞ first, ties by original index.
    let m_of = |i: usize| m_from_hits(&profiles[i - 1].hits, s);
    first.sort_by(|&a, &b| match (m_of(a), m_of(b)) {
        (None, None) => a.cmp(&b),
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => y.cmp(&x).then(a.cmp(&b)),
    });
    let s1 = first.len();
    let mut order = first;
    order.extend(large);
    order.extend((1..=s + 1).filter(|i| !u_set.contains(i)));

    let hits = |i: usize, j: usize| profiles[i - 1].hits(j);
    let classify = |position: usize, order: &[usize], violations: &mut Vec<String>| -> bool {
        if position <= u_set.len() {
            return true;
        }
        let i = order[position - 1];
        if ratio::ratio(hits(i, s + 1) as i64, 1) >= config.w1_hits {
            true
        } else {
            if hits(i, config.w2_slice) < config.w2_hits {
                violations.push(format!(
                    "split: family {i} meets neither |F(s+1) ∩ M| >= {} nor |F({}) ∩ M| >= {}",
                    config.w1_hits, config.w2_slice, config.w2_hits
                ));
            }
            false
        }
    };
    let mut in_w1: Vec<bool> = (s1 + 1..=s + 1).map(|p| classify(p, &order, &mut violations)).collect();

    // (R4)
    let mut r4_applied = false;
    if in_w1.iter().all(|&w| !w) && order[..s1].iter().all(|&i| hits(i, s + 1) == 0) {
        match (s1 + 1..=s + 1).rev().find(|&p| hits(order[p - 1], s + 1) > 0) {
            Some(p) => {
                let moved = order.remove(p - 1);
                order.push(moved);
                let flag = in_w1.remove(p - 1 - s1);
                in_w1.push(flag);
                r4_applied = true;
            }
            None => violations.push("R4: no family has F(s+1) ∩ M nonempty".into()),
        }
    }

    let positions = |want: bool| -> Vec<usize> {
        (s1 + 1..=s + 1).filter(|&p| in_w1[p - 1 - s1] == want).collect()
    };
    let mut w1 = positions(true);
    w1.reverse();
    let w2 = positions(false);
    let m = order[..s1].iter().map(|&i| m_of(i)).collect();
    Arrangement {
        order,
        eligible,
        u_set,
        s1,
        w1,
        w2,
        m,
        r4_applied,
        violations,
    }
}

/// Reorders the tuple by rules (R1)-(R4) without running the construction.
pub fn arrange_families(tuple: &FamilyTuple, m: &Matching, config: &ThresholdConfig) -> Result<ProcedureTrace> {
    check_inputs(tuple, m)?;
    let s = tuple.s();
    let t = m.len();
    let profiles: Vec<Profile> = tuple.families().iter().map(|f| Profile::new(f, m, s)).collect();
    let a = arrange(tuple, &profiles, t, config);
    Ok(trace_from(tuple, &profiles, t, config, a, Vec::new(), 0, false, Outcome::AssumptionsUnmet, None, None))
}

#[allow(clippy::too_many_arguments)]
fn trace_from(
    tuple: &FamilyTuple,
    profiles: &[Profile],
    t: usize,
    config: &ThresholdConfig,
    a: Arrangement,
    picks: Vec<Pick>,
    r: usize,
    one_prime_applied: bool,
    outcome: Outcome,
    failure: Option<Step2Failure>,
    witness: Option<Vec<KSet>>,
) -> ProcedureTrace {
    let s = tuple.s();
    let xi = a.order[..a.s1].iter().map(|&i| xi_term(&profiles[i - 1].hits, s)).sum();
    ProcedureTrace {
        s,
        t,
        config: config.clone(),
        u: a.w1.len(),
        order: a.order,
        eligible: a.eligible,
        u_set: a.u_set,
        s1: a.s1,
        w1: a.w1,
        w2: a.w2,
        m: a.m,
        r4_applied: a.r4_applied,
        one_prime_applied,
        r,
        picks,
        outcome,
        failure,
        witness,
        violations: a.violations,
        xi,
    }
}

/// Runs steps (1)/(1'), (2) and (3) on the rearranged tuple, always taking the
/// smallest unused block of `M` in the required slice.
pub fn attempt_rainbow_procedure(tuple: &FamilyTuple, m: &Matching, config: &ThresholdConfig) -> Result<ProcedureTrace> {
    check_inputs(tuple, m)?;
    let s = tuple.s();
    let t = m.len();
    let profiles: Vec<Profile> = tuple.families().iter().map(|f| Profile::new(f, m, s)).collect();
    let a = arrange(tuple, &profiles, t, config);
    let mut used = vec![false; m.len()];
    let mut picks: Vec<Pick> = Vec::new();

    let mut take = |step: Step, position: usize, slice: usize, picks: &mut Vec<Pick>| -> bool {
        let family = a.order[position - 1];
        let candidates = m.hit_blocks(profiles[family - 1].slices.slice(slice));
        match candidates.into_iter().find(|&b| !used[b]) {
            Some(b) => {
                used[b] = true;
                picks.push(Pick {
                    step,
                    position,
                    family,
                    slice,
                    block: m.blocks()[b],
                });
                true
            }
            None => false,
        }
    };
    let unmet = |a: Arrangement, picks: Vec<Pick>, r: usize, one_prime: bool| {
        Ok(trace_from(tuple, &profiles, t, config, a, picks, r, one_prime, Outcome::AssumptionsUnmet, None, None))
    };

    // (1)
    for (idx, &w) in a.w1.iter().enumerate() {
        let i = idx + 1;
        if !take(Step::One, w, s + 2 - i, &mut picks) {
            return unmet(a, picks, 0, false);
        }
    }
    // (1')
    let one_prime = match config.one_prime_guard {
        OnePrimeGuard::R4Applied => a.r4_applied,
        OnePrimeGuard::W1Empty => a.w1.is_empty(),
    };
    if one_prime && !take(Step::OnePrime, s + 1, s + 1, &mut picks) {
        return unmet(a, picks, 1, true);
    }
    let r = if one_prime { 1 } else { a.w1.len() };

    // (2)
    for i in 1..=a.s1 {
        if s + 2 < r + i + 1 {
            return unmet(a, picks, r, one_prime);
        }
        let slice = s + 2 - r - i;
        if !take(Step::Two, i, slice, &mut picks) {
            let m_r = a.m[i - 1];
            let failure = Step2Failure {
                index: i,
                slice,
                m: m_r,
                invariant_holds: m_r.is_some_and(|v| v <= slice),
            };
            return Ok(trace_from(
                tuple,
                &profiles,
                t,
                config,
                a,
                picks,
                r,
                one_prime,
                Outcome::Step2Failed { index: i },
                Some(failure),
                None,
            ));
        }
    }

    // (3)
    let rest: Vec<usize> = a.w2.iter().copied().filter(|&p| !(one_prime && p == s + 1)).collect();
    for (idx, &v) in rest.iter().enumerate() {
        if !take(Step::Three, v, idx + 1, &mut picks) {
            return unmet(a, picks, r, one_prime);
        }
    }

    let mut witness = vec![KSet::EMPTY; s + 1];
    for p in &picks {
        witness[p.family - 1] = p.block.with(p.slice);
    }
    let valid = witness
        .iter()
        .zip(tuple.families())
        .all(|(w, f)| f.contains(*w))
        && witness.iter().map(|w| w.len()).sum::<usize>()
            == witness.iter().fold(KSet::EMPTY, |acc, w| acc.union(*w)).len();
    if !valid {
        return unmet(a, picks, r, one_prime);
    }
    Ok(trace_from(
        tuple,
        &profiles,
        t,
        config,
        a,
        picks,
        r,
        one_prime,
        Outcome::RainbowFound,
        None,
        Some(witness),
    ))
}
