//! Seeded random suites for the shadow inequalities. Trial `i` draws its
//! family with seed `seed + i`; trials run in parallel and are reported in
//! trial order.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{choose_u64, SetFamily};
use crate::densities::{ell_condition, local_lym_ratio, sample_family_where, threshold_condition, verify_lemma4, verify_theorem3};
use crate::error::{Error, Result};
use crate::ratio::{self, Rational};
use crate::transforms::bt_check;

/// Largest family drawn by a suite.
pub const MAX_SUITE_FAMILY: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteFailure {
    pub trial: u64,
    pub family: SetFamily,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub check: &'static str,
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
    pub failures: Vec<SuiteFailure>,
    /// Smallest `lhs - rhs` seen.
    #[serde(with = "crate::ratio")]
    pub min_slack: Rational,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Outcome {
    family: SetFamily,
    lhs: String,
    rhs: String,
    slack: Rational,
    holds: bool,
}

fn run<F>(check: &'static str, n: usize, k: usize, trials: u64, seed: u64, trial: F) -> Result<SuiteReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Outcome> + Sync,
{
    if trials == 0 {
        return Err(Error::pre("at least one trial is needed"));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| trial(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(i))))
        .collect::<Result<Vec<_>>>()?;
    let min_slack = outcomes.iter().map(|o| o.slack.clone()).min().expect("trials > 0");
    let failures = outcomes
        .into_iter()
        .enumerate()
        .filter(|(_, o)| !o.holds)
        .map(|(i, o)| SuiteFailure {
            trial: i as u64,
            family: o.family,
            lhs: o.lhs,
            rhs: o.rhs,
        })
        .collect();
    Ok(SuiteReport {
        check,
        n,
        k,
        trials,
        seed,
        failures,
        min_slack,
    })
}

fn family_size<R: Rng>(rng: &mut R, n: usize, k: usize) -> usize {
    let layer = choose_u64(n, k).unwrap_or(u64::MAX);
    let cap = (layer / 2).clamp(1, MAX_SUITE_FAMILY as u64) as usize;
    rng.gen_range(1..=cap)
}

fn int_slack(lhs: &num_bigint::BigUint, rhs: &num_bigint::BigUint) -> Rational {
    Rational::from_integer(BigInt::from(lhs.clone()) - BigInt::from(rhs.clone()))
}

/// `(3s+2)|∂F| >= |F|` on random families whose members satisfy the ℓ-condition.
pub fn lemma4_suite(n: usize, k: usize, s: usize, trials: u64, seed: u64) -> Result<SuiteReport> {
    run("lemma4", n, k, trials, seed, |rng| {
        let size = family_size(rng, n, k);
        let family = sample_family_where(rng, n, k, size, |a| ell_condition(a, s))?;
        let r = verify_lemma4(&family, s)?;
        Ok(Outcome {
            slack: int_slack(&r.lhs, &r.rhs),
            lhs: r.lhs.to_string(),
            rhs: r.rhs.to_string(),
            holds: r.holds,
            family,
        })
    })
}

/// `|∂^b F| >= β|F|` on random families satisfying the threshold condition.
pub fn theorem3_suite(n: usize, k: usize, b: usize, thresholds: &[usize], trials: u64, seed: u64) -> Result<SuiteReport> {
    run("theorem3", n, k, trials, seed, |rng| {
        let size = family_size(rng, n, k);
        let family = sample_family_where(rng, n, k, size, |a| threshold_condition(a, b, thresholds))?;
        let r = verify_theorem3(&family, b, thresholds)?;
        let rhs = &r.beta * Rational::from_integer(r.family_size.into());
        Ok(Outcome {
            slack: r.slack(),
            lhs: r.shadow_size.to_string(),
            rhs: rhs.to_string(),
            holds: r.holds,
            family,
        })
    })
}

/// `(n-k+1)|∂F| >= k|F|` on uniformly random families.
pub fn local_lym_suite(n: usize, k: usize, trials: u64, seed: u64) -> Result<SuiteReport> {
    run("local-lym", n, k, trials, seed, |rng| {
        let size = family_size(rng, n, k);
        let family = sample_family_where(rng, n, k, size, |_| true)?;
        let r = local_lym_ratio(&family);
        Ok(Outcome {
            slack: int_slack(&r.lhs, &r.rhs),
            lhs: r.lhs.to_string(),
            rhs: r.rhs.to_string(),
            holds: r.holds,
            family,
        })
    })
}

/// The upper-shadow density inequality on uniformly random families.
pub fn bt_suite(n: usize, k: usize, u: usize, trials: u64, seed: u64) -> Result<SuiteReport> {
    if u < k || u > n {
        return Err(Error::pre(format!("need k <= u <= n, got k={k}, u={u}, n={n}")));
    }
    run("bt", n, k, trials, seed, |rng| {
        let size = family_size(rng, n, k);
        let family = sample_family_where(rng, n, k, size, |_| true)?;
        let r = bt_check(&family, u)?;
        // The cleared powers are huge; the slack is reported on the densities.
        let m = (n - k) as i32;
        let slack = num_traits::Pow::pow(&r.shadow_density, m)
            - num_traits::Pow::pow(&r.family_density, (n - u) as i32);
        Ok(Outcome {
            slack,
            lhs: ratio::to_f64(&r.shadow_density).to_string(),
            rhs: ratio::to_f64(&r.family_density).to_string(),
            holds: r.holds,
            family,
        })
    })
}
