//! How many blocks of a random t-matching land in a fixed family `G`.
//!
//! `η = |G ∩ M|` has mean `αt` where `α = |G| / C(width, block)`, and
//! `Pr[|η - αt| >= 2β√t] <= 2e^{-β²/2}`. The exact distribution is available
//! by enumeration at small scale; otherwise the tails are sampled.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{choose, FamilyTuple};
use crate::densities::Slices;
use crate::error::{Error, Result};
use crate::matchings::{for_each_matching, sample_matching, Matching, MatchingSpace};
use crate::ratio::{self, Rational};
use crate::SetFamily;

/// Relative slack applied when a floating-point threshold meets an exact value.
pub const FLOAT_SLACK: f64 = 1e-9;

/// `γ = 10·sqrt(t·ln s)`.
pub fn gamma_threshold(t: f64, s: f64) -> f64 {
    10.0 * (t * s.ln()).sqrt()
}

/// `2(s+1)²·e^{-12.5 ln s} < s^{-10}`, compared as logarithms:
/// `ln 2 + 2 ln(s+1) - 12.5 ln s` against `-10 ln s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnionBound {
    pub s: f64,
    pub lhs_log: f64,
    pub rhs_log: f64,
    pub holds: bool,
}

pub fn union_bound(s: f64) -> UnionBound {
    let lhs_log = 2f64.ln() + 2.0 * (s + 1.0).ln() - 12.5 * s.ln();
    let rhs_log = -10.0 * s.ln();
    UnionBound {
        s,
        lhs_log,
        rhs_log,
        holds: lhs_log < rhs_log,
    }
}

/// `{0.5, 1, 2, 3, 5·sqrt(ln s)}`, dropping the last value when it is not positive.
pub fn default_beta_grid(s: usize) -> Vec<f64> {
    let mut grid = vec![0.5, 1.0, 2.0, 3.0];
    let last = 5.0 * (s as f64).ln().max(0.0).sqrt();
    if last > 0.0 {
        grid.push(last);
    }
    grid
}

fn check_family(g: &SetFamily, space: &MatchingSpace) -> Result<()> {
    if g.k() != space.block {
        return Err(Error::shape(format!("G must be {}-uniform, got k={}", space.block, g.k())));
    }
    let ground = crate::KSet::interval(space.lo, space.hi);
    if let Some(bad) = g.iter().find(|m| !m.is_subset(ground)) {
        return Err(Error::shape(format!("member {bad} lies outside [{}, {}]", space.lo, space.hi)));
    }
    Ok(())
}

/// `|G| / C(width, block)`.
pub fn density(g: &SetFamily, space: &MatchingSpace) -> Rational {
    ratio::uint_ratio(&BigUint::from(g.len()), &choose(space.width(), space.block))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaDistribution {
    #[serde(with = "crate::ratio")]
    pub alpha: Rational,
    pub t: usize,
    #[serde(with = "crate::ratio::big")]
    pub matchings: BigUint,
    /// `η ↦ Pr[η]`.
    #[serde(serialize_with = "serialize_probabilities")]
    pub probabilities: BTreeMap<usize, Rational>,
    #[serde(with = "crate::ratio")]
    pub mean: Rational,
}

impl EtaDistribution {
    pub fn mean_is_alpha_t(&self) -> bool {
        self.mean == &self.alpha * Rational::from_integer(self.t.into())
    }
}

fn serialize_probabilities<S: serde::Serializer>(map: &BTreeMap<usize, Rational>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut out = ser.serialize_map(Some(map.len()))?;
    for (eta, p) in map {
        out.serialize_entry(&eta.to_string(), &p.to_string())?;
    }
    out.end()
}

/// The exact law of `η` over all t-matchings of the space.
pub fn exact_eta_distribution(g: &SetFamily, space: &MatchingSpace) -> Result<EtaDistribution> {
    check_family(g, space)?;
    let mut counts = vec![0u64; space.t + 1];
    for_each_matching(space, |m| counts[m.hits(g)] += 1)?;
    let total: u64 = counts.iter().sum();
    let probabilities: BTreeMap<usize, Rational> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(eta, &c)| (eta, ratio::ratio(c, total)))
        .collect();
    let mean = probabilities
        .iter()
        .map(|(&eta, p)| p * Rational::from_integer(eta.into()))
        .sum();
    Ok(EtaDistribution {
        alpha: density(g, space),
        t: space.t,
        matchings: BigUint::from(total),
        probabilities,
        mean,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEntry {
    pub beta: f64,
    /// `2β√t`.
    pub deviation: f64,
    /// Trials with `|η - αt| >= 2β√t`.
    pub hits: u64,
    pub frequency: f64,
    /// `2e^{-β²/2}`.
    pub bound: f64,
    /// `frequency <= bound + 4·sqrt(b(1-b)/trials)` with `b = min(bound, 1)`.
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    #[serde(with = "crate::ratio")]
    pub alpha: Rational,
    pub t: usize,
    pub trials: u64,
    pub seed: u64,
    #[serde(with = "crate::ratio")]
    pub expected_mean: Rational,
    #[serde(with = "crate::ratio")]
    pub empirical_mean: Rational,
    pub sample_variance: f64,
    /// `η ↦ number of trials`.
    pub eta_histogram: BTreeMap<usize, u64>,
    pub beta_grid: Vec<TailEntry>,
}

impl ConcentrationReport {
    pub fn tails_within_bound(&self) -> bool {
        self.beta_grid.iter().all(|e| e.within_bound)
    }

    /// `|empirical - αt| <= z·σ/√trials`, using the sample standard deviation.
    pub fn mean_within(&self, z: f64) -> bool {
        let gap = (ratio::to_f64(&self.empirical_mean) - ratio::to_f64(&self.expected_mean)).abs();
        let sigma = (self.sample_variance / self.trials as f64).sqrt();
        gap <= z * sigma + FLOAT_SLACK
    }
}

/// Histogram of `η` over `trials` independent matchings; trial `i` uses seed `seed + i`.
pub fn sample_eta_histogram(g: &SetFamily, space: &MatchingSpace, trials: u64, seed: u64) -> Vec<u64> {
    let zero = || vec![0u64; space.t + 1];
    (0..trials)
        .into_par_iter()
        .fold(zero, |mut counts, i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            counts[sample_matching(space, &mut rng).hits(g)] += 1;
            counts
        })
        .reduce(zero, |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        })
}

pub fn monte_carlo_eta(
    g: &SetFamily,
    space: &MatchingSpace,
    trials: u64,
    seed: u64,
    beta_grid: &[f64],
) -> Result<ConcentrationReport> {
    check_family(g, space)?;
    if trials == 0 {
        return Err(Error::pre("at least one trial is needed"));
    }
    let counts = sample_eta_histogram(g, space, trials, seed);
    let alpha = density(g, space);
    let expected_mean = &alpha * Rational::from_integer(space.t.into());
    let sum: u64 = counts.iter().enumerate().map(|(eta, &c)| eta as u64 * c).sum();
    let empirical_mean = ratio::ratio(sum, trials);
    let mean_f = ratio::to_f64(&empirical_mean);
    let sample_variance = if trials > 1 {
        counts
            .iter()
            .enumerate()
            .map(|(eta, &c)| c as f64 * (eta as f64 - mean_f).powi(2))
            .sum::<f64>()
            / (trials - 1) as f64
    } else {
        0.0
    };
    let target = ratio::to_f64(&expected_mean);
    let sqrt_t = (space.t as f64).sqrt();
    let tails = beta_grid
        .iter()
        .map(|&beta| {
            let deviation = 2.0 * beta * sqrt_t;
            let hits: u64 = counts
                .iter()
                .enumerate()
                .filter(|(eta, _)| (*eta as f64 - target).abs() >= deviation * (1.0 - FLOAT_SLACK))
                .map(|(_, &c)| c)
                .sum();
            let frequency = hits as f64 / trials as f64;
            let bound = 2.0 * (-beta * beta / 2.0).exp();
            let b = bound.min(1.0);
            TailEntry {
                beta,
                deviation,
                hits,
                frequency,
                bound,
                within_bound: frequency <= bound + 4.0 * (b * (1.0 - b) / trials as f64).sqrt(),
            }
        })
        .collect();
    Ok(ConcentrationReport {
        alpha,
        t: space.t,
        trials,
        seed,
        expected_mean,
        empirical_mean,
        sample_variance,
        eta_histogram: counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(eta, &c)| (eta, c))
            .collect(),
        beta_grid: tails,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventProbe {
    pub trials: u64,
    pub gamma: f64,
    /// Trials where every `|F_i(j) ∩ M|` is within `γ` of `α_{i,j}·t`.
    pub e1: u64,
    /// Trials where some `F_i(s+1)` meets `M`.
    pub e2: u64,
    #[serde(with = "crate::ratio")]
    pub freq_e1: Rational,
    #[serde(with = "crate::ratio")]
    pub freq_e2: Rational,
    /// `α_{i,s+1}` per family.
    #[serde(with = "crate::ratio::vec")]
    pub alpha_last: Vec<Rational>,
}

/// Samples t-matchings of `X` and counts the events on the slices of the tuple.
/// `gamma` defaults to [`gamma_threshold`].
pub fn event_probe(tuple: &FamilyTuple, t: usize, trials: u64, seed: u64, gamma: Option<f64>) -> Result<EventProbe> {
    let params = tuple.params();
    let space = MatchingSpace::for_params(&params, t)?;
    let s = params.s;
    let gamma = gamma.unwrap_or_else(|| gamma_threshold(t as f64, s as f64));
    let slices: Vec<Slices> = tuple.families().iter().map(|f| Slices::new(f, s)).collect();
    let targets: Vec<Vec<f64>> = slices
        .iter()
        .map(|sl| sl.single.iter().map(|f| ratio::to_f64(&density(f, &space)) * t as f64).collect())
        .collect();
    let outcome = |m: &Matching| {
        let e1 = slices.iter().zip(&targets).all(|(sl, tg)| {
            sl.single
                .iter()
                .zip(tg)
                .all(|(f, &target)| (m.hits(f) as f64 - target).abs() <= gamma * (1.0 + FLOAT_SLACK))
        });
        let e2 = slices.iter().any(|sl| m.hits(sl.slice(s + 1)) > 0);
        (u64::from(e1), u64::from(e2))
    };
    let (e1, e2) = (0..trials)
        .into_par_iter()
        .map(|i| outcome(&sample_matching(&space, &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(i)))))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let freq = |c: u64| if trials == 0 { Rational::zero() } else { ratio::ratio(c, trials) };
    Ok(EventProbe {
        trials,
        gamma,
        e1,
        e2,
        freq_e1: freq(e1),
        freq_e2: freq(e2),
        alpha_last: slices.iter().map(|sl| density(sl.slice(s + 1), &space)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{enumerate_ksets, KSet, Params};
    use num_traits::One;
    use rand::Rng;

    fn space(w: usize, b: usize, t: usize) -> MatchingSpace {
        MatchingSpace::new(1, w, b, t).unwrap()
    }

    fn star6() -> SetFamily {
        SetFamily::new(6, 2, enumerate_ksets(6, 2).into_iter().filter(|a| a.contains(1))).unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert!((gamma_threshold(100.0, 3.0) - 104.8147).abs() < 1e-3);
        assert!((gamma_threshold(1.0, std::f64::consts::E) - 10.0).abs() < 1e-12);
        let mut last = 0.0;
        for t in 1..50 {
            for s in 2..50 {
                let g = gamma_threshold(t as f64, s as f64);
                assert!(g > gamma_threshold(t as f64, (s - 1).max(1) as f64) || s == 2);
                assert!(g > gamma_threshold((t - 1) as f64, s as f64) || t == 1);
                last = g;
            }
        }
        assert!(last > 0.0);
    }

    #[test]
    fn union_bound_holds_beyond_twenty() {
        for s in 21..=1000 {
            assert!(union_bound(s as f64).holds, "s={s}");
        }
        for s in [1e4, 1e5, 1e6, 2e6, 1e7] {
            assert!(union_bound(s).holds);
        }
    }

    #[test]
    fn exact_examples() {
        let sp = space(6, 2, 3);
        let full = SetFamily::full(6, 2).unwrap();
        let d = exact_eta_distribution(&full, &sp).unwrap();
        assert_eq!(d.probabilities.len(), 1);
        assert!(d.probabilities[&3].is_one());
        assert!(d.mean_is_alpha_t());

        let d = exact_eta_distribution(&star6(), &sp).unwrap();
        assert_eq!(d.alpha, ratio::ratio(1, 3));
        assert!(d.probabilities[&1].is_one());
        assert_eq!(d.mean, ratio::ratio(1, 1));
        assert_eq!(d.matchings, BigUint::from(15u32));

        let d = exact_eta_distribution(&SetFamily::empty(6, 2), &sp).unwrap();
        assert!(d.probabilities[&0].is_one());
    }

    #[test]
    fn exact_mean_is_alpha_t_on_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..60 {
            let block = rng.gen_range(1..=3);
            let t = rng.gen_range(1..=3);
            let w = block * t + rng.gen_range(0..=2);
            let sp = space(w, block, t);
            let g = SetFamily::new(w, block, enumerate_ksets(w, block).into_iter().filter(|_| rng.gen_bool(0.4))).unwrap();
            let d = exact_eta_distribution(&g, &sp).unwrap();
            assert!(d.mean_is_alpha_t(), "{g:?}");
            assert!(d.probabilities.values().sum::<Rational>().is_one());
        }
    }

    #[test]
    fn rejects_families_outside_the_interval() {
        let sp = MatchingSpace::new(3, 8, 2, 2).unwrap();
        let g = SetFamily::from_lists(8, 2, &[[1, 4]]).unwrap();
        assert!(exact_eta_distribution(&g, &sp).is_err());
        let g = SetFamily::from_lists(8, 3, &[[3, 4, 5]]).unwrap();
        assert!(monte_carlo_eta(&g, &sp, 10, 1, &[1.0]).is_err());
    }

    #[test]
    fn monte_carlo_examples() {
        let sp = space(6, 2, 3);
        let full = SetFamily::full(6, 2).unwrap();
        let r = monte_carlo_eta(&full, &sp, 1000, 3, &default_beta_grid(3)).unwrap();
        assert_eq!(r.eta_histogram.len(), 1);
        assert!(r.beta_grid.iter().all(|e| e.hits == 0));

        let r = monte_carlo_eta(&star6(), &sp, 10_000, 3, &default_beta_grid(3)).unwrap();
        assert_eq!(r.empirical_mean, ratio::ratio(1, 1));
        assert_eq!(r.eta_histogram.values().sum::<u64>(), 10_000);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let sp = space(12, 2, 5);
        let g = SetFamily::new(12, 2, enumerate_ksets(12, 2).into_iter().step_by(3)).unwrap();
        let a = monte_carlo_eta(&g, &sp, 2000, 99, &[1.0]).unwrap();
        let b = monte_carlo_eta(&g, &sp, 2000, 99, &[1.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_mean_and_tails_at_half_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let sp = space(20, 2, 10);
        let g = SetFamily::new(20, 2, enumerate_ksets(20, 2).into_iter().filter(|_| rng.gen_bool(0.5))).unwrap();
        let r = monte_carlo_eta(&g, &sp, 100_000, 7, &default_beta_grid(20)).unwrap();
        assert!(r.mean_within(3.0), "{:?} vs {:?}", r.empirical_mean, r.expected_mean);
        assert!(r.tails_within_bound());
    }

    #[test]
    fn events_examples() {
        let p = Params::new(10, 2, 2).unwrap();
        let none = SetFamily::new(10, 2, enumerate_ksets(10, 2).into_iter().filter(|a| !a.contains(3))).unwrap();
        let tuple = FamilyTuple::new(vec![none.clone(), none.clone(), none]).unwrap();
        let probe = event_probe(&tuple, p.t(), 200, 5, None).unwrap();
        assert_eq!(probe.e2, 0);
        assert!(probe.alpha_last.iter().all(Zero::is_zero));

        let full = SetFamily::full(10, 2).unwrap();
        let tuple = FamilyTuple::new(vec![full.clone(), full.clone(), full]).unwrap();
        let probe = event_probe(&tuple, p.t(), 200, 5, Some(0.0)).unwrap();
        assert_eq!((probe.e1, probe.e2), (200, 200));
    }

    #[test]
    fn e2_frequency_is_at_least_the_best_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let p = Params::new(14, 2, 2).unwrap();
        let families: Vec<SetFamily> = (0..3)
            .map(|_| {
                let keep: Vec<KSet> = enumerate_ksets(14, 2).into_iter().filter(|_| rng.gen_bool(0.3)).collect();
                SetFamily::new(14, 2, keep).unwrap()
            })
            .collect();
        let tuple = FamilyTuple::new(families).unwrap();
        let trials = 20_000;
        let probe = event_probe(&tuple, p.t(), trials, 6, None).unwrap();
        let best = probe.alpha_last.iter().max().unwrap();
        let freq = ratio::to_f64(&probe.freq_e2);
        let sigma = (freq * (1.0 - freq) / trials as f64).sqrt();
        assert!(freq >= ratio::to_f64(best) - 5.0 * sigma - 1e-3, "{freq} vs {best}");
    }
}
