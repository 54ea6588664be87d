//! The extremal families `A` and `B`, the arithmetic-progression gap sets,
//! and the closed-form bound used to rule out families with large β.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, choose, enumerate_ksets, KSet, Params, SetFamily, MAX_GROUND};
use crate::error::{Error, Result};
use crate::ratio::{self, Rational};

/// Families larger than this are only ever handled through their sizes.
pub const MATERIALIZATION_CAP: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtremalKind {
    /// All k-sets meeting `[s]`.
    A,
    /// All k-sets inside `[(s + 1)k - 1]`.
    B,
}

impl std::str::FromStr for ExtremalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(ExtremalKind::A),
            "B" | "b" => Ok(ExtremalKind::B),
            other => Err(Error::shape(format!("unknown extremal kind `{other}`"))),
        }
    }
}

fn b_ground(params: &Params) -> usize {
    (params.s + 1) * params.k - 1
}

fn check_extremal(params: &Params, kind: ExtremalKind) -> Result<()> {
    if params.k > params.n {
        return Err(Error::shape(format!("k={} exceeds n={}", params.k, params.n)));
    }
    if kind == ExtremalKind::B && params.n < b_ground(params) {
        return Err(Error::shape(format!(
            "family B needs n >= (s+1)k-1 = {}, got n={}",
            b_ground(params),
            params.n
        )));
    }
    Ok(())
}

/// `|A| = C(n,k) - C(n-s,k)` or `|B| = C((s+1)k-1, k)`.
pub fn size_extremal(params: &Params, kind: ExtremalKind) -> Result<BigUint> {
    check_extremal(params, kind)?;
    let (n, k, s) = (params.n as u64, params.k as i64, params.s as u64);
    Ok(match kind {
        ExtremalKind::A => binomial(n, k) - binomial(n.saturating_sub(s), k),
        ExtremalKind::B => binomial(b_ground(params) as u64, k),
    })
}

/// `|A|` as the layered sum `Σ_{i=1}^{s} C(n-i, k-1)`.
pub fn size_a_layered(params: &Params) -> BigUint {
    (1..=params.s)
        .filter(|&i| i <= params.n)
        .map(|i| binomial((params.n - i) as u64, params.k as i64 - 1))
        .sum()
}

pub fn build_extremal(params: &Params, kind: ExtremalKind) -> Result<SetFamily> {
    build_extremal_capped(params, kind, MATERIALIZATION_CAP)
}

pub fn build_extremal_capped(params: &Params, kind: ExtremalKind, cap: u64) -> Result<SetFamily> {
    let size = size_extremal(params, kind)?;
    if size > BigUint::from(cap) {
        return Err(Error::Guard {
            what: "extremal family size",
            actual: size.to_string(),
            limit: cap.to_string(),
        });
    }
    if params.n > MAX_GROUND {
        return Err(Error::Guard {
            what: "ground size",
            actual: params.n.to_string(),
            limit: MAX_GROUND.to_string(),
        });
    }
    let (n, k, s) = (params.n, params.k, params.s);
    let members = match kind {
        ExtremalKind::A => {
            // Group by the smallest element m <= s: {m} ∪ T with T ⊆ [m+1, n].
            let mut out = Vec::with_capacity(size.to_usize().unwrap_or(0));
            for m in 1..=s.min(n) {
                for tail in enumerate_ksets(n - m, k - 1) {
                    out.push(KSet::from_mask(tail.mask() << m).with(m));
                }
            }
            out
        }
        ExtremalKind::B => enumerate_ksets(b_ground(params), k),
    };
    SetFamily::new(n, k, members)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapVariant {
    /// Step `s' = 3(s+1)/4`.
    Dense,
    /// Step `3(s+1)`.
    Sparse,
}

/// `s' = 3(s+1)/4`, refusing when it is not an integer.
pub fn dense_step(s: usize) -> Result<usize> {
    if !(3 * (s + 1)).is_multiple_of(4) {
        return Err(Error::pre(format!(
            "3(s+1)/4 = {}/4 is not an integer for s={s}; choose s with s+1 divisible by 4",
            3 * (s + 1)
        )));
    }
    Ok(3 * (s + 1) / 4)
}

/// `{step, 2·step, .., k·step}` for the chosen step.
pub fn build_gap_set(params: &Params, variant: GapVariant) -> Result<KSet> {
    let step = match variant {
        GapVariant::Dense => dense_step(params.s)?,
        GapVariant::Sparse => 3 * (params.s + 1),
    };
    let top = step * params.k;
    if top > params.n {
        return Err(Error::pre(format!(
            "gap set needs n >= {top} (k times step {step}), got n={}",
            params.n
        )));
    }
    KSet::from_elements((1..=params.k).map(|p| p * step))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma3Bound {
    pub s_prime: usize,
    /// Term `p` (index `p - 1`) is `C(s'p-1, p)·C(n-s'p+1, k-p)`.
    #[serde(with = "big_vec")]
    pub terms: Vec<BigUint>,
    #[serde(with = "crate::ratio::big")]
    pub total: BigUint,
    /// `term_p / term_{p-1}` for `p = 2..=k`.
    #[serde(with = "crate::ratio::vec")]
    pub ratios: Vec<Rational>,
    /// `e·k·s'/n`, the cap on every ratio.
    pub ratio_cap: f64,
    /// `|A|` for the same parameters.
    #[serde(with = "crate::ratio::big")]
    pub a_size: BigUint,
}

impl Lemma3Bound {
    pub fn ratios_within_cap(&self) -> bool {
        self.ratios.iter().all(|r| ratio::to_f64(r) <= self.ratio_cap * (1.0 + 1e-9))
    }

    /// `total <= (4/3)(s'-1)·C(n-s'+1, k-1) < s·C(n-s'+1, k-1) < |A|`, all exact.
    pub fn chain_holds(&self, params: &Params) -> bool {
        let head = binomial((params.n + 1 - self.s_prime) as u64, params.k as i64 - 1);
        let geometric = ratio::from_uint(&(BigUint::from(4u32 * (self.s_prime as u32 - 1)) * &head))
            / Rational::from_integer(3.into());
        let middle = ratio::from_uint(&(BigUint::from(params.s) * &head));
        ratio::from_uint(&self.total) <= geometric
            && geometric < middle
            && middle < ratio::from_uint(&self.a_size)
    }
}

mod big_vec {
    use num_bigint::BigUint;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(values: &[BigUint], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(values.iter().map(|v| v.to_string()))
    }
}

pub fn lemma3_bound(params: &Params) -> Result<Lemma3Bound> {
    let s_prime = dense_step(params.s)?;
    let (n, k) = (params.n, params.k);
    if n <= k * s_prime {
        return Err(Error::pre(format!("need n > k·s' = {}, got n={n}", k * s_prime)));
    }
    let terms: Vec<BigUint> = (1..=k)
        .map(|p| choose(s_prime * p - 1, p) * choose(n + 1 - s_prime * p, k - p))
        .collect();
    let ratios = terms
        .windows(2)
        .filter(|w| !w[0].is_zero())
        .map(|w| ratio::uint_ratio(&w[1], &w[0]))
        .collect();
    Ok(Lemma3Bound {
        s_prime,
        total: terms.iter().sum(),
        terms,
        ratios,
        ratio_cap: std::f64::consts::E * (k * s_prime) as f64 / n as f64,
        a_size: size_a_layered(params),
    })
}

fn binom_signed(a: i64, b: i64) -> BigUint {
    if a < 0 {
        BigUint::zero()
    } else {
        binomial(a as u64, b)
    }
}

/// `C(m-i-1, k-1) + C(m+i+1, k-1) >= C(m-i, k-1) + C(m+i, k-1)` with `m = n - s'`.
pub fn lemma3_convexity(n: usize, k: usize, s_prime: usize, i: usize) -> bool {
    let m = n as i64 - s_prime as i64;
    let (i, b) = (i as i64, k as i64 - 1);
    binom_signed(m - i - 1, b) + binom_signed(m + i + 1, b) >= binom_signed(m - i, b) + binom_signed(m + i, b)
}
