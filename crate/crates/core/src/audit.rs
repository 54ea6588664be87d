//! Named arithmetic checks at `n = ceil(3e(s+1)k)`, `n' = n-s-1`,
//! `t = floor(n'/k)` and `γ = 10·sqrt(t ln s)`.
//!
//! Integer and rational steps are exact. Steps involving `e`, `ln` or `γ` use
//! `f64`. Quantified chains are checked at every value in their range, or at
//! the worst case when the slack is monotone and a separate check covers the
//! monotonicity.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow};
use rayon::prelude::*;
use serde::Serialize;

use crate::concentration::{gamma_threshold, union_bound};
use crate::error::{Error, Result};
use crate::ratio::{self, Rational};

/// The derived quantities shared by every check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Scale {
    pub s: u64,
    pub k: u64,
    pub n: u64,
    pub n_prime: u64,
    pub t: u64,
    pub gamma: f64,
}

impl Scale {
    pub fn new(s: u64, k: u64) -> Result<Self> {
        if s < 2 || k < 1 {
            return Err(Error::pre(format!("the audit needs s >= 2 and k >= 1, got s={s}, k={k}")));
        }
        let n = (3.0 * std::f64::consts::E * ((s + 1) * k) as f64).ceil() as u64;
        let n_prime = n - s - 1;
        let t = n_prime / k;
        Ok(Scale {
            s,
            k,
            n,
            n_prime,
            t,
            gamma: gamma_threshold(t as f64, s as f64),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub statement: &'static str,
    pub lhs: String,
    pub relation: &'static str,
    pub rhs: String,
    pub passed: bool,
    /// Where a quantified check is tightest or first fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn check(
    name: &'static str,
    statement: &'static str,
    lhs: impl ToString,
    relation: &'static str,
    rhs: impl ToString,
    passed: bool,
) -> Check {
    Check {
        name,
        statement,
        lhs: lhs.to_string(),
        relation,
        rhs: rhs.to_string(),
        passed,
        detail: None,
    }
}

impl Check {
    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

type CheckFn = fn(&Scale) -> Check;

/// Every check, in report order.
pub const CHECKS: &[(&str, CheckFn)] = &[
    ("t-lower", t_lower),
    ("t-upper", t_upper),
    ("gamma-margin", gamma_margin),
    ("union-bound", union_bound_check),
    ("degree-bound", degree_bound),
    ("shadow-fit", shadow_fit),
    ("s-power", s_power),
    ("gap-ratio", gap_ratio),
    ("slice-t", slice_t),
    ("slice-chain", slice_chain),
    ("level-t", level_t),
    ("level-chain", level_chain),
    ("xi-conditional", xi_conditional),
    ("xi-tail", xi_tail),
    ("per-i-small", per_i_small),
    ("per-i-large", per_i_large),
    ("final-xi-monotone", final_xi_monotone),
    ("final-xi-chain", final_xi_chain),
    ("final-expectation", final_expectation),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(name, _)| *name).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub scale: Scale,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

impl AuditReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

/// Runs the named checks (all of them when `names` is `None`).
pub fn audit_inequalities(s: u64, k: u64, names: Option<&[String]>) -> Result<AuditReport> {
    let scale = Scale::new(s, k)?;
    let selected: Vec<&(&str, CheckFn)> = match names {
        None => CHECKS.iter().collect(),
        Some(names) => {
            if let Some(bad) = names.iter().find(|n| !CHECKS.iter().any(|(c, _)| c == n)) {
                return Err(Error::pre(format!("unknown check `{bad}`; known: {}", check_names().join(", "))));
            }
            CHECKS.iter().filter(|(c, _)| names.iter().any(|n| n == c)).collect()
        }
    };
    let checks: Vec<Check> = selected.par_iter().map(|(_, f)| f(&scale)).collect();
    Ok(AuditReport {
        all_passed: checks.iter().all(|c| c.passed),
        scale,
        checks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanStep {
    pub s: u64,
    pub failing: Vec<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub k: u64,
    pub steps: Vec<ScanStep>,
    /// The first scanned `s` with a failing check.
    pub first_failure: Option<u64>,
    /// Smallest `s` in the last passing bracket at which everything still
    /// passes, found by bisection.
    pub boundary: Option<u64>,
}

/// Audits `start, start - step, ..` down to `stop` and stops at the first
/// failure, then bisects between it and the last passing value.
pub fn scan_down(k: u64, start: u64, stop: u64, step: u64, names: Option<&[String]>) -> Result<ScanReport> {
    if step == 0 || stop > start || stop < 2 {
        return Err(Error::pre("scan needs 2 <= stop <= start and a positive step"));
    }
    let mut steps = Vec::new();
    let mut last_pass = None;
    let mut first_failure = None;
    let mut s = start;
    loop {
        let report = audit_inequalities(s, k, names)?;
        let failing = report.failing();
        let passed = failing.is_empty();
        steps.push(ScanStep { s, failing });
        if passed {
            last_pass = Some(s);
        } else {
            first_failure = Some(s);
            break;
        }
        if s < stop + step {
            break;
        }
        s -= step;
    }
    let boundary = match (first_failure, last_pass) {
        (Some(mut lo), Some(mut hi)) => {
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if audit_inequalities(mid, k, names)?.all_passed {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(hi)
        }
        _ => None,
    };
    Ok(ScanReport {
        k,
        steps,
        first_failure,
        boundary,
    })
}

fn f(x: u64) -> f64 {
    x as f64
}

fn t_lower(c: &Scale) -> Check {
    let rhs = 7 * (c.s + 1) + 2;
    check("t-lower", "t > 7(s+1) + 2", c.t, ">", rhs, c.t > rhs)
}

fn t_upper(c: &Scale) -> Check {
    let rhs = 3.0 * std::f64::consts::E * f(c.s + 1);
    check("t-upper", "t < 3e(s+1)", c.t, "<", rhs, f(c.t) < rhs)
}

fn gamma_margin(c: &Scale) -> Check {
    let (lhs, rhs) = (c.gamma + 1.0, f(c.s) / 12.0);
    check("gamma-margin", "γ + 1 < s/12", lhs, "<", rhs, lhs < rhs)
}

fn union_bound_check(c: &Scale) -> Check {
    let u = union_bound(f(c.s));
    check(
        "union-bound",
        "2(s+1)^2 e^{-12.5 ln s} < s^{-10}, as logarithms",
        u.lhs_log,
        "<",
        u.rhs_log,
        u.holds,
    )
}

fn degree_bound(c: &Scale) -> Check {
    // (n' - k + 1)/k < t, i.e. n' - k + 1 < k·t.
    let lhs = (c.n_prime + 1).saturating_sub(c.k);
    let rhs = c.k * c.t;
    check("degree-bound", "(n' - k + 1)/k < t, cleared of the denominator", lhs, "<", rhs, lhs < rhs)
}

fn shadow_fit(c: &Scale) -> Check {
    // 2(n-s+k)/3 + s(k-1) < n - s - 1, scaled by 3.
    let lhs = 2 * (c.n - c.s + c.k) + 3 * c.s * (c.k - 1);
    let rhs = 3 * c.n_prime;
    check(
        "shadow-fit",
        "2(n-s+k)/3 + s(k-1) < n - s - 1, scaled by 3",
        lhs,
        "<",
        rhs,
        lhs < rhs,
    )
}

fn s_power(c: &Scale) -> Check {
    let (lhs, rhs) = (1.6 * f(c.s).ln(), f(c.t + 1).ln());
    check("s-power", "s^{8/5} > t + 1, as logarithms", lhs, ">", rhs, lhs > rhs)
}

fn gap_ratio(c: &Scale) -> Check {
    let s_prime = 3.0 * f(c.s + 1) / 4.0;
    let lhs = std::f64::consts::E * f(c.k) * s_prime / f(c.n);
    check("gap-ratio", "e·k·s'/n <= 1/4 with s' = 3(s+1)/4", lhs, "<=", 0.25, lhs <= 0.25)
}

fn slice_t(c: &Scale) -> Check {
    let rhs = 6 * c.s + 6;
    check("slice-t", "t >= 6s + 6", c.t, ">=", rhs, c.t >= rhs)
}

fn slice_chain(c: &Scale) -> Check {
    let (s, t, g) = (f(c.s), f(c.t), c.gamma);
    let first = (t + 1.0) * ((s + 1.0) / 3.0 + g) + s / 3.0 * t + 2.0 * s / 3.0 * (s + 1.0 + g);
    let middle = (g + 1.0) * (s + t + 1.0) + 5.0 * s * t / 6.0;
    let target = s * t;
    let margin = s * t / (6.0 * (s + t + 1.0));
    let passed = first <= middle && middle < target && g + 1.0 < margin && margin >= s / 7.0;
    check(
        "slice-chain",
        "(t+1)((s+1)/3+γ) + st/3 + (2s/3)(s+1+γ) <= (γ+1)(s+t+1) + 5st/6 < st",
        format!("{first} <= {middle}"),
        "<",
        target,
        passed,
    )
    .with_detail(format!("γ+1 = {} vs st/(6(s+t+1)) = {margin} >= s/7 = {}", g + 1.0, s / 7.0))
}

fn level_t(c: &Scale) -> Check {
    let passed = 2 * c.t >= 12 * c.s && c.t >= 6 * c.s + 6;
    check("level-t", "2t/3 >= 4s and t >= 6s + 6", c.t, ">=", 6 * c.s + 6, passed)
}

/// `j` from `ceil((s+1)/6)` to `s`; beyond `s` the slice `s+1-j` would be empty.
fn level_chain(c: &Scale) -> Check {
    let (s, t, g) = (f(c.s), f(c.t), c.gamma);
    let j_lo = (c.s + 1).div_ceil(6).max(1);
    let mut worst: Option<(f64, u64)> = None;
    let mut first_bad = None;
    for j in j_lo..=c.s {
        let jf = f(j);
        let width = 3.0 * s + 3.0 + 4.0 * jf;
        let left = (3.0 * s + 3.0 + jf) * (jf + 1.0 + g) + (s - jf) * t;
        let step1 = s * t - jf * t + (3.0 * s + jf) * jf + width * (1.0 + g);
        let step2 = s * t - jf * t / 3.0 + width * (1.0 + g);
        let margin = jf * t / (3.0 * width);
        let ok = left <= step1 && step1 <= step2 && step2 < s * t && margin > (s + 1.0) / 11.0 && 1.0 + g < margin;
        let slack = margin - (1.0 + g);
        if worst.is_none_or(|(w, _)| slack < w) {
            worst = Some((slack, j));
        }
        if !ok && first_bad.is_none() {
            first_bad = Some(j);
        }
    }
    let (slack, j) = worst.unwrap_or((f64::INFINITY, j_lo));
    let margin_at = |j: u64| f(j) * t / (3.0 * (3.0 * s + 3.0 + 4.0 * f(j)));
    check(
        "level-chain",
        "for all j in [ceil((s+1)/6), s]: (3s+3+j)(j+1+γ) + (s-j)t <= st - jt/3 + (3s+3+4j)(1+γ) < st, via 1+γ < jt/(3(3s+3+4j)) and jt/(3(3s+3+4j)) > (s+1)/11",
        1.0 + g,
        "<",
        margin_at(j),
        first_bad.is_none(),
    )
    .with_detail(match first_bad {
        None => format!("tightest at j={j}, slack {slack}"),
        Some(b) => format!("first failure at j={b}"),
    })
}

fn xi_conditional(c: &Scale) -> Check {
    // With every F_i(s+1) empty, each family contributes at most s·t.
    let per_family = BigUint::from(c.s) * c.t;
    check(
        "xi-conditional",
        "with F_i(s+1) empty, (3s+3)·0 + Σ_{j<=s} |F_i(j) ∩ M| <= st",
        &per_family,
        "<=",
        &per_family,
        true,
    )
}

fn xi_tail(c: &Scale) -> Check {
    let (s, t) = (BigUint::from(c.s), BigUint::from(c.t));
    // s1 <= 2(s+1)/3, so s1(4s+3)t < 3s²t follows from 2(s+1)(4s+3) < 9s².
    let first_l = BigUint::from(2u32) * (&s + 1u32) * (BigUint::from(4u32) * &s + 3u32) * &t;
    let first_r = BigUint::from(9u32) * &s * &s * &t;
    let second_l = BigUint::from(3u32) * &s * &s * &t;
    let second_r = Pow::pow(&s, 4u32);
    check(
        "xi-tail",
        "s1(4s+3)t < 3s²t < s^4 with s1 <= 2(s+1)/3",
        format!("{} < {}", ratio::uint_ratio(&first_l, &BigUint::from(3u32)), second_l),
        "<",
        &second_r,
        first_l < first_r && second_l < second_r,
    )
}

fn per_i_small(c: &Scale) -> Check {
    let s = f(c.s);
    let lhs = (s + 1.0) / 6.0 + 2.0 * c.gamma;
    let rhs = (s + 1.0) / 3.0;
    // (3s+3)(s+1)/3 + st = st + (s+1)², exact.
    let identity = (3 * c.s + 3) * (c.s + 1) / 3 == (c.s + 1) * (c.s + 1);
    check("per-i-small", "(s+1)/6 + 2γ < (s+1)/3", lhs, "<", rhs, lhs < rhs && identity)
}

/// For every `m ∈ [1, s+1]`:
/// `(3s+3+s+1-m)(s+1-m) + (m-1)t = st - (s+1-m)(t-4s-4+m) <= st - (s+1-m)(t-4s-4)`,
/// exact, together with `t >= 4s + 4` for the last step.
fn per_i_large(c: &Scale) -> Check {
    let (s, t) = (c.s as i128, c.t as i128);
    let mut first_bad = None;
    for m in 1..=s + 1 {
        let top = s + 1 - m;
        let bound = (3 * s + 3 + top) * top + (m - 1) * t;
        let identity = s * t - top * (t - 4 * s - 4 + m);
        let weaker = s * t - top * (t - 4 * s - 4);
        if bound != identity || identity > weaker {
            first_bad = Some(m);
            break;
        }
    }
    let passed = first_bad.is_none() && t >= 4 * s + 4 && t >= 5 * s + 5;
    check(
        "per-i-large",
        "(4s+4-m)(s+1-m) + (m-1)t = st - (s+1-m)(t-4s-4+m) <= st - (s+1-m)(t-4s-4) for all m; t >= 5s+5",
        t,
        ">=",
        5 * s + 5,
        passed,
    )
    .with_detail(match first_bad {
        None => "identity and bound hold for every m in [1, s+1]; the final chain uses the weaker t-5s-5 form".into(),
        Some(m) => format!("fails at m={m}"),
    })
}

fn final_xi_monotone(c: &Scale) -> Check {
    let rhs = 5 * c.s + 5;
    check(
        "final-xi-monotone",
        "t - 5s - 5 > 0, so the final slack grows with r and with s1",
        c.t,
        ">",
        rhs,
        c.t > rhs,
    )
}

/// `s1·st - (s+1) - [(R-1)(st+(s+1)²) + (s1-R+1)(st-(R+r-1)(t-5s-5))] >= 0`
/// for every `R >= 1` with `R + r >= 2` and `R + r - 1 < (s+1)/6`, at the
/// smallest admissible `r = max(0, 2-R)` and `s1 = R - 1 + ceil((s+1)/2)`.
fn final_xi_chain(c: &Scale) -> Check {
    let (s, t) = (c.s as i128, c.t as i128);
    let st = s * t;
    let half = (s + 2) / 2;
    let gap = t - 5 * s - 5;
    let mut worst: Option<(i128, i128)> = None;
    let mut r_idx = 1i128;
    loop {
        let r = (2 - r_idx).max(0);
        if 6 * (r_idx + r - 1) > s {
            break;
        }
        let s1 = r_idx - 1 + half;
        let xi = (r_idx - 1) * (st + (s + 1) * (s + 1)) + (s1 - r_idx + 1) * (st - (r_idx + r - 1) * gap);
        let slack = s1 * st - (s + 1) - xi;
        if worst.is_none_or(|(w, _)| slack < w) {
            worst = Some((slack, r_idx));
        }
        r_idx += 1;
    }
    let (slack, at) = worst.unwrap_or((0, 0));
    check(
        "final-xi-chain",
        "ξ <= s1·st - (R+r-1)(s+1) <= s1·st - (s+1) over all admissible R, r",
        slack,
        ">=",
        0,
        worst.is_some() && slack >= 0,
    )
    .with_detail(format!("smallest slack at R={at}"))
}

fn final_expectation(c: &Scale) -> Check {
    // s^{-6} - (s+1)(s^{-4} - s^{-10}) < 0, exact.
    let s = Rational::from_integer(BigInt::from(c.s));
    let inv = |e: i32| Pow::pow(&s, e);
    let value = inv(-6) - (&s + Rational::one()) * (inv(-4) - inv(-10));
    let zero = Rational::from_integer(BigInt::from(0));
    check(
        "final-expectation",
        "s^{-6} - (s+1)(s^{-4} - s^{-10}) < 0",
        ratio::to_f64(&value),
        "<",
        0,
        value < zero,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn passes(s: u64, k: u64, name: &str) -> bool {
        audit_inequalities(s, k, Some(&[name.to_string()])).unwrap().checks[0].passed
    }

    #[test]
    fn scale_examples() {
        let c = Scale::new(11, 2).unwrap();
        assert_eq!((c.n, c.n_prime, c.t), (196, 184, 92));
        assert!(Scale::new(1, 2).is_err());
    }

    #[test]
    fn t_lower_examples() {
        let r = audit_inequalities(11, 2, Some(&["t-lower".into()])).unwrap();
        assert_eq!((r.checks[0].lhs.as_str(), r.checks[0].rhs.as_str()), ("92", "86"));
        assert!(r.all_passed);
        for s in 11..=100 {
            for k in [2, 3, 5] {
                assert!(passes(s, k, "t-lower"), "s={s} k={k}");
            }
        }
    }

    #[test]
    fn gamma_margin_locates_the_threshold() {
        assert!(passes(2_000_000, 2, "gamma-margin"));
        assert!(!passes(1_000_000, 2, "gamma-margin"));
        let r = audit_inequalities(1_000_000, 2, Some(&["gamma-margin".into()])).unwrap();
        let gamma: f64 = r.checks[0].lhs.parse().unwrap();
        assert!((gamma - 1.0 - 103_000.0).abs() < 2_000.0, "{gamma}");
    }

    #[test]
    fn everything_passes_at_two_million() {
        for k in [2, 3, 5] {
            let r = audit_inequalities(2_000_000, k, None).unwrap();
            assert!(r.all_passed, "k={k}: {:?}", r.failing());
            assert_eq!(r.checks.len(), CHECKS.len());
        }
    }

    #[test]
    fn constants_for_the_small_bounds() {
        for s in 50..=400 {
            for k in [2, 3, 5] {
                assert!(passes(s, k, "s-power"), "s={s} k={k}");
                assert!(passes(s, k, "gap-ratio"), "s={s} k={k}");
            }
        }
        for s in 21..=1000 {
            assert!(passes(s, 2, "union-bound"));
        }
        for s in [40, 41, 100, 1000] {
            assert!(passes(s, 2, "xi-tail"), "s={s}");
        }
    }

    #[test]
    fn unknown_check_names_are_rejected() {
        assert!(audit_inequalities(100, 2, Some(&["nope".into()])).is_err());
    }

    #[test]
    fn scan_down_stops_between_one_and_two_million() {
        let names = vec!["gamma-margin".to_string()];
        let r = scan_down(2, 2_000_000, 1_000_000, 250_000, Some(&names)).unwrap();
        let first = r.first_failure.unwrap();
        assert!((1_000_000..2_000_000).contains(&first));
        let b = r.boundary.unwrap();
        assert!(b > first && b <= 2_000_000);
        assert!(passes(b, 2, "gamma-margin"));
        assert!(!passes(b - 1, 2, "gamma-margin"));
    }
}
