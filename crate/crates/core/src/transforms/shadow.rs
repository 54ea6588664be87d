use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{choose, lex_initial_family, KSet, Order, SetFamily};
use crate::error::{Error, Result};
use crate::ratio::{self, Rational};

/// `∂^b F`: all `(k - b)`-sets contained in some member.
pub fn lower_shadow(family: &SetFamily, b: usize) -> Result<SetFamily> {
    let k = family.k();
    if b > k {
        return Err(Error::pre(format!("shadow depth {b} exceeds k={k}")));
    }
    if b == 0 {
        return Ok(family.clone());
    }
    let mut out: Vec<KSet> = if b == 1 {
        family
            .iter()
            .flat_map(|&a| a.elements().map(move |e| a.without(e)))
            .collect()
    } else {
        family.iter().flat_map(|a| a.subsets_of_size(k - b)).collect()
    };
    out.sort_unstable();
    out.dedup();
    Ok(SetFamily::from_sorted(family.n(), k - b, out))
}

/// All `u`-subsets of `[n]` containing at least one member.
pub fn upper_shadow(family: &SetFamily, u: usize) -> Result<SetFamily> {
    let (n, k) = (family.n(), family.k());
    if u < k || u > n {
        return Err(Error::pre(format!("upper shadow size {u} outside [k, n] = [{k}, {n}]")));
    }
    let mut level: Vec<KSet> = family.members().to_vec();
    for _ in k..u {
        // A u-superset of a member contains a (u-1)-superset of it, so
        // growing one element at a time reaches every target set.
        let mut next: Vec<KSet> = level
            .iter()
            .flat_map(|&a| (1..=n).filter(move |&e| !a.contains(e)).map(move |e| a.with(e)))
            .collect();
        next.sort_unstable();
        next.dedup();
        level = next;
    }
    Ok(SetFamily::from_sorted(n, u, level))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Minimum `|∂F|` over `m`-member families, attained by the colex-initial family.
    Lower,
    /// Minimum `|∂̄^{k+1} F|`, attained by the lex-initial family.
    Upper,
}

/// Minimum shadow size over all `m`-member subfamilies of `([n] choose k)`.
pub fn kk_min_shadow_size(n: usize, k: usize, m: usize, direction: Direction) -> Result<usize> {
    if m == 0 {
        // Range-check only.
        lex_initial_family(n, k, 0, Order::Lex)?;
        return Ok(0);
    }
    match direction {
        Direction::Lower => {
            let initial = lex_initial_family(n, k, m, Order::Colex)?;
            Ok(lower_shadow(&initial, 1.min(k))?.len())
        }
        Direction::Upper => {
            let initial = lex_initial_family(n, k, m, Order::Lex)?;
            if k == n {
                return Ok(0);
            }
            Ok(upper_shadow(&initial, k + 1)?.len())
        }
    }
}

/// Both sides of `(|∂̄^u G| / C(m,u))^{m-k} >= (|G| / C(m,k))^{m-u}` for a
/// k-uniform `G` over a ground set of size `m = family.n()`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BtCheck {
    #[serde(with = "crate::ratio")]
    pub shadow_density: Rational,
    #[serde(with = "crate::ratio")]
    pub family_density: Rational,
    /// `|∂̄^u G|^{m-k} · C(m,k)^{m-u}`.
    #[serde(with = "crate::ratio::big")]
    pub lhs: BigUint,
    /// `|G|^{m-u} · C(m,u)^{m-k}`.
    #[serde(with = "crate::ratio::big")]
    pub rhs: BigUint,
    pub holds: bool,
}

pub fn bt_check(family: &SetFamily, u: usize) -> Result<BtCheck> {
    let (m, k) = (family.n(), family.k());
    let shadow = upper_shadow(family, u)?;
    let layer_k = choose(m, k);
    let layer_u = choose(m, u);
    let shadow_size = BigUint::from(shadow.len());
    let size = BigUint::from(family.len());
    let pow = |base: &BigUint, exp: usize| -> BigUint {
        if exp == 0 {
            BigUint::one()
        } else {
            base.pow(exp as u32)
        }
    };
    let lhs = pow(&shadow_size, m - k) * pow(&layer_k, m - u);
    // An empty family has density zero on both sides, even when `u = m`.
    let rhs = if size.is_zero() {
        BigUint::zero()
    } else {
        pow(&size, m - u) * pow(&layer_u, m - k)
    };
    Ok(BtCheck {
        shadow_density: ratio::uint_ratio(&shadow_size, &layer_u),
        family_density: if layer_k.is_zero() {
            Rational::zero()
        } else {
            ratio::uint_ratio(&size, &layer_k)
        },
        holds: lhs >= rhs,
        lhs,
        rhs,
    })
}
