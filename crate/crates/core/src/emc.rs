//! Exhaustive small-case checks of the matching conjecture and its rainbow
//! version over shifted families, which is enough because shifting preserves
//! sizes and does not increase ν or destroy cross-dependence.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{Params, SetFamily};
use crate::constructions::{size_extremal, ExtremalKind};
use crate::error::{Error, Result};
use crate::matchings::{matching_number, rainbow_of};
use crate::transforms::{enumerate_shifted_families, for_each_shifted_family};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmcMode {
    /// `max |F|` over shifted `F` with `ν(F) <= s`.
    Classic,
    /// `max min_i |F_i|` over cross-dependent shifted `(F_1, .., F_{s+1})`.
    Rainbow,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmcEntry {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    /// `max(|A|, |B|)`.
    #[serde(with = "crate::ratio::big")]
    pub expected: BigUint,
    /// `None` when the point was skipped.
    pub best: Option<usize>,
    pub holds: Option<bool>,
    /// Families (or tuples) examined.
    pub examined: u64,
    /// A family or tuple attaining `best`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<SetFamily>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmcReport {
    pub mode: EmcMode,
    pub entries: Vec<EmcEntry>,
    /// Every checked point attains exactly `max(|A|, |B|)`.
    pub all_hold: bool,
}

/// The grid points `(n, k, s)` with `(s+1)k <= n <= n_max`, `k <= k_max`,
/// `s <= s_max`, in lexicographic order of `(k, s, n)`.
pub fn emc_grid(n_max: usize, k_max: usize, s_max: usize) -> Vec<(usize, usize, usize)> {
    let mut grid = Vec::new();
    for k in 1..=k_max {
        for s in 1..=s_max {
            for n in (s + 1) * k..=n_max {
                grid.push((n, k, s));
            }
        }
    }
    grid
}

pub fn verify_emc(n_max: usize, k_max: usize, s_max: usize, mode: EmcMode) -> Result<EmcReport> {
    let grid = emc_grid(n_max, k_max, s_max);
    let entries = grid
        .par_iter()
        .map(|&(n, k, s)| emc_point(n, k, s, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(EmcReport {
        mode,
        all_hold: entries.iter().all(|e| e.holds != Some(false)),
        entries,
    })
}

pub fn emc_point(n: usize, k: usize, s: usize, mode: EmcMode) -> Result<EmcEntry> {
    let params = Params::new(n, k, s)?;
    let expected = size_extremal(&params, ExtremalKind::A)?.max(size_extremal(&params, ExtremalKind::B)?);
    let searched = match mode {
        EmcMode::Classic => classic(n, k, s),
        EmcMode::Rainbow => rainbow(n, k, s),
    };
    match searched {
        Ok((best, examined, witness)) => Ok(EmcEntry {
            n,
            k,
            s,
            holds: Some(BigUint::from(best) == expected),
            expected,
            best: Some(best),
            examined,
            witness: Some(witness),
            notice: None,
        }),
        Err(e @ Error::Guard { .. }) => Ok(EmcEntry {
            n,
            k,
            s,
            expected,
            best: None,
            holds: None,
            examined: 0,
            witness: None,
            notice: Some(format!("skipped: {e}")),
        }),
        Err(e) => Err(e),
    }
}

fn classic(n: usize, k: usize, s: usize) -> Result<(usize, u64, Vec<SetFamily>)> {
    let mut best: Option<SetFamily> = None;
    let mut examined = 0u64;
    for_each_shifted_family(n, k, |f| {
        examined += 1;
        if best.as_ref().is_none_or(|b| f.len() > b.len()) && matching_number(f) <= s {
            best = Some(f.clone());
        }
    })?;
    let best = best.expect("the empty family always qualifies");
    Ok((best.len(), examined, vec![best]))
}

/// Families sorted by size, largest first; tuples are taken as multisets
/// because cross-dependence does not depend on the order of the families.
/// A partial tuple whose smallest member cannot beat the best found so far
/// is abandoned.
fn rainbow(n: usize, k: usize, s: usize) -> Result<(usize, u64, Vec<SetFamily>)> {
    let mut families = enumerate_shifted_families(n, k)?;
    families.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.members().cmp(b.members())));
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut examined = 0u64;
    let mut chosen = Vec::with_capacity(s + 1);
    extend(&families, s + 1, 0, &mut chosen, &mut best, &mut examined);
    let (size, indices) = best.expect("the all-empty tuple is cross-dependent");
    Ok((size, examined, indices.into_iter().map(|i| families[i].clone()).collect()))
}

fn extend(
    families: &[SetFamily],
    width: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    best: &mut Option<(usize, Vec<usize>)>,
    examined: &mut u64,
) {
    if chosen.len() == width {
        *examined += 1;
        let tuple: Vec<SetFamily> = chosen.iter().map(|&i| families[i].clone()).collect();
        if !rainbow_of(&tuple).complete {
            let size = families[*chosen.last().unwrap()].len();
            if best.as_ref().is_none_or(|(b, _)| size > *b) {
                *best = Some((size, chosen.clone()));
            }
        }
        return;
    }
    for i in from..families.len() {
        if best.as_ref().is_some_and(|(b, _)| families[i].len() <= *b) {
            break;
        }
        chosen.push(i);
        extend(families, width, i, chosen, best, examined);
        chosen.pop();
    }
    // Nothing beat the record: the empty family still gives a valid tuple.
    if best.is_none() && chosen.is_empty() {
        *best = Some((0, vec![families.len() - 1; width]));
    }
}
