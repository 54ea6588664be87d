use serde::Serialize;

use crate::combinatorics::SetFamily;
use crate::error::{Error, Result};

/// The `(i, j)`-compression: every member containing `j` but not `i` has `j`
/// replaced by `i`, unless the replacement is already a member.
pub fn shift_ij(family: &SetFamily, i: usize, j: usize) -> Result<SetFamily> {
    if i == 0 || i >= j || j > family.n() {
        return Err(Error::pre(format!(
            "shift needs 1 <= i < j <= n, got i={i}, j={j}, n={}",
            family.n()
        )));
    }
    Ok(apply(family, i, j).0)
}

fn apply(family: &SetFamily, i: usize, j: usize) -> (SetFamily, usize) {
    let mut moved = 0;
    let members = family
        .iter()
        .map(|&a| {
            if a.contains(j) && !a.contains(i) {
                let b = a.without(j).with(i);
                if !family.contains(b) {
                    moved += 1;
                    return b;
                }
            }
            a
        })
        .collect();
    (SetFamily::from_unsorted(family.n(), family.k(), members), moved)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftReport {
    /// Passes over all pairs, including the final pass that changed nothing.
    pub rounds: usize,
    /// Individual member replacements.
    pub applied: usize,
    pub result: SetFamily,
}

/// Applies every `(i, j)` compression in lexicographic pair order until a
/// full pass changes nothing.
pub fn shift_closure(family: &SetFamily) -> ShiftReport {
    let n = family.n();
    let mut current = family.clone();
    let mut rounds = 0;
    let mut applied = 0;
    loop {
        rounds += 1;
        let mut changed = 0;
        for i in 1..=n {
            for j in i + 1..=n {
                let (next, moved) = apply(&current, i, j);
                changed += moved;
                current = next;
            }
        }
        applied += changed;
        if changed == 0 {
            break;
        }
    }
    ShiftReport {
        rounds,
        applied,
        result: current,
    }
}

/// Closed under replacing any element of a member by a smaller element not
/// already in it.
pub fn is_shifted(family: &SetFamily) -> bool {
    family.iter().all(|&a| {
        a.elements().all(|e| {
            (1..e)
                .filter(|&f| !a.contains(f))
                .all(|f| family.contains(a.without(e).with(f)))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_ksets;
    use crate::matchings::matching_number;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lists(family: &SetFamily) -> Vec<Vec<usize>> {
        family.iter().map(|m| m.to_vec()).collect()
    }

    fn fam(n: usize, k: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_lists(n, k, sets).unwrap()
    }

    #[test]
    fn shift_examples() {
        let f = shift_ij(&fam(3, 2, &[&[2, 3]]), 1, 2).unwrap();
        assert_eq!(lists(&f), vec![vec![1, 3]]);
        let blocked = fam(3, 2, &[&[1, 3], &[2, 3]]);
        assert_eq!(shift_ij(&blocked, 1, 2).unwrap(), blocked);
        let absent = fam(3, 2, &[&[1, 2]]);
        assert_eq!(shift_ij(&absent, 1, 3).unwrap(), absent);
        assert!(shift_ij(&absent, 2, 2).is_err());
        assert!(shift_ij(&absent, 3, 1).is_err());
        assert!(shift_ij(&absent, 0, 1).is_err());
    }

    #[test]
    fn closure_examples() {
        let report = shift_closure(&fam(5, 2, &[&[4, 5]]));
        assert_eq!(lists(&report.result), vec![vec![1, 2]]);
        assert!(report.applied >= 2);

        let shifted = fam(3, 2, &[&[1, 2], &[1, 3]]);
        let report = shift_closure(&shifted);
        assert_eq!(report.applied, 0);
        assert_eq!(report.rounds, 1);
        assert_eq!(report.result, shifted);

        let layer = SetFamily::full(4, 2).unwrap();
        assert_eq!(shift_closure(&layer).result, layer);
    }

    #[test]
    fn is_shifted_examples() {
        assert!(is_shifted(&fam(3, 2, &[&[1, 2], &[1, 3]])));
        assert!(!is_shifted(&fam(3, 2, &[&[2, 3]])));
        assert!(is_shifted(&SetFamily::empty(5, 2)));
    }

    fn random_family(rng: &mut ChaCha8Rng, n: usize, k: usize) -> SetFamily {
        let layer = enumerate_ksets(n, k);
        let p: f64 = rng.gen_range(0.05..0.9);
        SetFamily::new(n, k, layer.into_iter().filter(|_| rng.gen_bool(p))).unwrap()
    }

    #[test]
    fn closure_result_is_shifted_and_same_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(2..=7);
            let k = rng.gen_range(1..=n.min(4));
            let f = random_family(&mut rng, n, k);
            let report = shift_closure(&f);
            assert_eq!(report.result.len(), f.len());
            assert!(is_shifted(&report.result));
        }
    }

    #[test]
    fn single_shifts_on_random_samples_n7() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..400 {
            let k = rng.gen_range(1..=4);
            let f = random_family(&mut rng, 7, k);
            let nu = matching_number(&f);
            for i in 1..=7 {
                for j in i + 1..=7 {
                    let g = shift_ij(&f, i, j).unwrap();
                    assert_eq!(g.len(), f.len());
                    if k == 2 {
                        assert!(matching_number(&g) <= nu);
                    }
                }
            }
        }
    }
}
