use crate::combinatorics::{choose, enumerate_ksets, KSet, SetFamily};
use crate::error::{Error, Result};

/// Largest layer `C(n, k)` whose down-sets are enumerated.
pub const MAX_LAYER: usize = 40;

/// `a <= b` in the shifting (dominance) order: equal sizes and the i-th
/// smallest element of `a` is at most that of `b` for every i.
pub fn dominates(a: KSet, b: KSet) -> bool {
    a.len() == b.len() && a.elements().zip(b.elements()).all(|(x, y)| x <= y)
}

/// Sets obtained from `a` by moving one element down by one; these are the
/// lower covers of `a` in the dominance order.
pub fn lower_covers(a: KSet) -> impl Iterator<Item = KSet> {
    a.elements()
        .filter(move |&e| e >= 2 && !a.contains(e - 1))
        .map(move |e| a.without(e).with(e - 1))
}

/// Every shifted k-uniform family on `[n]`, i.e. every down-set of the
/// dominance order on `([n] choose k)`.
pub fn enumerate_shifted_families(n: usize, k: usize) -> Result<Vec<SetFamily>> {
    let mut out = Vec::new();
    for_each_shifted_family(n, k, |f| out.push(f.clone()))?;
    Ok(out)
}

/// Streaming form of [`enumerate_shifted_families`].
///
/// The layer is walked in colex order, which extends the dominance order,
/// so a set may be included exactly when all of its lower covers were.
pub fn for_each_shifted_family<F: FnMut(&SetFamily)>(n: usize, k: usize, mut visit: F) -> Result<()> {
    let size = choose(n, k);
    if size > MAX_LAYER.into() {
        return Err(Error::Guard {
            what: "layer size C(n, k) for down-set enumeration",
            actual: size.to_string(),
            limit: MAX_LAYER.to_string(),
        });
    }
    let layer = enumerate_ksets(n, k);
    let covers: Vec<Vec<usize>> = layer
        .iter()
        .map(|&a| {
            lower_covers(a)
                .map(|c| layer.binary_search(&c).expect("covers lie in the layer"))
                .collect()
        })
        .collect();

    let mut included = vec![false; layer.len()];
    let mut chosen = Vec::with_capacity(layer.len());
    walk(0, &layer, &covers, &mut included, &mut chosen, n, k, &mut visit);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn walk<F: FnMut(&SetFamily)>(
    idx: usize,
    layer: &[KSet],
    covers: &[Vec<usize>],
    included: &mut [bool],
    chosen: &mut Vec<KSet>,
    n: usize,
    k: usize,
    visit: &mut F,
) {
    if idx == layer.len() {
        visit(&SetFamily::from_sorted(n, k, chosen.clone()));
        return;
    }
    walk(idx + 1, layer, covers, included, chosen, n, k, visit);
    if covers[idx].iter().all(|&c| included[c]) {
        included[idx] = true;
        chosen.push(layer[idx]);
        walk(idx + 1, layer, covers, included, chosen, n, k, visit);
        chosen.pop();
        included[idx] = false;
    }
}
