//! Matching numbers, rainbow matchings, and random or exhaustive t-matchings
//! of (k-1)-sets inside an interval of the ground set.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::combinatorics::{choose, FamilyTuple, KSet, Params, SetFamily};
use crate::error::{Error, Result};

/// Largest number of pairwise disjoint members.
pub fn matching_number(family: &SetFamily) -> usize {
    if family.is_empty() {
        return 0;
    }
    if family.k() == 0 {
        return 1;
    }
    let support = family.support();
    let mut memo = HashMap::new();
    nu_within(family.members(), support.mask(), family.k(), &mut memo)
}

fn nu_within(members: &[KSet], avail: u128, k: usize, memo: &mut HashMap<u128, usize>) -> usize {
    if (avail.count_ones() as usize) < k {
        return 0;
    }
    if let Some(&v) = memo.get(&avail) {
        return v;
    }
    // Branch on the smallest element covered by a member inside `avail`.
    let mut pivot = None;
    for &m in members {
        if m.mask() & !avail == 0 {
            let low = m.mask().trailing_zeros();
            pivot = Some(pivot.map_or(low, |p: u32| p.min(low)));
        }
    }
    let best = match pivot {
        None => 0,
        Some(p) => {
            let bit = 1u128 << p;
            let mut best = nu_within(members, avail & !bit, k, memo);
            let cap = avail.count_ones() as usize / k;
            for &m in members {
                if best == cap {
                    break;
                }
                if m.mask() & bit != 0 && m.mask() & !avail == 0 {
                    best = best.max(1 + nu_within(members, avail & !m.mask(), k, memo));
                }
            }
            best
        }
    };
    memo.insert(avail, best);
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RainbowWitness {
    /// `assignment[i]` is the member chosen from family `i` (0-based).
    pub assignment: Vec<Option<KSet>>,
    pub complete: bool,
}

impl RainbowWitness {
    fn incomplete(len: usize) -> Self {
        RainbowWitness {
            assignment: vec![None; len],
            complete: false,
        }
    }

    /// Chosen members are pairwise disjoint and each belongs to its family.
    pub fn is_valid_for(&self, families: &[SetFamily]) -> bool {
        let mut used = 0u128;
        for (choice, family) in self.assignment.iter().zip(families) {
            if let Some(m) = choice {
                if m.mask() & used != 0 || !family.contains(*m) {
                    return false;
                }
                used |= m.mask();
            }
        }
        self.complete == self.assignment.iter().all(Option::is_some)
    }
}

/// A complete rainbow matching if one exists; the tuple is cross-dependent
/// exactly when the witness is incomplete.
pub fn find_rainbow(tuple: &FamilyTuple) -> RainbowWitness {
    rainbow_of(tuple.families())
}

pub(crate) fn rainbow_of(families: &[SetFamily]) -> RainbowWitness {
    let mut order: Vec<usize> = (0..families.len()).collect();
    order.sort_by_key(|&i| families[i].len());
    let mut chosen = vec![KSet::EMPTY; families.len()];
    let mut dead = HashSet::new();
    if search(families, &order, 0, 0, &mut chosen, &mut dead) {
        let mut assignment = vec![None; families.len()];
        for (depth, &i) in order.iter().enumerate() {
            assignment[i] = Some(chosen[depth]);
        }
        RainbowWitness {
            assignment,
            complete: true,
        }
    } else {
        RainbowWitness::incomplete(families.len())
    }
}

fn search(
    families: &[SetFamily],
    order: &[usize],
    depth: usize,
    used: u128,
    chosen: &mut [KSet],
    dead: &mut HashSet<(usize, u128)>,
) -> bool {
    if depth == order.len() {
        return true;
    }
    if dead.contains(&(depth, used)) {
        return false;
    }
    for &m in families[order[depth]].members() {
        if m.mask() & used == 0 {
            chosen[depth] = m;
            if search(families, order, depth + 1, used | m.mask(), chosen, dead) {
                return true;
            }
        }
    }
    dead.insert((depth, used));
    false
}

/// A set of pairwise disjoint blocks of equal size, kept in sorted order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Matching {
    blocks: Vec<KSet>,
}

impl Matching {
    pub fn new(mut blocks: Vec<KSet>) -> Result<Self> {
        let mut used = 0u128;
        for b in &blocks {
            if b.mask() & used != 0 {
                return Err(Error::shape(format!("block {b} overlaps an earlier block")));
            }
            used |= b.mask();
        }
        if blocks.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(Error::shape("blocks must all have the same size"));
        }
        blocks.sort();
        Ok(Matching { blocks })
    }

    pub fn blocks(&self) -> &[KSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_size(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.len())
    }

    /// `|G ∩ M|`.
    pub fn hits(&self, family: &SetFamily) -> usize {
        self.blocks.iter().filter(|&&b| family.contains(b)).count()
    }

    /// Indices of the blocks lying in `family`.
    pub fn hit_blocks(&self, family: &SetFamily) -> Vec<usize> {
        (0..self.blocks.len())
            .filter(|&i| family.contains(self.blocks[i]))
            .collect()
    }

    /// The blocks as a family of (k-1)-sets over `[n]`.
    pub fn to_family(&self, n: usize) -> Result<SetFamily> {
        SetFamily::new(n, self.block_size(), self.blocks.iter().copied())
    }

    pub fn from_family(family: &SetFamily) -> Result<Self> {
        Matching::new(family.members().to_vec())
    }
}

/// Rainbow matching inside `M`: family `i` may use block `b` when `b ∈ F_i`.
/// Solved as bipartite matching between family indices and blocks.
pub fn hall_rainbow_in_matching(families: &[SetFamily], matching: &Matching) -> RainbowWitness {
    let adjacency: Vec<Vec<usize>> = families.iter().map(|f| matching.hit_blocks(f)).collect();
    let mut owner: Vec<Option<usize>> = vec![None; matching.len()];
    let mut complete = true;
    for i in 0..families.len() {
        let mut seen = vec![false; matching.len()];
        if !augment(i, &adjacency, &mut owner, &mut seen) {
            complete = false;
        }
    }
    if !complete {
        return RainbowWitness::incomplete(families.len());
    }
    let mut assignment = vec![None; families.len()];
    for (block, who) in owner.iter().enumerate() {
        if let Some(i) = who {
            assignment[*i] = Some(matching.blocks[block]);
        }
    }
    RainbowWitness {
        assignment,
        complete: true,
    }
}

fn augment(i: usize, adjacency: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &b in &adjacency[i] {
        if seen[b] {
            continue;
        }
        seen[b] = true;
        if owner[b].is_none_or(|j| augment(j, adjacency, owner, seen)) {
            owner[b] = Some(i);
            return true;
        }
    }
    false
}

/// Cap on the number of matchings [`enumerate_matchings`] will produce.
pub const MAX_MATCHINGS: u64 = 10_000_000;

/// The t-matchings of `block`-sets inside the interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatchingSpace {
    pub lo: usize,
    pub hi: usize,
    pub block: usize,
    pub t: usize,
}

impl MatchingSpace {
    pub fn new(lo: usize, hi: usize, block: usize, t: usize) -> Result<Self> {
        if lo == 0 || hi > crate::combinatorics::MAX_GROUND || lo > hi + 1 {
            return Err(Error::shape(format!("invalid interval [{lo}, {hi}]")));
        }
        if block == 0 {
            return Err(Error::pre("blocks must be nonempty (k >= 2)"));
        }
        let space = MatchingSpace { lo, hi, block, t };
        if block * t > space.width() {
            return Err(Error::pre(format!(
                "a {t}-matching of {block}-sets needs {} elements, the interval has {}",
                block * t,
                space.width()
            )));
        }
        Ok(space)
    }

    /// Blocks of size `k - 1` inside `X = [s+2, n]`.
    pub fn for_params(params: &Params, t: usize) -> Result<Self> {
        MatchingSpace::new(params.s + 2, params.n, params.k - 1, t)
    }

    /// Same, with the default matching size `t = floor(n'/k)`.
    pub fn default_for(params: &Params) -> Result<Self> {
        MatchingSpace::for_params(params, params.t())
    }

    pub fn width(&self) -> usize {
        (self.hi + 1).saturating_sub(self.lo)
    }

    /// `C(width, block·t) · (block·t)! / (block!^t · t!)`.
    pub fn count(&self) -> BigUint {
        let mut total = choose(self.width(), self.block * self.t);
        let mut remaining = self.block * self.t;
        for _ in 0..self.t {
            total *= choose(remaining - 1, self.block - 1);
            remaining -= self.block;
        }
        total
    }

    fn elements(&self) -> Vec<usize> {
        (self.lo..=self.hi).collect()
    }
}

/// A uniform random unordered t-matching.
///
/// A uniform permutation of the interval is cut into `t` consecutive blocks
/// and the rest is discarded. Every matching arises from exactly
/// `(block!)^t · t! · (width - block·t)!` permutations, so the result is uniform.
pub fn sample_matching<R: Rng>(space: &MatchingSpace, rng: &mut R) -> Matching {
    let mut ground = space.elements();
    ground.shuffle(rng);
    let blocks = ground
        .chunks_exact(space.block)
        .take(space.t)
        .map(|c| KSet::from_elements(c.iter().copied()).expect("elements inside the ground set"))
        .collect();
    Matching::new(blocks).expect("chunks of a permutation are disjoint")
}

/// A uniform random ordered sequence of disjoint blocks with the given sizes
/// inside `[lo, hi]`.
pub fn sample_ordered_matching<R: Rng>(lo: usize, hi: usize, sizes: &[usize], rng: &mut R) -> Result<Vec<KSet>> {
    let mut ground: Vec<usize> = (lo..=hi).collect();
    let needed: usize = sizes.iter().sum();
    if needed > ground.len() {
        return Err(Error::pre(format!("blocks need {needed} elements, [{lo}, {hi}] has {}", ground.len())));
    }
    ground.shuffle(rng);
    let mut rest = &ground[..];
    Ok(sizes
        .iter()
        .map(|&size| {
            let (head, tail) = rest.split_at(size);
            rest = tail;
            KSet::from_elements(head.iter().copied()).expect("elements inside the ground set")
        })
        .collect())
}

/// Every unordered t-matching exactly once.
pub fn enumerate_matchings(space: &MatchingSpace) -> Result<Vec<Matching>> {
    let mut all = Vec::new();
    for_each_matching(space, |m| all.push(m.clone()))?;
    Ok(all)
}

/// Visits every unordered t-matching. The smallest remaining element is
/// either left uncovered, while the leftover budget allows, or becomes the
/// minimum of the next block.
pub fn for_each_matching<F: FnMut(&Matching)>(space: &MatchingSpace, mut visit: F) -> Result<()> {
    let count = space.count();
    if count > BigUint::from(MAX_MATCHINGS) {
        return Err(Error::Guard {
            what: "number of matchings",
            actual: count.to_string(),
            limit: MAX_MATCHINGS.to_string(),
        });
    }
    let avail = KSet::interval(space.lo, space.hi);
    let budget = space.width() - space.block * space.t;
    let mut blocks = Vec::with_capacity(space.t);
    walk(space, avail, budget, &mut blocks, &mut visit);
    Ok(())
}

fn walk<F: FnMut(&Matching)>(space: &MatchingSpace, avail: KSet, budget: usize, blocks: &mut Vec<KSet>, visit: &mut F) {
    if blocks.len() == space.t {
        visit(&Matching { blocks: sorted(blocks) });
        return;
    }
    let first = avail.min_element().expect("enough elements remain");
    let rest = avail.without(first);
    if budget > 0 {
        walk(space, rest, budget - 1, blocks, visit);
    }
    for others in rest.subsets_of_size(space.block - 1) {
        blocks.push(others.with(first));
        walk(space, rest.difference(others), budget, blocks, visit);
        blocks.pop();
    }
}

fn sorted(blocks: &[KSet]) -> Vec<KSet> {
    let mut v = blocks.to_vec();
    v.sort();
    v
}
