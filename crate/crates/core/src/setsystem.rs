//! Finite set systems: traces, shatter functions, VC dimension and the
//! Sauer-Shelah bound.
//!
//! Element `i` of a [`Universe`] of size `n` is identified with the index
//! `i < n`. Member sets of a [`SetFamily`] are stored as bitsets and keep
//! their position in the list, duplicates included.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default cap on the universe size of any [`SetFamily`].
pub const DEFAULT_UNIVERSE_CAP: usize = 4096;

/// Largest universe on which [`vc_dimension`] runs exhaustively.
pub const VC_EXHAUSTIVE_CAP: usize = 24;

/// Largest number of (subset, member) pairs [`shatter_function`] will touch.
pub const SHATTER_EVAL_CAP: u128 = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Universe {
    size: usize,
}

impl Universe {
    pub fn new(size: usize) -> Result<Self> {
        Self::with_cap(size, DEFAULT_UNIVERSE_CAP)
    }

    pub fn with_cap(size: usize, cap: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::domain("universe must have at least one element"));
        }
        if size > cap {
            return Err(Error::resource(format!(
                "universe of size {size} exceeds the cap of {cap}"
            )));
        }
        Ok(Universe { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn empty_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.size)
    }

    /// Builds a bitset from element indices, rejecting out-of-range ones.
    pub fn set_from<I: IntoIterator<Item = usize>>(&self, elems: I) -> Result<FixedBitSet> {
        let mut s = self.empty_set();
        for e in elems {
            if e >= self.size {
                return Err(Error::domain(format!(
                    "element {e} outside universe of size {}",
                    self.size
                )));
            }
            s.insert(e);
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    universe: Universe,
    sets: Vec<FixedBitSet>,
}

impl SetFamily {
    pub fn new(universe: Universe, sets: Vec<FixedBitSet>) -> Result<Self> {
        for (i, s) in sets.iter().enumerate() {
            if s.len() != universe.size() {
                return Err(Error::domain(format!(
                    "set {i} has capacity {} but the universe has {} elements",
                    s.len(),
                    universe.size()
                )));
            }
        }
        Ok(SetFamily { universe, sets })
    }

    /// Convenience constructor from index lists.
    pub fn from_indices<S, I>(universe_size: usize, sets: S) -> Result<Self>
    where
        S: IntoIterator<Item = I>,
        I: IntoIterator<Item = usize>,
    {
        let universe = Universe::new(universe_size)?;
        let sets = sets
            .into_iter()
            .map(|s| universe.set_from(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(SetFamily { universe, sets })
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn sets(&self) -> &[FixedBitSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Member sets as sorted index lists.
    pub fn to_indices(&self) -> Vec<Vec<usize>> {
        self.sets.iter().map(|s| s.ones().collect()).collect()
    }

    /// Indices `j` whose set equals some earlier set `i < j`.
    pub fn duplicate_indices(&self) -> Vec<usize> {
        let mut seen = HashSet::new();
        self.sets
            .iter()
            .enumerate()
            .filter(|(_, s)| !seen.insert(*s))
            .map(|(i, _)| i)
            .collect()
    }

    fn membership_code(&self, set: usize, probe: &[usize]) -> u64 {
        let s = &self.sets[set];
        probe
            .iter()
            .enumerate()
            .fold(0u64, |acc, (bit, &e)| acc | ((s.contains(e) as u64) << bit))
    }

    fn trace_count(&self, probe: &[usize]) -> usize {
        debug_assert!(probe.len() < 64);
        let mut codes: Vec<u64> = (0..self.sets.len())
            .map(|i| self.membership_code(i, probe))
            .collect();
        codes.sort_unstable();
        codes.dedup();
        codes.len()
    }
}

/// The deduplicated family `{S ∩ probe}`. Traced sets keep their original
/// element indices and are listed in order of first occurrence.
pub fn trace(family: &SetFamily, probe: &[usize]) -> Result<SetFamily> {
    let probe_set = family.universe.set_from(probe.iter().copied())?;
    let mut seen = HashSet::new();
    let mut sets = Vec::new();
    for s in &family.sets {
        let mut t = s.clone();
        t.intersect_with(&probe_set);
        if seen.insert(t.clone()) {
            sets.push(t);
        }
    }
    Ok(SetFamily {
        universe: family.universe,
        sets,
    })
}

/// Whether `probe` is shattered: every subset of it is a trace.
pub fn is_shattered(family: &SetFamily, probe: &[usize]) -> bool {
    if probe.len() >= 64 || (1usize << probe.len()) > family.len() {
        return probe.is_empty() && !family.is_empty();
    }
    family.trace_count(probe) == 1 << probe.len()
}

/// Largest `d` such that some `d`-subset of the universe is shattered.
/// Exhaustive; refuses universes above [`VC_EXHAUSTIVE_CAP`].
pub fn vc_dimension(family: &SetFamily) -> Result<usize> {
    vc_dimension_with_cap(family, VC_EXHAUSTIVE_CAP)
}

pub fn vc_dimension_with_cap(family: &SetFamily, cap: usize) -> Result<usize> {
    if family.is_empty() {
        return Err(Error::domain(
            "VC dimension of an empty family is undefined",
        ));
    }
    let n = family.universe.size();
    if n > cap {
        return Err(Error::resource(format!(
            "universe of {n} elements exceeds the exhaustive VC cap of {cap}; \
             use vc_dimension_sampled for a lower bound"
        )));
    }
    // shattering is hereditary, so the first size with no shattered set ends the search
    let mut best = 0;
    for d in 1..=n {
        if d >= 64 || (1usize << d) > family.len() {
            break;
        }
        if (0..n).combinations(d).any(|a| is_shattered(family, &a)) {
            best = d;
        } else {
            break;
        }
    }
    Ok(best)
}

/// Lower bound on the VC dimension from `probes_per_size` random subsets of
/// each size, seeded. Never exceeds the true value.
pub fn vc_dimension_sampled(
    family: &SetFamily,
    probes_per_size: usize,
    seed: u64,
) -> Result<usize> {
    if family.is_empty() {
        return Err(Error::domain(
            "VC dimension of an empty family is undefined",
        ));
    }
    let n = family.universe.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for d in 1..=n.min(63) {
        if (1usize << d) > family.len() {
            break;
        }
        let hit = (0..probes_per_size).any(|_| {
            let mut a = sample(&mut rng, n, d).into_vec();
            a.sort_unstable();
            is_shattered(family, &a)
        });
        if !hit {
            break;
        }
        best = d;
    }
    Ok(best)
}

/// `max |trace(family, A)|` over all `k`-subsets `A` of the universe.
pub fn shatter_function(family: &SetFamily, k: usize) -> Result<usize> {
    let n = family.universe.size();
    if k > n {
        return Err(Error::domain(format!(
            "k = {k} exceeds the universe size {n}"
        )));
    }
    if k == 0 {
        return Ok(1);
    }
    if family.is_empty() {
        return Ok(0);
    }
    let work = binomial(n as u64, k as u64).saturating_mul(family.len() as u128);
    if work > SHATTER_EVAL_CAP || k >= 64 {
        return Err(Error::resource(format!(
            "shatter function at k = {k} over {n} elements needs {work} membership tests"
        )));
    }
    let ceiling = (1usize << k).min(family.len());
    let mut best = 0;
    for a in (0..n).combinations(k) {
        best = best.max(family.trace_count(&a));
        if best == ceiling {
            break;
        }
    }
    Ok(best)
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `Σ_{i ≤ d} C(k, i)`.
pub fn sauer_bound(k: usize, d: usize) -> u128 {
    (0..=d.min(k)).map(|i| binomial(k as u64, i as u64)).sum()
}

/// Checks `shatter_function(family, k) ≤ Σ_{i ≤ d} C(k, i)` for every
/// `k ≤ |universe|`, with `d` the exhaustive VC dimension.
pub fn sauer_check(family: &SetFamily) -> Result<bool> {
    let d = vc_dimension(family)?;
    for k in 0..=family.universe.size() {
        if shatter_function(family, k)? as u128 > sauer_bound(k, d) {
            return Ok(false);
        }
    }
    Ok(true)
}
