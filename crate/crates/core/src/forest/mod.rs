//! Directed (laminar) families and the quasi-forest machinery built on them.
//!
//! * [`check_directed`] validates that members are pairwise nested or
//!   disjoint.
//! * [`QuasiForest`] orders `(parameter, ball)` pairs by reverse inclusion of
//!   their extents and quotients extensionally equal pairs.
//! * [`TypeTree`] is the tree of down-sets `ν(t)` plus `∅`, and
//!   [`ConvexOrder`] a total order on it under which every `χ(t)` is an
//!   interval.
//! * [`VirtualTypeSpace`] holds the generic type of every ball plus the
//!   all-negative root type.
//! * [`components`] splits a union of balls into its unique minimal cover.

mod components;
mod quasi;
mod type_tree;
mod virtual_space;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::setsystem::SetFamily;

pub use components::{components, Uncovered};
pub use quasi::{add_root, build_forest, NodeLabel, QuasiForest, QuasiTree};
pub use type_tree::{
    check_convexity, convex_order, ConvexOrder, SiblingOrders, SumDist, TypeNode, TypeTree,
};
pub use virtual_space::{linear_bound_check, virtual_type_space, LinearBound, VirtualTypeSpace};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("family is not directed: sets {first} and {second} cross")]
    NotDirected { first: usize, second: usize },
    #[error("relation is not reflexive at node {node}")]
    NotReflexive { node: usize },
    #[error("relation is not transitive: {a} ⊴ {b} ⊴ {c} but not {a} ⊴ {c}")]
    NotTransitive { a: usize, b: usize, c: usize },
    #[error("predecessors of node {node} are not a chain: {left} and {right} are incomparable")]
    CrossingDownSet {
        node: usize,
        left: usize,
        right: usize,
    },
    #[error("sibling order at node {parent}: {reason}")]
    SiblingOrder { parent: usize, reason: String },
    #[error("type-tree node belongs to a different tree")]
    ForeignNode,
    #[error("type-tree node {0} does not exist")]
    UnknownNode(usize),
    #[error("sequence is not strictly increasing at position {0}")]
    NotIncreasing(usize),
    #[error("order is not a permutation of the tree's nodes")]
    NotAPermutation,
    #[error("forest node sets have mismatched lengths")]
    LengthMismatch,
}

/// A [`SetFamily`] whose members are pairwise nested or disjoint. Only
/// obtainable through [`check_directed`] or a generator that guarantees it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedFamily {
    base: SetFamily,
}

impl DirectedFamily {
    /// For families that are directed by construction.
    pub(crate) fn trusted(base: SetFamily) -> Self {
        DirectedFamily { base }
    }

    pub fn base(&self) -> &SetFamily {
        &self.base
    }

    pub fn into_base(self) -> SetFamily {
        self.base
    }

    pub fn sets(&self) -> &[FixedBitSet] {
        self.base.sets()
    }
}

/// Lexicographically first pair `(i, j)`, `i < j`, of crossing members.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("sets {0} and {1} cross")]
pub struct Crossing(pub usize, pub usize);

/// `a ⊆ b`, compared block by block.
#[inline]
pub(crate) fn subset(a: &FixedBitSet, b: &FixedBitSet) -> bool {
    let b = b.as_slice();
    a.as_slice()
        .iter()
        .enumerate()
        .all(|(i, &x)| x & !b.get(i).copied().unwrap_or(0) == 0)
}

#[inline]
fn disjoint(a: &FixedBitSet, b: &FixedBitSet) -> bool {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .all(|(x, y)| x & y == 0)
}

/// Whether `a` and `b` are nested or disjoint.
pub fn nested_or_disjoint(a: &FixedBitSet, b: &FixedBitSet) -> bool {
    subset(a, b) || subset(b, a) || disjoint(a, b)
}

pub fn first_crossing(sets: &[FixedBitSet]) -> Option<Crossing> {
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if !nested_or_disjoint(&sets[i], &sets[j]) {
                return Some(Crossing(i, j));
            }
        }
    }
    None
}

pub fn check_directed(family: SetFamily) -> Result<DirectedFamily, Crossing> {
    match first_crossing(family.sets()) {
        Some(c) => Err(c),
        None => Ok(DirectedFamily { base: family }),
    }
}
