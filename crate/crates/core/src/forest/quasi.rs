use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{first_crossing, subset, ForestError};
use crate::error::{Error, Result};
use crate::formula::{Carrier, ParametrizedFormula};

/// Raw quasi-forest node `⟨c, δ⟩`: indices into the parameter list and the
/// formula list it was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeLabel {
    pub param: usize,
    pub formula: usize,
}

/// Preorder `s ⊴ t` on raw nodes, meaning the ball of `t` lies inside the
/// ball of `s`, together with its quotient by mutual `⊴`.
///
/// A class whose predecessors do not form a chain is *degenerate*. In a
/// directed family that only happens for empty balls, which sit above every
/// node. Degenerate classes are kept in the relation and in virtual type
/// spaces but left out of the [`TypeTree`](super::TypeTree).
#[derive(Clone, Debug)]
pub struct QuasiForest {
    labels: Vec<NodeLabel>,
    extents: Option<Vec<FixedBitSet>>,
    /// `below[t] = {s : s ⊴ t}`
    below: Vec<FixedBitSet>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    degenerate: Vec<bool>,
}

impl QuasiForest {
    /// Forest on explicit extents. Fails if the extents are not directed.
    pub fn from_extents(
        labels: Vec<NodeLabel>,
        extents: Vec<FixedBitSet>,
    ) -> Result<Self, ForestError> {
        if labels.len() != extents.len() {
            return Err(ForestError::LengthMismatch);
        }
        if let Some(c) = first_crossing(&extents) {
            return Err(ForestError::NotDirected {
                first: c.0,
                second: c.1,
            });
        }
        let mut forest = Self::from_relation(labels, |s, t| subset(&extents[t], &extents[s]))?;
        forest.extents = Some(extents);
        Ok(forest)
    }

    /// Forest on an abstract relation `le(s, t)` meaning `s ⊴ t`.
    ///
    /// Validates reflexivity, transitivity, and that the predecessors of
    /// every non-top node form a chain.
    #[allow(clippy::needless_range_loop)]
    pub fn from_relation<F>(labels: Vec<NodeLabel>, le: F) -> Result<Self, ForestError>
    where
        F: Fn(usize, usize) -> bool,
    {
        let n = labels.len();
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        let mut above = vec![FixedBitSet::with_capacity(n); n];
        for t in 0..n {
            for s in 0..n {
                if le(s, t) {
                    below[t].insert(s);
                    above[s].insert(t);
                }
            }
        }
        if let Some(t) = (0..n).find(|&t| !below[t].contains(t)) {
            return Err(ForestError::NotReflexive { node: t });
        }
        for c in 0..n {
            for b in below[c].ones() {
                if !subset(&below[b], &below[c]) {
                    let a = below[b].difference(&below[c]).next().unwrap();
                    return Err(ForestError::NotTransitive { a, b, c });
                }
            }
        }

        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for t in 0..n {
            if class_of[t] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let members: Vec<usize> = below[t].intersection(&above[t]).collect();
            for &m in &members {
                class_of[m] = id;
            }
            classes.push(members);
        }

        let comparable: Vec<FixedBitSet> = (0..n)
            .map(|s| {
                let mut c = below[s].clone();
                c.union_with(&above[s]);
                c
            })
            .collect();
        let mut degenerate = vec![false; classes.len()];
        for (id, members) in classes.iter().enumerate() {
            let t = members[0];
            let mut comparable_to_all = true;
            let mut witness = None;
            for s in below[t].ones() {
                if !subset(&below[t], &comparable[s]) {
                    comparable_to_all = false;
                    let other = below[t].difference(&comparable[s]).next().unwrap();
                    witness = Some((s, other));
                    break;
                }
            }
            if comparable_to_all {
                continue;
            }
            if below[t].count_ones(..) == n {
                degenerate[id] = true;
            } else {
                let (left, right) = witness.unwrap();
                return Err(ForestError::CrossingDownSet {
                    node: t,
                    left,
                    right,
                });
            }
        }

        Ok(QuasiForest {
            labels,
            extents: None,
            below,
            class_of,
            classes,
            degenerate,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn extents(&self) -> Option<&[FixedBitSet]> {
        self.extents.as_deref()
    }

    /// `s ⊴ t`.
    pub fn le(&self, s: usize, t: usize) -> bool {
        self.below[t].contains(s)
    }

    /// Raw down-set `ν(t) = {s : s ⊴ t}`.
    pub fn down_set(&self, t: usize) -> &FixedBitSet {
        &self.below[t]
    }

    pub fn class_of(&self, t: usize) -> usize {
        self.class_of[t]
    }

    /// Quotient classes, ordered by their smallest raw member.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn is_degenerate(&self, class: usize) -> bool {
        self.degenerate[class]
    }

    /// Same raw relation, node for node.
    pub fn same_relation(&self, other: &QuasiForest) -> bool {
        self.below == other.below
    }
}

/// `F(C, Δ)` over the carrier: raw nodes `C × Δ` in parameter-major order
/// (node `c * |Δ| + δ`), extents `δ(carrier; c)`.
pub fn build_forest(
    params: &[Vec<usize>],
    delta: &[ParametrizedFormula],
    carrier: &dyn Carrier,
) -> Result<QuasiForest> {
    for f in delta {
        if f.object_arity() != 1 || f.object_domain() != carrier.size() {
            return Err(Error::domain(format!(
                "ball formula {} must have one object variable over the carrier",
                f.name()
            )));
        }
        if let Some(c) = params
            .iter()
            .find(|c| c.len() != f.param_arity() || c.iter().any(|&v| v >= f.param_domain()))
        {
            return Err(Error::domain(format!(
                "parameter {c:?} is not valid for formula {}",
                f.name()
            )));
        }
    }
    let mut labels = Vec::with_capacity(params.len() * delta.len());
    let mut extents = Vec::with_capacity(labels.capacity());
    for (ci, c) in params.iter().enumerate() {
        for (fi, f) in delta.iter().enumerate() {
            labels.push(NodeLabel {
                param: ci,
                formula: fi,
            });
            extents.push(f.extent(c));
        }
    }
    Ok(QuasiForest::from_extents(labels, extents)?)
}

/// `T(C, Δ)`: a forest plus a root `0` with `0 ⊴ t` for all `t`, and
/// `t ⊴ 0` exactly when the ball of `t` is the whole carrier.
#[derive(Clone, Debug)]
pub struct QuasiTree {
    forest: QuasiForest,
    root_equivalent: Vec<usize>,
}

impl QuasiTree {
    pub fn forest(&self) -> &QuasiForest {
        &self.forest
    }

    /// Raw nodes extensionally equal to the root.
    pub fn root_equivalent(&self) -> &[usize] {
        &self.root_equivalent
    }

    /// `⊴` with the root encoded as `None`.
    pub fn le(&self, s: Option<usize>, t: Option<usize>) -> bool {
        match (s, t) {
            (None, _) => true,
            (Some(s), None) => self.root_equivalent.contains(&s),
            (Some(s), Some(t)) => self.forest.le(s, t),
        }
    }

    /// Number of quotient classes including the root's.
    pub fn class_count(&self) -> usize {
        let merged = self.root_equivalent.first().map(|_| 1).unwrap_or(0);
        self.forest.class_count() + 1 - merged
    }
}

pub fn add_root(forest: QuasiForest) -> QuasiTree {
    let root_equivalent = match forest.extents() {
        Some(ext) => ext
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_empty() && e.count_ones(..) == e.len())
            .map(|(i, _)| i)
            .collect(),
        None => Vec::new(),
    };
    QuasiTree {
        forest,
        root_equivalent,
    }
}
