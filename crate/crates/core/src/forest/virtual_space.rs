use serde::Serialize;

use super::{build_forest, QuasiForest};
use crate::error::Result;
use crate::formula::{Carrier, ParametrizedFormula, SignVector};
use crate::types::{type_space, TypeSpaceOptions};

/// `V_Δ(C)`: the all-negative root type `ν_0` (entry 0) followed by one
/// generic type per quotient class, in class order.
///
/// The entry of class `t` has sign 1 at raw node `s` iff `s ⊴ t`. Entries of
/// degenerate classes are kept; like the generic types of packed balls they
/// need not be consistent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VirtualTypeSpace {
    #[serde(serialize_with = "crate::types::serialize_vectors")]
    entries: Vec<SignVector>,
}

impl VirtualTypeSpace {
    pub fn from_forest(forest: &QuasiForest) -> Self {
        let mut entries = Vec::with_capacity(forest.class_count() + 1);
        entries.push(SignVector::zeros(forest.len()));
        for members in forest.classes() {
            entries.push(SignVector::from_bits(forest.down_set(members[0]).clone()));
        }
        VirtualTypeSpace { entries }
    }

    pub fn entries(&self) -> &[SignVector] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, v: &SignVector) -> bool {
        self.entries.contains(v)
    }
}

pub fn virtual_type_space(
    params: &[Vec<usize>],
    delta: &[ParametrizedFormula],
    carrier: &dyn Carrier,
) -> Result<VirtualTypeSpace> {
    Ok(VirtualTypeSpace::from_forest(&build_forest(
        params, delta, carrier,
    )?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LinearBound {
    /// Realized `|S_Δ(C)|`.
    pub realized: usize,
    /// `|Δ|·|C| + 1`
    pub bound: usize,
    pub ok: bool,
}

/// Realized `|S_Δ(C)| ≤ |Δ|·|C| + 1`. Fails if `Δ` is not directed over
/// the carrier.
pub fn linear_bound_check(
    params: &[Vec<usize>],
    delta: &[ParametrizedFormula],
    carrier: &dyn Carrier,
) -> Result<LinearBound> {
    build_forest(params, delta, carrier)?;
    let realized = type_space(delta, params, carrier, 1, TypeSpaceOptions::default())?.count();
    let bound = delta.len() * params.len() + 1;
    Ok(LinearBound {
        realized,
        bound,
        ok: realized <= bound,
    })
}
