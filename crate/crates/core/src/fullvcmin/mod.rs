//! The two-variable counting pipeline for formulas `δ(x0; x1, y)`:
//! inclusion formulas `ψ_{δ,δ'}(x1; y, y')`, forests and virtual type spaces
//! read off a Ψ-type, and the incremental count of virtual types along a
//! convex order of a second directed family `Δ1`.

mod certificate;
mod incremental;

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::forest::{
    first_crossing, subset, ForestError, NodeLabel, QuasiForest, VirtualTypeSpace,
};
use crate::formula::{Carrier, ParametrizedFormula, SignVector};

pub use certificate::{dlo_instance, BoolExpr, DecompositionCertificate};
pub use incremental::{incremental_count_check, IncrementalReport, IncrementalStep};

/// A finite directed family `Δ0` of formulas `δ(x0; x1, y)` over a carrier
/// `0..carrier_size`; all three variables range over the carrier.
#[derive(Clone, Debug)]
pub struct PsiFamily {
    delta0: Vec<ParametrizedFormula>,
    carrier_size: usize,
}

impl PsiFamily {
    pub fn new(delta0: Vec<ParametrizedFormula>, carrier_size: usize) -> Result<Self> {
        if delta0.is_empty() {
            return Err(Error::domain("Δ0 must contain at least one formula"));
        }
        for f in &delta0 {
            if f.object_arity() != 1
                || f.param_arity() != 2
                || f.object_domain() != carrier_size
                || f.param_domain() != carrier_size
            {
                return Err(Error::domain(format!(
                    "formula {} must have the shape δ(x0; x1, y) over a carrier of size {carrier_size}",
                    f.name()
                )));
            }
        }
        Ok(PsiFamily {
            delta0,
            carrier_size,
        })
    }

    pub fn delta0(&self) -> &[ParametrizedFormula] {
        &self.delta0
    }

    /// Extent of `δ(·; a1, b)`.
    pub fn extent(&self, delta: usize, a1: usize, b: usize) -> FixedBitSet {
        self.delta0[delta].extent(&[a1, b])
    }

    fn check_points(&self, points: &[usize]) -> Result<()> {
        match points.iter().find(|&&p| p >= self.carrier_size) {
            Some(p) => Err(Error::domain(format!(
                "point {p} lies outside the carrier of size {}",
                self.carrier_size
            ))),
            None => Ok(()),
        }
    }
}

impl Carrier for PsiFamily {
    fn size(&self) -> usize {
        self.carrier_size
    }

    fn id(&self) -> String {
        format!("psi-family-n{}", self.carrier_size)
    }
}

/// `ψ_{δ,δ'}(a1; b, b')`: every carrier `x0` with `δ'(x0; a1, b')` satisfies
/// `δ(x0; a1, b)`. Computed by a full scan of the carrier.
pub fn eval_psi(
    family: &PsiFamily,
    a1: usize,
    b: usize,
    b_prime: usize,
    delta: usize,
    delta_prime: usize,
) -> bool {
    let (d, dp) = (&family.delta0[delta], &family.delta0[delta_prime]);
    (0..family.carrier_size).all(|x0| !dp.eval(&[x0], &[a1, b_prime]) || d.eval(&[x0], &[a1, b]))
}

/// Sign vector of `a1` over `(B × B) × Ψ`.
///
/// Bit `((i·|B| + j)·|Δ0| + δ)·|Δ0| + δ'` holds `ψ_{δ,δ'}(a1; B[i], B[j])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PsiType {
    bits: SignVector,
    b_len: usize,
    delta0_len: usize,
}

impl PsiType {
    /// Reads a type from raw bits in the layout above.
    pub fn from_bits(bits: SignVector, b_len: usize, delta0_len: usize) -> Result<Self> {
        if bits.len() != b_len * b_len * delta0_len * delta0_len {
            return Err(Error::domain("Ψ-type length does not match |B|²·|Δ0|²"));
        }
        Ok(PsiType {
            bits,
            b_len,
            delta0_len,
        })
    }

    pub fn index(&self, i: usize, j: usize, delta: usize, delta_prime: usize) -> usize {
        ((i * self.b_len + j) * self.delta0_len + delta) * self.delta0_len + delta_prime
    }

    pub fn get(&self, i: usize, j: usize, delta: usize, delta_prime: usize) -> bool {
        self.bits.get(self.index(i, j, delta, delta_prime))
    }

    pub fn bits(&self) -> &SignVector {
        &self.bits
    }

    pub fn b_len(&self) -> usize {
        self.b_len
    }

    pub fn delta0_len(&self) -> usize {
        self.delta0_len
    }

    /// Number of `ψ` instances on which two types disagree.
    pub fn changes(&self, other: &PsiType) -> usize {
        self.bits
            .bits()
            .symmetric_difference(other.bits.bits())
            .count()
    }
}

/// Ψ-type of `a1` over `B`, read off the extents `δ(·; a1, b)` by subset
/// tests; agrees with [`eval_psi`] bit for bit.
pub fn psi_type(family: &PsiFamily, a1: usize, b_set: &[usize]) -> PsiType {
    psi_type_from_extents(
        &extents_over(family, a1, b_set),
        b_set.len(),
        family.delta0.len(),
    )
}

/// Extents `δ(·; a1, b)` in node order `b·|Δ0| + δ`.
fn extents_over(family: &PsiFamily, a1: usize, b_set: &[usize]) -> Vec<FixedBitSet> {
    let nd = family.delta0.len();
    b_set
        .iter()
        .flat_map(|&b| (0..nd).map(move |d| family.extent(d, a1, b)))
        .collect()
}

fn psi_type_from_extents(extents: &[FixedBitSet], nb: usize, nd: usize) -> PsiType {
    let mut bits = SignVector::zeros(nb * nb * nd * nd);
    for i in 0..nb {
        for j in 0..nb {
            for d in 0..nd {
                for dp in 0..nd {
                    if subset(&extents[j * nd + dp], &extents[i * nd + d]) {
                        bits.set(((i * nb + j) * nd + d) * nd + dp, true);
                    }
                }
            }
        }
    }
    PsiType {
        bits,
        b_len: nb,
        delta0_len: nd,
    }
}

fn param_labels(b_len: usize, delta0_len: usize) -> Vec<NodeLabel> {
    (0..b_len)
        .flat_map(|param| (0..delta0_len).map(move |formula| NodeLabel { param, formula }))
        .collect()
}

/// `F(p, B, Δ0)`: nodes `⟨b, δ⟩` (index `b·|Δ0| + δ`) with
/// `⟨b, δ⟩ ⊴_p ⟨b', δ'⟩` iff `p` holds `ψ_{δ,δ'}` at `(b, b')`.
///
/// Fails with the violated axiom when `p` does not describe a quasi-forest.
pub fn forest_from_type(p: &PsiType) -> Result<QuasiForest, ForestError> {
    let nd = p.delta0_len;
    QuasiForest::from_relation(param_labels(p.b_len, nd), |s, t| {
        p.get(s / nd, t / nd, s % nd, t % nd)
    })
}

/// `F(a1⌢B, Δ0)` built from the extents `δ(·; a1, b)`, labelled like
/// [`forest_from_type`].
pub fn forest_over(family: &PsiFamily, a1: usize, b_set: &[usize]) -> Result<QuasiForest> {
    family.check_points(b_set)?;
    family.check_points(&[a1])?;
    let extents = extents_over(family, a1, b_set);
    Ok(QuasiForest::from_extents(
        param_labels(b_set.len(), family.delta0.len()),
        extents,
    )?)
}

/// `V_{Δ0}(p, B)`: `ν_0` plus the down-set `ν_{p,b,δ}` of every class of
/// `⊴_p`, as sign vectors over `B × Δ0`.
pub fn p_virtual_space(p: &PsiType) -> Result<VirtualTypeSpace, ForestError> {
    Ok(VirtualTypeSpace::from_forest(&forest_from_type(p)?))
}

/// Realized `S_{Δ0}(a1⌢B)`: distinct sign vectors `(b, δ) ↦ δ(x0; a1, b)`
/// over carrier points `x0`, sorted.
pub fn realized_delta0_types(family: &PsiFamily, a1: usize, b_set: &[usize]) -> Vec<SignVector> {
    realized_from_extents(&extents_over(family, a1, b_set), family.carrier_size)
}

fn realized_from_extents(extents: &[FixedBitSet], carrier_size: usize) -> Vec<SignVector> {
    let mut out: Vec<SignVector> = (0..carrier_size)
        .map(|x0| {
            let mut v = SignVector::zeros(extents.len());
            for (k, e) in extents.iter().enumerate() {
                if e.contains(x0) {
                    v.set(k, true);
                }
            }
            v
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Outcome of checking that the Ψ-type of `a1` determines both the forest
/// over `a1⌢B` and the realized `Δ0`-types over it.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct DeterminationReport {
    pub b_size: usize,
    pub carrier_size: usize,
    pub psi_type_count: usize,
    /// Points whose forest differs from the one read off their Ψ-type.
    pub forest_failures: usize,
    /// Points with a realized `Δ0`-type missing from their virtual space.
    pub type_failures: usize,
}

impl DeterminationReport {
    pub fn ok(&self) -> bool {
        self.forest_failures == 0 && self.type_failures == 0
    }
}

/// Exhaustive determination check over every carrier point `a1`.
///
/// The extents over each `a1⌢B` must be directed, the forest built from
/// them must coincide with [`forest_from_type`] of the Ψ-type of `a1`, and
/// each realized `Δ0`-type over `a1⌢B` must be an entry of
/// [`p_virtual_space`]. Inclusion among the extents is exactly what the
/// Ψ-type records, so the forest comparison runs once per distinct type, on
/// its first point, against the inclusion relation of its extents.
pub fn determination_check(family: &PsiFamily, b_set: &[usize]) -> Result<DeterminationReport> {
    family.check_points(b_set)?;
    let nd = family.delta0.len();
    let mut by_type: HashMap<PsiType, (bool, Option<VirtualTypeSpace>)> = HashMap::new();
    let mut forest_failures = 0;
    let mut type_failures = 0;
    let mut row = SignVector::zeros(b_set.len() * nd);
    for a1 in 0..family.carrier_size {
        let extents = extents_over(family, a1, b_set);
        let psi = psi_type_from_extents(&extents, b_set.len(), nd);
        let directed = first_crossing(&extents).is_none();
        let (forest_ok, virtual_space) =
            by_type
                .entry(psi)
                .or_insert_with_key(|p| match forest_from_type(p) {
                    Ok(f) => {
                        let k = extents.len();
                        let same = (0..k).all(|s| {
                            (0..k).all(|t| f.le(s, t) == subset(&extents[t], &extents[s]))
                        });
                        (same, Some(VirtualTypeSpace::from_forest(&f)))
                    }
                    Err(_) => (false, None),
                });
        if !directed || !*forest_ok {
            forest_failures += 1;
        }
        let types_ok = match virtual_space {
            Some(v) => (0..family.carrier_size).all(|x0| {
                row.clear();
                for (k, e) in extents.iter().enumerate() {
                    if e.contains(x0) {
                        row.set(k, true);
                    }
                }
                v.contains(&row)
            }),
            None => false,
        };
        if !types_ok {
            type_failures += 1;
        }
    }
    Ok(DeterminationReport {
        b_size: b_set.len(),
        carrier_size: family.carrier_size,
        psi_type_count: by_type.len(),
        forest_failures,
        type_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dlo(n: usize) -> PsiFamily {
        dlo_instance(n).0
    }

    // independent oracle: the DLO formulas are initial segments, so
    // inclusion reduces to comparing cut points
    fn cut(d: usize, a1: usize, b: usize) -> usize {
        if d == 0 {
            a1
        } else {
            b
        }
    }

    #[test]
    fn reflexive_and_vacuous() {
        let f = dlo(8);
        for a1 in 0..8 {
            for b in 0..8 {
                for d in 0..2 {
                    assert!(eval_psi(&f, a1, b, b, d, d));
                }
                // δ'(·; 0, b') = x0 < 0 is empty
                assert!(eval_psi(&f, 0, b, 5, 1, 0));
            }
        }
    }

    #[test]
    fn dlo_inclusion_is_cut_comparison() {
        let f = dlo(9);
        for a1 in 0..9 {
            for b in 0..9 {
                for bp in 0..9 {
                    for d in 0..2 {
                        for dp in 0..2 {
                            assert_eq!(
                                eval_psi(&f, a1, b, bp, d, dp),
                                cut(dp, a1, bp) <= cut(d, a1, b)
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_point_single_formula() {
        let lt = ParametrizedFormula::new("x0<y", (1, 5), (2, 5), |x, p| x[0] < p[1]);
        let f = PsiFamily::new(vec![lt], 5).unwrap();
        let p = psi_type(&f, 2, &[3]);
        assert_eq!(p.bits().len(), 1);
        assert!(p.get(0, 0, 0, 0));
    }

    #[test]
    fn empty_instances_give_all_true() {
        let never = ParametrizedFormula::new("never", (1, 6), (2, 6), |_, _| false);
        let f = PsiFamily::new(vec![never.clone(), never], 6).unwrap();
        let p = psi_type(&f, 1, &[0, 2, 4]);
        assert_eq!(p.bits().count_ones(), p.bits().len());
    }

    #[test]
    fn equal_points_in_an_interval_share_types() {
        let f = dlo(12);
        let b = [3, 8];
        // 4..8 lie strictly between the two parameters
        let types: Vec<PsiType> = (4..8).map(|a1| psi_type(&f, a1, &b)).collect();
        assert!(types.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(psi_type(&f, 2, &b), types[0]);
    }

    #[test]
    fn empty_b_has_only_the_root_type() {
        let f = dlo(5);
        let p = psi_type(&f, 2, &[]);
        let v = p_virtual_space(&p).unwrap();
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn chain_forest_has_one_entry_per_class() {
        let lt = ParametrizedFormula::new("x0<y", (1, 10), (2, 10), |x, p| x[0] < p[1]);
        let f = PsiFamily::new(vec![lt], 10).unwrap();
        let p = psi_type(&f, 0, &[2, 5, 8]);
        let forest = forest_from_type(&p).unwrap();
        assert_eq!(forest.class_count(), 3);
        assert_eq!(p_virtual_space(&p).unwrap().len(), 4);
    }

    #[test]
    fn inconsistent_type_is_rejected() {
        // ⟨0⟩ ⊴ ⟨1⟩ and ⟨1⟩ ⊴ ⟨2⟩ but not ⟨0⟩ ⊴ ⟨2⟩
        let mut bits = SignVector::zeros(9);
        for i in 0..3 {
            bits.set(i * 3 + i, true);
        }
        bits.set(1, true);
        bits.set(3 + 2, true);
        let p = PsiType::from_bits(bits, 3, 1).unwrap();
        assert!(matches!(
            forest_from_type(&p),
            Err(ForestError::NotTransitive { .. })
        ));
    }

    #[test]
    fn determination_on_small_dlo() {
        let f = dlo(10);
        for b in [vec![], vec![4], vec![1, 5, 7], vec![0, 3, 6, 9]] {
            let r = determination_check(&f, &b).unwrap();
            assert!(r.ok(), "{r:?}");
        }
    }

    #[test]
    fn crossing_extents_are_reported() {
        // windows of width 3 around y cross for neighbouring parameters
        let near =
            ParametrizedFormula::new("near", (1, 8), (2, 8), |x, p| x[0].abs_diff(p[1]) <= 1);
        let f = PsiFamily::new(vec![near], 8).unwrap();
        let r = determination_check(&f, &[2, 3]).unwrap();
        assert_eq!(r.forest_failures, 8);
        assert!(!r.ok());
        assert!(determination_check(&f, &[1, 5]).unwrap().ok());
    }

    #[test]
    fn forest_over_matches_forest_from_type() {
        let f = dlo(11);
        let b = [2, 6, 9];
        for a1 in 0..11 {
            let p = psi_type(&f, a1, &b);
            assert!(forest_from_type(&p)
                .unwrap()
                .same_relation(&forest_over(&f, a1, &b).unwrap()));
        }
    }
}
