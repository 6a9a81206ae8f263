use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use super::{
    p_virtual_space, psi_type, realized_delta0_types, DecompositionCertificate, PsiFamily, PsiType,
};
use crate::error::{Error, Result};
use crate::forest::{build_forest, convex_order, SiblingOrders, TypeTree};
use crate::formula::SignVector;
use crate::types::sign_vector;

/// One move between consecutive realized `Δ1`-types in the convex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IncrementalStep {
    /// Positions of the two types in the convex order of the `Δ1` tree.
    pub from: usize,
    pub to: usize,
    pub dist: usize,
    /// `|V(p_{i+1}, B) \ V(p_i, B)|`
    pub new_entries: usize,
    /// Number of `ψ` instances whose value changes.
    pub psi_changes: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IncrementalReport {
    pub carrier_size: usize,
    pub b: Vec<usize>,
    pub delta0_size: usize,
    pub delta1_size: usize,
    pub psi_type_count: usize,
    pub delta1_type_count: usize,
    /// `|V(p_0, B)|` for the first type in the order.
    pub initial_entries: usize,
    pub steps: Vec<IncrementalStep>,
    pub sum_dist: usize,
    /// `2·|B|²·|Δ1|`
    pub sum_dist_bound: usize,
    /// `|⋃_p V(p, B)|`
    pub virtual_union: usize,
    /// `2·|B|²·|Δ1| + |B|·|Δ0| + 1`
    pub aggregate_bound: usize,
    /// Distinct realized `Δ0`-types over `a1⌢B`, across all `a1`.
    pub realized_union: usize,
    /// Every realized `Δ0`-type lies in the virtual space of its point.
    pub containment_ok: bool,
    /// Points with equal `Δ1`-types have equal Ψ-types.
    pub psi_determined: bool,
    pub per_step_ok: bool,
    pub aggregate_ok: bool,
    pub ok: bool,
}

struct PointData {
    delta1_type: SignVector,
    psi: PsiType,
    contained: bool,
    realized: Vec<SignVector>,
}

/// Validates `certificate`, then walks the realized `Δ1`-types of carrier
/// points in the default convex order of the `Δ1` type tree over `B × B`,
/// tracking how the virtual space `V(p, B)` of the corresponding Ψ-type
/// changes at each step.
pub fn incremental_count_check(
    family: &PsiFamily,
    b_set: &[usize],
    certificate: &DecompositionCertificate,
) -> Result<IncrementalReport> {
    family.check_points(b_set)?;
    certificate.validate(family, b_set)?;
    let delta1 = certificate.delta1();
    let pairs: Vec<Vec<usize>> = b_set
        .iter()
        .flat_map(|&b| b_set.iter().map(move |&bp| vec![b, bp]))
        .collect();
    let forest = build_forest(&pairs, delta1, family)?;
    let tree = TypeTree::new(&forest);
    let order = convex_order(&tree, &SiblingOrders::default())?;

    let points: Vec<PointData> = (0..family.carrier_size)
        .into_par_iter()
        .map(|a1| -> Result<PointData> {
            let psi = psi_type(family, a1, b_set);
            let space = p_virtual_space(&psi)?;
            let realized = realized_delta0_types(family, a1, b_set);
            Ok(PointData {
                delta1_type: sign_vector(delta1, &pairs, &[a1]),
                contained: realized.iter().all(|t| space.contains(t)),
                psi,
                realized,
            })
        })
        .collect::<Result<_>>()?;

    // position in the convex order → (node, Ψ-type of the first point there)
    let mut visited: BTreeMap<usize, (usize, &PsiType)> = BTreeMap::new();
    let mut psi_determined = true;
    let mut distinct_psi: HashSet<&PsiType> = HashSet::new();
    let mut realized_union: HashSet<&SignVector> = HashSet::new();
    for (a1, p) in points.iter().enumerate() {
        let node = tree.find(p.delta1_type.bits()).ok_or_else(|| {
            Error::domain(format!(
                "Δ1-type of point {a1} is not a node of the type tree; Δ1 is not directed"
            ))
        })?;
        let pos = order.position(node)?;
        let entry = visited.entry(pos).or_insert((node.index(), &p.psi));
        psi_determined &= *entry.1 == p.psi;
        distinct_psi.insert(&p.psi);
        realized_union.extend(p.realized.iter());
    }

    let sequence: Vec<(usize, usize, &PsiType)> = visited
        .iter()
        .map(|(&pos, &(node, psi))| (pos, node, psi))
        .collect();
    let mut union: HashSet<SignVector> = HashSet::new();
    let mut steps = Vec::new();
    let mut sum_dist = 0;
    let mut initial_entries = 0;
    let mut previous: Option<(usize, usize, HashSet<SignVector>, &PsiType)> = None;
    for &(pos, node, psi) in &sequence {
        let entries: HashSet<SignVector> =
            p_virtual_space(psi)?.entries().iter().cloned().collect();
        match &previous {
            None => initial_entries = entries.len(),
            Some((prev_pos, prev_node, prev_entries, prev_psi)) => {
                let dist = tree.dist(tree.node(*prev_node).unwrap(), tree.node(node).unwrap())?;
                let new_entries = entries.difference(prev_entries).count();
                sum_dist += dist;
                steps.push(IncrementalStep {
                    from: *prev_pos,
                    to: pos,
                    dist,
                    new_entries,
                    psi_changes: prev_psi.changes(psi),
                    ok: new_entries <= dist,
                });
            }
        }
        union.extend(entries.iter().cloned());
        previous = Some((pos, node, entries, psi));
    }

    let containment_ok =
        points.iter().all(|p| p.contained) && realized_union.iter().all(|t| union.contains(*t));
    let nb = b_set.len();
    let sum_dist_bound = 2 * nb * nb * delta1.len();
    let aggregate_bound = sum_dist_bound + nb * family.delta0().len() + 1;
    let per_step_ok = steps.iter().all(|s| s.ok) && sum_dist <= sum_dist_bound;
    let aggregate_ok = union.len() <= aggregate_bound;
    Ok(IncrementalReport {
        carrier_size: family.carrier_size,
        b: b_set.to_vec(),
        delta0_size: family.delta0().len(),
        delta1_size: delta1.len(),
        psi_type_count: distinct_psi.len(),
        delta1_type_count: sequence.len(),
        initial_entries,
        steps,
        sum_dist,
        sum_dist_bound,
        virtual_union: union.len(),
        aggregate_bound,
        realized_union: realized_union.len(),
        containment_ok,
        psi_determined,
        per_step_ok,
        aggregate_ok,
        ok: containment_ok && psi_determined && per_step_ok && aggregate_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fullvcmin::dlo_instance;

    #[test]
    fn single_parameter() {
        let (family, cert) = dlo_instance(6);
        let r = incremental_count_check(&family, &[3], &cert).unwrap();
        assert!(r.ok, "{r:?}");
        assert_eq!(r.aggregate_bound, 2 * 2 + 2 + 1);
        assert!(r.virtual_union < r.aggregate_bound);
    }

    #[test]
    fn dlo_inequalities_hold() {
        for nb in [4, 8] {
            let n = 4 * nb;
            let b: Vec<usize> = (0..nb).map(|i| 4 * i + 1).collect();
            let (family, cert) = dlo_instance(n);
            let r = incremental_count_check(&family, &b, &cert).unwrap();
            assert!(r.ok, "{r:?}");
            assert_eq!(r.steps.len() + 1, r.delta1_type_count);
            assert!(r.aggregate_bound == 2 * nb * nb * 2 + nb * 2 + 1);
        }
    }

    #[test]
    fn realized_union_inside_virtual_union() {
        let (family, cert) = dlo_instance(15);
        let r = incremental_count_check(&family, &[2, 7, 11], &cert).unwrap();
        assert!(r.containment_ok);
        assert!(r.realized_union <= r.virtual_union);
    }

    #[test]
    fn mismatched_certificate_is_an_error() {
        let (family, good) = dlo_instance(8);
        let bad = DecompositionCertificate::new(good.delta1().to_vec(), |_, _, _, _| {
            crate::fullvcmin::BoolExpr::Const(true)
        });
        assert!(matches!(
            incremental_count_check(&family, &[2, 5], &bad),
            Err(Error::CertificateMismatch { .. })
        ));
    }
}
