use fixedbitset::FixedBitSet;
use thiserror::Error;

/// The target is not a union of pool balls; `point` is covered by none of
/// the pool balls inside the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("point {point} of the target is not covered by any ball inside it")]
pub struct Uncovered {
    pub point: usize,
}

/// Minimal decomposition of `target` into balls from a directed `pool`.
///
/// Takes the ⊆-maximal nonempty pool balls contained in the target. In a
/// directed pool these are pairwise disjoint, so if they cover the target
/// they are its unique shortest representation. Output is sorted by
/// (smallest element, size) and does not depend on pool order.
pub fn components(
    target: &FixedBitSet,
    pool: &[FixedBitSet],
) -> Result<Vec<FixedBitSet>, Uncovered> {
    let mut inside: Vec<&FixedBitSet> = pool
        .iter()
        .filter(|b| b.count_ones(..) > 0 && b.is_subset(target))
        .collect();
    inside.sort();
    inside.dedup();
    let maximal: Vec<FixedBitSet> = inside
        .iter()
        .filter(|b| !inside.iter().any(|o| o != *b && b.is_subset(o)))
        .map(|b| (*b).clone())
        .collect();

    let mut union = FixedBitSet::with_capacity(target.len());
    for b in &maximal {
        union.union_with(b);
    }
    if let Some(point) = target.difference(&union).next() {
        return Err(Uncovered { point });
    }

    let mut out = maximal;
    out.sort_by_key(|b| (b.minimum(), b.count_ones(..)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(elems: &[usize]) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(6);
        elems.iter().for_each(|&e| s.insert(e));
        s
    }

    fn pool() -> Vec<FixedBitSet> {
        // leaves, two pairs and the whole space of a 6-leaf tree
        vec![
            bits(&[0]),
            bits(&[1]),
            bits(&[2]),
            bits(&[3]),
            bits(&[4]),
            bits(&[5]),
            bits(&[0, 1]),
            bits(&[2, 3]),
            bits(&[0, 1, 2, 3, 4, 5]),
        ]
    }

    #[test]
    fn one_ball() {
        assert_eq!(
            components(&bits(&[2, 3]), &pool()).unwrap(),
            vec![bits(&[2, 3])]
        );
    }

    #[test]
    fn two_disjoint_balls() {
        let got = components(&bits(&[4, 0, 1]), &pool()).unwrap();
        assert_eq!(got, vec![bits(&[0, 1]), bits(&[4])]);
    }

    #[test]
    fn packed_parent_collapses() {
        // {0,1} is also the union of the leaves {0} and {1}
        assert_eq!(
            components(&bits(&[0, 1]), &pool()).unwrap(),
            vec![bits(&[0, 1])]
        );
    }

    #[test]
    fn not_a_union_of_balls() {
        let p = vec![bits(&[0, 1]), bits(&[2])];
        // {0,1} sticks out of the target, so 0 stays uncovered
        assert_eq!(
            components(&bits(&[0, 2, 3]), &p),
            Err(Uncovered { point: 0 })
        );
        assert_eq!(
            components(&bits(&[0, 1, 2, 3]), &p),
            Err(Uncovered { point: 3 })
        );
    }

    #[test]
    fn empty_target() {
        assert!(components(&bits(&[]), &pool()).unwrap().is_empty());
    }

    #[test]
    fn pool_order_is_irrelevant() {
        let mut p = pool();
        let a = components(&bits(&[0, 1, 2, 3, 5]), &p).unwrap();
        p.reverse();
        assert_eq!(a, components(&bits(&[0, 1, 2, 3, 5]), &p).unwrap());
    }
}
