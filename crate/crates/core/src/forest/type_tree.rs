use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{ForestError, QuasiForest};

static NEXT_TREE_ID: AtomicU64 = AtomicU64::new(1);

/// Handle to a node of one particular [`TypeTree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TypeNode {
    tree: u64,
    index: usize,
}

impl TypeNode {
    pub fn index(&self) -> usize {
        self.index
    }
}

/// The tree of types: node 0 is `∅`, every other node is the raw down-set
/// `ν(t)` of one non-degenerate quotient class, ordered by inclusion.
/// Node ids follow class order, which is the canonical id order used for
/// default sibling orders.
#[derive(Clone, Debug)]
pub struct TypeTree {
    id: u64,
    raw_len: usize,
    down: Vec<FixedBitSet>,
    class: Vec<Option<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    index: HashMap<FixedBitSet, usize>,
}

impl TypeTree {
    pub fn new(forest: &QuasiForest) -> Self {
        let raw_len = forest.len();
        let mut down = vec![FixedBitSet::with_capacity(raw_len)];
        let mut class = vec![None];
        for (c, members) in forest.classes().iter().enumerate() {
            if forest.is_degenerate(c) {
                continue;
            }
            down.push(forest.down_set(members[0]).clone());
            class.push(Some(c));
        }
        let n = down.len();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for i in 1..n {
            // predecessors form a chain, so the largest proper subset is the parent
            let p = (0..n)
                .filter(|&j| j != i && down[j].is_subset(&down[i]) && down[j] != down[i])
                .max_by_key(|&j| down[j].count_ones(..))
                .unwrap_or(0);
            parent[i] = Some(p);
            children[p].push(i);
        }
        let index = down
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, d)| (d, i))
            .collect();
        TypeTree {
            id: NEXT_TREE_ID.fetch_add(1, AtomicOrdering::Relaxed),
            raw_len,
            down,
            class,
            parent,
            children,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.down.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of raw forest nodes `|F|`.
    pub fn forest_len(&self) -> usize {
        self.raw_len
    }

    pub fn root(&self) -> TypeNode {
        self.handle(0)
    }

    pub fn node(&self, index: usize) -> Option<TypeNode> {
        (index < self.len()).then(|| self.handle(index))
    }

    pub fn nodes(&self) -> impl Iterator<Item = TypeNode> + '_ {
        (0..self.len()).map(|i| self.handle(i))
    }

    fn handle(&self, index: usize) -> TypeNode {
        TypeNode {
            tree: self.id,
            index,
        }
    }

    fn own(&self, node: TypeNode) -> Result<usize, ForestError> {
        if node.tree != self.id {
            return Err(ForestError::ForeignNode);
        }
        Ok(node.index)
    }

    pub fn down_set(&self, node: TypeNode) -> Result<&FixedBitSet, ForestError> {
        Ok(&self.down[self.own(node)?])
    }

    /// Forest class behind a node; `None` for `∅`.
    pub fn class(&self, node: TypeNode) -> Result<Option<usize>, ForestError> {
        Ok(self.class[self.own(node)?])
    }

    pub fn parent(&self, node: TypeNode) -> Result<Option<TypeNode>, ForestError> {
        Ok(self.parent[self.own(node)?].map(|p| self.handle(p)))
    }

    pub fn children(&self, node: TypeNode) -> Result<Vec<TypeNode>, ForestError> {
        Ok(self.children[self.own(node)?]
            .iter()
            .map(|&c| self.handle(c))
            .collect())
    }

    /// Node whose down-set is exactly `set`, if any.
    pub fn find(&self, set: &FixedBitSet) -> Option<TypeNode> {
        self.index.get(set).map(|&i| self.handle(i))
    }

    /// Tree meet, i.e. the node whose down-set is `p ∩ q`.
    pub fn meet(&self, p: TypeNode, q: TypeNode) -> Result<TypeNode, ForestError> {
        let mut m = self.down_set(p)?.clone();
        m.intersect_with(self.down_set(q)?);
        Ok(self
            .find(&m)
            .expect("intersection of two down-sets is a down-set in the tree"))
    }

    /// `p △ q` as a set of raw forest nodes.
    pub fn diff(&self, p: TypeNode, q: TypeNode) -> Result<FixedBitSet, ForestError> {
        let mut d = self.down_set(p)?.clone();
        d.symmetric_difference_with(self.down_set(q)?);
        Ok(d)
    }

    pub fn dist(&self, p: TypeNode, q: TypeNode) -> Result<usize, ForestError> {
        Ok(self.diff(p, q)?.count_ones(..))
    }

    fn strictly_below(&self, p: usize, q: usize) -> bool {
        p != q && self.down[p].is_subset(&self.down[q])
    }

    /// Walks up from `p` to the child of `m` on its path.
    fn branch_below(&self, m: usize, mut p: usize) -> usize {
        while let Some(up) = self.parent[p] {
            if up == m {
                return p;
            }
            p = up;
        }
        unreachable!("meet is an ancestor of both nodes")
    }
}

/// Per-parent sibling orders `≤*`. Parents without an entry order their
/// children by node id.
#[derive(Clone, Debug, Default)]
pub struct SiblingOrders {
    overrides: BTreeMap<usize, Vec<usize>>,
}

impl SiblingOrders {
    /// Orders the children of `parent` as listed (node indices).
    pub fn set(&mut self, parent: usize, children: Vec<usize>) -> &mut Self {
        self.overrides.insert(parent, children);
        self
    }

    pub fn overrides(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.overrides
    }
}

/// Total order on a [`TypeTree`], stored as the increasing node sequence.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexOrder {
    #[serde(skip)]
    tree: u64,
    sequence: Vec<usize>,
    #[serde(skip)]
    position: Vec<usize>,
}

impl ConvexOrder {
    /// Arbitrary order given as a node sequence; only checks that it is a
    /// permutation. Used for probing non-convex orders.
    pub fn from_sequence(tree: &TypeTree, sequence: Vec<usize>) -> Result<Self, ForestError> {
        let mut position = vec![usize::MAX; tree.len()];
        if sequence.len() != tree.len() {
            return Err(ForestError::NotAPermutation);
        }
        for (pos, &node) in sequence.iter().enumerate() {
            if node >= tree.len() || position[node] != usize::MAX {
                return Err(ForestError::NotAPermutation);
            }
            position[node] = pos;
        }
        Ok(ConvexOrder {
            tree: tree.id,
            sequence,
            position,
        })
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    /// Position of a node in the order.
    pub fn position(&self, node: TypeNode) -> Result<usize, ForestError> {
        if node.tree != self.tree {
            return Err(ForestError::ForeignNode);
        }
        Ok(self.position[node.index])
    }

    pub fn nodes<'a>(&'a self, tree: &'a TypeTree) -> impl Iterator<Item = TypeNode> + 'a {
        self.sequence.iter().map(move |&i| tree.handle(i))
    }

    /// `Σ dist(p_i, p_{i+1})` over a strictly increasing sequence, against
    /// the bound `2|F|`.
    pub fn sum_dist_check(
        &self,
        tree: &TypeTree,
        sequence: &[TypeNode],
    ) -> Result<SumDist, ForestError> {
        if self.tree != tree.id {
            return Err(ForestError::ForeignNode);
        }
        let mut sum = 0;
        for (i, pair) in sequence.windows(2).enumerate() {
            if self.position(pair[0])? >= self.position(pair[1])? {
                return Err(ForestError::NotIncreasing(i + 1));
            }
            sum += tree.dist(pair[0], pair[1])?;
        }
        if let Some(&first) = sequence.first() {
            self.position(first)?;
        }
        let bound = 2 * tree.forest_len();
        Ok(SumDist {
            sum,
            bound,
            ok: sum <= bound,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SumDist {
    pub sum: usize,
    /// `2|F|`; for `F(C, Δ)` this is `2|C||Δ|`.
    pub bound: usize,
    pub ok: bool,
}

/// The order extending inclusion: `p < q` when `p ⊂ q`; otherwise compare
/// the children of the meet `p ∩ q` lying under `p` and `q` by the sibling
/// order at that meet.
pub fn convex_order(tree: &TypeTree, siblings: &SiblingOrders) -> Result<ConvexOrder, ForestError> {
    let mut rank = vec![0usize; tree.len()];
    for parent in 0..tree.len() {
        for (r, &c) in tree.children[parent].iter().enumerate() {
            rank[c] = r;
        }
    }
    for (&parent, order) in &siblings.overrides {
        if parent >= tree.len() {
            return Err(ForestError::SiblingOrder {
                parent,
                reason: "no such node".into(),
            });
        }
        let mut given = order.clone();
        given.sort_unstable();
        given.dedup();
        if given.len() != order.len() || given != tree.children[parent] {
            return Err(ForestError::SiblingOrder {
                parent,
                reason: format!(
                    "{order:?} is not a total order of the children {:?}",
                    tree.children[parent]
                ),
            });
        }
        for (r, &c) in order.iter().enumerate() {
            rank[c] = r;
        }
    }

    let compare = |p: usize, q: usize| -> Ordering {
        if p == q {
            Ordering::Equal
        } else if tree.strictly_below(p, q) {
            Ordering::Less
        } else if tree.strictly_below(q, p) {
            Ordering::Greater
        } else {
            let m = tree
                .meet(tree.handle(p), tree.handle(q))
                .expect("own nodes")
                .index;
            rank[tree.branch_below(m, p)].cmp(&rank[tree.branch_below(m, q)])
        }
    };
    let mut sequence: Vec<usize> = (0..tree.len()).collect();
    sequence.sort_by(|&p, &q| compare(p, q));
    ConvexOrder::from_sequence(tree, sequence)
}

/// Whether `χ(t) = {p : t ∈ p}` is an interval of `order` for every raw
/// forest node `t`.
pub fn check_convexity(tree: &TypeTree, order: &ConvexOrder) -> Result<bool, ForestError> {
    if order.tree != tree.id {
        return Err(ForestError::ForeignNode);
    }
    for t in 0..tree.forest_len() {
        let positions: Vec<usize> = order
            .sequence
            .iter()
            .enumerate()
            .filter(|(_, &p)| tree.down[p].contains(t))
            .map(|(pos, _)| pos)
            .collect();
        if let (Some(first), Some(last)) = (positions.first(), positions.last()) {
            if last - first + 1 != positions.len() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::NodeLabel;

    fn forest(n: usize, sets: &[&[usize]]) -> QuasiForest {
        let ext = sets
            .iter()
            .map(|s| {
                let mut b = FixedBitSet::with_capacity(n);
                s.iter().for_each(|&e| b.insert(e));
                b
            })
            .collect();
        let labels = (0..sets.len())
            .map(|i| NodeLabel {
                param: i,
                formula: 0,
            })
            .collect();
        QuasiForest::from_extents(labels, ext).unwrap()
    }

    // balls of the complete binary tree on 4 leaves, root first
    fn binary7() -> QuasiForest {
        forest(
            4,
            &[&[0, 1, 2, 3], &[0, 1], &[2, 3], &[0], &[1], &[2], &[3]],
        )
    }

    // preorder traversal, children by id: an independent route to the order
    fn preorder(tree: &TypeTree) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(n) = stack.pop() {
            out.push(n);
            for &c in tree.children[n].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    #[test]
    fn chain_tree() {
        let t = TypeTree::new(&forest(3, &[&[0, 1, 2], &[0, 1], &[0]]));
        assert_eq!(t.len(), 4);
        let o = convex_order(&t, &SiblingOrders::default()).unwrap();
        assert_eq!(o.sequence(), &[0, 1, 2, 3]);
        assert!(check_convexity(&t, &o).unwrap());
    }

    #[test]
    fn disjoint_roots() {
        let t = TypeTree::new(&forest(2, &[&[0], &[1]]));
        let sets: Vec<Vec<usize>> = t
            .nodes()
            .map(|n| t.down_set(n).unwrap().ones().collect())
            .collect();
        assert_eq!(sets, vec![vec![], vec![0], vec![1]]);
        let o = convex_order(&t, &SiblingOrders::default()).unwrap();
        assert_eq!(o.sequence(), &[0, 1, 2]);
        let mut rev = SiblingOrders::default();
        rev.set(0, vec![2, 1]);
        assert_eq!(convex_order(&t, &rev).unwrap().sequence(), &[0, 2, 1]);
    }

    #[test]
    fn binary_tree_of_seven_balls() {
        let t = TypeTree::new(&binary7());
        assert_eq!(t.len(), 8);
        assert_eq!(t.children(t.root()).unwrap().len(), 1);
        let o = convex_order(&t, &SiblingOrders::default()).unwrap();
        assert_eq!(o.sequence(), preorder(&t).as_slice());
        assert!(check_convexity(&t, &o).unwrap());
        let all: Vec<TypeNode> = o.nodes(&t).collect();
        let sd = o.sum_dist_check(&t, &all).unwrap();
        assert!(sd.ok);
        assert_eq!(sd.bound, 14);
        // ∅ →{0}→{0,1}→{0,1,3}→{0,1,4}→{0,2}→{0,2,5}→{0,2,6}
        assert_eq!(sd.sum, 1 + 1 + 1 + 2 + 3 + 1 + 2);
    }

    #[test]
    fn interleaved_order_is_not_convex() {
        let t = TypeTree::new(&binary7());
        let good = convex_order(&t, &SiblingOrders::default()).unwrap();
        let mut seq = good.sequence().to_vec();
        // move a leaf of the first subtree after the second subtree's root
        let (i, j) = (3, 5);
        seq.swap(i, j);
        let bad = ConvexOrder::from_sequence(&t, seq).unwrap();
        assert!(!check_convexity(&t, &bad).unwrap());
    }

    #[test]
    fn diff_and_dist() {
        let t = TypeTree::new(&forest(4, &[&[0, 1, 2, 3], &[0, 1, 2], &[0, 1], &[0]]));
        let root = t.root();
        let deepest = t.node(4).unwrap();
        assert_eq!(t.dist(deepest, deepest).unwrap(), 0);
        assert_eq!(t.diff(deepest, deepest).unwrap().count_ones(..), 0);
        let top = t.node(1).unwrap();
        assert_eq!(t.dist(top, deepest).unwrap(), 3);
        assert_eq!(t.dist(root, deepest).unwrap(), 4);

        let s = TypeTree::new(&forest(2, &[&[0], &[1]]));
        let (a, b) = (s.node(1).unwrap(), s.node(2).unwrap());
        assert_eq!(s.diff(a, b).unwrap().ones().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(s.dist(a, b).unwrap(), 2);
        assert_eq!(s.meet(a, b).unwrap(), s.root());

        assert_eq!(t.dist(root, a), Err(ForestError::ForeignNode));
    }

    #[test]
    fn sum_dist_rejects_non_increasing() {
        let t = TypeTree::new(&binary7());
        let o = convex_order(&t, &SiblingOrders::default()).unwrap();
        let seq = [t.node(2).unwrap(), t.node(1).unwrap()];
        assert_eq!(
            o.sum_dist_check(&t, &seq),
            Err(ForestError::NotIncreasing(1))
        );
        let single = [t.node(3).unwrap()];
        assert_eq!(o.sum_dist_check(&t, &single).unwrap().sum, 0);
    }

    #[test]
    fn bad_sibling_orders() {
        let t = TypeTree::new(&binary7());
        let mut s = SiblingOrders::default();
        s.set(1, vec![2]);
        assert!(matches!(
            convex_order(&t, &s),
            Err(ForestError::SiblingOrder { parent: 1, .. })
        ));
        let mut dup = SiblingOrders::default();
        dup.set(1, vec![2, 2, 3]);
        assert!(convex_order(&t, &dup).is_err());
    }

    #[test]
    fn degenerate_classes_are_not_tree_nodes() {
        let f = forest(3, &[&[0], &[1], &[]]);
        let t = TypeTree::new(&f);
        assert_eq!(t.len(), 3);
        assert_eq!(t.forest_len(), 3);
    }
}
