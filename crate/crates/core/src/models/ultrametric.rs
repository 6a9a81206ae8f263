use fixedbitset::FixedBitSet;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelError;
use crate::forest::DirectedFamily;
use crate::formula::{Carrier, ParametrizedFormula};
use crate::setsystem::{SetFamily, Universe, DEFAULT_UNIVERSE_CAP};

/// A rooted tree whose leaves form the carrier. The ball of a node is the
/// set of leaves below it, so the balls of all nodes form a directed family
/// and the ancestor depth plays the role of a valuation radius.
///
/// Carrier index of a leaf is its rank among leaves in node-id order.
#[derive(Clone, Debug)]
pub struct UltrametricModel {
    parent: Vec<Option<usize>>,
    seed: Option<u64>,
    root: usize,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    /// carrier index → node
    leaves: Vec<usize>,
    /// carrier index → position in DFS leaf order
    leaf_pos: Vec<usize>,
    /// DFS leaf order → carrier index
    pos_leaf: Vec<usize>,
    /// ball of node v is DFS leaf positions `lo[v]..hi[v]`
    lo: Vec<usize>,
    hi: Vec<usize>,
    euler_first: Vec<usize>,
    sparse: Vec<Vec<usize>>,
}

impl PartialEq for UltrametricModel {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent && self.seed == other.seed
    }
}

impl Eq for UltrametricModel {}

impl UltrametricModel {
    pub fn from_parents(parent: Vec<Option<usize>>, seed: Option<u64>) -> Result<Self, ModelError> {
        let n = parent.len();
        for (node, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(ModelError::IndexOutOfRange { node, parent: p });
                }
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(ModelError::RootCount(roots.len()));
        }
        let root = roots[0];

        // 0 = unseen, 1 = on the current path, 2 = reaches the root
        let mut state = vec![0u8; n];
        state[root] = 2;
        for start in 0..n {
            let mut path = Vec::new();
            let mut v = start;
            while state[v] == 0 {
                state[v] = 1;
                path.push(v);
                v = parent[v].expect("only the root has no parent");
            }
            if state[v] == 1 {
                return Err(ModelError::Cycle { node: v });
            }
            for u in path {
                state[u] = 2;
            }
        }

        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(v);
            }
        }
        let leaves: Vec<usize> = (0..n).filter(|&v| children[v].is_empty()).collect();
        if leaves.len() < 2 {
            return Err(ModelError::TooFewLeaves(leaves.len()));
        }
        if leaves.len() > DEFAULT_UNIVERSE_CAP {
            return Err(ModelError::TooLarge(leaves.len()));
        }
        let mut carrier_of = vec![usize::MAX; n];
        for (i, &v) in leaves.iter().enumerate() {
            carrier_of[v] = i;
        }

        let mut depth = vec![0; n];
        let mut lo = vec![0; n];
        let mut hi = vec![0; n];
        let mut leaf_pos = vec![0; leaves.len()];
        let mut pos_leaf = Vec::with_capacity(leaves.len());
        let mut euler = Vec::with_capacity(2 * n);
        let mut euler_first = vec![0; n];
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        lo[root] = 0;
        euler_first[root] = 0;
        euler.push(root);
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if top.1 < children[v].len() {
                let c = children[v][top.1];
                top.1 += 1;
                depth[c] = depth[v] + 1;
                lo[c] = pos_leaf.len();
                euler_first[c] = euler.len();
                euler.push(c);
                stack.push((c, 0));
            } else {
                if children[v].is_empty() {
                    leaf_pos[carrier_of[v]] = pos_leaf.len();
                    pos_leaf.push(carrier_of[v]);
                }
                hi[v] = pos_leaf.len();
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    euler.push(p);
                }
            }
        }

        let mut sparse = vec![euler.clone()];
        let mut width = 1;
        while 2 * width <= euler.len() {
            let prev = sparse.last().unwrap();
            let row = (0..=euler.len() - 2 * width)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + width]);
                    if depth[a] <= depth[b] {
                        a
                    } else {
                        b
                    }
                })
                .collect();
            sparse.push(row);
            width *= 2;
        }

        Ok(UltrametricModel {
            parent,
            seed,
            root,
            children,
            depth,
            leaves,
            leaf_pos,
            pos_leaf,
            lo,
            hi,
            euler_first,
            sparse,
        })
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Tree node of carrier point `x`.
    pub fn leaf_node(&self, x: usize) -> usize {
        self.leaves[x]
    }

    /// Whether carrier point `x` lies in the ball of node `v`.
    #[inline]
    pub fn in_ball(&self, x: usize, v: usize) -> bool {
        let p = self.leaf_pos[x];
        self.lo[v] <= p && p < self.hi[v]
    }

    pub fn ball(&self, v: usize) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.leaf_count());
        for p in self.lo[v]..self.hi[v] {
            s.insert(self.pos_leaf[p]);
        }
        s
    }

    pub fn ball_size(&self, v: usize) -> usize {
        self.hi[v] - self.lo[v]
    }

    /// Whether `a` is an ancestor of `b` or equal to it.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.lo[a] <= self.lo[b] && self.hi[b] <= self.hi[a] && self.depth[a] <= self.depth[b]
    }

    /// Ancestor `k` levels above `v`, clamped at the root.
    pub fn ancestor(&self, mut v: usize, k: usize) -> usize {
        for _ in 0..k {
            match self.parent[v] {
                Some(p) => v = p,
                None => break,
            }
        }
        v
    }

    /// Lowest common ancestor of two nodes.
    pub fn lca(&self, u: usize, v: usize) -> usize {
        let (mut l, mut r) = (self.euler_first[u], self.euler_first[v]);
        if l > r {
            std::mem::swap(&mut l, &mut r);
        }
        let k = (usize::BITS - 1 - (r - l + 1).leading_zeros()) as usize;
        let (a, b) = (self.sparse[k][l], self.sparse[k][r + 1 - (1 << k)]);
        if self.depth[a] <= self.depth[b] {
            a
        } else {
            b
        }
    }

    /// Balls of all nodes, indexed by node id.
    pub fn ball_family(&self) -> DirectedFamily {
        let universe = Universe::new(self.leaf_count()).expect("leaf count validated");
        let sets = (0..self.node_count()).map(|v| self.ball(v)).collect();
        DirectedFamily::trusted(SetFamily::new(universe, sets).expect("balls fit the universe"))
    }

    /// `δ(x; v) := x ∈ ball(v)` with `v` ranging over nodes.
    pub fn ball_formula(&self) -> ParametrizedFormula {
        self.ball_formula_at(0)
    }

    /// `x ∈ ball(ancestor(v, k))`. Every instance is a ball of the tree, so
    /// any set of these formulas is directed.
    pub fn ball_formula_at(&self, k: usize) -> ParametrizedFormula {
        let model = self.clone();
        let name = if k == 0 {
            "ball".to_string()
        } else {
            format!("ball-up-{k}")
        };
        let anc: Vec<usize> = (0..self.node_count())
            .map(|v| self.ancestor(v, k))
            .collect();
        ParametrizedFormula::new(
            name,
            (1, self.leaf_count()),
            (1, self.node_count()),
            move |x, v| model.in_ball(x[0], anc[v[0]]),
        )
    }
}

impl Carrier for UltrametricModel {
    fn size(&self) -> usize {
        self.leaf_count()
    }

    fn id(&self) -> String {
        match self.seed {
            Some(s) => format!("ultrametric-l{}-s{s}", self.leaf_count()),
            None => format!("ultrametric-l{}", self.leaf_count()),
        }
    }
}

enum Shape {
    Leaf,
    Inner(Vec<Shape>),
}

fn split(size: usize, max_branching: usize, rng: &mut ChaCha8Rng) -> Shape {
    if size == 1 {
        return Shape::Leaf;
    }
    let parts = rng.gen_range(2..=max_branching.min(size));
    let mut cuts: Vec<usize> = sample(rng, size - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(size);
    let mut prev = 0;
    let mut kids = Vec::with_capacity(parts);
    for c in cuts {
        kids.push(split(c - prev, max_branching, rng));
        prev = c;
    }
    Shape::Inner(kids)
}

/// Seeded random tree with exactly `leaf_count` leaves and every internal
/// node branching into between 2 and `max_branching` children.
///
/// Leaves are nodes `0..leaf_count` in left-to-right order; internal nodes
/// follow in post-order, so the root is the last node.
pub fn random_ultrametric(
    leaf_count: usize,
    max_branching: usize,
    seed: u64,
) -> Result<UltrametricModel, ModelError> {
    if leaf_count < 2 || max_branching < 2 {
        return Err(ModelError::Infeasible(format!(
            "need leaf_count >= 2 and max_branching >= 2, got {leaf_count} and {max_branching}"
        )));
    }
    if leaf_count > DEFAULT_UNIVERSE_CAP {
        return Err(ModelError::TooLarge(leaf_count));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = split(leaf_count, max_branching, &mut rng);

    let mut parent: Vec<Option<usize>> = vec![None; leaf_count];
    let mut next_leaf = 0;
    // post-order numbering, explicit stack to survive deep trees
    enum Frame<'a> {
        Enter(&'a Shape),
        Exit,
    }
    let mut pending_children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut stack = vec![Frame::Enter(&shape)];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(Shape::Leaf) => {
                pending_children.last_mut().unwrap().push(next_leaf);
                next_leaf += 1;
            }
            Frame::Enter(Shape::Inner(kids)) => {
                pending_children.push(Vec::new());
                stack.push(Frame::Exit);
                for k in kids.iter().rev() {
                    stack.push(Frame::Enter(k));
                }
            }
            Frame::Exit => {
                let kids = pending_children.pop().unwrap();
                let id = parent.len();
                parent.push(None);
                for k in kids {
                    parent[k] = Some(id);
                }
                pending_children.last_mut().unwrap().push(id);
            }
        }
    }
    UltrametricModel::from_parents(parent, Some(seed))
}
