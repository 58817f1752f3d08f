//! Leaf-labeled proper binary trees: the output type of relative-distance
//! reconstruction. Leaves carry oracle node ids; every internal node has
//! exactly two children and a label naming two leaves of its subtree (the
//! pair whose lowest common ancestor it represents).

use std::collections::HashMap;

use crate::tree::{NodeId, RootedTree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum LtNode {
    Leaf(NodeId),
    Internal {
        label: (NodeId, NodeId),
        left: usize,
        right: usize,
    },
}

/// An arena-backed proper binary tree over named leaves.
#[derive(Debug, Clone)]
pub struct LeafTree {
    nodes: Vec<LtNode>,
    root: usize,
}

impl LeafTree {
    /// A single leaf.
    pub fn leaf(name: NodeId) -> Self {
        Self {
            nodes: vec![LtNode::Leaf(name)],
            root: 0,
        }
    }

    /// A new root labeled `label` with `left` and `right` as its subtrees.
    pub fn join(label: (NodeId, NodeId), left: LeafTree, right: LeafTree) -> Self {
        let mut nodes = left.nodes;
        let left_root = left.root;
        let offset = nodes.len();
        nodes.extend(right.nodes.into_iter().map(|n| shift(n, offset)));
        let right_root = right.root + offset;
        nodes.push(LtNode::Internal {
            label,
            left: left_root,
            right: right_root,
        });
        let root = nodes.len() - 1;
        Self { nodes, root }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, LtNode::Leaf(_)))
            .count()
    }

    /// Leaf names in left-to-right order.
    pub fn leaves(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.visit_postorder(|tree, idx| {
            if let LtNode::Leaf(name) = tree.nodes[idx] {
                out.push(name);
            }
        });
        out
    }

    /// `(arena index, label)` of every internal node, in arena order.
    /// The order is deterministic for a deterministically built tree.
    pub fn internal_nodes(&self) -> Vec<(usize, (NodeId, NodeId))> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n {
                LtNode::Internal { label, .. } => Some((i, *label)),
                LtNode::Leaf(_) => None,
            })
            .collect()
    }

    pub fn root_label(&self) -> Option<(NodeId, NodeId)> {
        match self.nodes[self.root] {
            LtNode::Internal { label, .. } => Some(label),
            LtNode::Leaf(_) => None,
        }
    }

    /// The single leaf name if the tree is one leaf.
    pub fn sole_leaf(&self) -> Option<NodeId> {
        match self.nodes[self.root] {
            LtNode::Leaf(name) => Some(name),
            LtNode::Internal { .. } => None,
        }
    }

    pub(crate) fn children_of(&self, idx: usize) -> Option<(usize, usize)> {
        match self.nodes[idx] {
            LtNode::Internal { left, right, .. } => Some((left, right)),
            LtNode::Leaf(_) => None,
        }
    }

    pub(crate) fn leaf_name(&self, idx: usize) -> Option<NodeId> {
        match self.nodes[idx] {
            LtNode::Leaf(name) => Some(name),
            LtNode::Internal { .. } => None,
        }
    }

    pub(crate) fn label_of(&self, idx: usize) -> Option<(NodeId, NodeId)> {
        match self.nodes[idx] {
            LtNode::Internal { label, .. } => Some(label),
            LtNode::Leaf(_) => None,
        }
    }

    /// Replace the edge `(u -> w)` with a new internal node labeled `label`
    /// whose left child is `graft`'s root and whose right child is `w`.
    /// `take_left` selects which child edge of `u` is split.
    pub(crate) fn splice_edge(
        &mut self,
        u: usize,
        take_left: bool,
        label: (NodeId, NodeId),
        graft: LeafTree,
    ) {
        let offset = self.nodes.len();
        self.nodes
            .extend(graft.nodes.into_iter().map(|n| shift(n, offset)));
        let graft_root = graft.root + offset;
        let w = match self.nodes[u] {
            LtNode::Internal { left, right, .. } => {
                if take_left {
                    left
                } else {
                    right
                }
            }
            LtNode::Leaf(_) => panic!("splice_edge: u must be internal"),
        };
        self.nodes.push(LtNode::Internal {
            label,
            left: graft_root,
            right: w,
        });
        let x = self.nodes.len() - 1;
        match &mut self.nodes[u] {
            LtNode::Internal { left, right, .. } => {
                if take_left {
                    *left = x;
                } else {
                    *right = x;
                }
            }
            LtNode::Leaf(_) => unreachable!(),
        }
    }

    fn visit_postorder(&self, mut f: impl FnMut(&Self, usize)) {
        // Explicit stack; reconstruction outputs can be deep.
        let mut stack = vec![(self.root, false)];
        while let Some((idx, expanded)) = stack.pop() {
            if expanded {
                f(self, idx);
                continue;
            }
            match self.nodes[idx] {
                LtNode::Leaf(_) => f(self, idx),
                LtNode::Internal { left, right, .. } => {
                    stack.push((idx, true));
                    stack.push((right, false));
                    stack.push((left, false));
                }
            }
        }
    }

    /// Leaf positions and, per node, the half-open interval of leaf positions
    /// its subtree covers. Used for O(1) "is this leaf under that node" tests.
    pub(crate) fn leaf_intervals(&self) -> (HashMap<NodeId, usize>, Vec<(usize, usize)>) {
        let mut pos = HashMap::new();
        let mut ranges = vec![(0usize, 0usize); self.nodes.len()];
        let mut next = 0usize;
        self.visit_postorder(|tree, idx| match tree.nodes[idx] {
            LtNode::Leaf(name) => {
                pos.insert(name, next);
                ranges[idx] = (next, next + 1);
                next += 1;
            }
            LtNode::Internal { left, right, .. } => {
                ranges[idx] = (ranges[left].0, ranges[right].1);
            }
        });
        (pos, ranges)
    }

    /// True iff every internal label `lca(x, y)` names two leaves that lie in
    /// that node's subtree. Checkable without any oracle.
    pub fn labels_sound(&self) -> bool {
        let (pos, ranges) = self.leaf_intervals();
        self.internal_nodes().into_iter().all(|(idx, (x, y))| {
            let (lo, hi) = ranges[idx];
            [x, y].into_iter().all(|leaf| {
                pos.get(&leaf)
                    .is_some_and(|&p| p >= lo && p < hi)
            })
        })
    }

    /// Canonical form: child subtrees ordered by their smallest leaf name,
    /// internal labels dropped. Two trees are leaf-isomorphic iff their
    /// canonical strings are equal.
    pub fn canonical_string(&self) -> String {
        let mut min_leaf = vec![NodeId::MAX; self.nodes.len()];
        let mut repr: Vec<String> = vec![String::new(); self.nodes.len()];
        self.visit_postorder(|tree, idx| match tree.nodes[idx] {
            LtNode::Leaf(name) => {
                min_leaf[idx] = name;
                repr[idx] = name.to_string();
            }
            LtNode::Internal { left, right, .. } => {
                let (a, b) = if min_leaf[left] <= min_leaf[right] {
                    (left, right)
                } else {
                    (right, left)
                };
                min_leaf[idx] = min_leaf[a];
                repr[idx] = format!("({},{})", repr[a], repr[b]);
            }
        });
        std::mem::take(&mut repr[self.root])
    }

    /// Project a proper binary [`RootedTree`] onto its leaf shape. Internal
    /// labels are derived from the first leaf of each child subtree.
    pub fn from_rooted(t: &RootedTree) -> Result<Self, TreeError> {
        let mut nodes: Vec<LtNode> = Vec::with_capacity(t.node_count() as usize);
        // (arena index, first leaf) per finished node, indexed by id.
        let mut done: Vec<Option<(usize, NodeId)>> = vec![None; t.node_count() as usize + 1];
        let mut stack = vec![(t.root(), false)];
        while let Some((v, expanded)) = stack.pop() {
            let ch = t.children(v);
            match (ch.len(), expanded) {
                (0, _) => {
                    nodes.push(LtNode::Leaf(v));
                    done[v as usize] = Some((nodes.len() - 1, v));
                }
                (2, false) => {
                    stack.push((v, true));
                    stack.push((ch[1], false));
                    stack.push((ch[0], false));
                }
                (2, true) => {
                    let (l, la) = done[ch[0] as usize].expect("left child finished");
                    let (r, ra) = done[ch[1] as usize].expect("right child finished");
                    nodes.push(LtNode::Internal {
                        label: (la, ra),
                        left: l,
                        right: r,
                    });
                    done[v as usize] = Some((nodes.len() - 1, la));
                }
                (k, _) => return Err(TreeError::NotProperBinary(v, k)),
            }
        }
        let (root, _) = done[t.root() as usize].expect("root finished");
        Ok(Self { nodes, root })
    }

    /// Map every leaf name (and label component) through `f`.
    pub fn relabel(&self, f: &dyn Fn(NodeId) -> NodeId) -> LeafTree {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match *n {
                LtNode::Leaf(name) => LtNode::Leaf(f(name)),
                LtNode::Internal {
                    label: (x, y),
                    left,
                    right,
                } => LtNode::Internal {
                    label: (f(x), f(y)),
                    left,
                    right,
                },
            })
            .collect();
        LeafTree {
            nodes,
            root: self.root,
        }
    }

    /// Newick serialization with `lca_x_y` internal labels.
    pub fn to_newick(&self, name_of: &dyn Fn(NodeId) -> String) -> String {
        let mut repr: Vec<String> = vec![String::new(); self.nodes.len()];
        self.visit_postorder(|tree, idx| match tree.nodes[idx] {
            LtNode::Leaf(name) => repr[idx] = name_of(name),
            LtNode::Internal {
                label: (x, y),
                left,
                right,
            } => {
                repr[idx] = format!(
                    "({},{})lca_{}_{}",
                    repr[left],
                    repr[right],
                    name_of(x),
                    name_of(y)
                );
            }
        });
        format!("{};", repr[self.root])
    }
}

fn shift(n: LtNode, offset: usize) -> LtNode {
    match n {
        LtNode::Leaf(name) => LtNode::Leaf(name),
        LtNode::Internal { label, left, right } => LtNode::Internal {
            label,
            left: left + offset,
            right: right + offset,
        },
    }
}

/// True iff there is an isomorphism between `a` and `b` fixing leaf names
/// (internal labels are ignored; child order is irrelevant).
pub fn leaf_isomorphic(a: &LeafTree, b: &LeafTree) -> bool {
    a.canonical_string() == b.canonical_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cherry(a: NodeId, b: NodeId) -> LeafTree {
        LeafTree::join((a, b), LeafTree::leaf(a), LeafTree::leaf(b))
    }

    #[test]
    fn child_order_is_irrelevant() {
        // ((a,b),c) vs ((b,a),c) with a=1, b=2, c=3
        let t1 = LeafTree::join((1, 3), cherry(1, 2), LeafTree::leaf(3));
        let t2 = LeafTree::join((2, 3), cherry(2, 1), LeafTree::leaf(3));
        assert!(leaf_isomorphic(&t1, &t2));
    }

    #[test]
    fn different_topologies_differ() {
        // ((a,b),c) vs ((a,c),b)
        let t1 = LeafTree::join((1, 3), cherry(1, 2), LeafTree::leaf(3));
        let t2 = LeafTree::join((1, 2), cherry(1, 3), LeafTree::leaf(2));
        assert!(!leaf_isomorphic(&t1, &t2));
    }

    #[test]
    fn nested_mirror_is_isomorphic() {
        // ((a,b),((c,d),e)) vs (((d,c),e),(b,a)) with a..e = 1..5
        let t1 = LeafTree::join(
            (1, 5),
            cherry(1, 2),
            LeafTree::join((3, 5), cherry(3, 4), LeafTree::leaf(5)),
        );
        let t2 = LeafTree::join(
            (4, 1),
            LeafTree::join((4, 5), cherry(4, 3), LeafTree::leaf(5)),
            cherry(2, 1),
        );
        assert!(leaf_isomorphic(&t1, &t2));
    }

    #[test]
    fn isomorphism_is_reflexive_and_symmetric() {
        let t1 = LeafTree::join(
            (1, 5),
            cherry(1, 2),
            LeafTree::join((3, 5), cherry(3, 4), LeafTree::leaf(5)),
        );
        let t2 = LeafTree::join((1, 3), cherry(1, 2), LeafTree::leaf(3));
        assert!(leaf_isomorphic(&t1, &t1));
        assert!(leaf_isomorphic(&t2, &t2));
        assert_eq!(leaf_isomorphic(&t1, &t2), leaf_isomorphic(&t2, &t1));
    }

    #[test]
    fn labels_sound_detects_bad_labels() {
        let good = LeafTree::join((1, 3), cherry(1, 2), LeafTree::leaf(3));
        assert!(good.labels_sound());
        // Label names a leaf that exists nowhere in the subtree.
        let bad = LeafTree::join((1, 9), cherry(1, 2), LeafTree::leaf(3));
        assert!(!bad.labels_sound());
    }

    #[test]
    fn from_rooted_requires_proper_binary() {
        let star = RootedTree::from_edges(4, 1, &[(1, 2), (1, 3), (1, 4)], 3).unwrap();
        assert!(LeafTree::from_rooted(&star).is_err());

        let edges = [(1, 2), (1, 3), (3, 4), (3, 5)];
        let t = RootedTree::from_edges(5, 1, &edges, 3).unwrap();
        let lt = LeafTree::from_rooted(&t).unwrap();
        assert_eq!(lt.leaf_count(), 3);
        assert!(lt.labels_sound());
    }

    #[test]
    fn splice_edge_rewires() {
        // Start with ((c,d),e); splice a cherry (a,b) onto the edge into (c,d).
        let mut tr = LeafTree::join((3, 5), cherry(3, 4), LeafTree::leaf(5));
        let root = tr.root;
        let graft = cherry(1, 2);
        tr.splice_edge(root, true, (1, 3), graft);
        assert!(tr.labels_sound());
        let expect = LeafTree::join(
            (3, 5),
            LeafTree::join((1, 3), cherry(1, 2), cherry(3, 4)),
            LeafTree::leaf(5),
        );
        assert!(leaf_isomorphic(&tr, &expect));
    }

    #[test]
    fn caterpillar_projection_does_not_overflow() {
        // Proper binary caterpillar with 30000 leaves: internals 1..k-1 form
        // a chain, each holding one leaf.
        let k = 30_000u32;
        let n = 2 * k - 1;
        let mut parent = vec![None; n as usize + 1];
        // internal ids 1..=k-1; leaves k..=2k-1
        for i in 2..k {
            parent[i as usize] = Some(i - 1); // internal chain
        }
        for (j, leaf) in (k..=2 * k - 1).enumerate() {
            // internal i holds leaf k+i-1; the last internal holds two.
            let host = (j as u32 + 1).min(k - 1);
            parent[leaf as usize] = Some(host);
        }
        let t = RootedTree::from_parents(n, 1, parent, 3).unwrap();
        assert!(t.is_proper_binary());
        let lt = LeafTree::from_rooted(&t).unwrap();
        assert_eq!(lt.leaf_count(), k as usize);
        assert!(lt.labels_sound());
        let canon = lt.canonical_string();
        assert!(canon.len() > k as usize);
    }

    #[test]
    fn newick_rendering() {
        let t = LeafTree::join(
            (1, 3),
            LeafTree::join((3, 4), cherry(3, 4), LeafTree::leaf(5)),
            cherry(1, 2),
        );
        let names = ["", "a", "b", "c", "d", "e"];
        let s = t.to_newick(&|id| names[id as usize].to_string());
        assert_eq!(s, "(((c,d)lca_c_d,e)lca_c_d,(a,b)lca_a_b)lca_a_c;");
    }
}
