//! Rooted-tree representation and the structural queries everything else is
//! built on: ancestry, lowest common ancestors, subtree sizes, and the
//! separator predicates used by the path-query reconstruction.
//!
//! A tree over `n` nodes always uses the id universe `{1, ..., n}`. Edges are
//! directed away from the root (an arborescence), and the degree of a node is
//! the sum of its in-degree and out-degree.

use thiserror::Error;

/// Node identifier; valid ids for an `n`-node tree are `1..=n`.
pub type NodeId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node id {0} is out of range")]
    UnknownNode(NodeId),
    #[error("tree must have at least one node")]
    Empty,
    #[error("node {0} has degree {1}, above the bound {2}")]
    DegreeBound(NodeId, u32, u32),
    #[error("root {0} must not have a parent")]
    RootHasParent(NodeId),
    #[error("expected exactly one root, node {0} has no parent")]
    ExtraRoot(NodeId),
    #[error("parent relation does not form a tree (cycle or unreachable node)")]
    NotATree,
    #[error("operation requires a non-root node, got the root")]
    RootArgument,
    #[error("tree is not a proper binary tree: node {0} has {1} children")]
    NotProperBinary(NodeId, usize),
    #[error("child lists do not match the parent map")]
    ChildOrderMismatch,
}

/// A rooted tree (arborescence) over node ids `1..=n`.
///
/// Immutable after construction and cheap to share across threads. Ancestry
/// tests are O(1) via Euler-tour intervals; `lca` walks parent chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    n: u32,
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<u32>,
    tin: Vec<u32>,
    tout: Vec<u32>,
    subtree: Vec<u32>,
    degree_bound: u32,
}

impl RootedTree {
    /// Build a tree from a parent map. `parent[id]` is the parent of `id`
    /// (index 0 is unused); exactly the root has no parent. Children are
    /// ordered by ascending id.
    pub fn from_parents(
        n: u32,
        root: NodeId,
        parent: Vec<Option<NodeId>>,
        degree_bound: u32,
    ) -> Result<Self, TreeError> {
        Self::build(n, root, parent, None, Some(degree_bound))
    }

    /// Like [`RootedTree::from_parents`] but with explicit child ordering,
    /// used by parsers that must preserve the input's sibling order.
    pub fn from_parents_ordered(
        n: u32,
        root: NodeId,
        parent: Vec<Option<NodeId>>,
        children: Vec<Vec<NodeId>>,
        degree_bound: Option<u32>,
    ) -> Result<Self, TreeError> {
        Self::build(n, root, parent, Some(children), degree_bound)
    }

    /// Build a tree from `(parent, child)` edges over ids `1..=n`.
    pub fn from_edges(
        n: u32,
        root: NodeId,
        edges: &[(NodeId, NodeId)],
        degree_bound: u32,
    ) -> Result<Self, TreeError> {
        let mut parent = vec![None; n as usize + 1];
        for &(p, c) in edges {
            if c == 0 || c > n {
                return Err(TreeError::UnknownNode(c));
            }
            parent[c as usize] = Some(p);
        }
        Self::build(n, root, parent, None, Some(degree_bound))
    }

    fn build(
        n: u32,
        root: NodeId,
        parent: Vec<Option<NodeId>>,
        children: Option<Vec<Vec<NodeId>>>,
        degree_bound: Option<u32>,
    ) -> Result<Self, TreeError> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if root == 0 || root > n {
            return Err(TreeError::UnknownNode(root));
        }
        if parent.len() != n as usize + 1 {
            return Err(TreeError::NotATree);
        }
        if parent[root as usize].is_some() {
            return Err(TreeError::RootHasParent(root));
        }
        for id in 1..=n {
            match parent[id as usize] {
                None if id != root => return Err(TreeError::ExtraRoot(id)),
                Some(p) if p == 0 || p > n => return Err(TreeError::UnknownNode(p)),
                _ => {}
            }
        }

        let children = match children {
            Some(ch) => {
                if ch.len() != n as usize + 1 {
                    return Err(TreeError::ChildOrderMismatch);
                }
                let mut seen = vec![false; n as usize + 1];
                for (pid, list) in ch.iter().enumerate().skip(1) {
                    for &c in list {
                        if c == 0 || c > n || seen[c as usize] {
                            return Err(TreeError::ChildOrderMismatch);
                        }
                        if parent[c as usize] != Some(pid as NodeId) {
                            return Err(TreeError::ChildOrderMismatch);
                        }
                        seen[c as usize] = true;
                    }
                }
                if (1..=n).any(|id| id != root && !seen[id as usize]) {
                    return Err(TreeError::ChildOrderMismatch);
                }
                ch
            }
            None => {
                let mut ch = vec![Vec::new(); n as usize + 1];
                for id in 1..=n {
                    if let Some(p) = parent[id as usize] {
                        ch[p as usize].push(id);
                    }
                }
                ch
            }
        };

        // Iterative DFS: depth, Euler in/out intervals, subtree sizes, and a
        // reachability check (every node must be visited exactly once).
        let mut depth = vec![0u32; n as usize + 1];
        let mut tin = vec![0u32; n as usize + 1];
        let mut tout = vec![0u32; n as usize + 1];
        let mut subtree = vec![0u32; n as usize + 1];
        let mut clock = 0u32;
        let mut visited = 0u32;
        // (node, next child index)
        let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
        tin[root as usize] = clock;
        clock += 1;
        visited += 1;
        while let Some(&mut (v, ref mut ci)) = stack.last_mut() {
            if *ci < children[v as usize].len() {
                let c = children[v as usize][*ci];
                *ci += 1;
                depth[c as usize] = depth[v as usize] + 1;
                tin[c as usize] = clock;
                clock += 1;
                visited += 1;
                stack.push((c, 0));
            } else {
                tout[v as usize] = clock;
                subtree[v as usize] = tout[v as usize] - tin[v as usize];
                stack.pop();
            }
        }
        if visited != n {
            return Err(TreeError::NotATree);
        }

        let max_degree = (1..=n)
            .map(|id| {
                children[id as usize].len() as u32 + u32::from(parent[id as usize].is_some())
            })
            .max()
            .unwrap_or(0);
        let degree_bound = match degree_bound {
            Some(d) => {
                if let Some(id) = (1..=n).find(|&id| {
                    children[id as usize].len() as u32
                        + u32::from(parent[id as usize].is_some())
                        > d
                }) {
                    let deg = children[id as usize].len() as u32
                        + u32::from(parent[id as usize].is_some());
                    return Err(TreeError::DegreeBound(id, deg, d));
                }
                d.max(2)
            }
            None => max_degree.max(2),
        };

        Ok(Self {
            n,
            root,
            parent,
            children,
            depth,
            tin,
            tout,
            subtree,
            degree_bound,
        })
    }

    pub fn node_count(&self) -> u32 {
        self.n
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// The degree bound `d` the tree was built with (at least 2).
    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    /// Largest actual node degree (in-degree + out-degree).
    pub fn max_degree(&self) -> u32 {
        self.nodes()
            .map(|id| self.children(id).len() as u32 + u32::from(self.parent(id).is_some()))
            .max()
            .unwrap_or(0)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.n
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v as usize]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v as usize]
    }

    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v as usize]
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v as usize].is_empty()
    }

    /// Leaf ids in ascending order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes().filter(|&v| self.is_leaf(v)).collect()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v >= 1 && v <= self.n
    }

    fn check(&self, v: NodeId) -> Result<(), TreeError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(TreeError::UnknownNode(v))
        }
    }

    /// True iff `u` is an ancestor of `v`. Reflexive: `is_ancestor(v, v)` is
    /// true, so descendant counts include the node itself.
    pub fn is_ancestor(&self, u: NodeId, v: NodeId) -> Result<bool, TreeError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.anc_unchecked(u, v))
    }

    #[inline]
    pub(crate) fn anc_unchecked(&self, u: NodeId, v: NodeId) -> bool {
        self.tin[u as usize] <= self.tin[v as usize]
            && self.tin[v as usize] < self.tout[u as usize]
    }

    /// Lowest common ancestor of `u` and `v`.
    pub fn lca(&self, u: NodeId, v: NodeId) -> Result<NodeId, TreeError> {
        self.check(u)?;
        self.check(v)?;
        let (mut a, mut b) = (u, v);
        while self.depth[a as usize] > self.depth[b as usize] {
            a = self.parent[a as usize].expect("non-root node has a parent");
        }
        while self.depth[b as usize] > self.depth[a as usize] {
            b = self.parent[b as usize].expect("non-root node has a parent");
        }
        while a != b {
            a = self.parent[a as usize].expect("non-root node has a parent");
            b = self.parent[b as usize].expect("non-root node has a parent");
        }
        Ok(a)
    }

    /// Number of descendants of `s`, counting `s` itself.
    pub fn subtree_size(&self, s: NodeId) -> Result<u32, TreeError> {
        self.check(s)?;
        Ok(self.subtree[s as usize])
    }

    /// True iff the edge `(parent(s), s)` is a splitting-edge:
    /// `n/(d+2) <= D(s) <= n(d+1)/(d+2)` with `d` the degree bound.
    /// Comparisons are exact (integer cross-multiplication).
    pub fn is_splitting_edge(&self, s: NodeId) -> Result<bool, TreeError> {
        self.check(s)?;
        if s == self.root {
            return Err(TreeError::RootArgument);
        }
        let n = self.n as u64;
        let d = self.degree_bound as u64;
        let ds = self.subtree[s as usize] as u64;
        Ok(n <= ds * (d + 2) && ds * (d + 2) <= n * (d + 1))
    }

    /// True iff removing the edge into `y` leaves two parts whose sizes both
    /// lie in `[n/d, n(d-1)/d]`.
    pub fn is_even_edge_separator(&self, y: NodeId) -> Result<bool, TreeError> {
        self.check(y)?;
        if y == self.root {
            return Err(TreeError::RootArgument);
        }
        let n = self.n as u64;
        let d = self.degree_bound as u64;
        let dy = self.subtree[y as usize] as u64;
        // Both the subtree and the remainder must satisfy the bounds; for the
        // symmetric interval the two conditions collapse to one.
        Ok(n <= dy * d && dy * d <= n * (d - 1))
    }

    /// True iff both trees share the id universe, the root, and the exact
    /// parent map.
    pub fn same_edges(&self, other: &RootedTree) -> bool {
        self.n == other.n && self.root == other.root && self.parent == other.parent
    }

    /// True iff every internal node has exactly two children.
    pub fn is_proper_binary(&self) -> bool {
        self.nodes()
            .all(|v| matches!(self.children(v).len(), 0 | 2))
    }

    /// Nodes on the path from the root to `v`, inclusive, topmost first.
    pub fn root_path(&self, v: NodeId) -> Result<Vec<NodeId>, TreeError> {
        self.check(v)?;
        let mut path = Vec::with_capacity(self.depth[v as usize] as usize + 1);
        let mut cur = v;
        loop {
            path.push(cur);
            match self.parent[cur as usize] {
                Some(p) => cur = p,
                None => break,
            }
        }
        path.reverse();
        Ok(path)
    }
}

/// Equality of labeled edge sets: same universe, same root, same parent map.
pub fn trees_equal_edges(a: &RootedTree, b: &RootedTree) -> bool {
    a.same_edges(b)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The 7-node fixture used throughout: root 1; 2,3 under 1; 4,5 under 2;
    /// 6 under 3; 7 under 6.
    pub(crate) fn t_ex() -> RootedTree {
        let edges = [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (6, 7)];
        RootedTree::from_edges(7, 1, &edges, 3).unwrap()
    }

    #[test]
    fn ancestor_chain_walks() {
        let t = t_ex();
        assert!(t.is_ancestor(1, 7).unwrap());
        assert!(!t.is_ancestor(4, 5).unwrap());
        assert!(t.is_ancestor(3, 7).unwrap());
        assert!(!t.is_ancestor(7, 3).unwrap());
    }

    #[test]
    fn ancestor_is_reflexive() {
        let t = t_ex();
        for v in t.nodes() {
            assert!(t.is_ancestor(v, v).unwrap());
        }
    }

    #[test]
    fn ancestor_unknown_id() {
        let t = t_ex();
        assert_eq!(t.is_ancestor(0, 3), Err(TreeError::UnknownNode(0)));
        assert_eq!(t.is_ancestor(3, 8), Err(TreeError::UnknownNode(8)));
    }

    #[test]
    fn lca_values() {
        let t = t_ex();
        assert_eq!(t.lca(4, 5).unwrap(), 2);
        assert_eq!(t.lca(4, 7).unwrap(), 1);
        for v in t.nodes() {
            assert_eq!(t.lca(v, v).unwrap(), v);
        }
    }

    #[test]
    fn subtree_sizes() {
        let t = t_ex();
        assert_eq!(t.subtree_size(2).unwrap(), 3);
        assert_eq!(t.subtree_size(1).unwrap(), 7);
        assert_eq!(t.subtree_size(7).unwrap(), 1);
    }

    #[test]
    fn subtree_sizes_sum_over_children() {
        let t = t_ex();
        for v in t.nodes() {
            let sum: u32 = t
                .children(v)
                .iter()
                .map(|&c| t.subtree_size(c).unwrap())
                .sum();
            assert_eq!(sum, t.subtree_size(v).unwrap() - 1);
        }
    }

    #[test]
    fn splitting_edges_of_t_ex() {
        let t = t_ex();
        // n=7, d=3: bounds are [7/5, 28/5].
        assert!(t.is_splitting_edge(2).unwrap());
        assert!(!t.is_splitting_edge(7).unwrap());
        assert!(t.is_splitting_edge(6).unwrap());
        assert_eq!(t.is_splitting_edge(1), Err(TreeError::RootArgument));
    }

    #[test]
    fn edge_equality() {
        let t = t_ex();
        assert!(t.same_edges(&t_ex()));

        let edges = [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (3, 7)];
        let perturbed = RootedTree::from_edges(7, 1, &edges, 3).unwrap();
        assert!(!t.same_edges(&perturbed));

        // Reroot at 2: the parent map flips along the 1-2 edge.
        let edges = [(2, 1), (1, 3), (2, 4), (2, 5), (3, 6), (6, 7)];
        let rerooted = RootedTree::from_edges(7, 2, &edges, 3).unwrap();
        assert!(!t.same_edges(&rerooted));
    }

    #[test]
    fn ancestor_antisymmetry() {
        let t = t_ex();
        for u in t.nodes() {
            for v in t.nodes() {
                let both = t.is_ancestor(u, v).unwrap() && t.is_ancestor(v, u).unwrap();
                assert_eq!(both, u == v);
            }
        }
    }

    #[test]
    fn lca_is_common_ancestor() {
        let t = t_ex();
        for u in t.nodes() {
            for v in t.nodes() {
                let l = t.lca(u, v).unwrap();
                assert_eq!(l, t.lca(v, u).unwrap());
                assert!(t.is_ancestor(l, u).unwrap());
                assert!(t.is_ancestor(l, v).unwrap());
                // No child of the lca dominates both.
                for &c in t.children(l) {
                    assert!(!(t.is_ancestor(c, u).unwrap() && t.is_ancestor(c, v).unwrap()));
                }
            }
        }
    }

    #[test]
    fn rejects_cycles_and_extra_roots() {
        // 2 -> 3 -> 2 cycle, unreachable from the root.
        let mut parent = vec![None; 4];
        parent[2] = Some(3);
        parent[3] = Some(2);
        assert!(RootedTree::from_parents(3, 1, parent, 3).is_err());

        let mut parent = vec![None; 4];
        parent[3] = Some(1);
        // node 2 has no parent and is not the root
        assert_eq!(
            RootedTree::from_parents(3, 1, parent, 3),
            Err(TreeError::ExtraRoot(2))
        );
    }

    #[test]
    fn rejects_degree_violations() {
        let edges = [(1, 2), (1, 3), (1, 4)];
        assert!(matches!(
            RootedTree::from_edges(4, 1, &edges, 2),
            Err(TreeError::DegreeBound(1, 3, 2))
        ));
        assert!(RootedTree::from_edges(4, 1, &edges, 3).is_ok());
    }

    #[test]
    fn single_node_tree() {
        let t = RootedTree::from_parents(1, 1, vec![None, None], 2).unwrap();
        assert_eq!(t.subtree_size(1).unwrap(), 1);
        assert!(t.is_leaf(1));
        assert!(t.is_proper_binary());
    }

    #[test]
    fn root_path_order() {
        let t = t_ex();
        assert_eq!(t.root_path(7).unwrap(), vec![1, 3, 6, 7]);
        assert_eq!(t.root_path(1).unwrap(), vec![1]);
    }
}
