//! Instance generators: degree-constrained Prüfer trees, uniform proper
//! binary trees, and spider (root-with-chains) stress trees.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tree::{NodeId, RootedTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("no degree-{d} tree on {n} nodes exists with the required sequence constraints")]
    Infeasible { n: u32, d: u32 },
    #[error("parameter out of range: {0}")]
    BadParameter(&'static str),
}

/// Random degree-d tree from a constrained Prüfer sequence.
///
/// The length-(n-2) sequence over `{1..n}` is sampled so that (i) every
/// vertex appears at most `d-1` times and (ii) at least one vertex appears
/// exactly `d-1` times; the sequence decodes to a labeled tree with maximum
/// degree exactly `d`, which is then rooted at a uniformly random node.
/// Condition (i) is imposed during sampling (each slot draws uniformly from
/// the vertices still below the cap) and the whole sequence is resampled
/// until (ii) holds.
pub fn gen_pruefer_tree(n: u32, d: u32, seed: u64) -> Result<RootedTree, GenError> {
    if n < 2 || d < 2 {
        return Err(GenError::BadParameter("need n >= 2 and d >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n == 2 {
        // Empty sequence; the unique 2-node tree.
        let root = rng.gen_range(1..=2);
        let child = 3 - root;
        return RootedTree::from_edges(2, root, &[(root, child)], d)
            .map_err(|_| GenError::BadParameter("internal"));
    }
    // Condition (ii) needs d-1 copies of some vertex among n-2 slots.
    if (d - 1) as u64 > (n - 2) as u64 {
        return Err(GenError::Infeasible { n, d });
    }

    let seq = loop {
        let mut counts = vec![0u32; n as usize + 1];
        let mut eligible: Vec<NodeId> = (1..=n).collect();
        let mut seq = Vec::with_capacity(n as usize - 2);
        for _ in 0..(n - 2) {
            let i = rng.gen_range(0..eligible.len());
            let v = eligible[i];
            seq.push(v);
            counts[v as usize] += 1;
            if counts[v as usize] == d - 1 {
                eligible.swap_remove(i);
            }
        }
        if counts.iter().any(|&c| c == d - 1) {
            break seq;
        }
    };

    let edges = decode_pruefer(n, &seq);
    let root = rng.gen_range(1..=n);
    let tree = orient(n, root, &edges, d);
    debug_assert_eq!(tree.max_degree(), d);
    Ok(tree)
}

/// Standard Prüfer decoding: returns the n-1 undirected edges.
fn decode_pruefer(n: u32, seq: &[NodeId]) -> Vec<(NodeId, NodeId)> {
    let mut degree = vec![1u32; n as usize + 1];
    for &s in seq {
        degree[s as usize] += 1;
    }
    let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<NodeId>> = (1..=n)
        .filter(|&v| degree[v as usize] == 1)
        .map(std::cmp::Reverse)
        .collect();
    let mut edges = Vec::with_capacity(n as usize - 1);
    for &s in seq {
        let std::cmp::Reverse(leaf) = leaves.pop().expect("leaf available");
        edges.push((leaf, s));
        degree[s as usize] -= 1;
        if degree[s as usize] == 1 {
            leaves.push(std::cmp::Reverse(s));
        }
    }
    let std::cmp::Reverse(a) = leaves.pop().expect("two nodes left");
    let std::cmp::Reverse(b) = leaves.pop().expect("two nodes left");
    edges.push((a, b));
    edges
}

/// Orient an undirected edge list away from `root`.
fn orient(n: u32, root: NodeId, edges: &[(NodeId, NodeId)], degree_bound: u32) -> RootedTree {
    let mut adj = vec![Vec::new(); n as usize + 1];
    for &(a, b) in edges {
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    let mut parent = vec![None; n as usize + 1];
    let mut seen = vec![false; n as usize + 1];
    seen[root as usize] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v as usize] {
            if !seen[u as usize] {
                seen[u as usize] = true;
                parent[u as usize] = Some(v);
                queue.push_back(u);
            }
        }
    }
    RootedTree::from_parents(n, root, parent, degree_bound).expect("decoded tree is valid")
}

/// Uniformly random rooted leaf-labeled proper binary tree with `num_leaves`
/// leaves: grown by subdividing a uniformly random edge (or the root
/// position) for each inserted leaf, which makes all (2k-3)!! shapes equally
/// likely. Leaves get ids `1..=k` in insertion order; internal nodes follow.
pub fn gen_binary_tree(num_leaves: u32, seed: u64) -> RootedTree {
    assert!(num_leaves >= 1, "need at least one leaf");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = num_leaves as usize;

    // Temporary arena: index 0 is the first leaf.
    #[derive(Clone, Copy)]
    struct Tmp {
        parent: Option<usize>,
        is_leaf: bool,
    }
    let mut nodes = vec![Tmp {
        parent: None,
        is_leaf: true,
    }];
    let mut leaf_order = vec![0usize];
    let mut root = 0usize;

    for _ in 1..k {
        // Choose any existing node: subdividing the edge above it (or the
        // root position when it is the root) gives 2j-3 equally likely spots.
        let x = rng.gen_range(0..nodes.len());
        let new_internal = nodes.len();
        nodes.push(Tmp {
            parent: nodes[x].parent,
            is_leaf: false,
        });
        let new_leaf = nodes.len();
        nodes.push(Tmp {
            parent: Some(new_internal),
            is_leaf: true,
        });
        nodes[x].parent = Some(new_internal);
        if x == root {
            root = new_internal;
        }
        leaf_order.push(new_leaf);
    }

    // Relabel: leaves 1..=k by insertion order, internals k+1.. by creation.
    let n = nodes.len() as u32;
    let mut id_of = vec![0 as NodeId; nodes.len()];
    for (i, &leaf) in leaf_order.iter().enumerate() {
        id_of[leaf] = (i + 1) as NodeId;
    }
    let mut next = k as u32 + 1;
    for (i, node) in nodes.iter().enumerate() {
        if !node.is_leaf {
            id_of[i] = next;
            next += 1;
        }
    }
    let mut parent = vec![None; n as usize + 1];
    for (i, node) in nodes.iter().enumerate() {
        if let Some(p) = node.parent {
            parent[id_of[i] as usize] = Some(id_of[p]);
        }
    }
    RootedTree::from_parents(n, id_of[root], parent, 3).expect("grown tree is valid")
}

/// Deterministic spider: a root with `d` pendant chains whose lengths
/// partition `n - 1` as evenly as possible. The adversarial family for
/// path-query reconstruction.
pub fn gen_spider_tree(n: u32, d: u32) -> Result<RootedTree, GenError> {
    if d < 2 {
        return Err(GenError::BadParameter("need d >= 2"));
    }
    if n < d + 1 {
        return Err(GenError::Infeasible { n, d });
    }
    let chains = d;
    let total = n - 1;
    let base = total / chains;
    let extra = total % chains;
    let mut parent = vec![None; n as usize + 1];
    let mut next: NodeId = 2;
    for c in 0..chains {
        let len = base + u32::from(c < extra);
        let mut prev: NodeId = 1;
        for _ in 0..len {
            parent[next as usize] = Some(prev);
            prev = next;
            next += 1;
        }
    }
    RootedTree::from_parents(n, 1, parent, d).map_err(|_| GenError::Infeasible { n, d })
}
