//! Reconstruct a proper binary tree from relative-distance queries on its
//! leaves.
//!
//! Each call picks two random leaves `a`, `b`, splits the rest with one
//! round of `closer(a, b, c)` queries into the leaves close to `a`, close to
//! `b`, and the remainder, recurses on the three parts as sibling scheduler
//! tasks, and links the merged `a`/`b` subtree into the remainder tree with
//! one more round.

use std::collections::HashMap;
use std::future::Future;
use std::pin::Pin;

use rand::Rng;

use crate::leaf_tree::LeafTree;
use crate::oracle::{Answer, Oracle, Query, QueryLedger};
use crate::sched::{self, Ctx};
use crate::tree::NodeId;

use super::ReconError;

/// Outcome of one splitting round: `closer(a, b, c) = (a, c)` puts `c` in
/// `close_to_a`, `(b, c)` in `close_to_b`, `(a, b)` in `remaining`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafPartition {
    pub a: NodeId,
    pub b: NodeId,
    pub close_to_a: Vec<NodeId>,
    pub close_to_b: Vec<NodeId>,
    pub remaining: Vec<NodeId>,
}

/// Reconstruct the oracle tree's shape over `leaves`. The output is
/// leaf-isomorphic to the hidden tree restricted to those leaves, with every
/// internal node labeled by a leaf pair whose lca it is.
pub fn reconstruct_phylogenetic(
    oracle: &Oracle,
    ledger: &mut QueryLedger,
    seed: u64,
    leaves: &[NodeId],
) -> Result<LeafTree, ReconError> {
    assert!(!leaves.is_empty(), "need at least one leaf");
    let leaves = leaves.to_vec();
    sched::run(oracle, ledger, seed, move |ctx| reconstruct_task(ctx, leaves))?
}

fn reconstruct_task(
    ctx: Ctx,
    leaves: Vec<NodeId>,
) -> Pin<Box<dyn Future<Output = Result<LeafTree, ReconError>>>> {
    Box::pin(async move {
        match leaves.len() {
            0 => unreachable!("recursive calls never receive an empty leaf set"),
            1 => Ok(LeafTree::leaf(leaves[0])),
            2 => Ok(LeafTree::join(
                (leaves[0], leaves[1]),
                LeafTree::leaf(leaves[0]),
                LeafTree::leaf(leaves[1]),
            )),
            3 => {
                let ans = ctx
                    .query(vec![Query::Closer(leaves[0], leaves[1], leaves[2])])
                    .await;
                let (x, y) = match ans[0] {
                    Answer::CloserPair(x, y) => (x, y),
                    _ => return Err(ReconError::Inconsistent("non-pair answer".into())),
                };
                let z = leaves
                    .iter()
                    .copied()
                    .find(|&l| l != x && l != y)
                    .expect("three distinct leaves");
                let pair = LeafTree::join((x, y), LeafTree::leaf(x), LeafTree::leaf(y));
                Ok(LeafTree::join((x, z), pair, LeafTree::leaf(z)))
            }
            n => {
                let mut rng = ctx.rng();
                let ai = rng.gen_range(0..n);
                let mut bi = rng.gen_range(0..n - 1);
                if bi >= ai {
                    bi += 1;
                }
                let (a, b) = (leaves[ai], leaves[bi]);
                let part = split_leaves(&ctx, a, b, &leaves).await?;

                let mut la = Vec::with_capacity(part.close_to_a.len() + 1);
                la.push(a);
                la.extend(&part.close_to_a);
                let mut lb = Vec::with_capacity(part.close_to_b.len() + 1);
                lb.push(b);
                lb.extend(&part.close_to_b);

                let ha = ctx.spawn(move |c| reconstruct_task(c, la));
                let hb = ctx.spawn(move |c| reconstruct_task(c, lb));
                let hr = if part.remaining.is_empty() {
                    None
                } else {
                    let lr = part.remaining.clone();
                    Some(ctx.spawn(move |c| reconstruct_task(c, lr)))
                };

                let ta = ha.await?;
                let tb = hb.await?;
                let v = LeafTree::join((a, b), ta, tb);
                match hr {
                    None => Ok(v),
                    Some(h) => {
                        let tr = h.await?;
                        link(&ctx, v, a, tr).await
                    }
                }
            }
        }
    })
}

/// Split `l \ {a, b}` with one round of `closer(a, b, c)` queries.
/// Consumes exactly one round (zero when there is nothing to split).
pub async fn split_leaves(
    ctx: &Ctx,
    a: NodeId,
    b: NodeId,
    l: &[NodeId],
) -> Result<LeafPartition, ReconError> {
    let others: Vec<NodeId> = l.iter().copied().filter(|&c| c != a && c != b).collect();
    let mut part = LeafPartition {
        a,
        b,
        close_to_a: Vec::new(),
        close_to_b: Vec::new(),
        remaining: Vec::new(),
    };
    if others.is_empty() {
        return Ok(part);
    }
    let batch: Vec<Query> = others.iter().map(|&c| Query::Closer(a, b, c)).collect();
    let answers = ctx.query(batch).await;
    for (&c, ans) in others.iter().zip(&answers) {
        match *ans {
            Answer::CloserPair(x, y) if (x, y) == (a, c) || (x, y) == (c, a) => {
                part.close_to_a.push(c)
            }
            Answer::CloserPair(x, y) if (x, y) == (b, c) || (x, y) == (c, b) => {
                part.close_to_b.push(c)
            }
            Answer::CloserPair(x, y) if (x, y) == (a, b) || (x, y) == (b, a) => {
                part.remaining.push(c)
            }
            other => {
                return Err(ReconError::Inconsistent(format!(
                    "closer({a},{b},{c}) answered {other:?}"
                )))
            }
        }
    }
    Ok(part)
}

/// Link `v` (the subtree rooted at the node labeled `lca(a, b)`) into `tr`.
///
/// One round queries `closer(a, c, d)` for every internal node of `tr`; the
/// unique edge `(u -> w)` where the answers flip from `(a, .)` to `(c, d)`
/// form is split by a new node labeled `lca(a, z)`. If no internal node
/// answers `(a, .)`, `v`'s parent lies above `tr`'s root and a new root
/// labeled `lca(a, g)` is created, `g` taken from the old root's label.
pub async fn link(
    ctx: &Ctx,
    v: LeafTree,
    a: NodeId,
    mut tr: LeafTree,
) -> Result<LeafTree, ReconError> {
    let internals = tr.internal_nodes();
    if internals.is_empty() {
        let g = tr
            .sole_leaf()
            .expect("a tree without internal nodes is a single leaf");
        return Ok(LeafTree::join((a, g), v, tr));
    }

    let batch: Vec<Query> = internals
        .iter()
        .map(|&(_, (c, d))| Query::Closer(a, c, d))
        .collect();
    let answers = ctx.query(batch).await;

    // answer per arena index
    let mut ans_of: HashMap<usize, Answer> = HashMap::with_capacity(internals.len());
    for (&(idx, _), &ans) in internals.iter().zip(&answers) {
        ans_of.insert(idx, ans);
    }

    let (leaf_pos, ranges) = tr.leaf_intervals();
    let in_subtree = |node: usize, leaf: NodeId| -> bool {
        let (lo, hi) = ranges[node];
        leaf_pos
            .get(&leaf)
            .is_some_and(|&p| p >= lo && p < hi)
    };

    let mut candidates: Vec<(usize, bool, NodeId)> = Vec::new();
    let mut saw_a_side = false;
    for &(u_idx, (c, d)) in &internals {
        let z = match ans_of[&u_idx] {
            Answer::CloserPair(x, y) if (x, y) == (a, c) || (x, y) == (c, a) => c,
            Answer::CloserPair(x, y) if (x, y) == (a, d) || (x, y) == (d, a) => d,
            Answer::CloserPair(x, y) if (x, y) == (c, d) || (x, y) == (d, c) => continue,
            other => {
                return Err(ReconError::Inconsistent(format!(
                    "closer({a},{c},{d}) answered {other:?}"
                )))
            }
        };
        saw_a_side = true;
        let (left, right) = tr.children_of(u_idx).expect("internal node");
        let (w, take_left) = if in_subtree(left, z) {
            (left, true)
        } else if in_subtree(right, z) {
            (right, false)
        } else {
            return Err(ReconError::Inconsistent(format!(
                "label leaf {z} is not under its node"
            )));
        };
        let is_edge = match tr.leaf_name(w) {
            Some(leaf) => leaf == z,
            None => {
                let (e, f) = tr.label_of(w).expect("internal node");
                matches!(ans_of[&w],
                    Answer::CloserPair(x, y) if (x, y) == (e, f) || (x, y) == (f, e))
            }
        };
        if is_edge {
            candidates.push((u_idx, take_left, z));
        }
    }

    match candidates.len() {
        0 if saw_a_side => Err(ReconError::Inconsistent(
            "answers place the new node inside the tree but no edge qualifies".into(),
        )),
        0 => {
            let (g, _) = tr.root_label().expect("tr has internal nodes");
            Ok(LeafTree::join((a, g), v, tr))
        }
        1 => {
            let (u_idx, take_left, z) = candidates[0];
            tr.splice_edge(u_idx, take_left, (a, z), v);
            Ok(tr)
        }
        k => Err(ReconError::Inconsistent(format!(
            "link found {k} candidate edges, expected one"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leaf_tree::leaf_isomorphic;
    use crate::oracle::tests::five_leaf_tree;
    use crate::sched::run;
    use crate::tree::RootedTree;

    fn recon(oracle: &Oracle, seed: u64) -> (LeafTree, QueryLedger) {
        let mut ledger = QueryLedger::new();
        let leaves = oracle.tree().leaves();
        let out = reconstruct_phylogenetic(oracle, &mut ledger, seed, &leaves).unwrap();
        (out, ledger)
    }

    #[test]
    fn single_leaf_needs_no_queries() {
        let t = RootedTree::from_parents(1, 1, vec![None, None], 3).unwrap();
        let oracle = Oracle::new(t);
        let (out, ledger) = recon(&oracle, 0);
        assert_eq!(out.sole_leaf(), Some(1));
        assert_eq!(ledger.total_queries(), 0);
        assert_eq!(ledger.total_rounds(), 0);
    }

    #[test]
    fn three_leaves_take_one_query() {
        // ((a,b),c): root 5, inner 4 over leaves 1,2; leaf 3.
        let t = RootedTree::from_edges(5, 5, &[(5, 4), (5, 3), (4, 1), (4, 2)], 3).unwrap();
        let oracle = Oracle::new(t.clone());
        let (out, ledger) = recon(&oracle, 1);
        assert_eq!(ledger.total_queries(), 1);
        assert_eq!(ledger.total_rounds(), 1);
        assert!(leaf_isomorphic(&out, &LeafTree::from_rooted(&t).unwrap()));
    }

    #[test]
    fn five_leaf_tree_is_exact_for_every_seed() {
        let t = five_leaf_tree();
        let oracle = Oracle::new(t.clone());
        let truth = LeafTree::from_rooted(&t).unwrap();
        for seed in 0..50 {
            let (out, _) = recon(&oracle, seed);
            assert!(leaf_isomorphic(&out, &truth), "seed {seed}");
            assert!(out.labels_sound(), "seed {seed}");
        }
    }

    #[test]
    fn split_examples_on_the_five_leaf_tree() {
        let oracle = Oracle::new(five_leaf_tree());
        let mut ledger = QueryLedger::new();
        // a=1 (a), b=2 (b): everything else shares lca(a,b)'s parent side.
        let part = run(&oracle, &mut ledger, 0, |ctx| async move {
            split_leaves(&ctx, 1, 2, &[1, 2, 3, 4, 5]).await
        })
        .unwrap()
        .unwrap();
        assert_eq!(part.close_to_a, Vec::<NodeId>::new());
        assert_eq!(part.close_to_b, Vec::<NodeId>::new());
        assert_eq!(part.remaining, vec![3, 4, 5]);

        // a=1 (a), b=3 (c): b lands close to a; d, e close to c.
        let part = run(&oracle, &mut ledger, 0, |ctx| async move {
            split_leaves(&ctx, 1, 3, &[1, 2, 3, 4, 5]).await
        })
        .unwrap()
        .unwrap();
        assert_eq!(part.close_to_a, vec![2]);
        assert_eq!(part.close_to_b, vec![4, 5]);
        assert_eq!(part.remaining, Vec::<NodeId>::new());
    }

    #[test]
    fn split_of_two_leaves_is_empty_and_free() {
        let oracle = Oracle::new(five_leaf_tree());
        let mut ledger = QueryLedger::new();
        let part = run(&oracle, &mut ledger, 0, |ctx| async move {
            split_leaves(&ctx, 1, 2, &[1, 2]).await
        })
        .unwrap()
        .unwrap();
        assert!(part.close_to_a.is_empty());
        assert!(part.remaining.is_empty());
        assert_eq!(ledger.total_queries(), 0);
    }

    #[test]
    fn partition_invariant_holds() {
        let t = crate::gen::gen_binary_tree(40, 3);
        let oracle = Oracle::new(t);
        let mut ledger = QueryLedger::new();
        let leaves = oracle.tree().leaves();
        let l2 = leaves.clone();
        let part = run(&oracle, &mut ledger, 0, |ctx| async move {
            split_leaves(&ctx, l2[0], l2[1], &l2).await
        })
        .unwrap()
        .unwrap();
        let mut all: Vec<NodeId> = part
            .close_to_a
            .iter()
            .chain(&part.close_to_b)
            .chain(&part.remaining)
            .copied()
            .chain([part.a, part.b])
            .collect();
        all.sort();
        assert_eq!(all, leaves);
    }

    #[test]
    fn link_onto_a_single_leaf_makes_a_new_root() {
        let oracle = Oracle::new(five_leaf_tree());
        let mut ledger = QueryLedger::new();
        // v = lca(a,b) over leaves 1,2; tr = single leaf 3.
        let out = run(&oracle, &mut ledger, 0, |ctx| async move {
            let v = LeafTree::join((1, 2), LeafTree::leaf(1), LeafTree::leaf(2));
            link(&ctx, v, 1, LeafTree::leaf(3)).await
        })
        .unwrap()
        .unwrap();
        assert_eq!(ledger.total_queries(), 0);
        assert_eq!(out.root_label(), Some((1, 3)));
        assert_eq!(out.leaves().len(), 3);
    }

    #[test]
    fn link_above_the_remainder_root() {
        // True tree ((a,b),((c,d),e)): linking lca(a,b) into ((c,d),e)
        // answers (c,d)-side everywhere, so the new root goes on top.
        let oracle = Oracle::new(five_leaf_tree());
        let mut ledger = QueryLedger::new();
        let out = run(&oracle, &mut ledger, 0, |ctx| async move {
            let v = LeafTree::join((1, 2), LeafTree::leaf(1), LeafTree::leaf(2));
            let tr = LeafTree::join(
                (3, 5),
                LeafTree::join((3, 4), LeafTree::leaf(3), LeafTree::leaf(4)),
                LeafTree::leaf(5),
            );
            link(&ctx, v, 1, tr).await
        })
        .unwrap()
        .unwrap();
        // Two internal nodes queried, one round.
        assert_eq!(ledger.total_queries(), 2);
        assert_eq!(ledger.total_rounds(), 1);
        let truth = LeafTree::from_rooted(oracle.tree()).unwrap();
        assert!(leaf_isomorphic(&out, &truth));
        assert_eq!(out.root_label(), Some((1, 3)));
    }

    #[test]
    fn link_splices_onto_an_inner_edge() {
        // True tree (((a,x),y),z): a=1, x=2, y=3, z=4.
        // Internals: 5=lca(a,x), 6=lca(a,y), 7=root.
        let t = RootedTree::from_edges(
            7,
            7,
            &[(7, 6), (7, 4), (6, 5), (6, 3), (5, 1), (5, 2)],
            3,
        )
        .unwrap();
        let oracle = Oracle::new(t.clone());
        let mut ledger = QueryLedger::new();
        // Insert v = lca(a,x) into tr = (y,z) shape: tr's one internal is
        // labeled lca(3,4); closer(1,3,4) = (1,3), so v splices onto the
        // edge toward leaf 3.
        let out = run(&oracle, &mut ledger, 0, |ctx| async move {
            let v = LeafTree::join((1, 2), LeafTree::leaf(1), LeafTree::leaf(2));
            let tr = LeafTree::join((3, 4), LeafTree::leaf(3), LeafTree::leaf(4));
            link(&ctx, v, 1, tr).await
        })
        .unwrap()
        .unwrap();
        let truth = LeafTree::from_rooted(&t).unwrap();
        assert!(leaf_isomorphic(&out, &truth));
        assert!(out.labels_sound());
    }

    #[test]
    fn random_trees_reconstruct_exactly() {
        for (leaves, seeds) in [(2u32, 4u64), (7, 4), (16, 3), (33, 3), (64, 2)] {
            for seed in 0..seeds {
                let t = crate::gen::gen_binary_tree(leaves, seed * 31 + leaves as u64);
                let oracle = Oracle::new(t.clone());
                let truth = LeafTree::from_rooted(&t).unwrap();
                let (out, ledger) = recon(&oracle, seed);
                assert!(
                    leaf_isomorphic(&out, &truth),
                    "leaves={leaves} seed={seed}"
                );
                assert!(out.labels_sound());
                crate::oracle::verify_transcript(oracle.tree(), &ledger).unwrap();
            }
        }
    }

    #[test]
    fn rounds_equal_the_spawn_tree_critical_path() {
        let t = crate::gen::gen_binary_tree(8, 11);
        let oracle = Oracle::new(t);
        let mut ledger = QueryLedger::new();
        let leaves = oracle.tree().leaves();
        let (res, stats) = sched::run_traced(&oracle, &mut ledger, 5, move |ctx| {
            reconstruct_task(ctx, leaves)
        })
        .unwrap();
        res.unwrap();
        assert_eq!(
            ledger.total_rounds(),
            sched::critical_path_rounds(&stats),
            "rounds must be the depth-wise maximum of per-task rounds"
        );
    }

    #[test]
    fn transcripts_are_seed_deterministic() {
        let t = crate::gen::gen_binary_tree(24, 2);
        let oracle = Oracle::new(t);
        let go = |seed| {
            let (_, ledger) = recon(&oracle, seed);
            ledger.transcript()
        };
        assert_eq!(go(7), go(7));
        assert_ne!(go(7), go(8));
    }
}
