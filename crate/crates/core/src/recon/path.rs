//! Reconstruct an arbitrary degree-d rooted tree over a known vertex set
//! from path queries.
//!
//! Root finding reduces to parallel maximum-finding over the ancestor set of
//! an arbitrary vertex (ancestry is a total order there). The main recursion
//! repeatedly samples a vertex, looks for a splitting-edge on its root path
//! by estimating descendant counts from small random samples, verifies the
//! candidate with one exact counting round, splits the vertex set at the
//! edge, and recurses on both sides as sibling scheduler tasks.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::future::Future;
use std::pin::Pin;
use std::rc::Rc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::oracle::{Answer, Oracle, Query, QueryLedger};
use crate::sched::{self, Ctx};
use crate::tree::NodeId;

use super::ReconError;

/// Tuning constants for the splitting-edge search. `m = ceil(c1 * sqrt(|V|))`
/// is the path sample size, `K = ceil(c2 * ln(|V|))` (capped at `|V|`) is the
/// descendant-estimate sample size, and subproblems of at most `g` vertices
/// are brute-forced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConstants {
    pub c1: f64,
    pub c2: f64,
    pub g: u32,
}

impl SplitConstants {
    /// Experiment defaults: `C1 = 2`, `C2 = d + 2`, `g = 32`.
    pub fn defaults(d: u32) -> Self {
        Self {
            c1: 2.0,
            c2: (d + 2) as f64,
            g: 32,
        }
    }

    /// Conservative constants: `C1 = 14` and
    /// `C2 = 6 (d+2)^2 (d+1)^2 ln(2n) / ln(n)`, large enough that every
    /// descendant estimate lands on the correct side of its threshold with
    /// probability `1 - 1/n^2`.
    pub fn theory(d: u32, n: u32) -> Self {
        let d = d as f64;
        let n = (n.max(3)) as f64;
        Self {
            c1: 14.0,
            c2: 6.0 * (d + 2.0).powi(2) * (d + 1.0).powi(2) * (2.0 * n).ln() / n.ln(),
            g: 32,
        }
    }

    pub(crate) fn m_for(&self, nv: usize) -> usize {
        ((self.c1 * (nv as f64).sqrt()).ceil() as usize).max(2)
    }

    pub(crate) fn k_for(&self, nv: usize) -> u64 {
        let k = (self.c2 * (nv as f64).ln()).ceil() as u64;
        k.clamp(1, nv as u64)
    }
}

/// Configuration for a path-query reconstruction run.
#[derive(Debug, Clone)]
pub struct PathConfig {
    /// Degree bound the querier assumes; thresholds depend on it. A mismatch
    /// with the true tree degrades success probability, never correctness.
    pub degree: u32,
    pub constants: SplitConstants,
    /// Record the vertex sets of every split for soundness checking.
    pub record_sets: bool,
}

impl PathConfig {
    pub fn new(degree: u32) -> Self {
        Self {
            degree,
            constants: SplitConstants::defaults(degree),
            record_sets: false,
        }
    }
}

/// One accepted split: the subproblem size, the accepted edge, and the exact
/// descendant count of the child within the subproblem.
#[derive(Debug, Clone)]
pub struct SplitEvent {
    pub v_size: u32,
    pub edge: (NodeId, NodeId),
    pub subtree_size: u32,
    /// `(V, V1)` when [`PathConfig::record_sets`] is on.
    pub sets: Option<(Vec<NodeId>, Vec<NodeId>)>,
}

/// Event log of a reconstruction run, for soundness assertions in tests.
#[derive(Debug, Clone, Default)]
pub struct PathEvents {
    pub splits: Vec<SplitEvent>,
    /// Every `(s, parent)` returned by find-parent.
    pub parents: Vec<(NodeId, NodeId)>,
}

/// Edges plus the event log of the run that produced them.
#[derive(Debug, Clone)]
pub struct PathResult {
    /// `(parent, child)` pairs; exactly the true edge set over the input.
    pub edges: Vec<(NodeId, NodeId)>,
    pub events: PathEvents,
}

struct PathRun {
    cfg: PathConfig,
    events: RefCell<PathEvents>,
}

type RunRef = Rc<PathRun>;
type EdgeFuture = Pin<Box<dyn Future<Output = Result<Vec<(NodeId, NodeId)>, ReconError>>>>;

/// Attempts per subproblem before declaring the oracle inconsistent; the
/// per-attempt success probability is at least 1/(2d), so this is never hit
/// with sane constants.
fn max_attempts(d: u32) -> u32 {
    128 * d.max(2)
}

async fn path_bits(ctx: &Ctx, batch: Vec<Query>) -> Vec<bool> {
    ctx.query(batch)
        .await
        .into_iter()
        .map(|a| match a {
            Answer::PathBit(b) => b,
            Answer::CloserPair(..) => unreachable!("path query answered with a pair"),
        })
        .collect()
}

/// Sort nodes that lie on one root path, topmost ancestor first, using a
/// single round of all-pairs path queries. Returns indices into `nodes`.
async fn ancestry_order(ctx: &Ctx, nodes: &[NodeId]) -> Vec<usize> {
    let k = nodes.len();
    if k <= 1 {
        return (0..k).collect();
    }
    let mut batch = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            batch.push(Query::Path(nodes[i], nodes[j]));
        }
    }
    let bits = path_bits(ctx, batch).await;
    let mut wins = vec![0usize; k];
    let mut at = 0;
    for i in 0..k {
        for j in i + 1..k {
            if bits[at] {
                wins[i] += 1;
            } else {
                wins[j] += 1;
            }
            at += 1;
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| wins[b].cmp(&wins[a]));
    order
}

/// Estimate `count(s, X_s)` for every node, each from `k` vertices sampled
/// from `vset` with replacement, merged into one round.
async fn estimate_counts(
    ctx: &Ctx,
    rng: &mut ChaCha8Rng,
    nodes: &[NodeId],
    vset: &[NodeId],
    k: u64,
) -> Vec<u32> {
    let k = k as usize;
    let mut batch = Vec::with_capacity(nodes.len() * k);
    for &s in nodes {
        for _ in 0..k {
            batch.push(Query::Path(s, vset[rng.gen_range(0..vset.len())]));
        }
    }
    let bits = path_bits(ctx, batch).await;
    (0..nodes.len())
        .map(|i| bits[i * k..(i + 1) * k].iter().filter(|&&b| b).count() as u32)
        .collect()
}

/// Doubly-logarithmic maximum finding over a set totally ordered by
/// ancestry: with k candidates the group size is `max(2, 2n/k)`, all pairs
/// inside a group are queried in one round, and the per-group maxima
/// survive. Rounds are ceil(log2 log2 n) + O(1); each round costs at most
/// n queries.
pub(crate) async fn max_finding_task(ctx: &Ctx, s: Vec<NodeId>) -> NodeId {
    assert!(!s.is_empty(), "max finding needs at least one node");
    let n0 = s.len();
    let mut cand = s;
    while cand.len() > 1 {
        let sigma = ((2 * n0) / cand.len()).max(2);
        let groups: Vec<Vec<NodeId>> = cand.chunks(sigma).map(|c| c.to_vec()).collect();
        let mut batch = Vec::new();
        for g in &groups {
            for i in 0..g.len() {
                for j in i + 1..g.len() {
                    batch.push(Query::Path(g[i], g[j]));
                }
            }
        }
        let bits = path_bits(ctx, batch).await;
        let mut at = 0;
        cand = groups
            .iter()
            .map(|g| {
                let k = g.len();
                let mut wins = vec![0usize; k];
                for i in 0..k {
                    for j in i + 1..k {
                        if bits[at] {
                            wins[i] += 1;
                        } else {
                            wins[j] += 1;
                        }
                        at += 1;
                    }
                }
                let best = (0..k).max_by_key(|&i| wins[i]).expect("non-empty group");
                g[best]
            })
            .collect();
    }
    cand[0]
}

/// Find the maximum (topmost ancestor) of a set totally ordered by ancestry.
pub fn max_finding(
    oracle: &Oracle,
    ledger: &mut QueryLedger,
    seed: u64,
    s: &[NodeId],
) -> Result<NodeId, ReconError> {
    let s = s.to_vec();
    sched::run(oracle, ledger, seed, move |ctx| async move {
        max_finding_task(&ctx, s).await
    })
    .map_err(Into::into)
}

async fn find_root_task(ctx: Ctx, v: Vec<NodeId>) -> NodeId {
    let mut rng = ctx.rng();
    let v0 = v[rng.gen_range(0..v.len())];
    let others: Vec<NodeId> = v.iter().copied().filter(|&u| u != v0).collect();
    if others.is_empty() {
        return v0;
    }
    let bits = path_bits(&ctx, others.iter().map(|&u| Query::Path(u, v0)).collect()).await;
    let ancestors: Vec<NodeId> = others
        .into_iter()
        .zip(&bits)
        .filter(|(_, &b)| b)
        .map(|(u, _)| u)
        .collect();
    if ancestors.is_empty() {
        v0
    } else {
        max_finding_task(&ctx, ancestors).await
    }
}

/// Find the root of the oracle tree restricted to `v`: one round finds the
/// ancestors of an arbitrary vertex, then maximum-finding returns the
/// topmost. `O(log log n)` rounds and `O(n)` queries.
pub fn find_root(
    oracle: &Oracle,
    ledger: &mut QueryLedger,
    seed: u64,
    v: &[NodeId],
) -> Result<NodeId, ReconError> {
    assert!(!v.is_empty(), "find_root needs at least one node");
    let v = v.to_vec();
    sched::run(oracle, ledger, seed, move |ctx| find_root_task(ctx, v)).map_err(Into::into)
}

async fn brute_force_task(
    ctx: &Ctx,
    v: &[NodeId],
    r: NodeId,
) -> Result<Vec<(NodeId, NodeId)>, ReconError> {
    let k = v.len();
    if k <= 1 {
        return Ok(Vec::new());
    }
    let mut batch = Vec::with_capacity(k * (k - 1));
    for i in 0..k {
        for j in 0..k {
            if i != j {
                batch.push(Query::Path(v[i], v[j]));
            }
        }
    }
    let bits = path_bits(ctx, batch).await;
    let at = |i: usize, j: usize| -> bool { bits[i * (k - 1) + if j < i { j } else { j - 1 }] };

    let mut edges = Vec::with_capacity(k - 1);
    for (ci, &c) in v.iter().enumerate() {
        let anc: Vec<usize> = (0..k).filter(|&ui| ui != ci && at(ui, ci)).collect();
        if c == r {
            if !anc.is_empty() {
                return Err(ReconError::Inconsistent(format!(
                    "subproblem root {r} has an ancestor inside the subproblem"
                )));
            }
            continue;
        }
        // The parent is the unique ancestor below every other ancestor.
        let mut parent = None;
        for &ui in &anc {
            if anc.iter().all(|&wi| wi == ui || at(wi, ui))
                && parent.replace(v[ui]).is_some()
            {
                return Err(ReconError::Inconsistent(format!(
                    "two parents found for node {c}"
                )));
            }
        }
        match parent {
            Some(p) => edges.push((p, c)),
            None => {
                return Err(ReconError::Inconsistent(format!(
                    "no parent found for node {c}"
                )))
            }
        }
    }
    Ok(edges)
}

/// Quadratic baseline: one round of all `|V| * (|V|-1)` ordered-pair path
/// queries, then read the parent of each node off the answer matrix. Usable
/// standalone as a test oracle for any size.
pub fn brute_force_reconstruct(
    oracle: &Oracle,
    ledger: &mut QueryLedger,
    seed: u64,
    v: &[NodeId],
    r: NodeId,
) -> Result<Vec<(NodeId, NodeId)>, ReconError> {
    let v = v.to_vec();
    sched::run(oracle, ledger, seed, move |ctx| async move {
        brute_force_task(&ctx, &v, r).await
    })?
}

async fn find_parent_inner(
    ctx: &Ctx,
    run: &RunRef,
    rng: &mut ChaCha8Rng,
    s: NodeId,
    vset: &[NodeId],
    known_ancestors: Option<Vec<NodeId>>,
) -> Result<Option<NodeId>, ReconError> {
    let mut y: Vec<NodeId> = match known_ancestors {
        Some(a) => a,
        None => {
            let others: Vec<NodeId> = vset.iter().copied().filter(|&u| u != s).collect();
            if others.is_empty() {
                return Ok(None);
            }
            let bits =
                path_bits(ctx, others.iter().map(|&u| Query::Path(u, s)).collect()).await;
            others
                .into_iter()
                .zip(&bits)
                .filter(|(_, &b)| b)
                .map(|(u, _)| u)
                .collect()
        }
    };
    if y.is_empty() {
        // s is the subproblem root; there is no parent to find.
        return Ok(None);
    }
    let m = run.cfg.constants.m_for(vset.len());
    for _ in 0..2 {
        if y.len() <= m {
            break;
        }
        let sample: Vec<NodeId> = (0..m)
            .map(|_| y[rng.gen_range(0..y.len())])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let x1 = if sample.len() == 1 {
            sample[0]
        } else {
            let order = ancestry_order(ctx, &sample).await;
            sample[*order.last().expect("non-empty sample")]
        };
        // Keep the ancestors at or below the lowest sample.
        let bits = path_bits(ctx, y.iter().map(|&u| Query::Path(x1, u)).collect()).await;
        y = y
            .into_iter()
            .zip(&bits)
            .filter(|(_, &b)| b)
            .map(|(u, _)| u)
            .collect();
    }
    if y.len() > m {
        return Ok(None);
    }
    let p = if y.len() == 1 {
        y[0]
    } else {
        let order = ancestry_order(ctx, &y).await;
        y[*order.last().expect("non-empty path")]
    };
    run.events.borrow_mut().parents.push((s, p));
    Ok(Some(p))
}

/// Find the parent of `s` within `vset`: take the ancestor set of `s`, then
/// up to two rounds of sample-sort-and-filter shrink it below `m`, and the
/// minimum of the final sort is the parent. Returns `None` on sampling
/// failure (probability at most `2/|V|`); a returned node is always the true
/// parent.
pub fn find_parent(
    oracle: &Oracle,
    ledger: &mut QueryLedger,
    seed: u64,
    s: NodeId,
    vset: &[NodeId],
    degree: u32,
    constants: SplitConstants,
) -> Result<Option<NodeId>, ReconError> {
    let run = Rc::new(PathRun {
        cfg: PathConfig {
            degree,
            constants,
            record_sets: false,
        },
        events: RefCell::new(PathEvents::default()),
    });
    let vset = vset.to_vec();
    sched::run(oracle, ledger, seed, move |ctx| async move {
        let mut rng = ctx.rng();
        find_parent_inner(&ctx, &run, &mut rng, s, &vset, None).await
    })?
}

/// On success also returns the `path(s, z)` bits (vset order), which are
/// exactly the split partition of the accepted edge.
async fn verify_splitting_edge_inner(
    ctx: &Ctx,
    run: &RunRef,
    rng: &mut ChaCha8Rng,
    s: NodeId,
    vset: &[NodeId],
) -> Result<Option<((NodeId, NodeId), Vec<bool>)>, ReconError> {
    // One round: the exact count of s's descendants, plus the ancestor set
    // of s (needed by find-parent and independent of the count's outcome).
    let nv = vset.len();
    let mut batch: Vec<Query> = Vec::with_capacity(2 * nv - 1);
    batch.extend(vset.iter().map(|&z| Query::Path(s, z)));
    let others: Vec<NodeId> = vset.iter().copied().filter(|&u| u != s).collect();
    batch.extend(others.iter().map(|&u| Query::Path(u, s)));
    let bits = path_bits(ctx, batch).await;
    let (desc_bits, anc_bits) = bits.split_at(nv);

    let cnt = desc_bits.iter().filter(|&&b| b).count() as u64;
    let d = run.cfg.degree as u64;
    if (nv as u64) <= cnt * (d + 2) && cnt * (d + 2) <= (nv as u64) * (d + 1) {
        let ancestors: Vec<NodeId> = others
            .into_iter()
            .zip(anc_bits)
            .filter(|(_, &b)| b)
            .map(|(u, _)| u)
            .collect();
        let parent = find_parent_inner(ctx, run, rng, s, vset, Some(ancestors)).await?;
        Ok(parent.map(|p| ((p, s), desc_bits.to_vec())))
    } else {
        Ok(None)
    }
}

/// Count the descendants of `s` within `vset` exactly (one round) and, when
/// the count lies within the splitting-edge bounds
/// `[|V|/(d+2), |V|(d+1)/(d+2)]`, return the edge `(find_parent(s), s)`.
pub fn verify_splitting_edge(
    oracle: &Oracle,
    ledger: &mut QueryLedger,
    seed: u64,
    s: NodeId,
    vset: &[NodeId],
    degree: u32,
    constants: SplitConstants,
) -> Result<Option<(NodeId, NodeId)>, ReconError> {
    let run = Rc::new(PathRun {
        cfg: PathConfig {
            degree,
            constants,
            record_sets: false,
        },
        events: RefCell::new(PathEvents::default()),
    });
    let vset = vset.to_vec();
    sched::run(oracle, ledger, seed, move |ctx| async move {
        let mut rng = ctx.rng();
        Ok(verify_splitting_edge_inner(&ctx, &run, &mut rng, s, &vset)
            .await?
            .map(|(edge, _)| edge))
    })?
}

async fn find_splitting_edge_inner(
    ctx: &Ctx,
    run: &RunRef,
    rng: &mut ChaCha8Rng,
    v_node: NodeId,
    mut y: Vec<NodeId>,
    vset: &[NodeId],
    r: NodeId,
) -> Result<Option<((NodeId, NodeId), Vec<bool>)>, ReconError> {
    let nv = vset.len();
    let k = run.cfg.constants.k_for(nv);
    let m = run.cfg.constants.m_for(nv);
    let d = run.cfg.degree as u64;
    let low = |c: u32| (c as u64) * (d + 1) < k;
    let high = |c: u32| (c as u64) * (d + 1) > k * d;
    let is_candidate = |c: u32| !low(c) && !high(c);
    // Among several candidates, verify the one whose estimate is closest to
    // K/2: balanced splits keep the recursion shallow.
    let pick_candidate = |counts: &[u32]| -> Option<usize> {
        (0..counts.len())
            .filter(|&i| is_candidate(counts[i]))
            .min_by_key(|&i| (2 * counts[i] as u64).abs_diff(k))
    };

    // Phase 1: runs only when the path is long relative to |V|/K; either
    // finds a candidate directly or shrinks Y to a short subpath.
    if (y.len() as u64) * k > nv as u64 {
        let mut set: BTreeSet<NodeId> = (0..m).map(|_| y[rng.gen_range(0..y.len())]).collect();
        set.insert(v_node);
        set.insert(r);
        let s_nodes: Vec<NodeId> = set.into_iter().collect();
        let counts = estimate_counts(ctx, rng, &s_nodes, vset, k).await;
        if counts.iter().all(|&c| low(c)) || counts.iter().all(|&c| high(c)) {
            return Ok(None);
        }
        if let Some(i) = pick_candidate(&counts) {
            return verify_splitting_edge_inner(ctx, run, rng, s_nodes[i], vset).await;
        }
        // Every estimate is decisively heavy or light: sort the sample by
        // ancestry and shrink Y to the first adjacent heavy/light gap.
        let order = ancestry_order(ctx, &s_nodes).await;
        let mut cut = None;
        for pair in order.windows(2) {
            if high(counts[pair[0]]) && low(counts[pair[1]]) {
                cut = Some((s_nodes[pair[0]], s_nodes[pair[1]]));
                break;
            }
        }
        // Sampling noise can leave no heavy-to-light transition.
        let Some((wn, zn)) = cut else {
            return Ok(None);
        };
        let mut batch = Vec::with_capacity(2 * y.len());
        for &t in &y {
            batch.push(Query::Path(wn, t));
            batch.push(Query::Path(t, zn));
        }
        let bits = path_bits(ctx, batch).await;
        y = y
            .iter()
            .enumerate()
            .filter(|(i, _)| bits[2 * i] && bits[2 * i + 1])
            .map(|(_, &t)| t)
            .collect();
    }

    // Phase 2: estimate every node on the (short) path.
    if (y.len() as u64) * k > nv as u64 {
        return Ok(None);
    }
    let counts = estimate_counts(ctx, rng, &y, vset, k).await;
    if let Some(i) = pick_candidate(&counts) {
        return verify_splitting_edge_inner(ctx, run, rng, y[i], vset).await;
    }
    Ok(None)
}

/// One splitting-edge attempt from the path `y` (the ancestors of `v_node`
/// within `vset`, including `v_node` and the subproblem root `r`). Returns
/// `None` on failure; each call succeeds with probability at least 1/(2d).
#[allow(clippy::too_many_arguments)]
pub fn find_splitting_edge(
    oracle: &Oracle,
    ledger: &mut QueryLedger,
    seed: u64,
    v_node: NodeId,
    y: &[NodeId],
    vset: &[NodeId],
    r: NodeId,
    degree: u32,
    constants: SplitConstants,
) -> Result<Option<(NodeId, NodeId)>, ReconError> {
    let run = Rc::new(PathRun {
        cfg: PathConfig {
            degree,
            constants,
            record_sets: false,
        },
        events: RefCell::new(PathEvents::default()),
    });
    let (y, vset) = (y.to_vec(), vset.to_vec());
    sched::run(oracle, ledger, seed, move |ctx| async move {
        let mut rng = ctx.rng();
        Ok(
            find_splitting_edge_inner(&ctx, &run, &mut rng, v_node, y, &vset, r)
                .await?
                .map(|(edge, _)| edge),
        )
    })?
}

fn path_task(ctx: Ctx, v: Vec<NodeId>, r: NodeId, run: RunRef) -> EdgeFuture {
    Box::pin(async move {
        if v.len() as u64 <= run.cfg.constants.g as u64 {
            return brute_force_task(&ctx, &v, r).await;
        }
        let mut rng = ctx.rng();
        for _attempt in 0..max_attempts(run.cfg.degree) {
            let v_node = v[rng.gen_range(0..v.len())];
            let bits = path_bits(&ctx, v.iter().map(|&z| Query::Path(z, v_node)).collect()).await;
            let y: Vec<NodeId> = v
                .iter()
                .zip(&bits)
                .filter(|(_, &b)| b)
                .map(|(&z, _)| z)
                .collect();
            let found =
                find_splitting_edge_inner(&ctx, &run, &mut rng, v_node, y, &v, r).await?;
            // The verification round already answered path(w, z) for every
            // z in V: those bits are the split.
            let Some(((u, w), bits)) = found else {
                continue;
            };
            let mut v1 = Vec::new();
            let mut v2 = Vec::new();
            for (&z, &b) in v.iter().zip(&bits) {
                if b {
                    v1.push(z);
                } else {
                    v2.push(z);
                }
            }
            run.events.borrow_mut().splits.push(SplitEvent {
                v_size: v.len() as u32,
                edge: (u, w),
                subtree_size: v1.len() as u32,
                sets: run.cfg.record_sets.then(|| (v.clone(), v1.clone())),
            });
            let (run1, run2) = (Rc::clone(&run), Rc::clone(&run));
            let h1 = ctx.spawn(move |c| path_task(c, v1, w, run1));
            let h2 = ctx.spawn(move |c| path_task(c, v2, r, run2));
            let mut edges = vec![(u, w)];
            edges.extend(h1.await?);
            edges.extend(h2.await?);
            return Ok(edges);
        }
        Err(ReconError::Inconsistent(format!(
            "no splitting edge found in {} attempts on {} vertices",
            max_attempts(run.cfg.degree),
            v.len()
        )))
    })
}

/// Reconstruct the exact edge set of the oracle tree restricted to `v`,
/// given its root `r`.
pub fn reconstruct_rooted_tree(
    oracle: &Oracle,
    ledger: &mut QueryLedger,
    seed: u64,
    v: &[NodeId],
    r: NodeId,
    cfg: &PathConfig,
) -> Result<PathResult, ReconError> {
    assert!(v.contains(&r), "root must be part of the vertex set");
    let run = Rc::new(PathRun {
        cfg: cfg.clone(),
        events: RefCell::new(PathEvents::default()),
    });
    let run2 = Rc::clone(&run);
    let v = v.to_vec();
    let edges = sched::run(oracle, ledger, seed, move |ctx| path_task(ctx, v, r, run2))??;
    let events = match Rc::try_unwrap(run) {
        Ok(inner) => inner.events.into_inner(),
        Err(rc) => rc.events.borrow().clone(),
    };
    Ok(PathResult { edges, events })
}

/// Full pipeline over the whole id universe `1..=n`: find the root, then
/// reconstruct the edge set, all in one scheduler session (Q and R
/// accumulate in the same ledger).
pub fn reconstruct_tree(
    oracle: &Oracle,
    ledger: &mut QueryLedger,
    seed: u64,
    cfg: &PathConfig,
) -> Result<(NodeId, PathResult), ReconError> {
    let n = oracle.tree().node_count();
    let all: Vec<NodeId> = (1..=n).collect();
    let run = Rc::new(PathRun {
        cfg: cfg.clone(),
        events: RefCell::new(PathEvents::default()),
    });
    let run2 = Rc::clone(&run);
    let out: Result<(NodeId, Vec<(NodeId, NodeId)>), ReconError> =
        sched::run(oracle, ledger, seed, move |ctx| async move {
            let v = all.clone();
            let root_handle = ctx.spawn(move |c| find_root_task(c, v));
            let r = root_handle.await;
            let recon_handle = ctx.spawn(move |c| path_task(c, all, r, run2));
            let edges = recon_handle.await?;
            Ok((r, edges))
        })?;
    let (r, edges) = out?;
    let events = match Rc::try_unwrap(run) {
        Ok(inner) => inner.events.into_inner(),
        Err(rc) => rc.events.borrow().clone(),
    };
    Ok((r, PathResult { edges, events }))
}
