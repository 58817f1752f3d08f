//! The responder side: answers batches of relative-distance and path queries
//! from a hidden [`RootedTree`], and the [`QueryLedger`] that accounts for
//! query complexity Q (total queries) and round complexity R (batches).

use std::fmt;

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::tree::{NodeId, RootedTree};

/// One oracle query. `Closer` operands must be three distinct leaves;
/// `Path(u, v)` asks whether `u` is an ancestor of `v` (reflexively).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    Closer(NodeId, NodeId, NodeId),
    Path(NodeId, NodeId),
}

/// Answer to a [`Query`], positionally aligned with its batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    /// The two operands with the deeper lowest common ancestor.
    CloserPair(NodeId, NodeId),
    /// 1 iff a directed path exists.
    PathBit(bool),
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Closer(u, v, w) => write!(f, "C({},{},{})", u, v, w),
            Query::Path(u, v) => write!(f, "P({},{})", u, v),
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::CloserPair(x, y) => write!(f, "({},{})", x, y),
            Answer::PathBit(b) => write!(f, "{}", u8::from(*b)),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("a round must contain at least one query")]
    EmptyBatch,
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("closer operand {0} is not a leaf")]
    NotALeaf(NodeId),
    #[error("closer operands must be three distinct leaves")]
    OperandsNotDistinct,
    #[error("closer({0},{1},{2}) has no unique closest pair; the tree is not proper binary")]
    AmbiguousCloser(NodeId, NodeId, NodeId),
}

/// One answered round: a batch of mutually independent queries.
#[derive(Debug, Clone, Default)]
pub struct Round {
    pub queries: Vec<Query>,
    pub answers: Vec<Answer>,
}

/// Append-only record of rounds. `total_queries` is Q and `total_rounds`
/// is R for the run that produced it.
///
/// In sequential mode every recorded query becomes its own round, so R = Q;
/// the queries themselves are unchanged. With contents disabled only the
/// per-round sizes are kept, which is enough for Q/R accounting on runs too
/// large to transcribe.
#[derive(Debug, Clone)]
pub struct QueryLedger {
    sequential: bool,
    keep_contents: bool,
    rounds: Vec<Round>,
    round_sizes: Vec<u32>,
    total_queries: u64,
}

impl QueryLedger {
    /// Batched ledger with full transcripts.
    pub fn new() -> Self {
        Self::with_options(false, true)
    }

    /// One query per round (R = Q), with full transcripts.
    pub fn sequential() -> Self {
        Self::with_options(true, true)
    }

    /// Batched ledger that keeps only Q/R counters and round sizes.
    pub fn counting_only() -> Self {
        Self::with_options(false, false)
    }

    pub fn with_options(sequential: bool, keep_contents: bool) -> Self {
        Self {
            sequential,
            keep_contents,
            rounds: Vec::new(),
            round_sizes: Vec::new(),
            total_queries: 0,
        }
    }

    pub fn is_sequential(&self) -> bool {
        self.sequential
    }

    pub fn keeps_contents(&self) -> bool {
        self.keep_contents
    }

    pub(crate) fn record(&mut self, queries: &[Query], answers: &[Answer]) {
        debug_assert_eq!(queries.len(), answers.len());
        self.total_queries += queries.len() as u64;
        if self.sequential {
            for i in 0..queries.len() {
                self.round_sizes.push(1);
                if self.keep_contents {
                    self.rounds.push(Round {
                        queries: vec![queries[i]],
                        answers: vec![answers[i]],
                    });
                }
            }
        } else {
            self.round_sizes.push(queries.len() as u32);
            if self.keep_contents {
                self.rounds.push(Round {
                    queries: queries.to_vec(),
                    answers: answers.to_vec(),
                });
            }
        }
    }

    /// Q: total queries across all rounds.
    pub fn total_queries(&self) -> u64 {
        self.total_queries
    }

    /// R: number of rounds.
    pub fn total_rounds(&self) -> u64 {
        self.round_sizes.len() as u64
    }

    /// Recorded rounds (empty when built with [`QueryLedger::counting_only`]).
    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn round_sizes(&self) -> &[u32] {
        &self.round_sizes
    }

    /// Transcript dump: for round k the lines `R<k>: q1;q2;...` and
    /// `A<k>: a1;a2;...`, queries as `C(u,v,w)` / `P(u,v)`, answers as
    /// `(x,y)` / `0|1`.
    pub fn transcript(&self) -> String {
        use fmt::Write;
        let mut out = String::new();
        for (k, round) in self.rounds.iter().enumerate() {
            write!(out, "R{}: ", k + 1).unwrap();
            for (i, q) in round.queries.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                }
                write!(out, "{}", q).unwrap();
            }
            out.push('\n');
            write!(out, "A{}: ", k + 1).unwrap();
            for (i, a) in round.answers.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                }
                write!(out, "{}", a).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

impl Default for QueryLedger {
    fn default() -> Self {
        Self::new()
    }
}

/// Closer queries at or above this count route a batch to rayon when the
/// `parallel` feature is enabled. Path queries are O(1) interval tests and
/// evaluate faster sequentially; closer queries walk parent chains for
/// three lca computations each (see the `batch_eval` bench).
#[cfg(feature = "parallel")]
const PARALLEL_CLOSER_MIN: usize = 4096;

/// The responder: answers queries from a hidden tree. Evaluation is pure,
/// so a round's queries may be answered in parallel; answers always come
/// back in batch order.
#[derive(Debug, Clone)]
pub struct Oracle {
    tree: RootedTree,
}

impl Oracle {
    pub fn new(tree: RootedTree) -> Self {
        Self { tree }
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    /// Answer one batch as a single round: the ledger gains one round,
    /// Q += |batch|, R += 1 (or |batch| single-query rounds in sequential
    /// mode). Duplicate queries are answered and counted as issued.
    pub fn answer_batch(
        &self,
        batch: &[Query],
        ledger: &mut QueryLedger,
    ) -> Result<Vec<Answer>, OracleError> {
        if batch.is_empty() {
            return Err(OracleError::EmptyBatch);
        }
        let answers = self.eval_batch(batch)?;
        ledger.record(batch, &answers);
        Ok(answers)
    }

    /// `count(s, W)`: issue `|W|` path queries as one round and return the
    /// number of 1-answers, i.e. the number of descendants of `s` in `W`.
    pub fn count(
        &self,
        s: NodeId,
        w: &[NodeId],
        ledger: &mut QueryLedger,
    ) -> Result<u32, OracleError> {
        let batch: Vec<Query> = w.iter().map(|&v| Query::Path(s, v)).collect();
        let answers = self.answer_batch(&batch, ledger)?;
        Ok(answers
            .iter()
            .filter(|a| matches!(a, Answer::PathBit(true)))
            .count() as u32)
    }

    fn eval_batch(&self, batch: &[Query]) -> Result<Vec<Answer>, OracleError> {
        #[cfg(feature = "parallel")]
        {
            let closers = batch
                .iter()
                .filter(|q| matches!(q, Query::Closer(..)))
                .count();
            if closers >= PARALLEL_CLOSER_MIN {
                return self.eval_batch_parallel(batch);
            }
        }
        self.eval_batch_sequential(batch)
    }

    /// Evaluate a batch one query at a time (no ledger side effects).
    pub fn eval_batch_sequential(&self, batch: &[Query]) -> Result<Vec<Answer>, OracleError> {
        batch.iter().map(|&q| self.eval_query(q)).collect()
    }

    /// Evaluate a batch with rayon (no ledger side effects). Answers are in
    /// batch order regardless of evaluation order.
    #[cfg(feature = "parallel")]
    pub fn eval_batch_parallel(&self, batch: &[Query]) -> Result<Vec<Answer>, OracleError> {
        batch.par_iter().map(|&q| self.eval_query(q)).collect()
    }

    fn eval_query(&self, q: Query) -> Result<Answer, OracleError> {
        match q {
            Query::Path(u, v) => {
                let bit = self
                    .tree
                    .is_ancestor(u, v)
                    .map_err(|_| OracleError::UnknownNode(if self.tree.contains(u) { v } else { u }))?;
                Ok(Answer::PathBit(bit))
            }
            Query::Closer(u, v, w) => {
                if u == v || u == w || v == w {
                    return Err(OracleError::OperandsNotDistinct);
                }
                for x in [u, v, w] {
                    if !self.tree.contains(x) {
                        return Err(OracleError::UnknownNode(x));
                    }
                    if !self.tree.is_leaf(x) {
                        return Err(OracleError::NotALeaf(x));
                    }
                }
                let duv = self.tree.depth(self.tree.lca(u, v).expect("valid ids"));
                let duw = self.tree.depth(self.tree.lca(u, w).expect("valid ids"));
                let dvw = self.tree.depth(self.tree.lca(v, w).expect("valid ids"));
                // The unique strictly deepest pairwise lca wins.
                if duv > duw && duv > dvw {
                    Ok(Answer::CloserPair(u, v))
                } else if duw > duv && duw > dvw {
                    Ok(Answer::CloserPair(u, w))
                } else if dvw > duv && dvw > duw {
                    Ok(Answer::CloserPair(v, w))
                } else {
                    Err(OracleError::AmbiguousCloser(u, v, w))
                }
            }
        }
    }
}

/// Recompute every recorded answer against the tree and report the first
/// mismatch. For `Closer` answers this checks the returned pair's lca is
/// strictly deeper than both alternatives.
pub fn verify_transcript(tree: &RootedTree, ledger: &QueryLedger) -> Result<(), String> {
    for (k, round) in ledger.rounds().iter().enumerate() {
        if round.queries.len() != round.answers.len() {
            return Err(format!("round {}: query/answer length mismatch", k + 1));
        }
        for (q, a) in round.queries.iter().zip(&round.answers) {
            match (*q, *a) {
                (Query::Path(u, v), Answer::PathBit(bit)) => {
                    let want = tree
                        .is_ancestor(u, v)
                        .map_err(|e| format!("round {}: {}", k + 1, e))?;
                    if want != bit {
                        return Err(format!(
                            "round {}: {} answered {} but tree says {}",
                            k + 1,
                            q,
                            u8::from(bit),
                            u8::from(want)
                        ));
                    }
                }
                (Query::Closer(u, v, w), Answer::CloserPair(x, y)) => {
                    let pair_ok = [(u, v), (u, w), (v, w)]
                        .into_iter()
                        .any(|(p, q2)| (p, q2) == (x, y) || (q2, p) == (x, y));
                    if !pair_ok {
                        return Err(format!(
                            "round {}: {} answered ({},{}) which is not an operand pair",
                            k + 1,
                            q,
                            x,
                            y
                        ));
                    }
                    let depth_of = |a: NodeId, b: NodeId| -> Result<u32, String> {
                        Ok(tree.depth(tree.lca(a, b).map_err(|e| e.to_string())?))
                    };
                    let dxy = depth_of(x, y)?;
                    let z = [u, v, w]
                        .into_iter()
                        .find(|&t| t != x && t != y)
                        .expect("third operand");
                    if dxy <= depth_of(x, z)? || dxy <= depth_of(y, z)? {
                        return Err(format!(
                            "round {}: {} answered ({},{}) but its lca is not strictly deepest",
                            k + 1,
                            q,
                            x,
                            y
                        ));
                    }
                }
                _ => {
                    return Err(format!(
                        "round {}: answer kind does not match query {}",
                        k + 1,
                        q
                    ))
                }
            }
        }
    }
    // Counter arithmetic.
    let q_sum: u64 = ledger.round_sizes().iter().map(|&s| s as u64).sum();
    if q_sum != ledger.total_queries() {
        return Err(format!(
            "ledger total_queries {} != sum of round sizes {}",
            ledger.total_queries(),
            q_sum
        ));
    }
    if ledger.total_rounds() != ledger.round_sizes().len() as u64 {
        return Err("ledger total_rounds does not match round count".into());
    }
    Ok(())
}
