//! Trial execution, run records, and CSV emission.

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use treequery::gen::{gen_binary_tree, gen_pruefer_tree, gen_spider_tree};
use treequery::leaf_tree::{leaf_isomorphic, LeafTree};
use treequery::newick::parse_newick;
use treequery::parent_array::parse_parent_array;
use treequery::recon::path::{
    brute_force_reconstruct, reconstruct_tree, PathConfig, SplitConstants,
};
use treequery::recon::relative::reconstruct_phylogenetic;
use treequery::{NodeId, Oracle, QueryLedger, RootedTree};

use crate::Algorithm;

/// One experiment row.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub algorithm: String,
    pub n: u32,
    pub d: u32,
    pub seed: u64,
    pub c1: f64,
    pub c2: f64,
    pub g: u32,
    pub queries: u64,
    pub rounds: u64,
    pub wall_ms: f64,
    pub correct: bool,
}

impl RunRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.3},{}",
            self.algorithm,
            self.n,
            self.d,
            self.seed,
            self.c1,
            self.c2,
            self.g,
            self.queries,
            self.rounds,
            self.wall_ms,
            self.correct
        )
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} n={} d={} seed={}: queries={} rounds={} correct={} ({:.1} ms)",
            self.algorithm,
            self.n,
            self.d,
            self.seed,
            self.queries,
            self.rounds,
            self.correct,
            self.wall_ms
        )
    }
}

/// Averaged row for one sweep point.
#[derive(Debug, Clone)]
pub struct AvgRecord {
    pub algorithm: String,
    pub n: u32,
    pub d: u32,
    pub c1: f64,
    pub c2: f64,
    pub g: u32,
    pub queries: f64,
    pub rounds: f64,
    pub wall_ms: f64,
    pub correct: bool,
}

impl AvgRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},AVG,{},{},{},{:.1},{:.1},{:.3},{}",
            self.algorithm,
            self.n,
            self.d,
            self.c1,
            self.c2,
            self.g,
            self.queries,
            self.rounds,
            self.wall_ms,
            self.correct
        )
    }
}

pub const CSV_HEADER: &str = "algorithm,n,d,seed,c1,c2,g,queries,rounds,wall_ms,correct";

/// Generator spec of the form `kind:n=...,d=...`.
#[derive(Debug, Clone)]
pub struct GenSpec {
    pub kind: String,
    pub n: u32,
    pub d: u32,
}

impl GenSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("bad generator spec `{s}`, expected kind:n=...,d=..."))?;
        if !matches!(kind, "pruefer" | "binary" | "spider") {
            return Err(format!("unknown generator kind `{kind}`"));
        }
        let mut n = None;
        let mut d = None;
        for field in rest.split(',').filter(|f| !f.is_empty()) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| format!("bad field `{field}` in generator spec"))?;
            match key {
                "n" => n = Some(value.parse().map_err(|_| format!("bad n `{value}`"))?),
                "d" => d = Some(value.parse().map_err(|_| format!("bad d `{value}`"))?),
                other => return Err(format!("unknown generator field `{other}`")),
            }
        }
        let n = n.ok_or("generator spec needs n=...")?;
        let d = match (kind, d) {
            ("binary", _) => 3,
            (_, Some(d)) => d,
            (_, None) => return Err(format!("generator `{kind}` needs d=...")),
        };
        Ok(Self {
            kind: kind.to_string(),
            n,
            d,
        })
    }

    pub fn generate(&self, seed: u64) -> Result<RootedTree, String> {
        match self.kind.as_str() {
            "pruefer" => gen_pruefer_tree(self.n, self.d, seed).map_err(|e| e.to_string()),
            "binary" => Ok(gen_binary_tree(self.n, seed)),
            "spider" => gen_spider_tree(self.n, self.d).map_err(|e| e.to_string()),
            _ => unreachable!("validated in parse"),
        }
    }
}

/// A loaded tree plus its label map (when it came from a Newick file).
#[derive(Debug, Clone)]
pub struct Instance {
    pub tree: RootedTree,
    pub labels: Option<Vec<Option<String>>>,
}

impl Instance {
    pub fn name_of(&self, id: NodeId) -> String {
        match self
            .labels
            .as_ref()
            .and_then(|ls| ls.get(id as usize))
            .and_then(|l| l.clone())
        {
            Some(l) => l,
            None => format!("n{id}"),
        }
    }

    /// label -> id, if every node is labeled and labels are distinct.
    pub fn label_index(&self) -> Option<HashMap<String, NodeId>> {
        let labels = self.labels.as_ref()?;
        let mut map = HashMap::new();
        for id in self.tree.nodes() {
            let l = labels.get(id as usize)?.clone()?;
            if map.insert(l, id).is_some() {
                return None;
            }
        }
        Some(map)
    }
}

/// Load a tree file: parent-array if the header parses, Newick otherwise.
pub fn load_tree(path: &Path) -> Result<Instance, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Ok(tree) = parse_parent_array(&text) {
        return Ok(Instance { tree, labels: None });
    }
    let doc = parse_newick(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(Instance {
        tree: doc.tree,
        labels: Some(doc.labels),
    })
}

#[derive(Debug, Clone)]
pub enum TrialSource {
    File(Instance),
    Random(GenSpec),
}

pub struct RunPlan {
    pub alg: Algorithm,
    pub source: TrialSource,
    pub trials: u32,
    pub seed: u64,
    pub d: Option<u32>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c2_mult: Option<f64>,
    pub g: Option<u32>,
    pub sequential: bool,
}

fn constants_for(plan: &RunPlan, d: u32) -> SplitConstants {
    let mut c = SplitConstants::defaults(d);
    if let Some(c1) = plan.c1 {
        c.c1 = c1;
    }
    if let Some(c2) = plan.c2 {
        c.c2 = c2;
    } else if let Some(mult) = plan.c2_mult {
        c.c2 *= mult;
    }
    if let Some(g) = plan.g {
        c.g = g;
    }
    c
}

/// Run all trials of a plan. Trials are independent (each owns its oracle,
/// ledger, and RNG) and may run concurrently; records come back in trial
/// order.
pub fn run_trials(plan: &RunPlan) -> Result<Vec<RunRecord>, String> {
    let trial_ids: Vec<u32> = (0..plan.trials).collect();
    #[cfg(feature = "parallel")]
    let iter = trial_ids.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = trial_ids.iter();

    let mut records: Vec<RunRecord> = iter
        .map(|&t| run_one(plan, t))
        .collect::<Result<Vec<_>, String>>()?;
    records.sort_by_key(|r| r.seed);
    Ok(records)
}

fn run_one(plan: &RunPlan, trial: u32) -> Result<RunRecord, String> {
    let seed = plan.seed.wrapping_add(trial as u64);
    let tree = match &plan.source {
        TrialSource::File(inst) => inst.tree.clone(),
        TrialSource::Random(spec) => spec.generate(seed)?,
    };
    let d = plan.d.unwrap_or_else(|| tree.max_degree().max(2));
    let n = tree.node_count();

    let start = Instant::now();
    let mut ledger = QueryLedger::with_options(plan.sequential, false);
    let (correct, c1, c2, g) = match plan.alg {
        Algorithm::RelDist => {
            if !tree.is_proper_binary() {
                return Err(format!(
                    "rel-dist requires a proper binary tree; the instance has max degree {}",
                    tree.max_degree()
                ));
            }
            let truth = LeafTree::from_rooted(&tree).map_err(|e| e.to_string())?;
            let oracle = Oracle::new(tree);
            let leaves = oracle.tree().leaves();
            let out = reconstruct_phylogenetic(&oracle, &mut ledger, seed, &leaves)
                .map_err(|e| e.to_string())?;
            (leaf_isomorphic(&out, &truth), 0.0, 0.0, 0)
        }
        Algorithm::Path => {
            let constants = constants_for(plan, d);
            let cfg = PathConfig {
                degree: d,
                constants,
                record_sets: false,
            };
            let oracle = Oracle::new(tree);
            let (root, res) =
                reconstruct_tree(&oracle, &mut ledger, seed, &cfg).map_err(|e| e.to_string())?;
            let got = RootedTree::from_edges(n, root, &res.edges, d)
                .map_err(|e| e.to_string())?;
            (
                got.same_edges(oracle.tree()),
                constants.c1,
                constants.c2,
                constants.g,
            )
        }
        Algorithm::PathBruteforce => {
            let oracle = Oracle::new(tree);
            let all: Vec<NodeId> = (1..=n).collect();
            let root = oracle.tree().root();
            let edges = brute_force_reconstruct(&oracle, &mut ledger, seed, &all, root)
                .map_err(|e| e.to_string())?;
            let got =
                RootedTree::from_edges(n, root, &edges, d).map_err(|e| e.to_string())?;
            (got.same_edges(oracle.tree()), 0.0, 0.0, 0)
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    Ok(RunRecord {
        algorithm: plan.alg.name(plan.sequential),
        n,
        d,
        seed,
        c1,
        c2,
        g,
        queries: ledger.total_queries(),
        rounds: ledger.total_rounds(),
        wall_ms,
        correct,
    })
}

pub fn average(records: &[RunRecord]) -> AvgRecord {
    let len = records.len().max(1) as f64;
    let first = records.first();
    AvgRecord {
        algorithm: first.map(|r| r.algorithm.clone()).unwrap_or_default(),
        n: first.map(|r| r.n).unwrap_or(0),
        d: first.map(|r| r.d).unwrap_or(0),
        c1: first.map(|r| r.c1).unwrap_or(0.0),
        c2: first.map(|r| r.c2).unwrap_or(0.0),
        g: first.map(|r| r.g).unwrap_or(0),
        queries: records.iter().map(|r| r.queries as f64).sum::<f64>() / len,
        rounds: records.iter().map(|r| r.rounds as f64).sum::<f64>() / len,
        wall_ms: records.iter().map(|r| r.wall_ms).sum::<f64>() / len,
        correct: records.iter().all(|r| r.correct),
    }
}

/// Write per-trial rows followed by AVG rows, creating the file with a
/// header (or appending when it already exists).
pub fn write_csv(
    path: &Path,
    records: &[RunRecord],
    averages: &[AvgRecord],
) -> Result<(), String> {
    let mut out = String::new();
    if !path.exists() {
        out.push_str(CSV_HEADER);
        out.push('\n');
    }
    for r in records {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    for a in averages {
        out.push_str(&a.csv_line());
        out.push('\n');
    }
    use std::io::Write;
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    f.write_all(out.as_bytes())
        .map_err(|e| format!("{}: {e}", path.display()))
}
