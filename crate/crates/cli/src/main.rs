//! Command-line harness: generate instances, run reconstructions, sweep
//! parameters, and verify outputs.

mod plot;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use treequery::gen::{gen_binary_tree, gen_pruefer_tree, gen_spider_tree};
use treequery::leaf_tree::{leaf_isomorphic, LeafTree};
use treequery::newick::write_newick;
use treequery::parent_array::write_parent_array;

use runner::{GenSpec, Instance, RunPlan, TrialSource};

#[derive(Parser)]
#[command(
    name = "treequery",
    about = "Reconstruct rooted trees from batched relative-distance and path queries",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TreeKind {
    Pruefer,
    Binary,
    Spider,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Relative-distance reconstruction of a proper binary tree's leaves.
    RelDist,
    /// Path-query reconstruction (root finding + splitting-edge recursion).
    Path,
    /// Quadratic path-query baseline: all ordered pairs in one round.
    PathBruteforce,
}

impl Algorithm {
    fn name(&self, sequential: bool) -> String {
        let base = match self {
            Algorithm::RelDist => "rel-dist",
            Algorithm::Path => "path",
            Algorithm::PathBruteforce => "path-bruteforce",
        };
        if sequential {
            format!("{base}-seq")
        } else {
            base.to_string()
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    /// Root and parent map must be identical.
    Edges,
    /// Leaf-labeled shape isomorphism (proper binary trees).
    LeafIso,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SweepAxis {
    N,
    D,
    C2,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as Newick or parent-array text.
    Gen {
        #[arg(long, value_enum)]
        kind: TreeKind,
        /// Node count (leaf count for --kind binary).
        #[arg(long)]
        n: u32,
        /// Degree bound (pruefer and spider).
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output path; `.nwk` selects Newick, anything else parent-array.
        /// Without it the tree is printed to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm for a number of trials and verify each result.
    Run {
        #[arg(long, value_enum)]
        alg: Algorithm,
        /// Tree file (Newick or parent-array).
        #[arg(long, conflicts_with = "random")]
        tree: Option<PathBuf>,
        /// Generator spec, e.g. `pruefer:n=2000,d=5` or `binary:n=500`.
        #[arg(long)]
        random: Option<String>,
        #[arg(long, default_value_t = 1)]
        trials: u32,
        #[arg(long)]
        seed: Option<u64>,
        /// Degree bound the querier assumes (default: the instance's).
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        c1: Option<f64>,
        /// Absolute C2 (default d+2).
        #[arg(long, conflicts_with = "c2_mult")]
        c2: Option<f64>,
        /// C2 as a multiple of the default d+2.
        #[arg(long)]
        c2_mult: Option<f64>,
        /// Brute-force threshold g.
        #[arg(long)]
        g: Option<u32>,
        /// Sequential mode: one query per round (R = Q).
        #[arg(long)]
        seq: bool,
        /// Append rows to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep one axis (n, d, or c2), averaging trials per point; emit CSV
    /// and an SVG plot of rounds and queries.
    Bench {
        #[arg(long, value_enum)]
        alg: Algorithm,
        #[arg(long, value_enum)]
        sweep: SweepAxis,
        /// Swept values, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Fixed n (when sweeping d or c2).
        #[arg(long)]
        n: Option<u32>,
        /// Fixed d (when sweeping n or c2).
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, default_value_t = 3)]
        trials: u32,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long, conflicts_with = "c2_mult")]
        c2: Option<f64>,
        #[arg(long)]
        c2_mult: Option<f64>,
        #[arg(long)]
        g: Option<u32>,
        #[arg(long)]
        seq: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Compare two tree files.
    Verify {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum)]
        mode: VerifyMode,
    },
}

/// Default seed: --seed, else TREEQUERY_SEED, else 1.
fn default_seed(cli_seed: Option<u64>) -> u64 {
    cli_seed
        .or_else(|| {
            std::env::var("TREEQUERY_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Gen {
            kind,
            n,
            d,
            seed,
            out,
        } => cmd_gen(kind, n, d, default_seed(seed), out),
        Command::Run {
            alg,
            tree,
            random,
            trials,
            seed,
            d,
            c1,
            c2,
            c2_mult,
            g,
            seq,
            csv,
        } => {
            let source = trial_source(tree, random)?;
            let plan = RunPlan {
                alg,
                source,
                trials,
                seed: default_seed(seed),
                d,
                c1,
                c2,
                c2_mult,
                g,
                sequential: seq,
            };
            let records = runner::run_trials(&plan)?;
            for rec in &records {
                println!("{}", rec.summary_line());
            }
            let all_correct = records.iter().all(|r| r.correct);
            if let Some(path) = csv {
                runner::write_csv(&path, &records, &[])?;
                println!("wrote {} rows to {}", records.len(), path.display());
            }
            Ok(if all_correct {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Bench {
            alg,
            sweep,
            values,
            n,
            d,
            trials,
            seed,
            c1,
            c2,
            c2_mult,
            g,
            seq,
            csv,
            plot,
        } => cmd_bench(
            alg, sweep, values, n, d, trials, default_seed(seed), c1, c2, c2_mult, g, seq, csv,
            plot,
        ),
        Command::Verify { a, b, mode } => cmd_verify(&a, &b, mode),
    }
}

fn trial_source(tree: Option<PathBuf>, random: Option<String>) -> Result<TrialSource, String> {
    match (tree, random) {
        (Some(path), None) => Ok(TrialSource::File(runner::load_tree(&path)?)),
        (None, Some(spec)) => Ok(TrialSource::Random(GenSpec::parse(&spec)?)),
        (None, None) => Err("one of --tree or --random is required".into()),
        (Some(_), Some(_)) => Err("--tree and --random are mutually exclusive".into()),
    }
}

fn cmd_gen(
    kind: TreeKind,
    n: u32,
    d: Option<u32>,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<ExitCode, String> {
    let tree = match kind {
        TreeKind::Pruefer => {
            let d = d.ok_or("--d is required for --kind pruefer")?;
            gen_pruefer_tree(n, d, seed).map_err(|e| e.to_string())?
        }
        TreeKind::Binary => gen_binary_tree(n, seed),
        TreeKind::Spider => {
            let d = d.ok_or("--d is required for --kind spider")?;
            gen_spider_tree(n, d).map_err(|e| e.to_string())?
        }
    };
    let as_newick = match &out {
        Some(path) => path.extension().is_some_and(|e| e == "nwk"),
        // Parent-array is the stdout default for spiders, Newick otherwise.
        None => !matches!(kind, TreeKind::Spider),
    };
    let text = if as_newick {
        let mut s = write_newick(&tree, None);
        s.push('\n');
        s
    } else {
        write_parent_array(&tree)
    };
    match out {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
            println!(
                "wrote {} tree: n={} max-degree={} root={} -> {}",
                kind_name(kind),
                tree.node_count(),
                tree.max_degree(),
                tree.root(),
                path.display()
            );
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn kind_name(kind: TreeKind) -> &'static str {
    match kind {
        TreeKind::Pruefer => "pruefer",
        TreeKind::Binary => "binary",
        TreeKind::Spider => "spider",
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    alg: Algorithm,
    sweep: SweepAxis,
    values: Vec<f64>,
    fixed_n: Option<u32>,
    fixed_d: Option<u32>,
    trials: u32,
    seed: u64,
    c1: Option<f64>,
    c2: Option<f64>,
    c2_mult: Option<f64>,
    g: Option<u32>,
    seq: bool,
    csv: Option<PathBuf>,
    plot: Option<PathBuf>,
) -> Result<ExitCode, String> {
    let mut rows = Vec::new();
    let mut averages = Vec::new();
    let mut points: Vec<(f64, f64, f64)> = Vec::new(); // (x, avg rounds, avg queries)
    let mut all_correct = true;

    for (pi, &value) in values.iter().enumerate() {
        let (n, d, c2_abs) = match sweep {
            SweepAxis::N => (value as u32, fixed_d.unwrap_or(5), c2),
            SweepAxis::D => (
                fixed_n.ok_or("--n is required when sweeping d")?,
                value as u32,
                c2,
            ),
            SweepAxis::C2 => (
                fixed_n.ok_or("--n is required when sweeping c2")?,
                fixed_d.unwrap_or(5),
                Some(value),
            ),
        };
        let d = if alg == Algorithm::RelDist { 3 } else { d };
        let spec = match alg {
            Algorithm::RelDist => GenSpec {
                kind: "binary".into(),
                n,
                d,
            },
            _ => GenSpec {
                kind: "pruefer".into(),
                n,
                d,
            },
        };
        let plan = RunPlan {
            alg,
            source: TrialSource::Random(spec),
            trials,
            seed: seed.wrapping_add(pi as u64 * 10_000),
            d: Some(d),
            c1,
            c2: c2_abs,
            c2_mult,
            g,
            sequential: seq,
        };
        let records = runner::run_trials(&plan)?;
        all_correct &= records.iter().all(|r| r.correct);
        let avg = runner::average(&records);
        println!(
            "{} {}={:<8} avg queries={:.0} avg rounds={:.0} correct={}",
            alg.name(seq),
            sweep_name(sweep),
            value,
            avg.queries,
            avg.rounds,
            avg.correct
        );
        points.push((value, avg.rounds, avg.queries));
        averages.push(avg);
        rows.extend(records);
    }

    if let Some(path) = &csv {
        runner::write_csv(path, &rows, &averages)?;
        println!("wrote {} rows to {}", rows.len() + averages.len(), path.display());
    }
    if let Some(path) = &plot {
        let svg = plot::two_panel_svg(
            &format!("{} sweep over {}", alg.name(seq), sweep_name(sweep)),
            sweep_name(sweep),
            &points,
        );
        std::fs::write(path, svg).map_err(|e| format!("{}: {e}", path.display()))?;
        println!("wrote plot to {}", path.display());
    }
    Ok(if all_correct {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn sweep_name(sweep: SweepAxis) -> &'static str {
    match sweep {
        SweepAxis::N => "n",
        SweepAxis::D => "d",
        SweepAxis::C2 => "c2",
    }
}

fn cmd_verify(a: &Path, b: &Path, mode: VerifyMode) -> Result<ExitCode, String> {
    let ta = runner::load_tree(a)?;
    let tb = runner::load_tree(b)?;
    let equal = match mode {
        VerifyMode::Edges => edges_equal(&ta, &tb),
        VerifyMode::LeafIso => leaf_iso_equal(&ta, &tb)?,
    };
    println!("{equal}");
    Ok(if equal {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// Edge equality. When both files carry complete, distinct labels the trees
/// are aligned by label first, so id assignment order does not matter.
fn edges_equal(a: &Instance, b: &Instance) -> bool {
    if a.tree.node_count() != b.tree.node_count() {
        return false;
    }
    match (a.label_index(), b.label_index()) {
        (Some(la), Some(lb)) if la.len() == lb.len() => {
            // Map b's ids into a's id space via labels.
            let n = a.tree.node_count();
            let mut map = vec![0u32; n as usize + 1];
            for (label, &ida) in &la {
                match lb.get(label) {
                    Some(&idb) => map[idb as usize] = ida,
                    None => return false,
                }
            }
            if map.iter().skip(1).any(|&m| m == 0) {
                return false;
            }
            if map[b.tree.root() as usize] != a.tree.root() {
                return false;
            }
            b.tree.nodes().all(|v| {
                let pa = a.tree.parent(map[v as usize]);
                let pb = b.tree.parent(v).map(|p| map[p as usize]);
                pa == pb
            })
        }
        _ => a.tree.same_edges(&b.tree),
    }
}

fn leaf_iso_equal(a: &Instance, b: &Instance) -> Result<bool, String> {
    // Compare shapes over leaf *names*: align b's leaf labels to a's ids.
    let la = LeafTree::from_rooted(&a.tree)
        .map_err(|e| format!("{}: {e}", "first tree is not proper binary"))?;
    let name_a: std::collections::HashMap<String, u32> = a
        .tree
        .leaves()
        .iter()
        .map(|&v| (a.name_of(v), v))
        .collect();
    let mut remap = vec![0u32; b.tree.node_count() as usize + 1];
    for &v in &b.tree.leaves() {
        match name_a.get(&b.name_of(v)) {
            Some(&ida) => remap[v as usize] = ida,
            None => return Ok(false),
        }
    }
    let lb = LeafTree::from_rooted(&b.tree)
        .map_err(|e| format!("{}: {e}", "second tree is not proper binary"))?;
    let lb = lb.relabel(&|id| remap[id as usize]);
    Ok(leaf_isomorphic(&la, &lb))
}
