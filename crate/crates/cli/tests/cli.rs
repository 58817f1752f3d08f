//! End-to-end tests of the `treequery` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treequery"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("treequery-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// CSV text with the wall_ms column blanked, for determinism comparisons.
fn strip_wall_ms(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            let mut fields = fields;
            if fields.len() == 11 && fields[9] != "wall_ms" {
                fields[9] = "-";
            }
            fields.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn gen_spider_has_the_requested_node_count() {
    let out = tmp("spider.par");
    run_ok(&[
        "gen", "--kind", "spider", "--n", "61", "--d", "6", "--out",
        out.to_str().unwrap(),
    ]);
    let text = read(&out);
    assert!(text.starts_with("61 6 1\n"));
    assert_eq!(text.lines().count(), 61); // header + 60 edges
}

#[test]
fn gen_is_deterministic_per_seed() {
    let a = tmp("bin-a.nwk");
    let b = tmp("bin-b.nwk");
    for out in [&a, &b] {
        run_ok(&[
            "gen", "--kind", "binary", "--n", "100", "--seed", "7", "--out",
            out.to_str().unwrap(),
        ]);
    }
    assert_eq!(read(&a), read(&b));
    let c = tmp("bin-c.nwk");
    run_ok(&[
        "gen", "--kind", "binary", "--n", "100", "--seed", "8", "--out",
        c.to_str().unwrap(),
    ]);
    assert_ne!(read(&a), read(&c));
}

#[test]
fn gen_pruefer_respects_the_degree_bound() {
    let out = tmp("pruefer.nwk");
    run_ok(&[
        "gen", "--kind", "pruefer", "--n", "1000", "--d", "5", "--seed", "1", "--out",
        out.to_str().unwrap(),
    ]);
    let doc = treequery::newick::parse_newick(&read(&out)).unwrap();
    assert_eq!(doc.tree.node_count(), 1000);
    assert_eq!(doc.tree.max_degree(), 5);
}

#[test]
fn run_path_emits_correct_csv_rows() {
    let csv = tmp("run-path.csv");
    let _ = std::fs::remove_file(&csv);
    run_ok(&[
        "run", "--alg", "path", "--random", "pruefer:n=300,d=5", "--trials", "3",
        "--seed", "5", "--c2-mult", "1", "--csv", csv.to_str().unwrap(),
    ]);
    let text = read(&csv);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "algorithm,n,d,seed,c1,c2,g,queries,rounds,wall_ms,correct");
    assert_eq!(lines.len(), 4); // header + 3 trials
    for line in &lines[1..] {
        assert!(line.starts_with("path,300,5,"));
        assert!(line.ends_with(",true"));
    }
}

#[test]
fn run_sequential_mode_has_rounds_equal_queries() {
    let tree = tmp("seq-tree.nwk");
    run_ok(&[
        "gen", "--kind", "binary", "--n", "80", "--seed", "3", "--out",
        tree.to_str().unwrap(),
    ]);
    let csv = tmp("run-seq.csv");
    let _ = std::fs::remove_file(&csv);
    run_ok(&[
        "run", "--alg", "rel-dist", "--tree", tree.to_str().unwrap(), "--seq",
        "--csv", csv.to_str().unwrap(),
    ]);
    let text = read(&csv);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "rel-dist-seq");
    let queries: u64 = fields[7].parse().unwrap();
    let rounds: u64 = fields[8].parse().unwrap();
    assert_eq!(queries, rounds);
    assert_eq!(fields[10], "true");
}

#[test]
fn run_bruteforce_issues_every_ordered_pair_in_one_round() {
    let csv = tmp("run-bf.csv");
    let _ = std::fs::remove_file(&csv);
    run_ok(&[
        "run", "--alg", "path-bruteforce", "--random", "pruefer:n=50,d=3",
        "--csv", csv.to_str().unwrap(),
    ]);
    let text = read(&csv);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[7], "2450"); // 50 * 49
    assert_eq!(fields[8], "1");
    assert_eq!(fields[10], "true");
}

#[test]
fn run_rejects_rel_dist_on_multifurcating_trees() {
    let tree = tmp("multi.nwk");
    std::fs::write(&tree, "((a,b),(c,d),e);\n").unwrap();
    let out = bin()
        .args(["run", "--alg", "rel-dist", "--tree", tree.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("proper binary"));
    // The same instance is fine for path queries.
    run_ok(&["run", "--alg", "path", "--tree", tree.to_str().unwrap()]);
}

#[test]
fn run_path_accepts_parent_array_files() {
    let tree = tmp("spider-input.txt");
    run_ok(&[
        "gen", "--kind", "spider", "--n", "41", "--d", "4", "--out",
        tree.to_str().unwrap(),
    ]);
    let out = run_ok(&["run", "--alg", "path", "--tree", tree.to_str().unwrap()]);
    let line = String::from_utf8_lossy(&out.stdout);
    assert!(line.contains("n=41 d=4"));
    assert!(line.contains("correct=true"));
}

#[test]
fn verify_mode_edges_and_leaf_iso() {
    let a = tmp("verify-a.nwk");
    std::fs::write(&a, "((a,b),(c,d));\n").unwrap();
    // Identical file: edges equal.
    run_ok(&["verify", "--a", a.to_str().unwrap(), "--b", a.to_str().unwrap(), "--mode", "edges"]);

    // Mirrored: not edge-identical ids but leaf-isomorphic.
    let b = tmp("verify-b.nwk");
    std::fs::write(&b, "((d,c),(b,a));\n").unwrap();
    run_ok(&[
        "verify", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(), "--mode", "leaf-iso",
    ]);

    // Perturbed topology: unequal in both modes.
    let c = tmp("verify-c.nwk");
    std::fs::write(&c, "((a,c),(b,d));\n").unwrap();
    let out = bin()
        .args(["verify", "--a", a.to_str().unwrap(), "--b", c.to_str().unwrap(), "--mode", "leaf-iso"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "false");
}

#[test]
fn verify_edges_compares_parent_arrays() {
    let a = tmp("pa-a.txt");
    std::fs::write(&a, "3 2 1\n2 1\n3 2\n").unwrap();
    let b = tmp("pa-b.txt");
    std::fs::write(&b, "3 2 1\n2 1\n3 1\n").unwrap();
    run_ok(&["verify", "--a", a.to_str().unwrap(), "--b", a.to_str().unwrap(), "--mode", "edges"]);
    let out = bin()
        .args(["verify", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(), "--mode", "edges"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn bench_sweep_writes_csv_avg_rows_and_svg() {
    let csv = tmp("bench.csv");
    let svg = tmp("bench.svg");
    let _ = std::fs::remove_file(&csv);
    run_ok(&[
        "bench", "--alg", "path", "--sweep", "n", "--values", "100,200,400",
        "--d", "4", "--trials", "2", "--seed", "11",
        "--csv", csv.to_str().unwrap(), "--plot", svg.to_str().unwrap(),
    ]);
    let text = read(&csv);
    let avg_rows: Vec<&str> = text.lines().filter(|l| l.contains(",AVG,")).collect();
    assert_eq!(avg_rows.len(), 3);
    assert_eq!(text.lines().count(), 1 + 3 * 2 + 3);
    let svg_text = read(&svg);
    assert!(svg_text.starts_with("<svg"));
    assert!(svg_text.contains("rounds"));
    assert!(svg_text.contains("queries"));
}

#[test]
fn bench_sweeps_over_d_and_c2() {
    let csv = tmp("bench-d.csv");
    let _ = std::fs::remove_file(&csv);
    run_ok(&[
        "bench", "--alg", "path", "--sweep", "d", "--values", "3,4,5", "--n", "200",
        "--trials", "2", "--seed", "13", "--csv", csv.to_str().unwrap(),
    ]);
    let text = read(&csv);
    assert_eq!(text.lines().filter(|l| l.contains(",AVG,")).count(), 3);

    // The C2 values tried in the d=5 experiments: 1, d+2, (d+2)^2.
    let csv = tmp("bench-c2.csv");
    let _ = std::fs::remove_file(&csv);
    run_ok(&[
        "bench", "--alg", "path", "--sweep", "c2", "--values", "1,7,49", "--n", "200",
        "--d", "5", "--trials", "2", "--seed", "17", "--csv", csv.to_str().unwrap(),
    ]);
    let text = read(&csv);
    let avg_rows: Vec<&str> = text.lines().filter(|l| l.contains(",AVG,")).collect();
    assert_eq!(avg_rows.len(), 3);
    for (row, c2) in avg_rows.iter().zip(["1", "7", "49"]) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[5], c2, "c2 column records the swept value");
        assert_eq!(fields.last(), Some(&"true"));
    }
}

#[test]
fn bench_csv_is_deterministic_modulo_wall_ms() {
    let run_once = |name: &str| -> String {
        let csv = tmp(name);
        let _ = std::fs::remove_file(&csv);
        run_ok(&[
            "bench", "--alg", "rel-dist", "--sweep", "n", "--values", "50,100",
            "--trials", "2", "--seed", "21", "--csv", csv.to_str().unwrap(),
        ]);
        strip_wall_ms(&read(&csv))
    };
    assert_eq!(run_once("det-a.csv"), run_once("det-b.csv"));
}

#[test]
fn env_var_supplies_the_default_seed() {
    let gen = |env: Option<&str>| {
        let out = tmp("env-seed.nwk");
        let _ = std::fs::remove_file(&out);
        let mut cmd = bin();
        cmd.args(["gen", "--kind", "binary", "--n", "40", "--out", out.to_str().unwrap()]);
        match env {
            Some(v) => cmd.env("TREEQUERY_SEED", v),
            None => cmd.env_remove("TREEQUERY_SEED"),
        };
        let res = cmd.output().unwrap();
        assert!(res.status.success());
        read(&out)
    };
    let with_env = gen(Some("99"));
    let explicit = {
        let out = tmp("env-seed-explicit.nwk");
        run_ok(&[
            "gen", "--kind", "binary", "--n", "40", "--seed", "99", "--out",
            out.to_str().unwrap(),
        ]);
        read(&out)
    };
    assert_eq!(with_env, explicit);
    assert_ne!(gen(None), with_env);
}
