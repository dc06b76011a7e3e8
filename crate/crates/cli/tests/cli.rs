use std::path::PathBuf;
use std::process::{Command, Output};

fn graph(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "graphs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mpdag"));
    cmd.args(args).env_remove("MPDAG_ID_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Compares against `tests/golden/<name>.json`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, args: &[&str]) {
    let o = run(args);
    let got = stdout(&o);
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", &format!("{name}.json")]
        .iter()
        .collect();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(got, want, "{name}");
}

#[test]
fn identify_adjustment() {
    let o = run(&["identify", "--graph", &graph("adjust.txt"), "--x", "X", "--y", "Y", "--z", "V1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "INT_{v2} f(y|x,v1,v2) f(v2|v1)\n");
}

#[test]
fn identify_more_graphs() {
    let cases = [
        ("two_treatments.txt", "X1,X2", "V2", "INT_{v1} f(v1|x1) f(y|v1,x2,v2)\n"),
        ("unaffected.txt", "X", "Z", "f(y|z)\n"),
        ("rule2.txt", "X", "V1,V2", "f(y|x,v1,v2)\n"),
        ("nonfractional.txt", "X1,X2", "Z", "f(y|x1,z,x2)\n"),
    ];
    for (file, x, z, want) in cases {
        let o = run(&["identify", "--graph", &graph(file), "--x", x, "--y", "Y", "--z", z]);
        assert_eq!(o.status.code(), Some(0), "{file}");
        assert_eq!(stdout(&o), want, "{file}");
    }
}

#[test]
fn identify_latex() {
    let o = run(&[
        "identify", "--graph", &graph("fractional.txt"), "--x", "X", "--y", "Y", "--z", "Z", "--format", "latex",
    ]);
    assert!(stdout(&o).starts_with("\\frac{\\int "));
}

#[test]
fn not_identifiable_exits_three_with_certificate() {
    let o = run(&["identify", "--graph", &graph("fail.txt"), "--x", "X", "--y", "Y", "--z", "Z"]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.starts_with("NOT-IDENTIFIABLE\n"));
    assert!(out.contains("path: X -- Z"));
    assert!(out.contains("open path: X <- V1 -> Y"));
}

#[test]
fn adjacent_nodes_are_connected() {
    let o = run(&["dsep", "--graph", &graph("triangle_refined.txt"), "--x", "X", "--y", "Z", "--z", ""]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("CONNECTED\n"));
}

#[test]
fn cut_edges_before_testing() {
    let args = ["dsep", "--graph", &graph("rule3_chain.txt"), "--x", "X", "--y", "Y", "--z", "Z"];
    assert_eq!(stdout(&run(&args)), "SEPARATED\n");
    let o = run(&["dsep", "--graph", &graph("triangle_refined.txt"), "--x", "X", "--y", "Z", "--cut-into", "Y"]);
    assert!(stdout(&o).starts_with("CONNECTED"));
}

#[test]
fn dag_counts() {
    let o = run(&["dags", "--graph", &graph("triangle.txt")]);
    assert!(stdout(&o).starts_with("# 6 DAGs\n"));
    assert_eq!(stdout(&o).matches("# DAG ").count(), 6);
    let o = run(&["dags", "--graph", &graph("triangle_refined.txt"), "--limit", "1"]);
    assert!(stdout(&o).starts_with("# 2 DAGs\n"));
    assert_eq!(stdout(&o).matches("# DAG ").count(), 1);
}

#[test]
fn complete_output_parses_back() {
    let o = run(&["complete", "--graph", &graph("triangle.txt"), "--orient", "X>Y", "--orient", "Z>Y"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let g = mpdag_core::graph::Pdag::parse(&text).unwrap();
    assert_eq!(g.to_text().trim_end(), text.trim_end());
    assert_eq!(g.undirected_count(), 1);
}

#[test]
fn reach_and_pco() {
    let o = run(&["reach", "--graph", &graph("unaffected.txt"), "--kind", "possde", "--set", "X"]);
    assert_eq!(stdout(&o), "X,V2\n");
    let o = run(&["pco", "--graph", &graph("adjust.txt"), "--set", "V2,Y,V1"]);
    assert_eq!(stdout(&o), "1: V1,V2\n2: Y\n");
}

#[test]
fn enumerate_counts_leaves() {
    let args = ["enumerate", "--graph", &graph("fail.txt"), "--x", "X", "--y", "Y", "--z", "Z"];
    let out = stdout(&run(&args));
    assert_eq!(out.lines().count(), 2);
    assert!(out.contains("1x INT_{v1} f(y|x,z,v1) f(v1|z)"));
    let mut raw = args.to_vec();
    raw.push("--no-dedupe");
    let out = stdout(&run(&raw));
    assert!(out.starts_with("leaf 1: ("));
}

#[test]
fn input_errors_exit_two_and_name_the_flag() {
    let o = run(&["identify", "--graph", &graph("adjust.txt"), "--x", "Q", "--y", "Y"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--x"));
    let o = run(&["identify", "--graph", "no-such-file.txt", "--x", "X", "--y", "Y"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--graph"));
    let o = run(&["reach", "--graph", &graph("adjust.txt"), "--kind", "bogus", "--set", "X"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--kind"));
    let o = run(&["complete", "--graph", &graph("triangle.txt"), "--orient", "X"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--orient"));
}

#[test]
fn verify_is_deterministic_and_seed_overridable() {
    let args = [
        "verify", "--graph", &graph("fractional.txt"), "--x", "X", "--y", "Y", "--z", "Z", "--trials", "6",
    ];
    let a = run(&args);
    let mut four = args.to_vec();
    four.extend(["--jobs", "4"]);
    let b = run(&four);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).ends_with("PASS\n"));
    let c = run_env(&args, &[("MPDAG_ID_SEED", "42")]);
    assert!(stdout(&c).contains("seed: 42"));
}

#[test]
fn golden_json() {
    let (adjust, fractional, fail) = (graph("adjust.txt"), graph("fractional.txt"), graph("fail.txt"));
    golden("identify_adjust", &["--json", "identify", "--graph", &adjust, "--x", "X", "--y", "Y", "--z", "V1"]);
    golden("identify_fractional", &["--json", "identify", "--graph", &fractional, "--x", "X", "--y", "Y", "--z", "Z"]);
    golden("identify_fail", &["--json", "identify", "--graph", &fail, "--x", "X", "--y", "Y", "--z", "Z"]);
    golden("enumerate_fail", &["--json", "enumerate", "--graph", &fail, "--x", "X", "--y", "Y", "--z", "Z"]);
    golden("dsep_triangle_refined", &["--json", "dsep", "--graph", &graph("triangle_refined.txt"), "--x", "X", "--y", "Z"]);
    golden("dags_triangle_refined", &["--json", "dags", "--graph", &graph("triangle_refined.txt")]);
    golden("pco_adjust", &["--json", "pco", "--graph", &adjust, "--set", "V2,Y,V1"]);
    golden("reach_adjust", &["--json", "reach", "--graph", &adjust, "--kind", "an", "--set", "Y"]);
    golden("complete_triangle", &["--json", "complete", "--graph", &graph("triangle.txt"), "--orient", "X>Y"]);
}
