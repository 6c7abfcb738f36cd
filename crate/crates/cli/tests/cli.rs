use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geohclust"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn golden_single_linkage_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("labels.csv");
    let input = fixture("seven.csv");
    let out = run(&["cluster", "-i", s(&input), "--h-max", "5", "--linkage", "single", "--cuts", "1,2,5", "-o", s(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(read(&out_path), read(&fixture("seven_single.csv")));
    let summary = stdout(&out);
    assert!(summary.contains("components         3"), "{summary}");
    assert!(summary.contains("edges              7"), "{summary}");
}

#[test]
fn golden_complete_linkage_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("labels.csv");
    let input = fixture("seven.csv");
    let out = run(&["cluster", "-i", s(&input), "--h-max", "5km", "--linkage", "complete", "--cuts", "1,2,5000m", "-o", s(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(read(&out_path), read(&fixture("seven_complete.csv")));
}

#[test]
fn golden_edge_list() {
    let input = fixture("seven.csv");
    let out = run(&["graph", "-i", s(&input), "--h-max", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), read(&fixture("seven_edges_h5.csv")));
}

#[test]
fn geojson_input() {
    let input = fixture("two.geojson");
    let out = run(&["cluster", "-i", s(&input), "--h-max", "2", "--cuts", "0.5,1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = stdout(&out);
    assert!(summary.contains("clusters h=0.5        2"), "{summary}");
    assert!(summary.contains("clusters h=1          1"), "{summary}");
}

fn cluster_counts(summary: &str) -> Vec<usize> {
    summary
        .lines()
        .filter(|l| l.starts_with("clusters h="))
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn counts_fall_to_component_count() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let gen = run(&["gen", "--scenario", "moderate", "--n", "1500", "--h-max", "20", "--seed", "4", "-o", s(&pts)]);
    assert_eq!(code(&gen), 0, "{}", stderr(&gen));
    let out = run(&["cluster", "-i", s(&pts), "--h-max", "20", "--linkage", "single", "--cuts", "1,2,5,10,20"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = stdout(&out);
    let counts = cluster_counts(&summary);
    assert_eq!(counts.len(), 5);
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    assert!(counts[0] > counts[4]);
    let k: usize = summary
        .lines()
        .find_map(|l| l.strip_prefix("components"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert_eq!(counts[4], k);
}

#[test]
fn label_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let pts2 = dir.path().join("pts2.csv");
    for p in [&pts, &pts2] {
        let gen = run(&["gen", "--scenario", "loose", "--n", "2000", "--h-max", "10", "--seed", "11", "-o", s(p)]);
        assert_eq!(code(&gen), 0);
    }
    assert_eq!(std::fs::read(&pts).unwrap(), std::fs::read(&pts2).unwrap());

    let variants: [&[&str]; 5] = [
        &[],
        &[],
        &["--parallel"],
        &["--order", "descending"],
        &["--order", "shuffle:99", "--parallel"],
    ];
    let mut files = Vec::new();
    for (i, extra) in variants.iter().enumerate() {
        let labels = dir.path().join(format!("labels{i}.csv"));
        let mut args = vec!["cluster", "-i", s(&pts), "--h-max", "10", "--linkage", "average", "--cuts", "2,5,10", "-o", s(&labels)];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        files.push(std::fs::read(&labels).unwrap());
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn verify_tight_scenario_passes() {
    let out = run(&["verify", "--scenario", "tight", "--n", "2000", "--h-max", "10"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = stdout(&out);
    assert_eq!(table.lines().filter(|l| l.ends_with(",PASS")).count(), 12);
    assert!(!table.contains("FAIL"));
}

#[test]
fn verify_point_file() {
    let input = fixture("seven.csv");
    let out = run(&["verify", "-i", s(&input), "--h-max", "5", "--linkage", "ward,average", "--cuts", "1,5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 5);
}

#[test]
fn cut_above_radius_is_usage_error() {
    let input = fixture("seven.csv");
    let out = run(&["cluster", "-i", s(&input), "--cuts", "25", "--h-max", "20"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("25"), "{}", stderr(&out));
}

#[test]
fn usage_errors() {
    let input = fixture("seven.csv");
    assert_eq!(code(&run(&["cluster", "-i", s(&input), "--h-max", "5"])), 2);
    assert_eq!(code(&run(&["cluster", "-i", s(&input), "--h-max", "5", "--cuts", "1", "--linkage", "median"])), 2);
    assert_eq!(code(&run(&["cluster", "-i", s(&input), "--h-max", "-5", "--cuts", "1"])), 2);
    let both = run(&["verify", "-i", s(&input), "--scenario", "tight", "--h-max", "5"]);
    assert_eq!(code(&both), 2);
    assert_eq!(code(&run(&["verify", "--h-max", "5"])), 2);
    assert_eq!(code(&run(&["bench", "--sizes", "10", "--h-max", "5"])), 2);
    assert_eq!(code(&run(&["cluster", "-i", s(&input), "--h-max", "5", "--cuts", "1", "--order", "sideways"])), 2);
}

#[test]
fn input_errors_name_the_problem() {
    let missing = run(&["cluster", "-i", "/nonexistent/points.csv", "--h-max", "5", "--cuts", "1"]);
    assert_eq!(code(&missing), 3);
    assert!(stderr(&missing).contains("/nonexistent/points.csv"));

    let bad = fixture("bad_lat.csv");
    let out = run(&["cluster", "-i", s(&bad), "--h-max", "5", "--cuts", "1"]);
    assert_eq!(code(&out), 3);
    let msg = stderr(&out);
    assert!(msg.contains("bad_lat.csv:3") && msg.contains("row 1"), "{msg}");

    let dir = tempfile::tempdir().unwrap();
    let unwritable = dir.path().join("missing/labels.csv");
    let input = fixture("seven.csv");
    let out = run(&["cluster", "-i", s(&input), "--h-max", "5", "--cuts", "1", "-o", s(&unwritable)]);
    assert_eq!(code(&out), 3);
}

#[test]
fn dense_guard_exit_code() {
    let out = run(&["verify", "--scenario", "tight", "--n", "50001", "--h-max", "1", "--linkage", "single"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("50001"));
}

#[test]
fn bench_writes_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("bench.csv");
    let json = dir.path().join("bench.json");
    let out = run(&[
        "bench", "--scenario", "tight", "--sizes", "300,600", "--h-max", "10", "--reps", "2", "--dense-limit", "400",
        "-o", s(&table), "--json", s(&json),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = read(&table);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("n,workload"));
    assert!(lines[2].contains("infeasible"));
    let report = read(&json);
    assert!(report.trim_start().starts_with('{'));
    assert_eq!(report.matches("\"distance_ratio\"").count(), 2);
}

#[test]
fn gen_constant_k() {
    let out = run(&["gen", "--constant-k", "50", "--n", "100", "--h-max", "10", "--seed", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 101);
    assert_eq!(text.lines().next(), Some("x,y"));
    assert_eq!(code(&run(&["gen", "--constant-k", "50", "--n", "100", "--h-max", "10", "--domain", "5"])), 2);
}
