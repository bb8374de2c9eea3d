use std::fs;
use std::path::{Path, PathBuf};

use caratheodory::cli::{run, EXIT_INPUT, EXIT_MEMBERSHIP, EXIT_OK, MAUREY_HEADER, TRACE_HEADER};
use caratheodory::experiment::CSV_HEADER;
use tempfile::TempDir;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn exec(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["caratheodory"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn file(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn solve_two_opposite_points() {
    let dir = TempDir::new().unwrap();
    let pts = file(&dir, "pts.csv", "# x,y\n1,0\n-1,0\n");
    let w = file(&dir, "w.csv", "0.5\n0.5\n");
    let o = exec(&["solve", "--points", s(&pts), "--weights", s(&w), "--p", "2", "--k", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.starts_with(&format!("{TRACE_HEADER}\n")));
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "2");
    assert_eq!(rows[1][2].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn solve_reports_certificate_for_off_hull_target() {
    let dir = TempDir::new().unwrap();
    let pts = file(&dir, "pts.csv", "0,0\n1,0\n0,1\n");
    let target = file(&dir, "a.csv", "3,3\n");
    let o = exec(&["solve", "--points", s(&pts), "--target", s(&target), "--p", "2", "--k", "5"]);
    assert_eq!(o.code, EXIT_MEMBERSHIP);
    let line = o.stdout.lines().find(|l| l.starts_with("separating_functional,")).unwrap();
    let phi: Vec<f64> = line.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
    for x in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] {
        assert!(phi[0] * (x[0] - 3.0) + phi[1] * (x[1] - 3.0) > 0.0);
    }

    let o = exec(&["solve", "--points", s(&pts), "--target", s(&target), "--p", "2", "--k", "5", "--json"]);
    assert_eq!(o.code, EXIT_MEMBERSHIP);
    let doc: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["membership_violated"]["functional"].as_array().unwrap().len(), 2);
}

#[test]
fn solve_rejects_non_smooth_exponent() {
    let dir = TempDir::new().unwrap();
    let pts = file(&dir, "pts.csv", "1,0\n-1,0\n");
    let w = file(&dir, "w.csv", "0.5\n0.5\n");
    for p in ["1", "inf"] {
        let o = exec(&["solve", "--points", s(&pts), "--weights", s(&w), "--p", p, "--k", "2"]);
        assert_eq!(o.code, EXIT_INPUT);
        assert!(o.stderr.contains("not uniformly smooth"), "{}", o.stderr);
    }
}

#[test]
fn solve_requires_exactly_one_target_source() {
    let dir = TempDir::new().unwrap();
    let pts = file(&dir, "pts.csv", "1,0\n-1,0\n");
    let w = file(&dir, "w.csv", "0.5\n0.5\n");
    let a = file(&dir, "a.csv", "0,0\n");
    let neither = exec(&["solve", "--points", s(&pts), "--p", "2", "--k", "2"]);
    assert_eq!(neither.code, EXIT_INPUT);
    let both = exec(&["solve", "--points", s(&pts), "--weights", s(&w), "--target", s(&a), "--p", "2", "--k", "2"]);
    assert_eq!(both.code, EXIT_INPUT);
}

#[test]
fn parse_errors_name_file_and_line() {
    let dir = TempDir::new().unwrap();
    let ragged = file(&dir, "ragged.csv", "1,0\n\n0,1,2\n");
    let w = file(&dir, "w.csv", "0.5\n0.5\n");
    let o = exec(&["solve", "--points", s(&ragged), "--weights", s(&w), "--p", "2", "--k", "2"]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("ragged.csv:3"), "{}", o.stderr);

    let bad = file(&dir, "bad.csv", "1,0\nx,1\n");
    let o = exec(&["solve", "--points", s(&bad), "--weights", s(&w), "--p", "2", "--k", "2"]);
    assert!(o.stderr.contains("bad.csv:2"), "{}", o.stderr);

    let nan = file(&dir, "nan.csv", "1,0\nNaN,1\n");
    let o = exec(&["solve", "--points", s(&nan), "--weights", s(&w), "--p", "2", "--k", "2"]);
    assert!(o.stderr.contains("nan.csv:2"), "{}", o.stderr);

    let pts = file(&dir, "pts.csv", "1,0\n-1,0\n");
    let neg = file(&dir, "neg.csv", "1.5\n-0.5\n");
    let o = exec(&["solve", "--points", s(&pts), "--weights", s(&neg), "--p", "2", "--k", "2"]);
    assert!(o.stderr.contains("neg.csv:2"), "{}", o.stderr);
}

#[test]
fn weights_are_renormalized_or_rejected() {
    let dir = TempDir::new().unwrap();
    let pts = file(&dir, "pts.csv", "1\n-1\n");
    let close = file(&dir, "close.csv", "0.500000001\n0.5\n");
    let o = exec(&["solve", "--points", s(&pts), "--weights", s(&close), "--p", "2", "--k", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let far = file(&dir, "far.csv", "0.6\n0.5\n");
    let o = exec(&["solve", "--points", s(&pts), "--weights", s(&far), "--p", "2", "--k", "2"]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("sum"), "{}", o.stderr);
    let wide = file(&dir, "wide.csv", "0.5,0.1\n0.5,0.1\n");
    let o = exec(&["solve", "--points", s(&pts), "--weights", s(&wide), "--p", "2", "--k", "2"]);
    assert_eq!(o.code, EXIT_INPUT);
}

#[test]
fn json_trace_schema() {
    let dir = TempDir::new().unwrap();
    let pts = file(&dir, "pts.csv", "1,0\n0,1\n-1,-1\n");
    let w = file(&dir, "w.csv", "0.25\n0.25\n0.5\n");
    let o = exec(&["solve", "--points", s(&pts), "--weights", s(&w), "--p", "3", "--k", "7", "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let doc: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    for key in ["chosen", "residual_norms", "bounds"] {
        assert_eq!(doc[key].as_array().unwrap().len(), 7, "{key}");
    }
    assert_eq!(doc["p"], 3.0);
    assert_eq!(doc["dim"], 2);
    assert!(doc["diam"].as_f64().unwrap() > 0.0);
    assert!((doc["constant_C"].as_f64().unwrap() - 14.7781121978613).abs() < 1e-12);
}

#[test]
fn trace_file_round_trips() {
    let dir = TempDir::new().unwrap();
    let rows = [[0.9, 0.1, -0.3], [-0.5, 0.4, 0.2], [0.1, -0.8, 0.5], [0.3, 0.3, -0.6], [-0.2, 0.0, 0.1]];
    let weights = [0.1, 0.3, 0.2, 0.25, 0.15];
    let pts_text: String = rows.iter().map(|r| format!("{},{},{}\n", r[0], r[1], r[2])).collect();
    let pts = file(&dir, "pts.csv", &pts_text);
    let w_text: String = weights.iter().map(|w| format!("{w}\n")).collect();
    let w = file(&dir, "w.csv", &w_text);
    let trace = dir.path().join("trace.csv");
    let o = exec(&[
        "solve", "--points", s(&pts), "--weights", s(&w), "--p", "1.5", "--k", "64", "--trace", s(&trace),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.starts_with("steps=64"));

    let a: Vec<f64> = (0..3).map(|c| rows.iter().zip(weights).map(|(r, w)| w * r[c]).sum()).collect();
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with(&format!("{TRACE_HEADER}\n")));
    let mut sum = [0.0; 3];
    for (j, row) in csv_rows(&text).iter().enumerate() {
        let k = row[0].parse::<usize>().unwrap();
        assert_eq!(k, j + 1);
        let idx: usize = row[1].parse().unwrap();
        for c in 0..3 {
            sum[c] += rows[idx][c];
        }
        let resid: f64 = (0..3)
            .map(|c| (sum[c] / k as f64 - a[c]).abs().powf(1.5))
            .sum::<f64>()
            .powf(1.0 / 1.5);
        assert!((resid - row[2].parse::<f64>().unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn colorful_commands() {
    let dir = TempDir::new().unwrap();
    let s1 = file(&dir, "s1.csv", "1,0\n-1,0\n");
    let s2 = file(&dir, "s2.csv", "0,1\n0,-1\n");
    let origin = file(&dir, "o.csv", "0,0\n");
    let o = exec(&["colorful", "--sets", s(&s1), s(&s2), "--target", s(&origin), "--p", "2", "--k", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows[0][1], "0");
    assert_eq!(rows[1][1], "0");
    assert!((rows[1][2].parse::<f64>().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);

    // equal sets reproduce solve
    let w = file(&dir, "w.csv", "0.5\n0.5\n");
    let single = exec(&["solve", "--points", s(&s1), "--weights", s(&w), "--p", "2", "--k", "5"]);
    let family = exec(&["colorful", "--sets", s(&s1), s(&s1), s(&s1), "--target", s(&origin), "--p", "2", "--k", "5"]);
    assert_eq!(single.stdout, family.stdout);

    // cycling past the list of files
    let o = exec(&["colorful", "--sets", s(&s1), s(&s2), "--target", s(&origin), "--p", "2", "--k", "9", "--json"]);
    assert_eq!(o.code, EXIT_OK);
    let doc: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    let sources: Vec<u64> = doc["sources"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(sources, vec![0, 1, 0, 1, 0, 1, 0, 1, 0]);

    let bad = file(&dir, "bad.csv", "2,1\n-2,1.5\n");
    let o = exec(&["colorful", "--sets", s(&s1), s(&s1), s(&bad), "--target", s(&origin), "--p", "2", "--k", "6"]);
    assert_eq!(o.code, EXIT_MEMBERSHIP);
    assert!(o.stdout.contains("in set 2"), "{}", o.stdout);
}

#[test]
fn maurey_command() {
    let dir = TempDir::new().unwrap();
    let single = file(&dir, "one.csv", "0.3,0.4\n");
    let one = file(&dir, "w1.csv", "1\n");
    let o = exec(&[
        "maurey", "--points", s(&single), "--weights", s(&one), "--p", "2", "--kmax", "8", "--trials", "10", "--seed", "1",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.starts_with(&format!("{MAUREY_HEADER}\n")));
    for row in csv_rows(&o.stdout) {
        assert_eq!(&row[1..], &["0", "0", "0"]);
    }

    let pm = file(&dir, "pm.csv", "-1\n1\n");
    let half = file(&dir, "half.csv", "0.5\n0.5\n");
    let args = [
        "maurey", "--points", s(&pm), "--weights", s(&half), "--p", "2", "--kmax", "256", "--trials", "2000",
        "--seed", "18446744073709551615",
    ];
    let a = exec(&args);
    let b = exec(&args);
    assert_eq!(a.code, EXIT_OK, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let rows = csv_rows(&a.stdout);
    assert_eq!(rows.len(), 9);
    let median_16: f64 = rows[4][1].parse().unwrap();
    let median_256: f64 = rows[8][1].parse().unwrap();
    // error shrinks roughly like k^(-1/2): a factor of ~4 between k=16 and k=256
    assert!(median_16 / median_256 > 2.5 && median_16 / median_256 < 6.5);
}

#[test]
fn lowerbound_command() {
    let o = exec(&["lowerbound", "--k", "1", "--p", "2"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("oracle_distance=0.707106781187"), "{}", o.stdout);
    let o = exec(&["lowerbound", "--k", "1", "--p", "1.5"]);
    assert!(o.stdout.contains("oracle_distance=0.793700525984"), "{}", o.stdout);
    let o = exec(&["lowerbound", "--k", "2", "--p", "2"]);
    assert!(o.stdout.contains("oracle_distance=0.5\n"), "{}", o.stdout);
    assert!(o.stdout.contains("symmetric_value=0.5\n"));
    let o = exec(&["lowerbound", "--k", "5", "--p", "1.25"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("not computed"));
    assert!(o.stdout.contains("conjectured"));
    assert_eq!(exec(&["lowerbound", "--k", "0", "--p", "2"]).code, EXIT_INPUT);
}

fn required(p: &str, eps: &str) -> u64 {
    let o = exec(&["bound", "--p", p, "--diam", "1", "--eps", eps]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    o.stdout.lines().next().unwrap().strip_prefix("required_k=").unwrap().parse().unwrap()
}

#[test]
fn bound_command() {
    assert_eq!(required("2", "100"), 1);
    let r = required("2", "0.05") as f64 / required("2", "0.1") as f64;
    assert!((r - 4.0).abs() < 0.2);
    let r = required("1.5", "0.05") as f64 / required("1.5", "0.1") as f64;
    assert!((r - 8.0).abs() < 0.4);
    let o = exec(&["bound", "--p", "2", "--diam", "0", "--k", "10"]);
    assert_eq!(o.stdout, "bound=0\n");
    let o = exec(&["bound", "--p", "2", "--diam", "1"]);
    assert_eq!(o.code, EXIT_INPUT);
    let o = exec(&["bound", "--p", "1", "--diam", "1", "--k", "3"]);
    assert_eq!(o.code, EXIT_INPUT);
}

#[test]
fn compare_command() {
    let dir = TempDir::new().unwrap();
    let cfg = file(
        &dir,
        "cfg.json",
        r#"{"p_grid":[2.0],"dims":[3],"n_points":[10],"K_max":1,"trials":5,"seed":7}"#,
    );
    let o = exec(&["compare", "--config", s(&cfg)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.starts_with(&format!("{CSV_HEADER}\n")));
    assert_eq!(csv_rows(&o.stdout).len(), 1);

    let cfg = file(
        &dir,
        "grid.json",
        r#"{"p_grid":[1.25,2.0,4.0],"dims":[2,16],"n_points":[4,40],"K_max":256,"trials":50,"seed":11}"#,
    );
    let out = dir.path().join("rows.csv");
    let o = exec(&["compare", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let text = fs::read_to_string(&out).unwrap();
    assert!(!text.ends_with(",\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 12 * 9);
    for row in &rows {
        assert_eq!(row.len(), 8);
        let ratio: f64 = row[6].parse().unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&ratio));
        if row[0] == "2" {
            let k: f64 = row[3].parse().unwrap();
            let err: f64 = row[4].parse().unwrap();
            assert!(err <= 2.0 / k.sqrt() + 1e-9);
        }
    }

    let bad = file(&dir, "bad.json", r#"{"p_grid":[2.0],"dims":[3],"n_points":[10],"K_max":1,"trials":5,"seed":7,"x":1}"#);
    let o = exec(&["compare", "--config", s(&bad)]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("bad.json"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(exec(&[]).code, EXIT_INPUT);
    assert_eq!(exec(&["solve"]).code, EXIT_INPUT);
    assert_eq!(exec(&["maurey", "--seed", "-3"]).code, EXIT_INPUT);
    assert_eq!(exec(&["--help"]).code, EXIT_OK);
    let help = exec(&["colorful", "--help"]);
    assert!(help.stdout.contains("cycled"));
}
