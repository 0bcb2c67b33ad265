use std::path::PathBuf;
use std::process::{Command, Output};

use ldp_range::hierarchy::{b_adic_decompose, TreeLayout};
use ldp_range::rng::stream;
use rand::Rng;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ldp-range"));
    c.env_remove("LDP_RANGE_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ldp-range-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Data rows (after the `#` header and the column line) split into fields.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn column(csv: &str, name: &str) -> usize {
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    header.split(',').position(|c| c == name).unwrap()
}

#[test]
fn decompose_example_range() {
    let out = run(&["decompose", "2", "22", "--d", "32", "--b", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let json: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    let spans: Vec<(u64, u64)> = json
        .as_array()
        .unwrap()
        .iter()
        .map(|n| (n["leaf_lo"].as_u64().unwrap(), n["leaf_hi"].as_u64().unwrap()))
        .collect();
    assert_eq!(spans, [(2, 3), (4, 7), (8, 15), (16, 19), (20, 21), (22, 22)]);
    assert!(text.contains("level 2 node 1: [8, 15]"));
}

#[test]
fn decompose_full_domain_uses_level_one() {
    let out = run(&["decompose", "0", "31", "--d", "32", "--b", "2"]);
    let text = stdout(&out);
    let json: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    let nodes = json.as_array().unwrap();
    assert_eq!(nodes.len(), 2);
    assert!(nodes.iter().all(|n| n["level"] == 1));
}

#[test]
fn decompose_matches_library_on_random_triples() {
    let mut rng = stream(99);
    for _ in 0..25 {
        let b = rng.random_range(2..9usize);
        let d = rng.random_range(1..300usize);
        let lo = rng.random_range(0..d);
        let hi = rng.random_range(lo..d);
        let out = run(&["decompose", &lo.to_string(), &hi.to_string(), "--d", &d.to_string(), "--b", &b.to_string()]);
        assert!(out.status.success(), "d={d} b={b} [{lo}, {hi}]");
        let json: serde_json::Value = serde_json::from_str(stdout(&out).lines().last().unwrap()).unwrap();
        let layout = TreeLayout::covering(d, b).unwrap();
        let cover = b_adic_decompose(lo, hi, &layout).unwrap();
        let got: Vec<(u64, u64)> = json
            .as_array()
            .unwrap()
            .iter()
            .map(|n| (n["level"].as_u64().unwrap(), n["node"].as_u64().unwrap()))
            .collect();
        let want: Vec<(u64, u64)> = cover.nodes().iter().map(|n| (n.level as u64, n.index as u64)).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn decompose_rejects_bad_ranges() {
    assert_eq!(run(&["decompose", "5", "2"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "0", "32", "--d", "32"]).status.code(), Some(2));
}

#[test]
fn privacy_check_examples() {
    let ln3 = 3f64.ln().to_string();
    let rr = stdout(&run(&["privacy-check", "--mechanism", "rr1", "--d", "2", "--eps", &ln3, "--assert"]));
    assert!(rr.contains("max_ratio=3.000000"), "{rr}");
    assert!(rr.trim_end().ends_with("PASS"));
    for (m, eps) in [("oue", "1.1"), ("hrr", "0.2"), ("olh", "1.1"), ("haar", "0.7")] {
        let out = run(&["privacy-check", "--mechanism", m, "--d", "8", "--eps", eps, "--assert"]);
        assert!(out.status.success(), "{m}");
        assert!(stdout(&out).trim_end().ends_with("PASS"), "{m}");
    }
}

#[test]
fn privacy_check_capacity_and_usage() {
    assert_eq!(run(&["privacy-check", "--mechanism", "oue", "--d", "64", "--eps", "1"]).status.code(), Some(3));
    assert_eq!(run(&["privacy-check", "--mechanism", "xyz", "--eps", "1"]).status.code(), Some(2));
    assert_eq!(run(&["privacy-check", "--mechanism", "oue"]).status.code(), Some(2));
}

#[test]
fn simulate_rows_and_header() {
    let out = run(&[
        "simulate", "--d-exp", "4", "--n-exp", "14", "--methods", "flat,hh,haar", "--branching", "2", "--reps", "2",
        "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    for key in ["# d-exp=4", "# methods=flat,hh:2,haar", "# seed=3", "# reps=2"] {
        assert!(text.contains(key), "missing `{key}`");
    }
    assert!(text.contains("method,B,D,epsilon,N,range_length,mse,stddev,seed\n"));
    let data = rows(&text);
    // 16 lengths plus an overall row for each of three methods.
    assert_eq!(data.len(), 3 * 17);
    let flat_all = data.iter().find(|r| r[0] == "flat" && r[5] == "all").unwrap();
    assert_eq!(flat_all[1], "");
    assert_eq!(&flat_all[2..5], ["16", "1.1", "16384"]);
    assert!(data.iter().any(|r| r[0] == "hh:2" && r[1] == "2"));
}

#[test]
fn same_seed_is_byte_identical_and_seed_matters() {
    let args = ["simulate", "--d-exp", "5", "--n-exp", "16", "--methods", "hh_c:2,haar", "--reps", "2"];
    let a = run(&[&args[..], &["--seed", "1"]].concat());
    let b = run(&[&args[..], &["--seed", "1"]].concat());
    let c = run(&[&args[..], &["--seed", "2"]].concat());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(rows(&stdout(&a)), rows(&stdout(&c)));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["simulate", "--methods", ""]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--methods", "tree:4"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--eps", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--methods", ","]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--d-exp", "70"]).status.code(), Some(2));
}

#[test]
fn olh_beyond_capacity_exits_three() {
    let out = run(&["simulate", "--d-exp", "17", "--n-exp", "10", "--methods", "flat:olh", "--reps", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_assertion_exits_four_after_writing() {
    let path = scratch("assert.csv");
    let out = bin()
        .args(["simulate", "--d-exp", "4", "--n-exp", "12", "--reps", "1", "--assert-max-mse", "1e-30", "--output"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(std::fs::read_to_string(&path).unwrap().contains("range_length"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let cfg = scratch("run.cfg");
    std::fs::write(&cfg, "# test config\nd-exp=3\nreps=1\nmethods=flat\nseed=9\n").unwrap();
    let out = bin().args(["--config"]).arg(&cfg).args(["simulate", "--seed", "4", "--n-exp", "10"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# d-exp=3") && text.contains("# seed=4") && text.contains("# methods=flat"));

    std::fs::write(&cfg, "colour=blue\n").unwrap();
    let out = bin().args(["--config"]).arg(&cfg).arg("simulate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = scratch("outdir");
    let out = bin()
        .env("LDP_RANGE_OUT_DIR", &dir)
        .args(["predict", "--d-exp", "6"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.join("predict.csv")).unwrap();
    assert!(text.contains("range_length,flat,hh,hh_c,haar"));
    // r = 1, 2, 4, ..., 64
    assert_eq!(rows(&text).len(), 7);
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    for (rank, i) in idx.into_iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

#[test]
fn sweep_error_falls_with_epsilon() {
    let out = run(&["sweep", "--d-exp", "6", "--n-exp", "18", "--methods", "hh_c:4,haar", "--reps", "3", "--seed", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# eps=0.2,0.4,0.6,0.8,1,1.1,1.2,1.4"));
    let (ec, mc) = (column(&text, "epsilon"), column(&text, "mse"));
    let data = rows(&text);
    assert!(data.iter().all(|r| r[5] == "all"));
    for method in ["hh_c:4", "haar"] {
        let (eps, mse): (Vec<f64>, Vec<f64>) = data
            .iter()
            .filter(|r| r[0] == method)
            .map(|r| (r[ec].parse::<f64>().unwrap(), r[mc].parse::<f64>().unwrap()))
            .unzip();
        assert_eq!(eps.len(), 8);
        let rho = spearman(&eps, &mse);
        assert!(rho < 0.0, "{method}: rho = {rho}");
    }
}

#[test]
fn noiseless_limit_has_negligible_error() {
    let out = run(&[
        "simulate", "--d-exp", "3", "--eps", "50", "--n-exp", "26", "--methods", "flat,hh,hh_c,haar", "--branching", "2",
        "--reps", "2", "--seed", "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mc = column(&text, "mse");
    for r in rows(&text) {
        let mse: f64 = r[mc].parse().unwrap();
        assert!(mse <= 1e-6, "{} r={} mse={mse}", r[0], r[5]);
    }
}

#[test]
fn noiseless_quantiles_are_exact_up_to_sampling() {
    let out = run(&["quantiles", "--d-exp", "6", "--n-exp", "26", "--eps", "50", "--seed", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("method,phi,true_value,est_value,value_error,quantile_error,center,epsilon,rep,seed\n"));
    let data = rows(&text);
    // Two methods, two centres, nine deciles.
    assert_eq!(data.len(), 36);
    // Level sampling still leaves ~1e-4 noise in each prefix, so an answer
    // may slip by one item only where φ sits that close to a CDF step.
    let (vc, qc) = (column(&text, "value_error"), column(&text, "quantile_error"));
    let mut exact = 0;
    for r in &data {
        let value: f64 = r[vc].parse().unwrap();
        let quantile: f64 = r[qc].parse().unwrap();
        if value == 0.0 {
            exact += 1;
        } else {
            assert!(value <= 1.0 && quantile <= 1e-4, "{r:?}");
        }
    }
    assert!(exact >= 34, "{exact} of 36 exact");
}

#[test]
fn quantile_value_error_peaks_in_sparse_tail() {
    let out = run(&[
        "quantiles", "--d-exp", "12", "--n-exp", "22", "--centers", "0.1", "--methods", "hh_c:4", "--reps", "3",
        "--seed", "8",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (pc, vc) = (column(&text, "phi"), column(&text, "value_error"));
    let mut by_phi = [0.0f64; 9];
    for r in rows(&text) {
        let k = (r[pc].parse::<f64>().unwrap() * 10.0).round() as usize - 1;
        by_phi[k] += r[vc].parse::<f64>().unwrap();
    }
    let tail = by_phi[8];
    assert!(by_phi[..5].iter().all(|&v| v < tail), "{by_phi:?}");
}

#[test]
fn quantile_assertion() {
    let out = run(&[
        "quantiles", "--d-exp", "8", "--n-exp", "12", "--eps", "0.3", "--assert-max-quantile-error", "0", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
}
