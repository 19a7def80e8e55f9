use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use matnc_core::io::parse_amplitudes_jsonl;
use serde_json::Value;
use tempfile::TempDir;

fn matnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matnc")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = matnc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Random circuit and bitstrings written into `dir`.
fn generated(dir: &Path, qubits: usize, depth: usize, k: usize, seed: u64) -> (PathBuf, PathBuf) {
    ok(&[
        "generate",
        "--qubits",
        &qubits.to_string(),
        "--depth",
        &depth.to_string(),
        "--random-bitstrings",
        &k.to_string(),
        "--seed",
        &seed.to_string(),
        "--out-dir",
        s(dir),
    ]);
    (dir.join("circuit.txt"), dir.join("bitstrings.txt"))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn empty_circuit_amplitudes() {
    let d = TempDir::new().unwrap();
    let c = d.path().join("c.txt");
    let b = d.path().join("b.txt");
    std::fs::write(&c, "2\n").unwrap();
    std::fs::write(&b, "00\n11\n").unwrap();
    ok(&["simulate", "--circuit", s(&c), "--bitstrings", s(&b), "--out-dir", s(d.path())]);
    let recs = parse_amplitudes_jsonl(&std::fs::read_to_string(d.path().join("amplitudes.jsonl")).unwrap()).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!((recs[0].re, recs[0].im, recs[0].p), (1.0, 0.0, 1.0));
    assert_eq!((recs[1].re, recs[1].im, recs[1].p), (0.0, 0.0, 0.0));
}

#[test]
fn simulate_matches_oracle_at_twelve_qubits() {
    let d = TempDir::new().unwrap();
    let (c, b) = generated(d.path(), 12, 10, 256, 3);
    ok(&["simulate", "--circuit", s(&c), "--bitstrings", s(&b), "--out-dir", s(d.path())]);
    ok(&["oracle", "--circuit", s(&c), "--bitstrings", s(&b), "--out-dir", s(d.path())]);
    let sim = parse_amplitudes_jsonl(&std::fs::read_to_string(d.path().join("amplitudes.jsonl")).unwrap()).unwrap();
    let ora = parse_amplitudes_jsonl(&std::fs::read_to_string(d.path().join("oracle.jsonl")).unwrap()).unwrap();
    assert_eq!(sim.len(), 256);
    assert_eq!(sim.len(), ora.len());
    for (a, o) in sim.iter().zip(&ora) {
        assert_eq!(a.bitstring, o.bitstring);
        let err = (a.amplitude() - o.amplitude()).norm() / o.amplitude().norm().max(f64::MIN_POSITIVE);
        assert!(err <= 1e-10, "{}: {err}", a.bitstring);
    }
}

#[test]
fn reruns_and_worker_counts_give_identical_files() {
    let d = TempDir::new().unwrap();
    let (c, b) = generated(d.path(), 10, 8, 64, 5);
    let mut outputs = Vec::new();
    for (run, workers) in [(0, "1"), (1, "1"), (2, "4"), (3, "8")] {
        let out = d.path().join(format!("run{run}"));
        ok(&["simulate", "--circuit", s(&c), "--bitstrings", s(&b), "--workers", workers, "--out-dir", s(&out)]);
        outputs.push((
            std::fs::read(out.join("amplitudes.jsonl")).unwrap(),
            std::fs::read(out.join("summary.json")).unwrap(),
        ));
    }
    for o in &outputs[1..] {
        assert_eq!(o.0, outputs[0].0);
    }
    assert_eq!(outputs[1].1, outputs[0].1);
}

#[test]
fn sliced_simulation_matches_unsliced() {
    let d = TempDir::new().unwrap();
    let (c, b) = generated(d.path(), 10, 10, 32, 8);
    let a = d.path().join("a");
    let sl = d.path().join("s");
    ok(&["simulate", "--circuit", s(&c), "--bitstrings", s(&b), "--out-dir", s(&a)]);
    ok(&["simulate", "--circuit", s(&c), "--bitstrings", s(&b), "--max-rank", "5", "--workers", "4", "--out-dir", s(&sl)]);
    assert!(json(&sl.join("summary.json"))["n_slices"].as_u64().unwrap() > 1);
    let x = parse_amplitudes_jsonl(&std::fs::read_to_string(a.join("amplitudes.jsonl")).unwrap()).unwrap();
    let y = parse_amplitudes_jsonl(&std::fs::read_to_string(sl.join("amplitudes.jsonl")).unwrap()).unwrap();
    for (p, q) in x.iter().zip(&y) {
        assert!((p.amplitude() - q.amplitude()).norm() <= 1e-12 * (1.0 + p.amplitude().norm()));
    }
}

#[test]
fn single_precision_is_close() {
    let d = TempDir::new().unwrap();
    let (c, b) = generated(d.path(), 8, 6, 16, 2);
    ok(&["simulate", "--circuit", s(&c), "--bitstrings", s(&b), "--precision", "f32", "--out-dir", s(d.path())]);
    ok(&["oracle", "--circuit", s(&c), "--bitstrings", s(&b), "--out-dir", s(d.path())]);
    let sim = parse_amplitudes_jsonl(&std::fs::read_to_string(d.path().join("amplitudes.jsonl")).unwrap()).unwrap();
    let ora = parse_amplitudes_jsonl(&std::fs::read_to_string(d.path().join("oracle.jsonl")).unwrap()).unwrap();
    for (a, o) in sim.iter().zip(&ora) {
        assert!((a.amplitude() - o.amplitude()).norm() <= 1e-5);
    }
    assert_eq!(json(&d.path().join("summary.json"))["precision"], "f32");
}

#[test]
fn search_writes_order_and_report() {
    let d = TempDir::new().unwrap();
    let (c, b) = generated(d.path(), 8, 6, 40, 1);
    ok(&["search", "--circuit", s(&c), "--bitstrings", s(&b), "--loss", "multi", "--budget", "500", "--seed", "7", "--out-dir", s(d.path())]);
    let report = json(&d.path().join("report.json"));
    assert!(report["reuse_ratio"].as_f64().unwrap() >= 1.0);
    let order = d.path().join("order.json");
    ok(&["report", "--circuit", s(&c), "--bitstrings", s(&b), "--order", s(&order), "--out-dir", s(&d.path().join("r"))]);
    assert_eq!(json(&d.path().join("r/report.json")), report);
    ok(&["plan", "--circuit", s(&c), "--bitstrings", s(&b), "--order", s(&order), "--out-dir", s(d.path())]);
    let plan = json(&d.path().join("plan.json"));
    assert_eq!(plan["multi_cost"], report["multi_cost"]);
    assert_eq!(plan["lossless"], true);
    ok(&["simulate", "--circuit", s(&c), "--bitstrings", s(&b), "--order", s(&order), "--out-dir", s(d.path())]);
    let summary = json(&d.path().join("summary.json"));
    assert_eq!(summary["multiplications"], report["multi_cost"]);
    assert_eq!(summary["peak_live_elements"], plan["peak_elements"]);
}

#[test]
fn single_loss_minimizes_single_cost_over_seeds() {
    let d = TempDir::new().unwrap();
    let (c, b) = generated(d.path(), 8, 8, 64, 4);
    let mut single = Vec::new();
    let mut multi = Vec::new();
    for seed in 0..5 {
        for (loss, dest) in [("single", &mut single), ("multi", &mut multi)] {
            let out = d.path().join(format!("{loss}{seed}"));
            let seed = seed.to_string();
            ok(&["search", "--circuit", s(&c), "--bitstrings", s(&b), "--loss", loss, "--budget", "1500", "--seed", &seed, "--out-dir", s(&out)]);
            dest.push(json(&out.join("report.json"))["single_cost"].as_u64().unwrap());
        }
    }
    single.sort_unstable();
    multi.sort_unstable();
    assert!(single[2] <= multi[2], "single {single:?} multi {multi:?}");
}

#[test]
fn model_widths_need_no_bitstrings() {
    let d = TempDir::new().unwrap();
    let (c, _) = generated(d.path(), 8, 4, 1, 1);
    ok(&["search", "--circuit", s(&c), "--widths", "model", "--k", "1000", "--budget", "200", "--out-dir", s(d.path())]);
    assert_eq!(json(&d.path().join("report.json"))["k"], 1000);
}

#[test]
fn usage_errors_exit_with_two() {
    let d = TempDir::new().unwrap();
    let (c, _) = generated(d.path(), 6, 4, 1, 1);
    let out = matnc(&["search", "--circuit", s(&c), "--loss", "multi", "--widths", "exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bitstrings"));
    assert_eq!(matnc(&["simulate"]).status.code(), Some(2));
    assert_eq!(matnc(&["simulate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(matnc(&["search", "--circuit", s(&c), "--widths", "model"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let d = TempDir::new().unwrap();
    let missing = d.path().join("missing.txt");
    assert_eq!(matnc(&["report", "--circuit", s(&missing), "--widths", "model", "--k", "4"]).status.code(), Some(1));
    let bad = d.path().join("bad.txt");
    std::fs::write(&bad, "2\n0 nope 0\n").unwrap();
    assert_eq!(matnc(&["report", "--circuit", s(&bad), "--widths", "model", "--k", "4"]).status.code(), Some(1));
}

#[test]
fn memory_cap_recommends_slicing() {
    let d = TempDir::new().unwrap();
    let (c, b) = generated(d.path(), 10, 10, 4, 6);
    let out = matnc(&["simulate", "--circuit", s(&c), "--bitstrings", s(&b), "--max-elements", "8", "--out-dir", s(d.path())]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--max-rank 3"), "{err}");
}

#[test]
fn config_file_values_yield_to_flags() {
    let d = TempDir::new().unwrap();
    let (c, b) = generated(d.path(), 6, 4, 8, 1);
    let from_cfg = d.path().join("cfg");
    let cfg = d.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!("# run\ncircuit = {}\nbitstrings = {}\nout_dir = {}\nworkers = 2\n", s(&c), s(&b), s(&from_cfg)),
    )
    .unwrap();
    ok(&["simulate", "--config", s(&cfg)]);
    assert!(from_cfg.join("amplitudes.jsonl").exists());
    let flagged = d.path().join("flag");
    ok(&["simulate", "--config", s(&cfg), "--out-dir", s(&flagged)]);
    assert_eq!(
        std::fs::read(flagged.join("amplitudes.jsonl")).unwrap(),
        std::fs::read(from_cfg.join("amplitudes.jsonl")).unwrap()
    );
    std::fs::write(&cfg, "workers two\n").unwrap();
    assert_eq!(matnc(&["simulate", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn scaling_table() {
    let d = TempDir::new().unwrap();
    let (c, _) = generated(d.path(), 10, 6, 1, 2);
    ok(&["scaling", "--circuit", s(&c), "--k-max", "256", "--out-dir", s(d.path())]);
    let csv = std::fs::read_to_string(d.path().join("scaling.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,S_k,kS,ratio"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[0][1], rows[0][2]);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 1.0);
    for r in &rows {
        let ratio: f64 = r[3].parse().unwrap();
        assert!(ratio > 0.0 && ratio <= 1.0);
        let (sk, ks): (u128, u128) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert_eq!(ratio, sk as f64 / ks as f64);
    }
    ok(&["scaling", "--circuit", s(&c), "--ks", "1,3,5", "--out-dir", s(d.path())]);
    assert_eq!(std::fs::read_to_string(d.path().join("scaling.csv")).unwrap().lines().count(), 4);
}

#[test]
fn xeb_reads_amplitude_files() {
    let d = TempDir::new().unwrap();
    let (c, b) = generated(d.path(), 10, 12, 2000, 9);
    ok(&["oracle", "--circuit", s(&c), "--bitstrings", s(&b), "--out-dir", s(d.path())]);
    let amps = d.path().join("oracle.jsonl");
    ok(&["xeb", "--amplitudes", s(&amps), "--bins", "20", "--out-dir", s(d.path())]);
    let est = json(&d.path().join("xeb.json"));
    // uniform draws score near zero
    assert!(est["f_xeb"].as_f64().unwrap().abs() <= 4.0 * est["stderr"].as_f64().unwrap());
    let csv = std::fs::read_to_string(d.path().join("histogram.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("center,empirical_density,theory_density"));
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn help_lists_flags() {
    let out = ok(&["simulate", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--circuit", "--bitstrings", "--order", "--max-rank", "--workers", "--precision", "--seed", "--config", "--out-dir"] {
        assert!(text.contains(flag), "{flag}");
    }
}
