//! End-to-end tests that drive the compiled `atm` binary the way a
//! user would: files in, files out, single-line statuses, nonzero
//! exits with one-line errors.

use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn atm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atm"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, stderr: {}",
        stderr(out)
    );
}

/// Failures must exit nonzero and print exactly one stderr line,
/// prefixed so scripts can grep for it.
fn assert_one_line_error(out: &Output) -> String {
    assert!(!out.status.success(), "expected failure, got success");
    let err = stderr(out);
    assert!(
        err.starts_with("atm: error: "),
        "unprefixed error: {:?}",
        err
    );
    assert_eq!(err.trim_end().lines().count(), 1, "multiline error: {:?}", err);
    err
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{:02x}", b))
        .collect()
}

#[test]
fn oa_gen_emits_catalog_sizes_and_verify_accepts_them() {
    let dir = tempfile::tempdir().unwrap();
    for (profile, runs) in [("4^9", 32), ("3^9", 27), ("2^9", 12)] {
        let path = dir.path().join(format!("{}.csv", runs));
        let out = atm(&["oa", "gen", "--profile", profile, "--out", path.to_str().unwrap()]);
        assert_ok(&out);
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), runs + 1, "{}: header plus one line per run", profile);

        let check = atm(&["oa", "verify", path.to_str().unwrap(), "--strength", "2"]);
        assert_ok(&check);
        let line = stdout(&check);
        assert!(line.contains(&format!("ok: strength=2 runs={} factors=9", runs)), "{}", line);
    }
}

#[test]
fn oa_randomization_is_seeded_and_stays_balanced() {
    let a = atm(&["oa", "gen", "--profile", "3^9", "--seed", "11"]);
    let b = atm(&["oa", "gen", "--profile", "3^9", "--seed", "11"]);
    let plain = atm(&["oa", "gen", "--profile", "3^9"]);
    assert_ok(&a);
    assert_eq!(stdout(&a), stdout(&b), "same seed, same array");
    assert_ne!(stdout(&a), stdout(&plain), "seeded shuffle moves rows");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    fs::write(&path, stdout(&a)).unwrap();
    assert_ok(&atm(&["oa", "verify", path.to_str().unwrap(), "--strength", "2"]));
}

#[test]
fn oa_verify_rejects_imbalance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "f1,f2\n1,1\n1,2\n2,1\n1,1\n").unwrap();
    let out = atm(&["oa", "verify", path.to_str().unwrap(), "--strength", "2"]);
    let err = assert_one_line_error(&out);
    assert!(err.contains("imbalanced"), "{}", err);
}

#[test]
fn oracle_reports_the_pinned_minimum() {
    let out = atm(&["oracle", "friedman", "--p", "5", "--levels", "5"]);
    assert_ok(&out);
    let line = stdout(&out);
    let min: f64 = line
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix("min="))
        .expect("min= field")
        .parse()
        .unwrap();
    assert!((min - 1.814).abs() < 0.01, "{}", line);
    assert!(line.contains("setting=1-1-3-1-1"), "{}", line);
}

#[test]
fn oracle_refuses_grids_over_the_cap() {
    let out = atm(&["oracle", "shubert", "--p", "10", "--levels", "5", "--cap", "1000"]);
    assert_one_line_error(&out);
}

/// y = a + 2b + 3c on levels 1..=3: additive, unique minimum at 1-1-1.
fn answer_batch(batch: &Path, responses: &Path) -> usize {
    let text = fs::read_to_string(batch).unwrap();
    let mut lines = vec!["y".to_string()];
    let mut n = 0;
    for row in text.lines().skip(1) {
        let lv: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
        lines.push((lv[0] + 2.0 * lv[1] + 3.0 * lv[2]).to_string());
        n += 1;
    }
    fs::write(responses, lines.join("\n")).unwrap();
    n
}

#[test]
fn session_protocol_walks_to_a_resolved_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("s.json");
    let state_s = state.to_str().unwrap();
    let batch = dir.path().join("batch.csv");
    let batch_s = batch.to_str().unwrap();
    let resp = dir.path().join("resp.csv");
    let resp_s = resp.to_str().unwrap();

    let out = atm(&["session", "init", "--state", state_s, "--profile", "3,3,3", "--seed", "5"]);
    assert_ok(&out);
    assert!(stdout(&out).contains("profile=3-3-3"), "{}", stdout(&out));

    // Asking twice without observing re-emits the same batch.
    let first = atm(&["session", "suggest", "--state", state_s, "--out", batch_s]);
    assert_ok(&first);
    assert!(stdout(&first).contains("runs=9"), "{}", stdout(&first));
    assert!(stdout(&first).contains("reissued=false"), "{}", stdout(&first));
    let bytes = fs::read(&batch).unwrap();
    let again = atm(&["session", "suggest", "--state", state_s, "--out", batch_s]);
    assert_ok(&again);
    assert!(stdout(&again).contains("reissued=true"), "{}", stdout(&again));
    assert_eq!(bytes, fs::read(&batch).unwrap(), "pending batch is stable");

    assert_eq!(answer_batch(&batch, &resp), 9);
    let out = atm(&["session", "observe", "--state", state_s, "--responses", resp_s]);
    assert_ok(&out);
    assert!(stdout(&out).contains("accumulated=9"), "{}", stdout(&out));

    // Means on a balanced array see the additive ordering exactly, so
    // two eliminations must walk straight to 1-1-1.
    let out = atm(&["session", "eliminate", "--state", state_s, "--method", "mean"]);
    assert_ok(&out);
    assert!(stdout(&out).contains("surviving=2-2-2"), "{}", stdout(&out));

    assert_ok(&atm(&["session", "suggest", "--state", state_s, "--out", batch_s]));
    answer_batch(&batch, &resp);
    assert_ok(&atm(&["session", "observe", "--state", state_s, "--responses", resp_s]));
    let out = atm(&["session", "eliminate", "--state", state_s, "--method", "mean"]);
    assert_ok(&out);
    assert!(stdout(&out).contains("surviving=1-1-1"), "{}", stdout(&out));

    // The resolved setting still needs its confirmation run before a
    // prediction can quote an observed value.
    let out = atm(&["session", "suggest", "--state", state_s, "--out", batch_s]);
    assert_ok(&out);
    assert!(stdout(&out).contains("runs=1"), "{}", stdout(&out));
    answer_batch(&batch, &resp);
    assert_ok(&atm(&["session", "observe", "--state", state_s, "--responses", resp_s]));

    let out = atm(&["session", "predict", "--state", state_s, "--method", "mean"]);
    assert_ok(&out);
    let line = stdout(&out);
    assert!(line.contains("setting=1-1-1"), "{}", line);
    assert!(line.contains("observed=6"), "{}", line);

    // No pending batch left to observe.
    assert_one_line_error(&atm(&["session", "observe", "--state", state_s, "--responses", resp_s]));
}

#[test]
fn session_init_refuses_to_clobber_state() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("s.json");
    let state_s = state.to_str().unwrap();
    assert_ok(&atm(&["session", "init", "--state", state_s, "--profile", "2,2"]));
    assert_one_line_error(&atm(&["session", "init", "--state", state_s, "--profile", "2,2"]));
}

#[test]
fn session_commands_fail_cleanly_without_state() {
    let out = atm(&["session", "suggest", "--state", "/nonexistent/s.json"]);
    let err = assert_one_line_error(&out);
    assert!(err.contains("state file"), "{}", err);

    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("s.json");
    let state_s = state.to_str().unwrap();
    assert_ok(&atm(&["session", "init", "--state", state_s, "--profile", "3,3"]));
    let out = atm(&["session", "eliminate", "--state", state_s, "--method", "median"]);
    let err = assert_one_line_error(&out);
    assert!(err.contains("method"), "{}", err);
}

#[test]
fn tune_alpha_reports_fractions_and_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("d.csv");
    let obs = dir.path().join("obs.csv");
    let diag = dir.path().join("diag.csv");
    assert_ok(&atm(&["oa", "gen", "--profile", "3,3,3", "--seed", "2", "--out", design.to_str().unwrap()]));

    let text = fs::read_to_string(&design).unwrap();
    let mut csv = String::from("f1,f2,f3,y\n");
    for row in text.lines().skip(1) {
        let lv: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
        csv.push_str(&format!("{},{}\n", row, lv[0] + 2.0 * lv[1] + 3.0 * lv[2]));
    }
    fs::write(&obs, csv).unwrap();

    let out = atm(&[
        "tune-alpha",
        obs.to_str().unwrap(),
        "--seed",
        "4",
        "--diagnostics",
        diag.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let line = stdout(&out);
    let alphas = line
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix("alpha="))
        .expect("alpha= field")
        .to_string();
    for a in alphas.split('-') {
        let a: f64 = a.parse().unwrap();
        assert!((0.0..=1.0).contains(&a), "{}", line);
    }
    assert!(line.contains("synthetic_runs="), "{}", line);
    let diag_text = fs::read_to_string(&diag).unwrap();
    assert!(diag_text.lines().count() > 1, "diagnostics have rows");
}

fn write_spec(dir: &Path, out_dir: &Path) -> std::path::PathBuf {
    let spec = dir.join("exp.toml");
    fs::write(
        &spec,
        format!(
            "objective = \"detpep10\"\nlevels = 3\n\
             methods = [\"sel.mean\", \"pw\", \"ei.ord\"]\n\
             t_elim = 1\nreplications = 2\nbase_seed = 9\nout_dir = {:?}\n",
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    spec
}

#[test]
fn bench_run_is_deterministic_and_budget_honest() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("out1");
    let out2 = dir.path().join("out2");

    let spec1 = write_spec(dir.path(), &out1);
    let run1 = atm(&["bench", "run", spec1.to_str().unwrap()]);
    assert_ok(&run1);
    assert!(stdout(&run1).contains("0 failures"), "{}", stdout(&run1));

    let spec2 = dir.path().join("exp2.toml");
    fs::copy(&spec1, &spec2).unwrap();
    let text = fs::read_to_string(&spec2).unwrap();
    fs::write(&spec2, text.replace("out1", "out2")).unwrap();
    assert_ok(&atm(&["bench", "run", spec2.to_str().unwrap()]));

    let raw1 = fs::read_to_string(out1.join("raw.csv")).unwrap();
    let raw2 = fs::read_to_string(out2.join("raw.csv")).unwrap();
    assert_eq!(raw1, raw2, "same seeds, same rows");

    // Budgets come from the evaluation counter: the 3^3 catalog array
    // costs 9 runs, the surviving 2^3 stage adds 4 more.
    let mut sel_n = Vec::new();
    let mut stage0_n = Vec::new();
    for line in raw1.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols[0] == "sel.mean" && cols[2] == "0" {
            sel_n.push(cols[3].parse::<u64>().unwrap());
        }
        if cols[2] == "0" && cols[1] == "0" {
            stage0_n.push(cols[3].parse::<u64>().unwrap());
        }
    }
    assert_eq!(sel_n, vec![9, 13]);
    assert!(stage0_n.iter().all(|&n| n == 9), "every method starts from the same array");

    // The manifest's digests must describe the files actually on disk.
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out1.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(
        manifest["outputs"]["raw"]["sha256"].as_str().unwrap(),
        sha256_hex(raw1.as_bytes())
    );
    assert_eq!(
        manifest["outputs"]["summary"]["sha256"].as_str().unwrap(),
        sha256_hex(fs::read_to_string(out1.join("summary.csv")).unwrap().as_bytes())
    );
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 0);
    assert_eq!(manifest["base_seed"].as_u64().unwrap(), 9);

    // Summary rows are recomputable from the raw rows they claim to
    // aggregate.
    let summary = fs::read_to_string(out1.join("summary.csv")).unwrap();
    let want: Vec<f64> = raw1
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|c| c[0] == "sel.mean" && c[1] == "1")
        .map(|c| c[4].parse().unwrap())
        .collect();
    let row = summary
        .lines()
        .find(|l| l.starts_with("sel.mean,1,"))
        .expect("sel.mean stage 1 summary row");
    let mean_f: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert_eq!(mean_f, want.iter().sum::<f64>() / want.len() as f64);
}

#[test]
fn bench_run_names_the_offending_spec_field() {
    let dir = tempfile::tempdir().unwrap();
    let base = "objective = \"detpep10\"\nbase_seed = 1\nout_dir = \"x\"\n";
    let cases = [
        ("levels = 3\nmethods = [\"pw\"]\nreplications = 0\n", "replications"),
        ("levels = 3\nmethods = [\"sel.median\"]\nreplications = 2\n", "method"),
        ("levels = 1\nmethods = [\"pw\"]\nreplications = 2\n", "levels"),
        ("levels = 3\nmethods = [\"pw\"]\nreplications = 2\nfrobnicate = 1\n", "frobnicate"),
    ];
    for (patch, needle) in cases {
        let spec = dir.path().join("bad.toml");
        fs::write(&spec, format!("{}{}", base, patch)).unwrap();
        let out = atm(&["bench", "run", spec.to_str().unwrap()]);
        let err = assert_one_line_error(&out);
        assert!(err.contains(needle), "{:?} should mention {:?}", err, needle);
    }
    let out = atm(&["bench", "run", "/nonexistent/spec.toml"]);
    let err = assert_one_line_error(&out);
    assert!(err.contains("spec"), "{}", err);
}
