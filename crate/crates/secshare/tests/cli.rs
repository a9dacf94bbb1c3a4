mod common;

use std::fs;

use common::{hashes, run, scratch};
use serde_json::Value;

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn documented_examples() {
    let dir = scratch("examples");
    let out = |n: &str| dir.join(n).to_string_lossy().into_owned();
    let (code, stdout, _) =
        run(&["eval", "--task", "det", "--family", "partial", "--v", "0.72", "--theta", "0.2356", "--out", &out("e")], &[]);
    assert_eq!(code, 0);
    assert!(stdout.contains("S = 0.7617"), "{stdout}");
    let (code, stdout, _) = run(&["classical", "--task", "stoch", "--out", &out("c")], &[]);
    assert_eq!(code, 0);
    assert!(stdout.contains("5/8"), "{stdout}");
    let (code, _, _) = run(&["threshold", "--task", "stoch", "--family", "isotropic", "--out", &out("t")], &[]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.join("t/threshold.csv")).unwrap();
    let v: f64 = csv.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((v - 0.4).abs() <= 1e-6);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn validation_errors_exit_2() {
    let dir = scratch("validation");
    let out = dir.to_string_lossy().into_owned();
    let missing = dir.join("missing.json").to_string_lossy().into_owned();
    let garbage = dir.join("garbage.json");
    fs::write(&garbage, "{\"dim\": 4, \"re\": [[1]]}").unwrap();
    let garbage = garbage.to_string_lossy().into_owned();
    let cases: [&[&str]; 8] = [
        &["eval", "--task", "det", "--bogus"],
        &["eval", "--task", "maybe"],
        &["eval", "--task", "det", "--v", "1.5", "--out", &out],
        &["eval", "--task", "det", "--state", &missing, "--out", &out],
        &["certify", "--state", &garbage, "--out", &out],
        &["experiment", "--events", "0", "--out", &out],
        &["certify", "--level", "9", "--out", &out],
        &["tomography", "--family", "partial", "--v", "0.5", "--recombine", "--out", &out],
    ];
    for args in cases {
        let (code, _, err) = run(args, &[]);
        assert_eq!(code, 2, "{args:?}: {err}");
    }
    let (code, _, _) = run(&["frontier", "--out", &out], &[("SECSHARE_THREADS", "zero")]);
    assert_eq!(code, 2);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn state_files_round_trip_through_eval_and_certify() {
    let dir = scratch("statefile");
    let e = dir.join("e");
    let (code, _, _) = run(&["eval", "--task", "stoch", "--v", "0.3", "--out", &e.to_string_lossy()], &[]);
    assert_eq!(code, 0);
    let state = e.join("state.json");
    assert_eq!(read_json(&state)["dim"], 4);
    let c = dir.join("c");
    let (code, stdout, _) =
        run(&["certify", "--state", &state.to_string_lossy(), "--level", "1", "--out", &c.to_string_lossy()], &[]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("CertifiedUnsteerable"), "{stdout}");
    let verdict = read_json(&c.join("verdict.json"));
    assert_eq!(verdict["polytopes"]["measurement_axes"], 6);
    assert!(verdict["lp_iterations"].as_u64().unwrap() > 0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = scratch("threads");
    let mut seen = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.join(threads);
        let args = ["experiment", "--task", "stoch", "--v", "0.47", "--events", "300000", "--out", &out.to_string_lossy()];
        let (code, _, _) = run(&args, &[("SECSHARE_THREADS", threads)]);
        assert_eq!(code, 0);
        seen.push(hashes(&out));
    }
    assert_eq!(seen[0], seen[1]);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn config_files_are_resolved_into_the_manifest() {
    let dir = scratch("config");
    let toml = dir.join("run.toml");
    fs::write(&toml, "task = \"stoch\"\nfamily = \"isotropic\"\nv = 0.47\nevents = 70000\nseed = 9\n").unwrap();
    let json = dir.join("run.json");
    fs::write(&json, r#"{"task": "stoch", "family": "isotropic", "v": 0.47, "events": 70000, "seed": 9}"#).unwrap();
    let a = dir.join("a");
    let b = dir.join("b");
    assert_eq!(run(&["experiment", "--config", &toml.to_string_lossy(), "--out", &a.to_string_lossy()], &[]).0, 0);
    assert_eq!(run(&["experiment", "--config", &json.to_string_lossy(), "--out", &b.to_string_lossy()], &[]).0, 0);
    assert_eq!(hashes(&a), hashes(&b));
    let m = read_json(&a.join("manifest.json"));
    assert_eq!(m["params"]["events"], 70000);
    assert_eq!(m["params"]["config"], Value::Null);
    assert_eq!(m["seed"], 9);
    let bad = dir.join("bad.toml");
    fs::write(&bad, "evnts = 3\n").unwrap();
    assert_eq!(run(&["experiment", "--config", &bad.to_string_lossy(), "--out", &a.to_string_lossy()], &[]).0, 2);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn manifest_lists_every_output() {
    let dir = scratch("manifest");
    let out = dir.join("s");
    let (code, _, _) = run(&["sweep", "--task", "det", "--points", "11", "--svg", "--format", "json", "--out", &out.to_string_lossy()], &[]);
    assert_eq!(code, 0);
    let m = read_json(&out.join("manifest.json"));
    for key in ["schema", "subcommand", "params", "format", "seed", "version", "outputs", "wall_time_s"] {
        assert!(m.get(key).is_some(), "manifest lacks {key}");
    }
    let listed: Vec<String> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let present: Vec<String> = hashes(&out).into_keys().collect();
    let mut sorted = listed.clone();
    sorted.sort();
    assert_eq!(sorted, present);
    let table = read_json(&out.join("sweep.json"));
    assert_eq!(table["columns"], serde_json::json!(["family", "v", "theta", "S"]));
    assert_eq!(table["rows"].as_array().unwrap().len(), 11);
    let svg = fs::read_to_string(out.join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn replay_rejects_bad_manifests() {
    let dir = scratch("badmanifest");
    let path = dir.join("manifest.json");
    fs::write(&path, "{\"schema\": 1}").unwrap();
    assert_eq!(run(&["replay", &path.to_string_lossy(), "--out", &dir.to_string_lossy()], &[]).0, 2);
    assert_eq!(run(&["replay", &dir.join("none.json").to_string_lossy()], &[]).0, 2);
    let _ = fs::remove_dir_all(&dir);
}
