use std::path::Path;
use std::process::{Command, Output};

fn hyperdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperdim")).args(args).output().expect("binary runs")
}

fn result(out: &Output) -> serde_json::Value {
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("one JSON document on stdout");
    doc["result"].clone()
}

#[test]
fn spectral_pressure_of_the_horseshoe() {
    let out = hyperdim(&["pressure", "--model", "horseshoe:3,0.25", "--potential", "phi-u", "--method", "spectral"]);
    assert_eq!(out.status.code(), Some(0));
    let v = result(&out)["estimate"]["value"].as_f64().unwrap();
    assert!((v - (2.0f64 / 3.0).ln()).abs() < 1e-12);
}

#[test]
fn partition_pressure_of_the_horseshoe() {
    let out = hyperdim(&["pressure", "--model", "horseshoe:3,0.25", "--method", "partition", "--kmax", "12"]);
    let v = result(&out)["estimate"]["value"].as_f64().unwrap();
    assert!((v + 0.405_465_108_108_164_4).abs() < 1e-9);
}

#[test]
fn volume_pressure_of_the_doubling_map() {
    let out = hyperdim(&["pressure", "--model", "doubling:2", "--method", "volume", "--eps", "0.1", "--kmax", "8", "--grid", "4096"]);
    let v = result(&out)["estimate"]["value"].as_f64().unwrap();
    assert!((-0.05..=0.0).contains(&v), "{v}");
}

#[test]
fn bounds_of_built_ins() {
    let b = |m: &str| result(&hyperdim(&["bound", "--model", m]));
    assert!((b("horseshoe:3,0.25")["bound"].as_f64().unwrap() - 1.630_930).abs() < 1e-6);
    let cat = b("catmap");
    assert_eq!(cat["bound"].as_f64(), Some(2.0));
    assert_eq!(cat["classification"], "attractor");
    assert!((b("cantor:3,02")["bound"].as_f64().unwrap() - 0.630_930).abs() < 1e-6);
}

#[test]
fn srb_checks_are_reported() {
    let r = result(&hyperdim(&["bound", "--model", "catmap", "--check-srb"]));
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|c| c["verdict"] == "pass"));
}

#[test]
fn dimension_examples() {
    let d = |args: &[&str]| result(&hyperdim(args))["estimate"]["slope"].as_f64().unwrap();
    let c = d(&["dimension", "--model", "cantor:3,02", "--scales", "3^-2..3^-9"]);
    assert!((c - 0.6309).abs() < 0.02, "{c}");
    let i = d(&["dimension", "--model", "horseshoe:3,0.25", "--set", "invariant"]);
    assert!((i - 1.1309).abs() < 0.05, "{i}");
    let s = d(&["dimension", "--model", "horseshoe:3,0.25", "--set", "stable", "--eps", "0.05", "--depth", "10"]);
    assert!((s - 1.6309).abs() < 0.1, "{s}");
}

#[test]
fn exit_codes() {
    assert_eq!(hyperdim(&["report", "--model-file", "/no/such/model.json"]).status.code(), Some(2));
    let bad = hyperdim(&["bound", "--model", "horseshoe:1.5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(bad.stdout.is_empty());
    assert!(!bad.stderr.is_empty());
    assert_eq!(hyperdim(&["pressure", "--model", "golden", "--method", "partition", "--kmax", "60"]).status.code(), Some(3));
    assert_eq!(hyperdim(&["dimension", "--model", "doubling:2", "--set", "stable"]).status.code(), Some(2));
    let args = ["pressure", "--model", "horseshoe:2.03", "--method", "volume", "--eps", "0.05", "--kmax", "8", "--grid", "512"];
    assert_eq!(hyperdim(&args).status.code(), Some(0));
    let mut strict = vec!["--require-verdict"];
    strict.extend_from_slice(&args);
    let out = hyperdim(&strict);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(result(&out)["classification"], "inconclusive");
}

#[test]
fn output_is_byte_identical_and_carries_provenance() {
    let args = ["bound", "--model", "horseshoe:2.5", "--check-srb"];
    let a = hyperdim(&args).stdout;
    let b = hyperdim(&args).stdout;
    assert_eq!(a, b);
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["tool"], "hyperdim");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["seed"], 0);
    assert_eq!(doc["config"]["command"]["bound"]["model"]["model"], "horseshoe:2.5");
    assert_eq!(doc["tolerances"]["exact"], 1e-9);
    assert_eq!(doc["caps"]["grid_cells"], 1u64 << 26);
}

#[test]
fn out_writes_json_and_csv_side_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cantor.json");
    let o = hyperdim(&["--out", out.to_str().unwrap(), "dimension", "--model", "cantor:3,02", "--scales", "3^-2..3^-9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("cantor.dimension.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("scale,count,log_inv_scale,log_count,fitted"));
    assert_eq!(lines.count(), 8);
    assert!(!csv.contains('\r'));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["result"]["estimate"]["slope"].is_f64());

    // A failing run leaves no files behind.
    let missing = dir.path().join("fail.json");
    let f = hyperdim(&["--out", missing.to_str().unwrap(), "bound", "--model", "nonsense"]);
    assert_eq!(f.status.code(), Some(2));
    assert!(!missing.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn model_files_drive_the_same_computation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("doubling.json");
    std::fs::write(
        &path,
        r#"{"space":{"dim":1,"geometry":"torus"},"kind":"expanding",
            "branches":[{"symbol":0,"domain":{"lo":[0.0],"hi":[0.5]},"linear":[[2.0]],"offset":[0.0]},
                        {"symbol":1,"domain":{"lo":[0.5],"hi":[1.0]},"linear":[[2.0]],"offset":[-1.0]}],
            "transition":[[1,1],[1,1]],"unstable_dim":1}"#,
    )
    .unwrap();
    let from_file = result(&hyperdim(&["bound", "--model-file", path.to_str().unwrap()]));
    let built_in = result(&hyperdim(&["bound", "--model", "doubling:2"]));
    assert_eq!(from_file["bound"], built_in["bound"]);
    assert_eq!(from_file["pressure"], built_in["pressure"]);
    assert!(Path::new(&path).exists());
}

#[test]
fn report_sweep_and_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    let o = hyperdim(&[
        "--out", out.to_str().unwrap(), "report", "--model", "horseshoe", "--sweep", "lambda_u=2.5:3.5:0.5",
        "--depth", "6", "--grid", "1024", "--scales", "2^-2..2^-9", "--plot-data",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = doc["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let lu = r["lambda_u"].as_f64().unwrap();
        assert!((r["bound"].as_f64().unwrap() - (1.0 + 2f64.ln() / lu.ln())).abs() < 1e-12);
    }
    assert!(dir.path().join("sweep.sweep.csv").exists());
    assert!(dir.path().join("sweep.plot.bound.csv").exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda_u"));

    let t = result(&hyperdim(&["report", "--model", "horseshoe", "--target-dim", "1.5", "--depth", "6", "--grid", "1024", "--scales", "2^-2..2^-9"]));
    assert!((t["row"]["lambda_u"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(t["bound_matches_target"], true);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |t: &str| {
        hyperdim(&["--threads", t, "dimension", "--model", "horseshoe:3", "--set", "stable", "--grid", "512", "--depth", "6"]).stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("4"));
}
