use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BOX: &str = "0.16,0.06,0.21";

fn plans() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../plans")
}

fn regrasp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regrasp")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn plan_path(name: &str) -> String {
    plans().join(name).to_str().unwrap().to_owned()
}

#[test]
fn synth_then_plan_from_ply() {
    let dir = tempfile::tempdir().unwrap();
    let ply = dir.path().join("box.ply");
    let ply_s = ply.to_str().unwrap();
    let out = regrasp(&["synth", "--box", BOX, "--points", "4000", "--seed", "3", "--out", ply_s]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&ply).unwrap().starts_with("ply\n"));

    let report = dir.path().join("report.json");
    let plys = dir.path().join("groups");
    let out = regrasp(&[
        "plan",
        "--plan",
        &plan_path("pivot_pivot_pivot.json"),
        "--cloud",
        ply_s,
        "--out",
        report.to_str().unwrap(),
        "--export-ply",
        plys.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&report);
    assert_eq!(r["schema_version"], 1);
    let alpha = r["alpha"].as_u64().unwrap() as usize;
    assert_eq!(r["groups"].as_array().unwrap().len(), alpha);
    assert_eq!(r["parameters"]["force_cap"], 20.0);
    for g in 1..=alpha {
        let text = std::fs::read_to_string(plys.join(format!("group_{g}.ply"))).unwrap();
        assert!(text.contains("property uchar red"));
        // selected contacts are marked in pure red and green
        assert!(text.contains(" 255 0 0\n") && text.contains(" 0 255 0\n"));
    }
}

#[test]
fn regions_then_score_matches_plan() {
    let dir = tempfile::tempdir().unwrap();
    let regions = dir.path().join("regions.json");
    let report = dir.path().join("report.json");
    let common = ["--plan", &plan_path("slide_pivot_pickup.json"), "--box", BOX, "--points", "3000", "--seed", "5"];
    let mut args = vec!["regions"];
    args.extend(common);
    args.extend(["--out", regions.to_str().unwrap()]);
    assert_eq!(code(&regrasp(&args)), 0);
    let mut args = vec!["plan"];
    args.extend(common);
    args.extend(["--out", report.to_str().unwrap()]);
    assert_eq!(code(&regrasp(&args)), 0);

    let out = regrasp(&["score", "--regions", regions.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let score: Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = json(&report);
    assert_eq!(score["alpha"], r["alpha"]);
    let sizes: Vec<_> = json(&regions)["segments"].as_array().unwrap().iter().map(|s| s["member_indices"].as_array().unwrap().len()).collect();
    let reported: Vec<_> = r["segments"].as_array().unwrap().iter().map(|s| s["region_size"].as_u64().unwrap() as usize).collect();
    assert_eq!(sizes, reported);
    assert_eq!(score["groups"][0]["gamma"], r["groups"][0]["gamma"]);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let run = || regrasp(&["plan", "--plan", &plan_path("slide_pivot_pickup.json"), "--box", BOX, "--points", "2000", "--seed", "9"]);
    let (a, b) = (run(), run());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["seed"], 9);
}

#[test]
fn strictest_threshold_splits_distinct_regions() {
    let out = regrasp(&[
        "plan",
        "--plan",
        &plan_path("slide_pivot_pickup.json"),
        "--box",
        BOX,
        "--points",
        "2000",
        "--gamma-th",
        "1.0",
    ]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["alpha"], 3);
}

#[test]
fn explicit_poses_pass_through() {
    let out = regrasp(&["plan", "--plan", &plan_path("two_poses.json"), "--box", BOX, "--points", "2000"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["segments"].as_array().unwrap().len(), 1);
    assert_eq!(r["alpha"], 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_owned()
    };

    let broken = write("broken.json", "{\"skeleton\": [\n  {\"type\": \"PIVOT\",}\n]}");
    let out = regrasp(&["plan", "--plan", &broken, "--box", BOX, "--points", "500"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json:2"));

    let edge = write("edge.json", r#"{"skeleton":[{"type":"PIVOT","edge":"min_x_max_y"}]}"#);
    assert_eq!(code(&regrasp(&["plan", "--plan", &edge, "--box", BOX, "--points", "500"])), 2);

    let off_body = write("axis.json", r#"{"skeleton":[{"type":"PIVOT","axis":{"direction":[1,0,0],"point":[0,0.5,0.5]}}]}"#);
    assert_eq!(code(&regrasp(&["plan", "--plan", &off_body, "--box", BOX, "--points", "500"])), 3);

    // jaws too narrow for any antipodal pair: report written, plan unexecutable
    let report = dir.path().join("r.json");
    let out = regrasp(&[
        "plan",
        "--plan",
        &plan_path("slide_pivot_pickup.json"),
        "--box",
        BOX,
        "--points",
        "1000",
        "--gripper-width",
        "0.01",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    let r = json(&report);
    assert_eq!(r["executable"], false);
    assert!(r["groups"].as_array().unwrap().iter().all(|g| g["empty_region"] == true));

    assert_eq!(code(&regrasp(&["plan", "--plan", "/nonexistent/plan.json", "--box", BOX])), 2);
}

#[test]
fn verify_subcommand() {
    let out = regrasp(&["verify", "--seed", "4", "--instances", "200"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: 200 instances"));
    let out = regrasp(&["verify", "--instances", "0"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 checks"));
}
