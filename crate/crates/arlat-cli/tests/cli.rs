use std::process::{Command, Output};

fn arlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arlat")).args(args).env_remove("ARLAT_PRECISION").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn heller_n2_is_the_eps_matrix() {
    let o = arlat(&["heller", "--n", "2", "--i", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let x = &v["closed_form"]["xmat"];
    assert_eq!(v["closed_form"]["rank"], 2);
    assert_eq!(x[1][0]["coeffs"], serde_json::json!([0, 1]));
    for (r, c) in [(0, 0), (0, 1), (1, 1)] {
        assert_eq!(x[r][c]["coeffs"], serde_json::json!([]));
    }
    assert_eq!(v["computed"]["rank"], 2);
}

#[test]
fn heller_rank_and_range_errors() {
    let o = arlat(&["heller", "--n", "4", "--i", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["closed_form"]["rank"], 4);
    assert_eq!(arlat(&["heller", "--n", "3", "--i", "3"]).status.code(), Some(2));
    assert_eq!(arlat(&["heller", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn ass_outputs_certified_sequences() {
    let o = arlat(&["ass", "--zi", "4", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["middle"]["rank"], 8);
    assert_eq!(v["certificate"]["section_unsolvable"], true);
    let o = arlat(&["ass", "--zi", "4", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let lat = |k: &str| {
        let j: arlat::lattice::LatticeJson = serde_json::from_value(v[k].clone()).unwrap();
        arlat::lattice::Lattice::from_json(&j).unwrap()
    };
    // Z_2 is τ-periodic for n = 4, so both end terms agree up to isomorphism.
    assert!(arlat::lattice::iso_test(&lat("left"), &lat("right")).unwrap().is_iso());
}

#[test]
fn ass_rejects_projective_input() {
    let dir = tempfile::tempdir().unwrap();
    let heller = arlat(&["heller", "--n", "3", "--i", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&heller.stdout).unwrap();
    // Replace the ε entry of Z_1 by 1 to get the regular lattice A.
    let mut a = v["closed_form"].clone();
    a["xmat"][2][1] = serde_json::json!({"coeffs": [1], "exact": true});
    let path = dir.path().join("a.json");
    std::fs::write(&path, a.to_string()).unwrap();
    let o = arlat(&["ass", "--lattice", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("projective"));
}

#[test]
fn component_summaries_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("out.dot");
    let json = dir.path().join("out.json");
    let o = arlat(&["component", "--zi", "5", "2", "--depth", "4", "--dot", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("tube period=2 depth=4 vertices="));
    assert!(std::fs::read_to_string(&dot).unwrap().contains("style=dashed"));

    let o = arlat(&["component", "--zi", "4", "2", "--depth", "4", "--json", json.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("tube period=1 "));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["schema"], "arq-component/1");

    let o = arlat(&["component", "--zi", "3", "1", "--depth", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("inconclusive"));
    assert!(out.contains("note: depth 1 too small"));
}

#[test]
fn output_is_deterministic() {
    let a = arlat(&["component", "--zi", "4", "1", "--depth", "3"]);
    let b = arlat(&["component", "--zi", "4", "1", "--depth", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn precision_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_arlat"))
        .args(["heller", "--n", "2", "--i", "1"])
        .env("ARLAT_PRECISION", "40")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["closed_form"]["precision"], 40);
}

#[test]
fn verify_paper_small() {
    let o = arlat(&["verify-paper", "--n-max", "2", "--p-list", "2,101", "--snf-samples", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("p = 2") && out.contains("p = 101"));
    assert!(out.contains("criterion  1: pass") && out.contains("criterion  8: pass"));
    assert!(out.ends_with("all claims pass\n"));
}
