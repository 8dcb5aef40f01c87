use std::process::Command;

fn fracpat(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fracpat"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> serde_json::Value {
    let (ok, out, err) = fracpat(args);
    assert!(ok, "{args:?} failed: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn generate_emits_dyadic_json() {
    let v = json(&["generate", "--quarter", "2"]);
    assert_eq!(v["resolution"], 4);
    assert_eq!(v["mask"], "0990");
    let v = json(&["generate", "--percolation", "1", "--depth", "3"]);
    assert_eq!(v["mask"], "ff");
}

#[test]
fn content_of_full_interval_is_one() {
    let v = json(&["content", "--full", "8", "--beta", "0.7"]);
    assert!((v["content"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn run_on_full_set_is_positive_and_reproducible() {
    let a = json(&["run", "--full", "8"]);
    let b = json(&["run", "--full", "8"]);
    assert_eq!(a["certificate"]["status"], "POSITIVE");
    assert!(a["witness_original"]["verified"].as_bool().unwrap());
    assert_eq!(a["hash"], b["hash"]);
}

#[test]
fn run_writes_bundle_directory() {
    let dir = std::env::temp_dir().join(format!("fracpat-cli-{}", std::process::id()));
    let (ok, _, err) = fracpat(&["run", "--full", "7", "--output", dir.to_str().unwrap()]);
    assert!(ok, "{err}");
    for f in ["bundle.json", "certificate.json", "witness.json", "spectrum.csv", "ledger.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn validation_errors_name_the_stage() {
    let (ok, _, err) = fracpat(&["certify", "--full", "6", "--eps", "0.5"]);
    assert!(!ok);
    assert!(err.contains("validate") && err.contains("eps"), "{err}");
}

#[test]
fn search_finds_witness_in_quarter_cantor() {
    let v = json(&["search", "--quarter", "5", "--q", "-0.5", "--beta", "0.5"]);
    assert!(v["witness_original"]["verified"].as_bool().unwrap());
}

#[test]
fn decompose_csv_has_header_and_three_rows() {
    let (ok, out, err) = fracpat(&["decompose", "--full", "7", "--csv"]);
    assert!(ok, "{err}");
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn spectrum_csv_has_rows() {
    let (ok, out, err) = fracpat(&["spectrum", "--full", "6", "--max-freq", "2", "--freq-step", "1"]);
    assert!(ok, "{err}");
    assert!(out.lines().count() >= 3);
}

#[test]
fn sweep_tables() {
    let (ok, out, _) = fracpat(&["sweep", "--axis", "q", "--values", ""]);
    assert!(ok);
    assert_eq!(out.lines().count(), 1);
    let (ok, out, err) = fracpat(&["sweep", "--axis", "q", "--values", "-0.5,0", "--quarter", "4", "--beta", "0.5"]);
    assert!(ok, "{err}");
    assert_eq!(out.lines().count(), 3);
    let (ok, _, _) = fracpat(&["sweep", "--axis", "bogus", "--values", "1"]);
    assert!(!ok);
    let v = json(&["sweep", "--axis", "trilinear_l", "--values", "3,4,5,6", "--json"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert!(v["kappa_fit"]["kappa"].is_number());
}
