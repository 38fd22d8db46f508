use std::path::Path;
use std::process::{Command, Output};

use squarepack_core::PlacementManifest;

fn squarepack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squarepack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(
        squarepack(&["pack", "--t", "1.2", "--M", "4", "--n0", "10", "--nmax", "20"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(
        squarepack(&["pack", "--t", "0.6", "--M", "4", "--n0", "10"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(
        squarepack(&["bounds", "--t", "0.4"]).status.code(),
        Some(64)
    );
    assert_eq!(
        squarepack(&[
            "pack",
            "--family",
            "ap:q=0,r=1",
            "--t",
            "0.6",
            "--M",
            "4",
            "--n0",
            "10",
            "--nmax",
            "20"
        ])
        .status
        .code(),
        Some(64)
    );
    assert_eq!(squarepack(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(squarepack(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_pack_places_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = squarepack(&[
        "pack",
        "--t",
        "0.6",
        "--M",
        "4",
        "--n0",
        "2000000",
        "--nmax",
        "2000000",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let m = PlacementManifest::read_from(&out).unwrap();
    assert!(m.squares.is_empty());
    assert_eq!(m.n_reached, 2_000_000);
}

#[test]
fn failed_pack_exits_2() {
    let o = squarepack(&[
        "pack", "--t", "2/3", "--M", "4", "--n0", "1200000", "--nmax", "1250000",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("condition (7)"));
}

#[test]
fn pack_verify_render_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("m.json");
    let svg = dir.path().join("m.svg");
    let o = squarepack(&[
        "pack",
        "--t",
        "2/3",
        "--M",
        "4",
        "--n0",
        "1216512",
        "--nmax",
        "1226512",
        "--out",
        path(&json),
        "--svg",
        path(&svg),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let text = std::fs::read_to_string(&json).unwrap();
    let m = PlacementManifest::from_json(&text).unwrap();
    assert_eq!(m.to_json(), text);

    let v = squarepack(&["verify", path(&json)]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));

    let svg2 = dir.path().join("again.svg");
    assert_eq!(
        squarepack(&["render", path(&json), "--svg", path(&svg2)])
            .status
            .code(),
        Some(0)
    );
    let drawn = std::fs::read_to_string(&svg2).unwrap();
    assert_eq!(drawn.matches("class=\"square\"").count(), m.squares.len());
    assert_eq!(drawn, std::fs::read_to_string(&svg).unwrap());
}

#[test]
fn verify_flags_an_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("m.json");
    let o = squarepack(&[
        "pack",
        "--t",
        "2/3",
        "--M",
        "4",
        "--n0",
        "1216512",
        "--nmax",
        "1216600",
        "--out",
        path(&json),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut m = PlacementManifest::read_from(&json).unwrap();
    let (a, b) = (m.squares[0], m.squares[1]);
    m.squares[1].x = a.x;
    m.squares[1].y = a.y;
    assert_ne!((a.x, a.y), (b.x, b.y));
    let bad = dir.path().join("bad.json");
    m.write_to(&bad).unwrap();
    let v = squarepack(&["verify", path(&bad)]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).contains("Overlap"));
}

#[test]
fn verify_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"version\": 1}").unwrap();
    assert_eq!(squarepack(&["verify", path(&bad)]).status.code(), Some(2));
}

#[test]
fn verify_self_test_agrees() {
    let o = squarepack(&["verify", "--self-test", "--seed", "7", "--trials", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn bounds_match_published_values() {
    let o = squarepack(&["bounds", "--t", "0.55"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(ceil 35)"), "{}", stdout(&o));

    let o = squarepack(&["bounds", "--t", "0.99"]);
    assert!(stdout(&o).contains("(ceil 92863)"), "{}", stdout(&o));

    let o = squarepack(&["bounds", "--table1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn prime_bounds_list_every_term() {
    let o = squarepack(&["bounds", "--family", "prime", "--t", "0.75", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v[0];
    assert_eq!(row["m_terms"].as_array().unwrap().len(), 2, "{row}");
    assert_eq!(row["n0_terms"].as_array().unwrap().len(), 8, "{row}");
}

#[test]
fn check_conditions_reports_violations() {
    let o = squarepack(&[
        "check-conditions",
        "--t",
        "0.6",
        "--M",
        "4",
        "--n0",
        "2000000",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 10);
    assert_eq!(v["overall"], serde_json::Value::Bool(false));
}
