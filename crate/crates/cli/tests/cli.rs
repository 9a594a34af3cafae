use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lat40::fixtures::sha256_hex;
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lat40-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn lat40(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lat40"))
        .args(args)
        .env("LAT40_CACHE", dir.join("cache"))
        .output()
        .expect("binary runs")
}

fn fixture_copy(dir: &Path) -> PathBuf {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let dst = dir.join("fixtures");
    std::fs::create_dir_all(&dst).unwrap();
    for e in std::fs::read_dir(src).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), dst.join(e.file_name())).unwrap();
    }
    dst
}

/// Changes the first entry of the first data row of `b1.mat`.
fn corrupt_b1(fixtures: &Path, update_sums: bool) {
    let path = fixtures.join("b1.mat");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut row: Vec<i64> = lines[1].split_whitespace().map(|t| t.parse().unwrap()).collect();
    row[0] += 1;
    lines[1] = row.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let new = lines.join("\n") + "\n";
    std::fs::write(&path, &new).unwrap();
    if update_sums {
        let sums = std::fs::read_to_string(fixtures.join("SHA256SUMS")).unwrap();
        let sums: String = sums
            .lines()
            .map(|l| if l.ends_with("b1.mat") { format!("{}  b1.mat\n", sha256_hex(new.as_bytes())) } else { format!("{l}\n") })
            .collect();
        std::fs::write(fixtures.join("SHA256SUMS"), sums).unwrap();
    }
}

fn report(dir: &Path, fixtures: &Path) -> (Output, Value) {
    let out = dir.join("report.json");
    let o = lat40(dir, &["verify-all", "--fixtures", fixtures.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    (o, v)
}

fn assert_construction_blocks_the_rest(v: &Value) {
    assert_eq!(v["schema_version"], 1);
    let claims = v["claims"].as_array().unwrap();
    let ids: Vec<u64> = claims.iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, (1..=11).collect::<Vec<_>>());
    assert_eq!(claims[0]["status"], "fail");
    for c in &claims[1..] {
        assert_eq!(c["status"], "blocked", "claim {}", c["id"]);
    }
}

#[test]
fn corrupted_construction_fixture_blocks_downstream_claims() {
    let dir = scratch("corrupt-sums");
    let fx = fixture_copy(&dir);
    corrupt_b1(&fx, true);
    let (o, v) = report(&dir, &fx);
    assert_eq!(o.status.code(), Some(1));
    assert_construction_blocks_the_rest(&v);
    assert!(v["claims"][0]["computed"].as_str().unwrap().contains("reference basis"));
}

#[test]
fn fixture_checksum_mismatch_is_a_construction_failure() {
    let dir = scratch("corrupt-checksum");
    let fx = fixture_copy(&dir);
    corrupt_b1(&fx, false);
    let (o, v) = report(&dir, &fx);
    assert_eq!(o.status.code(), Some(1));
    assert_construction_blocks_the_rest(&v);
    assert!(v["claims"][0]["computed"].as_str().unwrap().contains("checksum"));
}

#[test]
fn build_is_deterministic_and_round_trips() {
    let dir = scratch("build");
    let a = dir.join("a.lat");
    let b = dir.join("b.lat");
    assert!(lat40(&dir, &["build", "--out", a.to_str().unwrap()]).status.success());
    let fx = fixture_copy(&dir);
    assert!(lat40(&dir, &["build", "--fixtures", fx.to_str().unwrap(), "--out", b.to_str().unwrap()]).status.success());
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    assert!(ta.starts_with("frame: paper40\n"));
    let lat = lat40::Lattice::from_file_string(&ta).unwrap();
    assert!(lat.is_even() && lat.is_unimodular());

    let o = lat40(&dir, &["build", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rank"], 40);
    assert_eq!(v["unimodular"], true);
}

/// `D₄` in the standard frame: 24 roots of norm 2.
const D4: &str = "frame: inline std4\n4 4\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n4 4\n1 1 0 0\n0 1 1 0\n0 0 1 1\n0 0 0 2\n";

#[test]
fn minvec_caches_by_content() {
    let dir = scratch("minvec");
    let lat = dir.join("d4.lat");
    std::fs::write(&lat, D4).unwrap();
    let vecs = dir.join("d4.vecs");
    let args = ["minvec", "--lattice", lat.to_str().unwrap(), "--norm", "2", "--format", "json", "--out", vecs.to_str().unwrap()];
    let first: Value = serde_json::from_slice(&lat40(&dir, &args).stdout).unwrap();
    let second: Value = serde_json::from_slice(&lat40(&dir, &args).stdout).unwrap();
    assert_eq!(first["count"], 24);
    assert_eq!(first["cache_hit"], false);
    assert_eq!(second["cache_hit"], true);
    assert_eq!(first["cache_file"], second["cache_file"]);

    // a damaged cache entry is rebuilt, not trusted
    std::fs::write(first["cache_file"].as_str().unwrap(), "garbage").unwrap();
    let third: Value = serde_json::from_slice(&lat40(&dir, &args).stdout).unwrap();
    assert_eq!((third["count"].clone(), third["cache_hit"].clone()), (Value::from(24), Value::from(false)));

    let t = lat40(&dir, &["types", "--vecs", vecs.to_str().unwrap(), "--lattice", lat.to_str().unwrap(), "--format", "json"]);
    assert!(t.status.success(), "{}", String::from_utf8_lossy(&t.stderr));
    let tv: Value = serde_json::from_slice(&t.stdout).unwrap();
    let total: u64 = tv["irreducible"].as_array().unwrap().iter().map(|r| r["size"].as_u64().unwrap()).sum();
    assert_eq!(total, 24);
}

#[test]
fn malformed_inputs_exit_with_code_two() {
    let dir = scratch("malformed");
    let lat = dir.join("bad.lat");
    std::fs::write(&lat, "frame: nowhere\n1 1\n1\n").unwrap();
    assert_eq!(lat40(&dir, &["minvec", "--lattice", lat.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(lat40(&dir, &["minvec", "--lattice", dir.join("missing.lat").to_str().unwrap()]).status.code(), Some(2));
    let vecs = dir.join("bad.vecs");
    std::fs::write(&vecs, "2 40 4 paper40\n1 2 3\n").unwrap();
    assert_eq!(lat40(&dir, &["types", "--vecs", vecs.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn search_recovers_the_o40_parameters() {
    let dir = scratch("search");
    let o = lat40(&dir, &["search", "--region3", "1,0,0,0,1,1", "--region21", "0,7,1,0,4,17"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["counts"]["region"], 1);
    let c = &v["candidates"][0];
    assert_eq!(c["code3"]["params"], serde_json::json!([1, 0, 0, 0, 1, 1]));
    assert_eq!(c["code21"]["params"], serde_json::json!([0, 7, 1, 0, 4, 17]));
}
