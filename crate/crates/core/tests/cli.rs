use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cascade_forge::ingest::save_cascades;
use cascade_forge::stats::polyval;
use cascade_forge::tables::{read_metrics, write_points};
use cascade_forge::{Cascade, Timestamp, TweetId, UserId};

fn forge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade-forge"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env("CASCADE_FORGE_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn empty_tweet_file_builds_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = dir.path().join("t.jsonl");
    let friends = dir.path().join("f.tsv");
    fs::write(&tweets, "").unwrap();
    fs::write(&friends, "").unwrap();
    let out = forge(dir.path(), &["build", "--tweets", path(&tweets), "--friends", path(&friends)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no tweets"));
    assert!(ok(out).contains("cascades: 0"));
}

#[test]
fn missing_friends_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = dir.path().join("t.jsonl");
    fs::write(&tweets, "").unwrap();
    let missing = dir.path().join("nowhere.tsv");
    let out = forge(dir.path(), &["build", "--tweets", path(&tweets), "--friends", path(&missing)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.tsv"));
}

#[test]
fn store_version_mismatch_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cascades.jsonl"), "{\"format\":\"cascade\",\"version\":99}\n").unwrap();
    fs::write(dir.path().join("coordination.csv"), "user_id,coordinated,max_similarity\n").unwrap();
    let out = forge(dir.path(), &["metrics"]);
    assert!(!out.status.success());
}

#[test]
fn non_coordinated_cascade_has_zero_c_ir() {
    let dir = tempfile::tempdir().unwrap();
    let u = |s: &str| UserId::new(s).unwrap();
    let c = Cascade::new(
        TweetId::new("t1").unwrap(),
        u("r"),
        Timestamp::from_unix(0),
        vec![(u("a"), Timestamp::from_unix(60)), (u("b"), Timestamp::from_unix(120))],
        &[(u("r"), u("a")), (u("a"), u("b"))],
    )
    .unwrap();
    save_cascades(&[c], &dir.path().join("cascades.jsonl")).unwrap();
    fs::write(dir.path().join("coordination.csv"), "user_id,coordinated,max_similarity\na,0,0.5\n").unwrap();
    ok(forge(dir.path(), &["metrics"]));
    let rows = read_metrics(&dir.path().join("metrics.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].metrics.c_ir, 0.0);
    let text = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(text.starts_with(
        "cascade_id,s,s_prime,s_sparse,s_c,s_n,m,m_cc,m_cn,m_nn,h_prime,incidence,c_ir,ctnc_ir,quadrant,flags\n"
    ));
    assert!(!text.contains('\r'));
}

#[test]
fn cubic_points_select_order_three() {
    let dir = tempfile::tempdir().unwrap();
    let x: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
    let y: Vec<f64> = x.iter().map(|&v| polyval(&[0.974, -1.208, -0.386, 0.756], v)).collect();
    let points = dir.path().join("cubic.csv");
    write_points(&points, &x, &y).unwrap();
    ok(forge(dir.path(), &["fit", "--points", path(&points)]));
    let fits: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fits.json")).unwrap()).unwrap();
    assert_eq!(fits[0]["target"], "polynomial");
    assert_eq!(fits[0]["fit"]["model_kind"]["order"], 3);
}

#[test]
fn null_model_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(forge(d, &["synth", "--users", "300", "--cascades", "40", "--cohort", "6", "--pool", "10"]));
    let tweets = d.join("tweets.jsonl");
    let friends = d.join("friends.tsv");
    ok(forge(d, &["build", "--tweets", path(&tweets), "--friends", path(&friends)]));
    ok(forge(d, &["coord", "--tweets", path(&tweets)]));
    ok(forge(d, &["metrics"]));
    ok(forge(d, &["null", "--replicates", "20", "--seed", "3"]));
    let first = fs::read(d.join("null_metrics.csv")).unwrap();
    ok(forge(d, &["null", "--replicates", "20", "--seed", "3", "--jobs", "1"]));
    assert_eq!(first, fs::read(d.join("null_metrics.csv")).unwrap());
    ok(forge(d, &["null", "--replicates", "20", "--seed", "4"]));
    assert_ne!(first, fs::read(d.join("null_metrics.csv")).unwrap());
}

#[test]
fn rejects_zero_jobs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!forge(dir.path(), &["--jobs", "0", "stats"]).status.success());
}
