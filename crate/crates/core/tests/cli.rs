use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pdsearch::parse_table;
use pdsearch::record::RunRecord;
use pdsearch::verify::CertificateJson;

fn pdsearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdsearch"))
        .args(args)
        .env_remove("PDSEARCH_WORKERS")
        .output()
        .expect("run pdsearch")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_group_writes_table_format() {
    let o = pdsearch(&["gen-group", "cyclic:13"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 14);
    assert_eq!(rows[0], "13");
    assert_eq!(rows[1], "1 2 3 4 5 6 7 8 9 10 11 12 13");
    assert_eq!(rows[2].split(' ').next_back(), Some("1"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z4z4.txt");
    let o = pdsearch(&[
        "gen-group",
        "product:cyclic:4xcyclic:4",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let g = parse_table(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(g.order(), 16);

    let ea64 = "product:cyclic:2xproduct:cyclic:2xproduct:cyclic:2xproduct:cyclic:2xproduct:cyclic:2xcyclic:2";
    let o = pdsearch(&["gen-group", ea64]);
    let g = parse_table(&stdout(&o)).unwrap();
    assert_eq!(g.order(), 64);
    assert!(pdsearch::validate_table(&g).is_valid());

    assert_eq!(pdsearch(&["gen-group", "cyclic:0"]).status.code(), Some(2));
    assert_eq!(pdsearch(&["gen-group", "klein"]).status.code(), Some(2));
}

#[test]
fn search_then_verify_round_trip() {
    let o = pdsearch(&[
        "search",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,3",
        "--max-trials",
        "1000",
        "--seed",
        "1",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let record: RunRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!record.hits.is_empty());
    assert!(record.timing.is_none());
    assert_eq!(record.config.alpha, 72);
    for hit in &record.hits {
        let cert = &hit.certificate;
        assert!(cert.pds_pass && cert.srg_pass);
        let set = serde_json::to_string(&cert.pds_1indexed).unwrap();
        let v = pdsearch(&["verify", "-g", "cyclic:13", "-p", "13,6,2,3", "--set", &set]);
        assert_eq!(v.status.code(), Some(0));
        let back: CertificateJson = serde_json::from_str(&stdout(&v)).unwrap();
        assert_eq!(&back, cert);
    }
}

#[test]
fn search_exit_codes() {
    let o = pdsearch(&[
        "search",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,4",
        "--max-trials",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("counting identity"));

    let o = pdsearch(&[
        "search",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,4",
        "--max-trials",
        "10",
        "--skip-feasibility",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = pdsearch(&[
        "search",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,3",
        "--max-trials",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let record: RunRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(record.trials_used, 0);
    assert!(record.hits.is_empty());

    let o = pdsearch(&[
        "search",
        "-g",
        "/no/such/file.txt",
        "-p",
        "13,6,2,3",
        "--max-trials",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = pdsearch(&[
        "search",
        "-g",
        "cyclic:12",
        "-p",
        "13,6,2,3",
        "--max-trials",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = pdsearch(&["search", "-g", "cyclic:13", "-p", "13,6,2,3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn search_options_are_echoed() {
    let o = pdsearch(&[
        "search",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,3",
        "--preset-schedule",
        "--alpha",
        "71",
        "--proposals",
        "sweep",
        "--workers",
        "2",
        "--timing",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let record: RunRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(record.config.max_trials, 5 * 13 * 13);
    assert_eq!(record.config.schedule, Some(vec![845]));
    assert_eq!(record.config.alpha, 71);
    let timing = record.timing.unwrap();
    assert_eq!(timing.workers, 2);

    let o = Command::new(env!("CARGO_BIN_EXE_pdsearch"))
        .args([
            "search",
            "-g",
            "cyclic:13",
            "-p",
            "13,6,2,3",
            "--max-trials",
            "5",
            "--timing",
        ])
        .env("PDSEARCH_WORKERS", "3")
        .output()
        .unwrap();
    let record: RunRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(record.timing.unwrap().workers, 3);
}

#[test]
fn directory_sweep_runs_each_group() {
    let dir = tempfile::tempdir().unwrap();
    for (name, spec) in [
        ("a_cyclic16.txt", "cyclic:16"),
        ("b_z4z4.txt", "product:cyclic:4xcyclic:4"),
    ] {
        let path = dir.path().join(name);
        let o = pdsearch(&["gen-group", spec, "-o", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let o = pdsearch(&[
        "search",
        "-g",
        dir.path().to_str().unwrap(),
        "-p",
        "16,6,2,2",
        "--max-trials",
        "300",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let records: Vec<RunRecord> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].group_label, "cyclic(16)");
    // Z16 has no (16,6,2,2) PDS; Z4 x Z4 does.
    assert!(records[0].hits.is_empty());
    assert_eq!(records[0].trials_used, 300);
    assert!(!records[1].hits.is_empty());
}

#[test]
fn verify_paley_and_failures() {
    let ok = pdsearch(&[
        "verify",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,3",
        "--set",
        "2,4,5,10,11,13",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let cert: CertificateJson = serde_json::from_str(&stdout(&ok)).unwrap();
    assert_eq!(cert.pds_1indexed, vec![2, 4, 5, 10, 11, 13]);
    assert!(cert.pds_pass && cert.srg_pass);

    let zero = pdsearch(&[
        "verify",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,3",
        "--set",
        "1 3 4 9 10 12",
        "--zero-indexed",
    ]);
    assert_eq!(zero.status.code(), Some(0));

    // Element 1 (1-indexed) is the identity of Z13.
    let id = pdsearch(&[
        "verify",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,3",
        "--set",
        "1,2,4,5,10,11",
    ]);
    assert_eq!(id.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&id.stderr);
    assert!(stderr.contains("contains the identity 0"), "{stderr}");
    let cert: CertificateJson = serde_json::from_str(&stdout(&id)).unwrap();
    assert!(!cert.pds_pass && !cert.srg_pass);

    let range = pdsearch(&[
        "verify",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,3",
        "--set",
        "0,2",
    ]);
    assert_eq!(range.status.code(), Some(2));
    let range = pdsearch(&["verify", "-g", "cyclic:13", "-p", "13,6,2,3", "--set", "14"]);
    assert_eq!(range.status.code(), Some(2));
    let dup = pdsearch(&[
        "verify",
        "-g",
        "cyclic:13",
        "-p",
        "13,6,2,3",
        "--set",
        "2,2",
    ]);
    assert_eq!(dup.status.code(), Some(2));
}

#[test]
fn verify_reads_set_files_and_fixture_tables() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set.txt");
    std::fs::write(
        &set,
        "[2, 3, 4, 5, 8, 10, 11, 12, 14, 16, 19, 20, 25, 27, 28, 29, 30, 31, 33, 37, 38, 39, \
         40, 41, 42, 45, 46, 52, 53, 55, 57, 58, 64, 66, 67, 70, 71, 79, 82, 87, 88, 89, 93, \
         94, 103, 104, 105, 107, 108, 111, 112, 113, 116, 117, 126, 127, 128, 129, 130, 131, \
         133, 134, 135, 142, 145, 147]\n",
    )
    .unwrap();
    let table = fixture("smallgrp_147_3.txt");
    let o = pdsearch(&[
        "verify",
        "-g",
        table.to_str().unwrap(),
        "-p",
        "147,66,25,33",
        "--set-file",
        set.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let cert: CertificateJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cert.group_label, "smallgrp(147,3)");
}

#[test]
fn enumerate_lists() {
    let o = pdsearch(&["enumerate", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("16\t5\t0\t2\t")));
    assert!(text.lines().any(|l| l.starts_with("16\t6\t2\t2\t")));
    let ks: Vec<usize> = text
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(ks.windows(2).all(|w| w[0] <= w[1]));

    let o = pdsearch(&["enumerate", "144", "--json"]);
    let list: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(list.as_array().unwrap().iter().any(|f| {
        f["params"] == serde_json::json!({"n": 144, "k": 52, "lambda": 16, "mu": 20})
    }));

    let o = pdsearch(&["enumerate", "6"]);
    assert_eq!(stdout(&o).lines().count(), 1);
}
