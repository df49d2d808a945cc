use std::path::PathBuf;
use std::process::{Command, Output};

fn stpm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stpm")).args(args).output().expect("binary runs")
}

fn table1() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/table1.jsonl").display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const WORKED_THRESHOLDS: [&str; 10] =
    ["--max-period", "2", "--min-density", "3", "--min-season", "2", "--dist-min", "4", "--dist-max", "10"];

#[test]
fn mine_reports_the_two_frequent_pairs() {
    let db = table1();
    let mut args = vec!["mine", db.as_str(), "--max-k", "2", "--workers", "2", "--partitions", "4"];
    args.extend(WORKED_THRESHOLDS);
    let out = stpm(&args);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], "dstpm-report/1");
    let find = |p: &str| report["patterns"].as_array().unwrap().iter().find(|x| x["pattern"] == p).cloned();
    let p1 = find("C:1 >= D:1").expect("P1 reported");
    assert_eq!(p1["support"], serde_json::json!([1, 2, 3, 7, 8, 11, 12, 14]));
    assert_eq!(p1["seasons"], serde_json::json!([[1, 2, 3], [11, 12, 14]]));
    assert_eq!(p1["frequent"], true);
    let p2 = find("C:1 > F:1").expect("P2 reported");
    assert_eq!(p2["support"], serde_json::json!([1, 2, 3, 11, 12, 14]));
    assert!(find("M:1").is_none(), "summary lists frequent patterns only");
}

#[test]
fn mine_is_byte_deterministic_and_full_detail_has_witnesses() {
    let db = table1();
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let path = dir.path().join(name);
        let out = stpm(&["mine", &db, "--max-k", "3", "--workers", workers, "--detail", "full", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let a = run("a.json", "1");
    assert_eq!(a, run("b.json", "1"));
    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let m1 = report["patterns"].as_array().unwrap().iter().find(|x| x["pattern"] == "M:1").unwrap();
    assert_eq!(m1["frequent"], false);
    assert_eq!(m1["witnesses"].as_array().unwrap().len(), 11);
}

#[test]
fn invalid_arguments_exit_2() {
    let db = table1();
    assert_eq!(stpm(&["mine", &db, "--min-density", "0"]).status.code(), Some(2));
    assert_eq!(stpm(&["mine", &db, "--dist-min", "9", "--dist-max", "3"]).status.code(), Some(2));
    assert_eq!(stpm(&["mine", &db, "--max-period", "abc"]).status.code(), Some(2));
    assert_eq!(stpm(&["inspect", &db, "--pattern", "C:1 nonsense D:1"]).status.code(), Some(2));
    assert_eq!(stpm(&["inspect", &db, "--event", "Z:9"]).status.code(), Some(2));
    assert_eq!(stpm(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(stpm(&["mine", missing.to_str().unwrap()]).status.code(), Some(3));
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"series\":[\"A\"],\"granule_span\":5}\n{\"granule\":2,\"events\":[]}\n").unwrap();
    let out = stpm(&["mine", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-contiguous granules: expected 1, found 2"));
}

#[test]
fn percent_threshold_is_resolved_against_database_size() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("big.jsonl");
    let gen = stpm(&["gen", "--granules", "1460", "--series", "3", "--noise", "0.5", "--seed", "4", "--out", db.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0));
    let out = stpm(&["mine", db.to_str().unwrap(), "--max-period", "0.2%", "--max-k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["max_period"], 3);
    assert_eq!(report["database"]["granules"], 1460);
}

#[test]
fn gen_is_seeded_and_rejects_degenerate_specs() {
    let a = stpm(&["gen", "--granules", "50", "--plant", "A:1 > B:1|10,40|5", "--seed", "3"]);
    let b = stpm(&["gen", "--granules", "50", "--plant", "A:1 > B:1|10,40|5", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 51);
    assert_eq!(stpm(&["gen", "--noise", "0"]).status.code(), Some(2));
    assert_eq!(stpm(&["gen", "--granules", "20", "--plant", "A:1 > B:1|18|5"]).status.code(), Some(2));
}

#[test]
fn planted_pattern_is_found_by_mine() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("planted.jsonl");
    let gen = stpm(&["gen", "--granules", "60", "--series", "4", "--alphabet", "3", "--noise", "0.3", "--plant", "A:1 > B:1|10,40|5", "--seed", "11", "--out", db.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0));
    let out = stpm(&[
        "mine", db.to_str().unwrap(), "--max-period", "1", "--min-density", "5", "--min-season", "2", "--dist-min", "26",
        "--dist-max", "26", "--max-k", "2",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let hit = report["patterns"].as_array().unwrap().iter().find(|x| x["pattern"] == "A:1 > B:1").expect("planted pattern");
    assert_eq!(hit["seasons"], serde_json::json!([[10, 11, 12, 13, 14], [40, 41, 42, 43, 44]]));
}

#[test]
fn oracle_check_passes_on_table1() {
    let db = table1();
    let mut args = vec!["oracle-check", db.as_str(), "--max-k", "2"];
    args.extend(WORKED_THRESHOLDS);
    let out = stpm(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("ok:"));
}

#[test]
fn inspect_event_and_pattern() {
    let db = table1();
    let out = stpm(&["inspect", &db, "--event", "M:1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("support (11 granules): 1 2 3 4 5 6 8 9 10 11 13"));
    assert!(text.contains("seasons: 1\n"));
    assert!(text.contains("frequent: no"));

    let out = stpm(&["inspect", &db, "--pattern", "C:1 > F:1"]);
    let text = stdout(&out);
    assert!(text.contains("C:1 > F:1\n  support (6 granules): 1 2 3 11 12 14"));
    assert!(text.contains("F:1\n"), "per-event supports listed");
    let out = stpm(&["inspect", &db, "--pattern", "C:1 contains D:1"]);
    assert!(stdout(&out).contains("C:1 >= D:1\n  support (8 granules)"));
}

#[test]
fn bench_rows_and_constant_pattern_count() {
    let db = table1();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let out = stpm(&[
        "bench", &db, "--workers", "1,2", "--partitions", "1,4,16", "--repetitions", "3", "--max-k", "3", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "workers,partitions,stage,wall_ms,shuffle_bytes,patterns_found");
    assert_eq!(lines.len(), 1 + 6);
    let found: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert!(found.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn symbolize_csv_to_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("raw.csv");
    let bins = dir.path().join("bins.json");
    let out = dir.path().join("db.jsonl");
    let mut rows = String::from("tick,series,value\n");
    for t in 0..30 {
        rows.push_str(&format!("{t},X,{}\n{t},Y,{}\n", (t / 4) % 2, (t / 7) % 2));
    }
    std::fs::write(&csv, rows).unwrap();
    std::fs::write(
        &bins,
        r#"{"granule_span":10,"series":[{"name":"X","edges":[0.5],"labels":["0","1"]},{"name":"Y","edges":[0.5],"labels":["0","1"]}]}"#,
    )
    .unwrap();
    let run = stpm(&["symbolize", csv.to_str().unwrap(), "--bins", bins.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let mined = stpm(&["mine", out.to_str().unwrap(), "--min-density", "1", "--min-season", "1", "--dist-min", "0", "--max-k", "2"]);
    assert_eq!(mined.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&mined.stdout).unwrap();
    assert_eq!(report["database"]["granules"], 3);
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).display().to_string()
}

#[test]
fn documented_fixtures_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("gen.jsonl");
    let gen = stpm(&["gen", "--spec", &fixture("gen_spec.json"), "--seed", "1", "--out", db.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0));
    let out = stpm(&[
        "mine", db.to_str().unwrap(), "--max-period", "1", "--min-density", "5", "--min-season", "3", "--dist-min", "26",
        "--dist-max", "26", "--max-k", "2",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["patterns"].as_array().unwrap().iter().any(|p| p["pattern"] == "A:1 > B:1"));

    let sym = stpm(&["symbolize", &fixture("raw_series.csv"), "--bins", &fixture("symbolize_bins.json")]);
    assert_eq!(sym.status.code(), Some(0));
    assert_eq!(stdout(&sym).lines().count(), 1 + 4);
}
