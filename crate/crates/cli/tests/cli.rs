use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn resgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resgraph")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = resgraph(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Builds the six-fixture database into `dir` and returns its path.
fn fixture_db(dir: &Path) -> PathBuf {
    let db = dir.join("db.csv");
    let manifest = fixtures().join("manifest.csv");
    ok(&["build-db", "--manifest", s(&manifest), "--out", s(&db)]);
    db
}

#[test]
fn build_db_writes_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let db = dir.path().join("db.csv");
    let manifest = fixtures().join("manifest.csv");
    ok(&["build-db", "--manifest", s(&manifest), "--out", s(&db), "--report", s(&report), "--jobs", "2"]);
    let text = fs::read_to_string(&db).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "#protnn-db v1");
    assert!(lines[1].starts_with("#delta="));
    assert!(lines[2].starts_with("#attributes=A1,A2,"));
    assert_eq!(lines.len(), 3 + 6);
    let report = fs::read_to_string(&report).unwrap();
    assert_eq!(report.lines().count(), 1 + 6);
    assert!(report.lines().skip(1).all(|l| l.contains(",added,")));
}

#[test]
fn classify_prints_one_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let db = fixture_db(dir.path());
    let query = fixtures().join("helix_b.pdb");
    let out = ok(&["classify", "--db", s(&db), "--query", s(&query)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "query_id,predicted_class,top1_id,top1_distance,votes");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&fields[..3], ["helix_b", "helix", "helix_b"]);
    assert_eq!(fields[3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(fields[4], "helix:1");
}

#[test]
fn classify_a_directory_with_options() {
    let dir = tempfile::tempdir().unwrap();
    let db = fixture_db(dir.path());
    let queries = dir.path().join("queries");
    fs::create_dir(&queries).unwrap();
    for name in ["strand_b.pdb", "helix_a.pdb"] {
        fs::copy(fixtures().join(name), queries.join(name)).unwrap();
    }
    let out = dir.path().join("pred.csv");
    ok(&[
        "classify", "--db", s(&db), "--query", s(&queries), "--k", "3", "--distance", "manhattan", "--mask",
        "A1,A2,A3,A5", "--out", s(&out), "--timing",
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let ids: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["helix_a", "strand_b"]);
    assert!(text.contains("helix_a,helix,"));
    assert!(text.contains("strand_b,strand,"));
}

#[test]
fn add_appends_rows() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let first = dir.path().join("first.csv");
    fs::write(&first, format!("path,label\n{},helix\n", s(&fx.join("helix_a.pdb")))).unwrap();
    let rest = dir.path().join("rest.csv");
    fs::write(&rest, format!("path,label\n{},strand\n", s(&fx.join("strand_a.pdb")))).unwrap();
    let db = dir.path().join("db.csv");
    ok(&["build-db", "--manifest", s(&first), "--out", s(&db)]);
    ok(&["add", "--db", s(&db), "--manifest", s(&rest)]);
    let text = fs::read_to_string(&db).unwrap();
    assert_eq!(text.lines().count(), 3 + 2);
    // Adding the same structure again is a data error and leaves the file alone.
    let out = resgraph(&["add", "--db", s(&db), "--manifest", s(&rest)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(fs::read_to_string(&db).unwrap(), text);
}

#[test]
fn evaluate_rfe_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let db = fixture_db(dir.path());
    let per_query = dir.path().join("loo.csv");
    let out = ok(&[
        "evaluate", "--db", s(&db), "--k", "1,2", "--distance", "euclidean,cosine", "--per-query", s(&per_query),
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "dataset,measure,k,mask,correct,total,accuracy");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("db,euclidean,1,all,"));
    assert_eq!(fs::read_to_string(&per_query).unwrap().lines().count(), 1 + 4 * 6);

    let trace = ok(&["rfe", "--db", s(&db), "--distance", "euclidean"]);
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("step,removed_attribute,accuracy,remaining"));
    assert!(lines.next().unwrap().starts_with("0,,"));

    let scores = ok(&["score-attributes", "--dbs", s(&db), s(&db), "--measures", "euclidean", "--ks", "1"]);
    let lines: Vec<&str> = scores.lines().collect();
    assert_eq!(lines[0], "attribute,description,count,experiments,score,rank");
    assert_eq!(lines.len(), 19);
    assert!(lines[1].starts_with("A1,"));
}

#[test]
fn stats_for_a_structure_and_a_database() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("g.txt");
    let pdb = fixtures().join("helix_a.pdb");
    let out = ok(&["stats", "--pdb", s(&pdb), "--delta", "4", "--dump-graph", s(&dump)]);
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("helix_a,"), "{row}");
    assert!(row.ends_with(",12,11,1"), "{row}");
    assert!(fs::read_to_string(&dump).unwrap().starts_with("#nodes 12\n"));

    let db = fixture_db(dir.path());
    let out = ok(&["stats", "--db", s(&db)]);
    assert_eq!(out.lines().count(), 19);
    assert!(out.lines().nth(1).unwrap().starts_with("A1,6,"));
}

#[test]
fn bench_reports_three_phases_and_total() {
    let dir = tempfile::tempdir().unwrap();
    let db = fixture_db(dir.path());
    for args in [
        vec!["bench", "--db", s(&db), "--queries", "5", "--residues", "40", "--timing"],
        vec!["bench", "--synthetic-rows", "1000", "--queries", "3", "--residues", "30", "--seed", "9"],
    ] {
        let out = ok(&args);
        let phases: Vec<&str> = out.lines().map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(phases, ["phase", "graph_building", "attribute_computation", "classification", "total"]);
        let totals: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        let sum: f64 = totals[..3].iter().sum();
        assert!((sum - totals[3]).abs() <= 3e-6, "{out}");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixtures().join("manifest.csv");
    let query = fixtures().join("strand_c.pdb");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let run_dir = dir.path().join(format!("run{run}"));
        fs::create_dir(&run_dir).unwrap();
        let db = run_dir.join("db.csv");
        let jobs = if run == 0 { "1" } else { "3" };
        ok(&["build-db", "--manifest", s(&manifest), "--out", s(&db), "--jobs", jobs]);
        let pred = ok(&["classify", "--db", s(&db), "--query", s(&query), "--k", "2"]);
        let eval = ok(&["evaluate", "--db", s(&db), "--distance", "braycurtis,correlation"]);
        outputs.push((fs::read(&db).unwrap(), pred, eval));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn help_documents_every_flag() {
    let expected: [(&str, &[&str]); 8] = [
        ("build-db", &["--manifest", "--out", "--delta", "--jobs", "--report"]),
        ("add", &["--db", "--manifest", "--out", "--jobs"]),
        ("classify", &["--db", "--query", "--k", "--distance", "--minkowski-p", "--mask", "--out", "--jobs", "--timing"]),
        ("evaluate", &["--db", "--k", "--distance", "--minkowski-p", "--mask", "--out", "--per-query"]),
        ("rfe", &["--db", "--k", "--distance", "--minkowski-p", "--out"]),
        ("score-attributes", &["--dbs", "--measures", "--ks", "--minkowski-p", "--out"]),
        ("stats", &["--pdb", "--db", "--delta", "--dump-graph", "--out"]),
        (
            "bench",
            &["--db", "--synthetic-rows", "--queries", "--residues", "--seed", "--delta", "--k", "--distance", "--timing", "--out"],
        ),
    ];
    for (cmd, flags) in expected {
        let help = ok(&[cmd, "--help"]);
        for flag in flags {
            assert!(help.contains(flag), "{cmd} --help lacks {flag}");
        }
    }
}

#[test]
fn usage_errors_exit_2_and_data_errors_exit_1() {
    for args in [
        vec!["frobnicate"],
        vec!["classify", "--db", "x.csv"],
        vec!["classify", "--db", "x.csv", "--query", "q.pdb", "--distance", "hamming"],
        vec!["classify", "--db", "x.csv", "--query", "q.pdb", "--k", "0"],
        vec!["classify", "--db", "x.csv", "--query", "q.pdb", "--mask", "A19"],
        vec!["build-db", "--manifest", "m.csv", "--out", "db.csv", "--delta", "-1"],
        vec!["stats", "--pdb", "a.pdb", "--db", "b.csv"],
    ] {
        assert_eq!(resgraph(&args).status.code(), Some(2), "{args:?}");
    }

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let broken = fixtures().join("broken.pdb");
    let db = fixture_db(dir.path());
    for args in [
        vec!["classify", "--db", s(&missing), "--query", s(&broken)],
        vec!["classify", "--db", s(&db), "--query", s(&broken)],
        vec!["stats", "--pdb", s(&broken)],
        vec!["build-db", "--manifest", s(&missing), "--out", s(&db)],
    ] {
        let out = resgraph(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}
