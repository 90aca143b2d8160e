use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edge-divide"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn toy_config() -> String {
    fixtures().join("toy_config.json").display().to_string()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

fn error_record(o: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    let line = stderr.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {stderr}"))
}

#[test]
fn toy_inequality_timeline_has_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["inequality", "--config", &toy_config()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path().join("inequality_timeline.csv"));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4, "{csv}");
    assert!(rows[0].starts_with("step,label,"));
    assert!(rows[1].starts_with("0,base,"));
    assert!(rows[2].starts_with("1,+us-west-2-lax-1,"));
    assert!(rows[3].starts_with("2,+us-east-1-aus-1,"));
}

#[test]
fn fairness_on_empty_catalog_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "tracts": fixtures().join("us_tracts.csv"),
            "catalog": fixtures().join("empty_catalog.csv"),
        })
        .to_string(),
    )
    .unwrap();
    let o = run(
        &["fairness", "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(3));
    let rec = error_record(&o);
    assert_eq!(rec["kind"], "data");
    assert_eq!(rec["exit_code"], 3);
    assert!(rec["message"].as_str().unwrap().contains("no access anywhere"));
}

#[test]
fn trace_matches_golden_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["trace", "--config", &toy_config()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        read(dir.path().join("trace_stats.csv")),
        read(fixtures().join("traces/trace_stats.golden.csv"))
    );
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path().join("trace_summary.json"))).unwrap();
    assert_eq!(summary["counts"]["lines_read"], 10);
    assert_eq!(summary["counts"]["records_excluded"], 1);
    assert_eq!(summary["counts"]["probes_kept"], 3);
    assert_eq!(summary["wan_residence"]["negative_records"], 1);
    let probes = read(dir.path().join("probe_summary.csv"));
    assert!(probes.contains("p2,EU,31.9,14,25.349977,,3,-1,"), "{probes}");
    assert!(probes.contains("p3,NA,61.2,48.9,,,4,0,39"), "{probes}");
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run(&["report", "--config", &toy_config(), "--svg"], d.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<String> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.len() > 20, "{names:?}");
    for n in names.iter().filter(|n| *n != "run_manifest.json") {
        assert_eq!(read(a.path().join(n)), read(b.path().join(n)), "{n} differs");
    }
}

#[test]
fn artifacts_carry_headers_and_schema_versions() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report", "--config", &toy_config(), "--svg"], dir.path());
    assert!(o.status.success());
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let text = read(&path);
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                let first = text.lines().next().unwrap_or_default();
                assert!(
                    first.split(',').all(|h| h
                        .chars()
                        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')),
                    "{}: {first}",
                    path.display()
                );
            }
            Some("json") => {
                let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                assert_eq!(v["schema_version"], 1, "{}", path.display());
            }
            Some("svg") => assert!(text.starts_with("<svg")),
            other => panic!("unexpected artifact {other:?}"),
        }
    }
    let report: serde_json::Value = serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    for s in ["ingest", "inequality", "fairness", "pareto", "leo", "trace"] {
        assert_eq!(report["sections"][s]["status"], "ok", "{s}");
    }
}

#[test]
fn admin_units_pipeline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("admin_config.json");
    let o = run(&["report", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let units = read(dir.path().join("units.csv"));
    assert_eq!(units.lines().count(), 6);
    assert!(read(dir.path().join("ci_timeline.csv")).contains("no_access"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "leo",
            "--config",
            &toy_config(),
            "--hop-km",
            "250",
            "--classes",
            "region",
            "--sigma",
            "90",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let leo = read(dir.path().join("leo_inequality.csv"));
    assert!(leo.lines().any(|l| l.starts_with("starlink,250,all,")), "{leo}");
    assert!(leo.contains("classes=region;"));
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path().join("run_manifest.json"))).unwrap();
    assert_eq!(manifest["config"]["sigma"], 90.0);
    assert_eq!(manifest["command"], "leo");
}

#[test]
fn invalid_configuration_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["fairness", "--config", &toy_config(), "--sigma", "-1"],
        &["fairness", "--config", &toy_config(), "--classes", "region,moon"],
        &["fairness", "--config", "/no/such/config.json"],
        &["trace"],
    ];
    for args in cases {
        let o = run(args, &dir.path().join("out"));
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(error_record(&o)["kind"], "config");
    }
}

#[test]
fn missing_dataset_path_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"tracts": "nowhere.csv", "catalog": "nowhere.csv"}"#).unwrap();
    let o = run(
        &["inequality", "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn as_of_before_every_launch_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["inequality", "--config", &toy_config(), "--as-of", "2001-01-01"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(error_record(&o)["message"]
        .as_str()
        .unwrap()
        .contains("as_of=2001-01-01"));
}
