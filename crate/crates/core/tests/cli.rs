use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use novikov::dynamics::Diagnostics;
use novikov::scan::{enumerate_grid, read_scan, write_scan, ScanHeader, ScanResult};
use novikov::{ClassifyOptions, DirectionRecord, DispersionRelation, ZoneLabel};

fn novikov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_novikov"))
        .args(args)
        .env_remove("NOVIKOV_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn label_of(o: &Output) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(stdout(o).trim()).expect("one JSON record");
    v["label"].clone()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn classify_exit_codes() {
    let o = novikov(&["classify", "--dir", "0,0,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(label_of(&o), serde_json::json!({"zone": [0, 0, 1]}));

    let o = novikov(&["classify", "--dir", "0,0,1", "--energy", "2.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(label_of(&o), serde_json::json!("null"));

    let o = novikov(&["classify", "--dir", "0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());

    let o = novikov(&["classify", "--dir", "1,1,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(label_of(&o), serde_json::json!({"unresolved": "degenerate"}));

    for bad in [
        &["classify"][..],
        &["classify", "--dir", "1,2"],
        &["classify", "--dir", "0,0,1", "--surface", "/nonexistent/terms.txt"],
        &["classify", "--dir", "0,0,1", "--tol", "no_such_option=1"],
        &["frobnicate"],
    ] {
        assert_eq!(novikov(bad).status.code(), Some(1), "{bad:?}");
    }
}

#[test]
fn scan_report_and_render_a_tiny_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let scan = tmp.path().join("s.jsonl");
    let o = novikov(&["scan", "--N", "1", "--out", p(&scan), "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("directions/s"));
    let text = fs::read_to_string(&scan).unwrap();
    assert_eq!(text.lines().count(), 4);
    let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in ["schema_version", "surface", "E", "N", "tolerances", "tool_version"] {
        assert!(header.get(key).is_some(), "header lacks {key}");
    }
    let first: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    assert_eq!(first["label"], serde_json::json!({"zone": [0, 0, 1]}));

    let csv = tmp.path().join("areas.csv");
    let o = novikov(&["report", "areas", "--in", p(&scan), "--csv", p(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    assert_eq!(table, fs::read_to_string(&csv).unwrap());
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "label,area,error");
    assert!(rows[1].starts_with("\"0,0,1\","));
    assert!(rows.last().unwrap().starts_with("unresolved,"));

    let svg = tmp.path().join("map.svg");
    let ppm = tmp.path().join("map.ppm");
    let o = novikov(&["render", "--in", p(&scan), "--svg", p(&svg), "--ppm", p(&ppm), "--size", "64"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = fs::read_to_string(&svg).unwrap();
    assert!(doc.contains(r#"version="1.1""#));
    assert_eq!(doc.matches(r#"class="cell""#).count(), 3);
    let raster = fs::read(&ppm).unwrap();
    assert!(raster.starts_with(b"P6\n"));
}

#[test]
fn report_rejects_broken_files() {
    let tmp = tempfile::tempdir().unwrap();
    let scan = tmp.path().join("s.jsonl");
    assert_eq!(novikov(&["scan", "--N", "2", "--out", p(&scan), "--workers", "1"]).status.code(), Some(0));
    let text = fs::read_to_string(&scan).unwrap();

    let truncated = tmp.path().join("truncated.jsonl");
    let cut = text.len() - 40;
    fs::write(&truncated, &text[..cut]).unwrap();
    let o = novikov(&["report", "areas", "--in", p(&truncated)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("truncated.jsonl:7:"), "{}", stderr(&o));

    let future = tmp.path().join("future.jsonl");
    fs::write(&future, text.replacen("\"schema_version\":1", "\"schema_version\":9", 1)).unwrap();
    let o = novikov(&["report", "fracdim", "--in", p(&future)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("schema_version 9"), "{}", stderr(&o));

    let o = novikov(&["report", "areas", "--in", p(&tmp.path().join("missing.jsonl"))]);
    assert_eq!(o.status.code(), Some(1));
}

fn all_one_zone(path: &Path, big_n: i64) {
    let f = DispersionRelation::simple_cubic();
    let records = enumerate_grid(big_n)
        .iter()
        .map(|d| DirectionRecord {
            m: d.m,
            n: d.n,
            big_n,
            h: d.h,
            label: ZoneLabel::Zone([0, 0, 1]),
            diag: Diagnostics::default(),
        })
        .collect();
    let s = ScanResult {
        header: ScanHeader::new(&f, 0.0, big_n, &ClassifyOptions::default()),
        records,
    };
    write_scan(path, &s).unwrap();
}

#[test]
fn single_zone_map_has_one_colour_and_one_legend_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let scan = tmp.path().join("one.jsonl");
    all_one_zone(&scan, 12);
    let svg = tmp.path().join("one.svg");
    let o = novikov(&["render", "--in", p(&scan), "--svg", p(&svg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = fs::read_to_string(&svg).unwrap();
    assert_eq!(doc.matches(r#"class="swatch""#).count(), 1);
    let fills: std::collections::HashSet<&str> = doc
        .lines()
        .filter(|l| l.contains(r#"class="cell""#))
        .map(|l| l.split("fill=\"").nth(1).unwrap())
        .collect();
    assert_eq!(fills.len(), 1);

    let o = novikov(&["report", "fracdim", "--in", p(&scan)]);
    assert_eq!(o.status.code(), Some(1), "an empty set has no dimension");

    let o = novikov(&["report", "areas", "--in", p(&scan), "--normalization", "grid"]);
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "\"0,0,1\",1.000000e0,0.000000e0");
}

#[test]
fn flags_beat_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# small sphere\nenergy = 2.5\ndir = 0,0,1\n").unwrap();
    let o = novikov(&["classify", "--config", p(&cfg)]);
    assert_eq!(label_of(&o), serde_json::json!("null"));
    let o = novikov(&["classify", "--config", p(&cfg), "--energy", "0"]);
    assert_eq!(label_of(&o), serde_json::json!({"zone": [0, 0, 1]}));

    fs::write(&cfg, "seed_grid = many\n").unwrap();
    let o = novikov(&["classify", "--config", p(&cfg), "--dir", "0,0,1"]);
    assert_eq!(o.status.code(), Some(1));
    fs::write(&cfg, "energy 2.5\n").unwrap();
    let o = novikov(&["classify", "--config", p(&cfg), "--dir", "0,0,1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn workers_default_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s.jsonl");
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_novikov"))
            .args(["scan", "--N", "1", "--out", p(&out)])
            .env("NOVIKOV_WORKERS", workers)
            .output()
            .unwrap()
    };
    assert_eq!(run("0").status.code(), Some(1));
    assert_eq!(run("two").status.code(), Some(1));
    assert_eq!(run("2").status.code(), Some(0));
    assert_eq!(read_scan(&out).unwrap().records.len(), 3);
}
