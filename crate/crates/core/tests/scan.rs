use std::f64::consts::PI;
use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};

use novikov::dynamics::Diagnostics;
use novikov::scan::areas::{areas_of, cell_solid_angle};
use novikov::scan::{
    enumerate_grid, extract_ergodic_set, partial_path, read_scan, scan, scan_to_file, write_scan, zone_areas,
    zone_areas_with, Normalization, Progress, ScanHeader, ScanResult,
};
use novikov::{
    ClassifyOptions, DirectionRecord, DispersionRelation, ScanError, UnresolvedReason, Vec3, ZoneLabel,
};

fn record(m: i64, n: i64, big_n: i64, label: ZoneLabel) -> DirectionRecord {
    let d = enumerate_grid(big_n).into_iter().find(|d| d.m == m && d.n == n).unwrap();
    DirectionRecord {
        m,
        n,
        big_n,
        h: d.h,
        label,
        diag: Diagnostics::default(),
    }
}

fn synthetic(big_n: i64, label: impl Fn(i64, i64) -> ZoneLabel) -> ScanResult {
    let f = DispersionRelation::simple_cubic();
    ScanResult {
        header: ScanHeader::new(&f, 0.0, big_n, &ClassifyOptions::default()),
        records: enumerate_grid(big_n)
            .iter()
            .map(|d| record(d.m, d.n, big_n, label(d.m, d.n)))
            .collect(),
    }
}

/// Area of a spherical polygon from the turning of its great-circle edges.
fn girard(chart: &[(f64, f64)]) -> f64 {
    let v: Vec<Vec3> = chart.iter().map(|&(x, y)| Vec3::new(x, y, 1.0).normalize()).collect();
    let k = v.len();
    let mut angles = 0.0;
    for i in 0..k {
        let (prev, cur, next) = (v[(i + k - 1) % k], v[i], v[(i + 1) % k]);
        let a = (prev - cur * cur.dot(&prev)).normalize();
        let b = (next - cur * cur.dot(&next)).normalize();
        angles += a.dot(&b).clamp(-1.0, 1.0).acos();
    }
    angles - (k as f64 - 2.0) * PI
}

#[test]
fn cell_solid_angles_match_spherical_polygons() {
    // N = 2: corner, edge, interior and diagonal cells
    let h = 0.25;
    let cases = [
        ((0, 0), vec![(0.0, 0.0), (h, h), (0.0, h)]),
        ((0, 1), vec![(0.0, h), (h, h), (h, 3.0 * h), (0.0, 3.0 * h)]),
        ((0, 2), vec![(0.0, 3.0 * h), (h, 3.0 * h), (h, 1.0), (0.0, 1.0)]),
        ((1, 1), vec![(h, h), (3.0 * h, 3.0 * h), (h, 3.0 * h)]),
        ((1, 2), vec![(h, 3.0 * h), (3.0 * h, 3.0 * h), (3.0 * h, 1.0), (h, 1.0)]),
        ((2, 2), vec![(3.0 * h, 3.0 * h), (1.0, 1.0), (3.0 * h, 1.0)]),
    ];
    let mut total = 0.0;
    for ((m, n), poly) in cases {
        let want = girard(&poly);
        let got = cell_solid_angle(m, n, 2);
        assert!((got - want).abs() < 1e-12, "({m},{n}): {got} vs {want}");
        total += got;
    }
    // the fundamental triangle is 1/48 of the sphere
    assert!((total - PI / 12.0).abs() < 1e-12);
}

#[test]
fn one_differing_cell_gets_its_own_solid_angle() {
    let s = synthetic(2, |m, n| {
        if (m, n) == (1, 2) {
            ZoneLabel::Zone([1, 1, 1])
        } else {
            ZoneLabel::Zone([0, 0, 1])
        }
    });
    let t = zone_areas(&s);
    let cell = girard(&[(0.25, 0.75), (0.75, 0.75), (0.75, 1.0), (0.25, 1.0)]) / (PI / 12.0);
    assert!((t.area_of(ZoneLabel::Zone([1, 1, 1])).unwrap() - cell).abs() < 1e-12);
    assert!((t.area_of(ZoneLabel::Zone([0, 0, 1])).unwrap() - (1.0 - cell)).abs() < 1e-12);
    assert_eq!(t.rows[0].label, ZoneLabel::Zone([0, 0, 1]));
}

#[test]
fn all_zone_scan_has_unit_area_and_no_error() {
    for norm in [Normalization::Sphere, Normalization::Grid] {
        let s = synthetic(7, |_, _| ZoneLabel::Zone([0, 0, 1]));
        let t = zone_areas_with(&s, norm);
        assert_eq!(t.rows.len(), 1);
        assert!((t.rows[0].area - 1.0).abs() < 1e-12);
        assert_eq!(t.rows[0].error, 0.0);
        assert_eq!(t.residual_area, 0.0);
        assert!(extract_ergodic_set(&s).is_empty());
    }
}

#[test]
fn ergodic_set_is_the_unresolved_cells() {
    let bad = [(1, 3), (2, 5), (4, 4)];
    let s = synthetic(5, |m, n| {
        if bad.contains(&(m, n)) {
            ZoneLabel::Unresolved(UnresolvedReason::RankOne)
        } else {
            ZoneLabel::Null
        }
    });
    let mut pts = extract_ergodic_set(&s);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(pts, vec![[0.2, 0.6], [0.4, 1.0], [0.8, 0.8]]);
}

#[test]
fn area_closure_on_a_mixed_table() {
    let s = synthetic(9, |m, n| match (m + 2 * n) % 4 {
        0 => ZoneLabel::Zone([0, 0, 1]),
        1 => ZoneLabel::Null,
        2 => ZoneLabel::Unresolved(UnresolvedReason::Degenerate),
        _ => ZoneLabel::Zone([1, 2, 2]),
    });
    for norm in [Normalization::Sphere, Normalization::Grid] {
        let t = areas_of(&s.records, 9, norm);
        assert!((t.total() - 1.0).abs() < 1e-9);
        assert!(t.rows.windows(2).all(|w| w[0].area >= w[1].area));
        for r in &t.rows {
            assert!(r.error <= r.area + 1e-15);
        }
    }
}

fn small_scan(dir: &std::path::Path, name: &str, workers: usize) -> (ScanResult, Vec<u8>) {
    let f = DispersionRelation::simple_cubic();
    let out = dir.join(name);
    let s = scan_to_file(&f, 0.0, 3, &ClassifyOptions::default(), workers, &out, false, None).unwrap();
    (s, fs::read(&out).unwrap())
}

#[test]
fn scan_files_do_not_depend_on_workers_and_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let (s1, b1) = small_scan(tmp.path(), "w1.jsonl", 1);
    let (s3, b3) = small_scan(tmp.path(), "w3.jsonl", 3);
    assert_eq!(b1, b3);
    assert_eq!(s1, s3);
    assert_eq!(read_scan(&tmp.path().join("w1.jsonl")).unwrap(), s1);
    assert!(!partial_path(&tmp.path().join("w1.jsonl")).exists());

    let f = DispersionRelation::simple_cubic();
    let mem = scan(&f, 0.0, 3, &ClassifyOptions::default(), 2);
    assert_eq!(mem, s1);
    let again = tmp.path().join("again.jsonl");
    write_scan(&again, &mem).unwrap();
    assert_eq!(fs::read(&again).unwrap(), b1);

    assert_eq!(s1.records.len(), 10);
    assert_eq!(s1.records[0].label, ZoneLabel::Zone([0, 0, 1]));
    for norm in [Normalization::Sphere, Normalization::Grid] {
        assert!((zone_areas_with(&s1, norm).total() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn resume_finishes_a_torn_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, clean) = small_scan(tmp.path(), "clean.jsonl", 1);
    let text = String::from_utf8(clean.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();

    // header, records 4..7 out of order, and half of another record
    let out = tmp.path().join("resumed.jsonl");
    let mut partial = String::new();
    partial.push_str(lines[0]);
    partial.push('\n');
    for l in [lines[6], lines[4], lines[5]] {
        partial.push_str(l);
        partial.push('\n');
    }
    partial.push_str(&lines[1][..lines[1].len() / 2]);
    fs::write(partial_path(&out), partial).unwrap();

    let calls = AtomicUsize::new(0);
    let progress = |p: Progress| {
        calls.fetch_add(1, Ordering::Relaxed);
        assert_eq!(p.total, 10);
    };
    let f = DispersionRelation::simple_cubic();
    scan_to_file(&f, 0.0, 3, &ClassifyOptions::default(), 2, &out, true, Some(&progress)).unwrap();
    assert_eq!(calls.load(Ordering::Relaxed), 7);
    assert_eq!(fs::read(&out).unwrap(), clean);
    assert!(!partial_path(&out).exists());

    // a finished file is reused as is
    let before = fs::metadata(&out).unwrap().modified().unwrap();
    scan_to_file(&f, 0.0, 3, &ClassifyOptions::default(), 1, &out, true, Some(&progress)).unwrap();
    assert_eq!(calls.load(Ordering::Relaxed), 7);
    assert_eq!(fs::metadata(&out).unwrap().modified().unwrap(), before);
}

#[test]
fn checkpoint_for_another_scan_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, clean) = small_scan(tmp.path(), "e0.jsonl", 1);
    let text = String::from_utf8(clean).unwrap();
    let out = tmp.path().join("e1.jsonl");
    fs::write(partial_path(&out), text.lines().next().unwrap().to_string() + "\n").unwrap();
    let f = DispersionRelation::simple_cubic();
    let err = scan_to_file(&f, 1.0, 3, &ClassifyOptions::default(), 1, &out, true, None).unwrap_err();
    assert!(matches!(err, ScanError::CheckpointMismatch { .. }), "{err}");
}

#[test]
fn malformed_files_report_lines_and_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, clean) = small_scan(tmp.path(), "ok.jsonl", 1);
    let text = String::from_utf8(clean).unwrap();

    let cut = tmp.path().join("cut.jsonl");
    let keep: Vec<&str> = text.lines().take(5).collect();
    fs::write(&cut, keep.join("\n") + "\n").unwrap();
    assert!(matches!(read_scan(&cut), Err(ScanError::Parse { .. })));

    let torn = tmp.path().join("torn.jsonl");
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[3].truncate(10);
    fs::write(&torn, lines.join("\n")).unwrap();
    match read_scan(&torn) {
        Err(ScanError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }

    let old = tmp.path().join("old.jsonl");
    fs::write(&old, text.replacen("\"schema_version\":1", "\"schema_version\":0", 1)).unwrap();
    assert!(matches!(
        read_scan(&old),
        Err(ScanError::Schema {
            found: 0,
            expected: 1,
            ..
        })
    ));
}
