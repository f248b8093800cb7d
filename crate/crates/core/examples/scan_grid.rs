//! Scans the direction grid for a given N and prints the largest zones.
//!
//!     cargo run --release --example scan_grid -- 20 /tmp/n20.jsonl

use std::path::PathBuf;

use novikov::scan::{scan_to_file, zone_areas, Progress};
use novikov::{ClassifyOptions, DispersionRelation};

fn main() {
    let mut args = std::env::args().skip(1);
    let big_n: i64 = args.next().map_or(10, |a| a.parse().expect("N"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| format!("scan-n{big_n}.jsonl")));
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let f = DispersionRelation::simple_cubic();
    let report = |p: Progress| {
        if p.done.is_multiple_of(200) || p.done == p.total {
            eprintln!("{}/{} ({:.1} dir/s)", p.done, p.total, p.done as f64 / p.elapsed.as_secs_f64());
        }
    };
    let s = scan_to_file(&f, 0.0, big_n, &ClassifyOptions::default(), workers, &out, true, Some(&report))
        .expect("scan");
    let table = zone_areas(&s);
    println!("{:>12}  {:>8}  {:>8}", "label", "area", "error");
    for row in table.rows.iter().take(15) {
        println!("{:>12}  {:>8.4}  {:>8.4}", row.label.to_string(), row.area, row.error);
    }
    println!("{:>12}  {:>8.4}", "unresolved", table.residual_area);
}
