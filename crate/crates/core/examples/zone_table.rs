//! Prints the zone area table of a scan file in both normalizations.
//!
//! ```text
//! cargo run --release --example scan_grid -- 20 scan.jsonl
//! cargo run --example zone_table -- scan.jsonl
//! ```

use novikov::scan::{read_scan, zone_areas_with, Normalization};

fn main() {
    let path = std::env::args().nth(1).expect("usage: zone_table SCAN.jsonl");
    let s = read_scan(path.as_ref()).unwrap_or_else(|e| panic!("{e}"));
    let sphere = zone_areas_with(&s, Normalization::Sphere);
    let grid = zone_areas_with(&s, Normalization::Grid);
    println!("N = {}, {} directions", s.header.big_n, s.records.len());
    println!("{:<22} {:>9} {:>9} {:>9}", "label", "sphere", "grid", "error");
    for row in &sphere.rows {
        let g = grid.area_of(row.label).unwrap_or(0.0);
        println!("{:<22} {:>9.4} {:>9.4} {:>9.4}", row.label.to_string(), row.area, g, row.error);
    }
    println!("{:<22} {:>9.4} {:>9.4}", "unresolved", sphere.residual_area, grid.residual_area);
}
