//! Box-counting and sausage dimensions of a scan's unresolved set, or of a
//! Cantor dust when no scan is given.
//!
//! ```text
//! cargo run --release --example fractal_dimension -- [scan.jsonl]
//! ```

use novikov::scan::fractal::{coordinate_spacing, sausage_dimension_in, Point2};
use novikov::scan::{box_count_dimension, default_scales, extract_ergodic_set, read_scan, Domain};

fn cantor_dust(depth: u32) -> Vec<Point2> {
    let mut centres = vec![0.5f64];
    let mut w = 1.0;
    for _ in 0..depth {
        w /= 3.0;
        centres = centres.iter().flat_map(|c| [c - w, c + w]).collect();
    }
    centres.iter().flat_map(|&x| centres.iter().map(move |&y| [x, y])).collect()
}

fn main() {
    let (points, scales, domain) = match std::env::args().nth(1) {
        Some(path) => {
            let s = read_scan(path.as_ref()).unwrap_or_else(|e| panic!("{e}"));
            let pts = extract_ergodic_set(&s);
            let spacing = (1.0 / s.header.big_n as f64).min(coordinate_spacing(&pts));
            (pts, default_scales(spacing), Domain::Triangle)
        }
        None => {
            let scales = (1..=5).map(|k| 3f64.powi(-k)).collect();
            println!("Cantor dust, exact dimension {:.4}", 4f64.ln() / 3f64.ln());
            (cantor_dust(6), scales, Domain::Plane)
        }
    };
    println!("{} points", points.len());
    for report in [
        box_count_dimension(&points, &scales),
        sausage_dimension_in(&points, &scales, domain),
    ] {
        match report {
            Ok(r) => println!("{}", r.summary()),
            Err(e) => println!("no estimate: {e}"),
        }
    }
}
