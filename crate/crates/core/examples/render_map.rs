//! Renders a scan as an SVG zone map and a PPM raster.
//!
//! ```text
//! cargo run --example render_map -- scan.jsonl map.svg map.ppm
//! ```

use std::fs::File;
use std::io::BufWriter;

use novikov::scan::{read_scan, render_ppm, render_svg, RenderOptions};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [scan, svg, ppm] = &args[..] else {
        panic!("usage: render_map SCAN.jsonl OUT.svg OUT.ppm");
    };
    let s = read_scan(scan.as_ref()).unwrap_or_else(|e| panic!("{e}"));
    let opts = RenderOptions::default();
    std::fs::write(svg, render_svg(&s, &opts)).expect("writable svg");
    render_ppm(&s, &opts, BufWriter::new(File::create(ppm).expect("writable ppm"))).expect("ppm written");
    println!("{} cells drawn to {svg} and {ppm}", s.records.len());
}
