//! Zone maps of a scan over the `(m/N, n/N)` triangle, as SVG 1.1 or binary
//! PPM. Colours come from a hash of the label, so a zone keeps its colour
//! across scans of different resolution.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use crate::homology::ZoneLabel;
use crate::scan::areas::zone_areas;
use crate::scan::ScanResult;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// side of the triangle's bounding square in pixels.
    pub size: u32,
    pub palette_seed: u64,
    pub legend_entries: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            size: 800,
            palette_seed: 0,
            legend_entries: 20,
        }
    }
}

const BACKGROUND: [u8; 3] = [224, 224, 224];

fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> [u8; 3] {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h * 6.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    [r, g, b].map(|v| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8)
}

/// Null is white, unresolved black, zones a saturated hashed colour.
pub fn label_color(label: &ZoneLabel, seed: u64) -> [u8; 3] {
    match label {
        ZoneLabel::Null => [255, 255, 255],
        ZoneLabel::Unresolved(_) => [0, 0, 0],
        ZoneLabel::Zone(_) => {
            let h = fnv1a(label.render().as_bytes(), seed);
            let hue = (h & 0xffff) as f64 / 65536.0;
            let sat = 0.55 + 0.35 * ((h >> 16) & 0xff) as f64 / 255.0;
            let light = 0.40 + 0.25 * ((h >> 24) & 0xff) as f64 / 255.0;
            hsl_to_rgb(hue, sat, light)
        }
    }
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn labels_by_cell(s: &ScanResult) -> HashMap<(i64, i64), ZoneLabel> {
    s.records.iter().map(|r| ((r.m, r.n), r.label)).collect()
}

/// SVG 1.1 document: one `rect` of class `cell` per grid cell, clipped to
/// the triangle, and a legend of the largest zones.
pub fn render_svg(s: &ScanResult, opts: &RenderOptions) -> String {
    let big_n = s.header.big_n as f64;
    let side = opts.size as f64;
    let margin = 20.0;
    let legend_w = 220.0;
    let cell = side / big_n;
    let px = |x: f64| margin + x * side;
    let py = |y: f64| margin + (1.0 - y) * side;
    let mut out = String::new();
    let width = side + 2.0 * margin + legend_w;
    let height = side + 2.0 * margin;
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let tri = format!("{},{} {},{} {},{}", px(0.0), py(0.0), px(0.0), py(1.0), px(1.0), py(1.0));
    let _ = writeln!(out, r#"<defs><clipPath id="triangle"><polygon points="{tri}"/></clipPath></defs>"#);
    let _ = writeln!(out, r#"<g clip-path="url(#triangle)" shape-rendering="crispEdges">"#);
    for r in &s.records {
        let x = r.m as f64 / big_n;
        let y = r.n as f64 / big_n;
        let _ = writeln!(
            out,
            r#"<rect class="cell" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
            px(x) - cell / 2.0,
            py(y) - cell / 2.0,
            cell,
            cell,
            hex(label_color(&r.label, opts.palette_seed))
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<polygon points="{tri}" fill="none" stroke="black" stroke-width="1"/>"#);
    let table = zone_areas(s);
    let _ = writeln!(out, r#"<g class="legend" font-family="monospace" font-size="12">"#);
    let lx = side + 2.0 * margin;
    let zones = table.rows.iter().filter(|r| matches!(r.label, ZoneLabel::Zone(_)));
    for (i, row) in zones.take(opts.legend_entries).enumerate() {
        let y = margin + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect class="swatch" x="{lx}" y="{y}" width="12" height="12" fill="{}" stroke="black" stroke-width="0.5"/>"#,
            hex(label_color(&row.label, opts.palette_seed))
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{} {:.4}</text>"#,
            lx + 18.0,
            y + 10.0,
            row.label,
            row.area
        );
    }
    let _ = writeln!(out, "</g>\n</svg>");
    out
}

/// Binary PPM (P6) raster of the triangle; outside it is light grey.
pub fn render_ppm<W: Write>(s: &ScanResult, opts: &RenderOptions, mut out: W) -> std::io::Result<()> {
    let big_n = s.header.big_n;
    let nf = big_n as f64;
    let side = opts.size.max(1);
    let cells = labels_by_cell(s);
    write!(out, "P6\n{side} {side}\n255\n")?;
    let mut row = Vec::with_capacity(3 * side as usize);
    for j in 0..side {
        row.clear();
        // image covers [-1/2N, 1 + 1/2N] on both axes, y up.
        let y = 1.0 + 0.5 / nf - (j as f64 + 0.5) / side as f64 * (1.0 + 1.0 / nf);
        for i in 0..side {
            let x = -0.5 / nf + (i as f64 + 0.5) / side as f64 * (1.0 + 1.0 / nf);
            let inside = x >= 0.0 && y <= 1.0 && x <= y;
            let colour = if inside {
                let m = (x * nf).round() as i64;
                let n = (y * nf).round() as i64;
                cells.get(&(m, n)).map_or(BACKGROUND, |l| label_color(l, opts.palette_seed))
            } else {
                BACKGROUND
            };
            row.extend_from_slice(&colour);
        }
        out.write_all(&row)?;
    }
    out.flush()
}
