//! Areas of the zones found by a scan.
//!
//! The grid point `(m, n)` stands for the direction `(m/N, n/N, 1)`, so the
//! grid lives in the gnomonic chart `z = 1` where the solid angle element is
//! `dx dy / (1 + x² + y²)^{3/2}`. Each grid point owns the square of side
//! `1/N` around it, clipped to the fundamental triangle `0 <= x <= y <= 1`.
//! With the 48-fold symmetry of the cube, the fraction of the triangle is
//! the fraction of the whole sphere.
//!
//! The flat measure of the same clipped squares in the `(m/N, n/N)` plane
//! is available as [`Normalization::Grid`]; published tables of this
//! experiment follow that convention.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::dynamics::DirectionRecord;
use crate::homology::ZoneLabel;
use crate::scan::ScanResult;

/// Solid angle of `[0,x] × [0,y]` in the chart `z = 1`.
fn corner(x: f64, y: f64) -> f64 {
    (x * y / (1.0 + x * x + y * y).sqrt()).atan()
}

pub fn rectangle_solid_angle(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    corner(x1, y1) - corner(x0, y1) - corner(x1, y0) + corner(x0, y0)
}

/// Flat area of the part of the fundamental triangle owned by `(m, n)`.
pub fn cell_grid_area(m: i64, n: i64, big_n: i64) -> f64 {
    let d = 1.0 / big_n as f64;
    let x0 = (m as f64 - 0.5).max(0.0) * d;
    let x1 = (m as f64 + 0.5) * d;
    let y0 = (n as f64 - 0.5) * d;
    let y1 = (n as f64 + 0.5).min(big_n as f64) * d;
    if m == n {
        0.5 * (y1 - x0) * (y1 - x0)
    } else {
        (x1 - x0) * (y1 - y0)
    }
}

/// How a grid cell is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// solid angle; areas are fractions of the sphere.
    #[default]
    Sphere,
    /// flat area in the `(m/N, n/N)` plane; areas are fractions of the
    /// grid triangle.
    Grid,
}

impl Normalization {
    pub fn cell_weight(self, m: i64, n: i64, big_n: i64) -> f64 {
        match self {
            Normalization::Sphere => cell_solid_angle(m, n, big_n),
            Normalization::Grid => cell_grid_area(m, n, big_n),
        }
    }
}

/// Solid angle of the part of the fundamental triangle owned by `(m, n)`.
pub fn cell_solid_angle(m: i64, n: i64, big_n: i64) -> f64 {
    let d = 1.0 / big_n as f64;
    let (x, y) = (m as f64 * d, n as f64 * d);
    let x0 = (x - 0.5 * d).max(0.0);
    let x1 = x + 0.5 * d;
    let y0 = y - 0.5 * d;
    let y1 = (y + 0.5 * d).min(1.0);
    if m == n {
        // the clipped cell is the half of a square below the mirror x = y,
        // and the integrand is symmetric in x and y.
        let a = x0;
        let b = y1;
        0.5 * rectangle_solid_angle(a, b, a, b)
    } else {
        rectangle_solid_angle(x0, x1, y0, y1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaRow {
    /// `Zone` or `Null`.
    pub label: ZoneLabel,
    /// fraction of the whole, see [`Normalization`].
    pub area: f64,
    /// weight of this label's cells that touch another label, same units.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaTable {
    pub normalization: Normalization,
    /// descending by area.
    pub rows: Vec<AreaRow>,
    /// fraction left unresolved.
    pub residual_area: f64,
}

impl AreaTable {
    pub fn area_of(&self, label: ZoneLabel) -> Option<f64> {
        self.rows.iter().find(|r| r.label == label).map(|r| r.area)
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.area).sum::<f64>() + self.residual_area
    }

    /// `label,area,error`, followed by an `unresolved` row for the residual.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "area", "error"])?;
        for r in &self.rows {
            w.write_record([r.label.render(), format!("{:.6e}", r.area), format!("{:.6e}", r.error)])?;
        }
        w.write_record(["unresolved".to_string(), format!("{:.6e}", self.residual_area), String::new()])?;
        w.flush()?;
        Ok(())
    }
}

/// Sphere-fraction areas.
pub fn zone_areas(s: &ScanResult) -> AreaTable {
    zone_areas_with(s, Normalization::Sphere)
}

pub fn zone_areas_with(s: &ScanResult, normalization: Normalization) -> AreaTable {
    areas_of(&s.records, s.header.big_n, normalization)
}

pub fn areas_of(records: &[DirectionRecord], big_n: i64, normalization: Normalization) -> AreaTable {
    let labels: HashMap<(i64, i64), ZoneLabel> = records.iter().map(|r| ((r.m, r.n), r.label)).collect();
    let mut area: HashMap<ZoneLabel, f64> = HashMap::new();
    let mut boundary: HashMap<ZoneLabel, f64> = HashMap::new();
    let mut residual = 0.0;
    let mut total = 0.0;
    for r in records {
        let w = normalization.cell_weight(r.m, r.n, big_n);
        total += w;
        if r.label.is_unresolved() {
            residual += w;
            continue;
        }
        *area.entry(r.label).or_default() += w;
        let touches = [(-1, 0), (1, 0), (0, -1), (0, 1)]
            .iter()
            .filter_map(|(dm, dn)| labels.get(&(r.m + dm, r.n + dn)))
            .any(|l| *l != r.label);
        if touches {
            *boundary.entry(r.label).or_default() += w;
        }
    }
    let mut rows: Vec<AreaRow> = area
        .into_iter()
        .map(|(label, a)| AreaRow {
            label,
            area: a / total,
            error: boundary.get(&label).copied().unwrap_or(0.0) / total,
        })
        .collect();
    rows.sort_by(|a, b| b.area.total_cmp(&a.area).then(a.label.cmp(&b.label)));
    AreaTable {
        normalization,
        rows,
        residual_area: if total > 0.0 { residual / total } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cells_tile_the_triangle() {
        for big_n in [1, 2, 7, 50] {
            let mut s = 0.0;
            for m in 0..=big_n {
                for n in m..=big_n {
                    s += cell_solid_angle(m, n, big_n);
                }
            }
            assert!((s - PI / 12.0).abs() < 1e-12, "N={big_n}: {s}");
            let mut g = 0.0;
            for m in 0..=big_n {
                for n in m..=big_n {
                    g += cell_grid_area(m, n, big_n);
                }
            }
            assert!((g - 0.5).abs() < 1e-12, "N={big_n}: {g}");
        }
    }

    #[test]
    fn rectangle_matches_quadrature() {
        let (x0, x1, y0, y1) = (0.2, 0.7, 0.1, 0.9);
        let k = 400;
        let mut q = 0.0;
        for i in 0..k {
            for j in 0..k {
                let x = x0 + (i as f64 + 0.5) * (x1 - x0) / k as f64;
                let y = y0 + (j as f64 + 0.5) * (y1 - y0) / k as f64;
                q += (1.0 + x * x + y * y).powf(-1.5);
            }
        }
        q *= (x1 - x0) * (y1 - y0) / (k * k) as f64;
        assert!((rectangle_solid_angle(x0, x1, y0, y1) - q).abs() < 1e-6);
    }
}
