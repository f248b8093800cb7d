//! Minkowski dimension estimates for planar point sets: box counting and
//! the area of the dilated set ("sausage").
//!
//! Both fit a line in log–log coordinates over the scales between four grid
//! spacings and a quarter of the unit domain. Below that the count only
//! sees the sampling grid, above it the boxes or disks saturate the domain.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::FractalError;
use crate::scan::ScanResult;

pub type Point2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FractalMethod {
    BoxCount,
    Sausage,
}

/// Region the dilated set is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// the whole plane: a set that merely lies in the unit square.
    Plane,
    /// a set living in the unit square; dilation beyond it is not counted.
    UnitSquare,
    /// `0 <= x <= y <= 1`, the fundamental triangle of a scan.
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountReport {
    pub method: FractalMethod,
    /// strictly decreasing box sizes or disk radii.
    pub scales: Vec<f64>,
    pub counts_or_measures: Vec<f64>,
    pub dimension: f64,
    pub fit_stderr: f64,
    /// inclusive index range of `scales` used by the fit.
    pub fit_range: (usize, usize),
}

impl BoxCountReport {
    pub fn summary(&self) -> String {
        let name = match self.method {
            FractalMethod::BoxCount => "box counting",
            FractalMethod::Sausage => "sausage",
        };
        let (a, b) = self.fit_range;
        format!(
            "method: {name}\ndimension: {:.4}\nfit_stderr: {:.4}\nfit_range: {} .. {} (scales {:.4e} .. {:.4e})\n",
            self.dimension, self.fit_stderr, a, b, self.scales[a], self.scales[b]
        )
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scale", "count_or_measure"])?;
        for (s, c) in self.scales.iter().zip(&self.counts_or_measures) {
            w.write_record([format!("{s:.6e}"), format!("{c:.6e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Grid coordinates `(m/N, n/N)` of the unresolved directions.
pub fn extract_ergodic_set(s: &ScanResult) -> Vec<Point2> {
    let n = s.header.big_n as f64;
    s.records
        .iter()
        .filter(|r| r.label.is_unresolved())
        .map(|r| [r.m as f64 / n, r.n as f64 / n])
        .collect()
}

/// Scales `2^{-k/2}` from `1/2` down to `spacing`.
pub fn default_scales(spacing: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = 0.5;
    while s >= spacing * (1.0 - 1e-9) {
        out.push(s);
        s /= std::f64::consts::SQRT_2;
    }
    out
}

/// Smallest positive gap between distinct coordinates of the points.
pub fn coordinate_spacing(points: &[Point2]) -> f64 {
    let mut best = f64::INFINITY;
    for axis in 0..2 {
        let mut v: Vec<f64> = points.iter().map(|p| p[axis]).collect();
        v.sort_by(f64::total_cmp);
        for w in v.windows(2) {
            let d = w[1] - w[0];
            if d > 1e-12 {
                best = best.min(d);
            }
        }
    }
    best
}

fn check(points: &[Point2], scales: &[f64]) -> Result<(), FractalError> {
    let distinct: HashSet<(u64, u64)> = points.iter().map(|p| (p[0].to_bits(), p[1].to_bits())).collect();
    if distinct.len() < 2 {
        return Err(FractalError::TooFewPoints(distinct.len()));
    }
    if scales.is_empty() || scales.iter().any(|s| s.is_nan() || *s <= 0.0) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FractalError::BadScales);
    }
    Ok(())
}

/// Indices of the scales inside `[4·spacing, 1/4]`.
fn fit_window(scales: &[f64], spacing: f64) -> Option<(usize, usize)> {
    let lo = 4.0 * spacing * (1.0 - 1e-9);
    let hi = 0.25 * (1.0 + 1e-9);
    let idx: Vec<usize> = (0..scales.len()).filter(|&i| scales[i] >= lo && scales[i] <= hi).collect();
    Some((*idx.first()?, *idx.last()?))
}

/// Least-squares slope of `y` against `x` and its standard error.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if x.len() < 3 {
        return (slope, 0.0);
    }
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    (slope, (ssr / (n - 2.0) / sxx).sqrt())
}

fn fitted(
    method: FractalMethod,
    scales: &[f64],
    values: Vec<f64>,
    spacing: f64,
    transform: impl Fn(f64) -> f64,
) -> Result<BoxCountReport, FractalError> {
    let (a, b) = fit_window(scales, spacing).ok_or(FractalError::DegenerateInput)?;
    let used: Vec<usize> = (a..=b).filter(|&i| values[i] > 0.0).collect();
    if used.len() < 2 {
        return Err(FractalError::DegenerateInput);
    }
    let x: Vec<f64> = used.iter().map(|&i| scales[i].ln()).collect();
    let y: Vec<f64> = used.iter().map(|&i| values[i].ln()).collect();
    let (slope, err) = fit_line(&x, &y);
    Ok(BoxCountReport {
        method,
        scales: scales.to_vec(),
        counts_or_measures: values,
        dimension: transform(slope).clamp(0.0, 2.0),
        fit_stderr: err,
        fit_range: (a, b),
    })
}

/// Number of occupied boxes of side `ε` in a grid anchored at the origin,
/// for each `ε` in `scales`.
pub fn box_count_dimension(points: &[Point2], scales: &[f64]) -> Result<BoxCountReport, FractalError> {
    check(points, scales)?;
    let counts: Vec<f64> = scales
        .iter()
        .map(|&eps| {
            let last = ((1.0 / eps).ceil() as i64 - 1).max(0);
            let boxes: HashSet<(i64, i64)> = points
                .iter()
                .map(|p| {
                    let i = ((p[0] / eps).floor() as i64).clamp(0, last);
                    let j = ((p[1] / eps).floor() as i64).clamp(0, last);
                    (i, j)
                })
                .collect();
            boxes.len() as f64
        })
        .collect();
    // N(ε) ~ ε^{-d}
    fitted(FractalMethod::BoxCount, scales, counts, coordinate_spacing(points), |s| -s)
}

/// Sausage estimate measured in the unit square.
pub fn sausage_dimension(points: &[Point2], radii: &[f64]) -> Result<BoxCountReport, FractalError> {
    sausage_dimension_in(points, radii, Domain::UnitSquare)
}

/// Area of the union of radius-`r` disks around the points, inside
/// `domain`, on a raster four times finer than the smallest radius. With
/// [`Domain::Plane`] only radii up to a quarter of the unit square are
/// measured in full.
pub fn sausage_dimension_in(points: &[Point2], radii: &[f64], domain: Domain) -> Result<BoxCountReport, FractalError> {
    check(points, radii)?;
    let r_min = *radii.last().unwrap();
    let pad = if domain == Domain::Plane { 0.25 + r_min } else { 0.0 };
    let span = 1.0 + 2.0 * pad;
    let res = ((4.0 * span / r_min).ceil() as usize).clamp(16, 6144);
    let px = span / res as f64;
    let shifted: Vec<Point2> = points.iter().map(|p| [(p[0] + pad) / span, (p[1] + pad) / span]).collect();
    let dist = distance_raster(&shifted, res);
    let inside = |i: usize, j: usize| match domain {
        Domain::Plane | Domain::UnitSquare => true,
        Domain::Triangle => i <= j,
    };
    let mut d: Vec<f64> = Vec::with_capacity(res * res);
    for j in 0..res {
        for i in 0..res {
            if inside(i, j) {
                d.push(dist[j * res + i] * px);
            }
        }
    }
    d.sort_by(f64::total_cmp);
    let areas: Vec<f64> = radii
        .iter()
        .map(|&r| d.partition_point(|v| *v <= r) as f64 * px * px)
        .collect();
    // A(r) ~ r^{2-d}
    fitted(FractalMethod::Sausage, radii, areas, coordinate_spacing(points), |s| 2.0 - s)
}

/// Euclidean distance, in pixels, from every pixel centre of a `res × res`
/// raster of the unit square to the nearest pixel holding a point.
fn distance_raster(points: &[Point2], res: usize) -> Vec<f64> {
    const FAR: f64 = 1e20;
    let mut g = vec![FAR; res * res];
    for p in points {
        let i = ((p[0] * res as f64).floor() as isize).clamp(0, res as isize - 1) as usize;
        let j = ((p[1] * res as f64).floor() as isize).clamp(0, res as isize - 1) as usize;
        g[j * res + i] = 0.0;
    }
    let mut line = vec![0.0; res];
    let mut out = vec![0.0; res];
    for j in 0..res {
        line.copy_from_slice(&g[j * res..(j + 1) * res]);
        squared_edt_1d(&line, &mut out);
        g[j * res..(j + 1) * res].copy_from_slice(&out);
    }
    for i in 0..res {
        for j in 0..res {
            line[j] = g[j * res + i];
        }
        squared_edt_1d(&line, &mut out);
        for j in 0..res {
            g[j * res + i] = out[j];
        }
    }
    g.into_iter().map(f64::sqrt).collect()
}

/// Lower envelope of parabolas (Felzenszwalb–Huttenlocher).
fn squared_edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let sect = |q: usize, p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    for q in 1..n {
        let mut s = sect(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = sect(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, slot) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dq = q as f64 - v[k] as f64;
        *slot = dq * dq + f[v[k]];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edt_matches_brute_force() {
        let pts = [[0.1, 0.2], [0.77, 0.5], [0.3, 0.95]];
        let res = 40;
        let d = distance_raster(&pts, res);
        for j in 0..res {
            for i in 0..res {
                let best = pts
                    .iter()
                    .map(|p| {
                        let pi = (p[0] * res as f64).floor();
                        let pj = (p[1] * res as f64).floor();
                        ((i as f64 - pi).powi(2) + (j as f64 - pj).powi(2)).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!((d[j * res + i] - best).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn line_fit() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (s, e) = fit_line(&x, &y);
        assert!((s - 2.0).abs() < 1e-12 && e < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(box_count_dimension(&[[0.1, 0.1]], &[0.5, 0.25]), Err(FractalError::TooFewPoints(1)));
        assert_eq!(
            box_count_dimension(&[[0.1, 0.1], [0.2, 0.2]], &[0.25, 0.5]),
            Err(FractalError::BadScales)
        );
    }
}
