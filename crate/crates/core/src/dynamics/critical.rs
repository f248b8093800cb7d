//! Critical points of the height `unit·x` restricted to `{f = E}`.
//!
//! A critical point solves `f(x) = E` together with `∇f(x) ∥ unit`, which is
//! written as the square system `[f - E, e1·∇f, e2·∇f] = 0` for an
//! orthonormal basis `e1, e2` of `unit^⊥` and solved by Newton from a
//! uniform seed grid.

use std::f64::consts::TAU;

use nalgebra::Matrix2x3;
use serde::{Deserialize, Serialize};

use crate::dynamics::direction::RationalDirection;
use crate::dynamics::options::SectionOptions;
use crate::error::DynamicsError;
use crate::geometry::{evaluate_jet, torus_difference, wrap_point, DispersionRelation, Mat3, TorusPoint, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Saddle,
    Extremum,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub point: TorusPoint,
    /// `∇f = mu · unit`.
    pub mu: f64,
    pub kind: CriticalKind,
    /// `unit·x` reduced modulo `2π/|h|`.
    pub height: f64,
    /// `h·x` reduced modulo `2π`; `phase = |h| · height`.
    pub phase: f64,
    /// determinant of the restricted Hessian of the height.
    pub det: f64,
}

impl CriticalPoint {
    pub fn position(&self) -> Vec3 {
        self.point.position
    }

    /// Saddles and degenerate points carry separatrices.
    pub fn has_branches(&self) -> bool {
        !matches!(self.kind, CriticalKind::Extremum)
    }
}

fn residual(f: &DispersionRelation, energy: f64, e1: &Vec3, e2: &Vec3, x: &Vec3) -> (Vec3, Mat3) {
    let jet = evaluate_jet(f, x);
    let r = Vec3::new(jet.value - energy, e1.dot(&jet.gradient), e2.dot(&jet.gradient));
    let he1 = jet.hessian * e1;
    let he2 = jet.hessian * e2;
    let jac = Mat3::from_rows(&[jet.gradient.transpose(), he1.transpose(), he2.transpose()]);
    (r, jac)
}

/// Newton on the critical-point system from `x0`; returns the converged
/// point (unwrapped) or `None`.
pub(crate) fn newton_critical(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    x0: &Vec3,
    opts: &SectionOptions,
) -> Option<Vec3> {
    let (e1, e2) = dir.orthonormal_plane();
    newton_with_basis(f, energy, &e1, &e2, x0, opts)
}

fn newton_with_basis(
    f: &DispersionRelation,
    energy: f64,
    e1: &Vec3,
    e2: &Vec3,
    x0: &Vec3,
    opts: &SectionOptions,
) -> Option<Vec3> {
    let mut x = *x0;
    let mut travelled = 0.0;
    for _ in 0..40 {
        let (r, jac) = residual(f, energy, e1, e2, &x);
        let rn = r.amax();
        if rn < 1e-13 {
            return Some(x);
        }
        let dx = jac.lu().solve(&r)?;
        let step = dx.norm();
        let dx = if step > 0.5 { dx * (0.5 / step) } else { dx };
        x -= dx;
        travelled += dx.norm();
        if travelled > 4.0 || !x.iter().all(|c| c.is_finite()) {
            return None;
        }
        if dx.norm() < 1e-15 {
            break;
        }
    }
    let (r, _) = residual(f, energy, e1, e2, &x);
    (r.amax() < opts.newton_residual).then_some(x)
}

/// Height-function Hessian restricted to the tangent plane,
/// `R = -(1/mu) Pᵀ (Hess f) P`; returns `(mu, det R)`.
fn restricted_hessian_det(f: &DispersionRelation, dir: &RationalDirection, x: &Vec3) -> (f64, f64) {
    let jet = evaluate_jet(f, x);
    let mu = jet.gradient.dot(&dir.unit);
    let (e1, e2) = dir.orthonormal_plane();
    let p = Matrix2x3::from_rows(&[e1.transpose(), e2.transpose()]);
    let r = (p * jet.hessian * p.transpose()) * (-1.0 / mu);
    (mu, r.determinant())
}

/// Morse type of a critical point of the height on `{f = E}`.
pub fn classify_critical(
    f: &DispersionRelation,
    dir: &RationalDirection,
    x: &Vec3,
    opts: &SectionOptions,
) -> Result<CriticalKind, DynamicsError> {
    let (_, g) = f.value_gradient(x);
    let cross = g.cross(&dir.unit).norm();
    if cross > opts.tol_g.max(1e3 * opts.newton_residual) {
        return Err(DynamicsError::NotCritical { residual: cross });
    }
    let (mu, det) = restricted_hessian_det(f, dir, x);
    Ok(kind_from_det(mu, det, opts))
}

fn kind_from_det(mu: f64, det: f64, opts: &SectionOptions) -> CriticalKind {
    if mu.abs() < 1e-12 || !det.is_finite() {
        CriticalKind::Degenerate
    } else if det < -opts.tol_d {
        CriticalKind::Saddle
    } else if det > opts.tol_d {
        CriticalKind::Extremum
    } else {
        CriticalKind::Degenerate
    }
}

fn solve_grid(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    n: usize,
    offset: f64,
    opts: &SectionOptions,
) -> Vec<Vec3> {
    let (e1, e2) = dir.orthonormal_plane();
    let cell = TAU / n as f64;
    // Seeds whose residual exceeds a Lipschitz bound times the distance to
    // the farthest point of their cell cannot have a root in that cell.
    let (_, b1, b2) = f.bounds();
    let reach = 1.5 * cell * 3f64.sqrt() / 2.0;
    let gate = Vec3::new(b1 * reach, b2 * reach, b2 * reach);
    let mut found: Vec<(Vec3, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let seed = Vec3::new(
                    (i as f64 + offset) * cell,
                    (j as f64 + offset) * cell,
                    (k as f64 + offset) * cell,
                );
                let (value, g) = f.value_gradient(&seed);
                if (value - energy).abs() > gate[0] || e1.dot(&g).abs() > gate[1] || e2.dot(&g).abs() > gate[2] {
                    continue;
                }
                let Some(x) = newton_with_basis(f, energy, &e1, &e2, &seed, opts) else {
                    continue;
                };
                let w = wrap_point(&x).position;
                let tol = merge_radius(f, energy, &e1, &e2, &w, opts);
                match found.iter().position(|(y, _)| torus_difference(&w, y).norm() < tol) {
                    Some(i) => {
                        // Newton stalls at a distance ~ sqrt(residual) from a
                        // degenerate root; the mean of the cluster is closer.
                        let (y, k) = &mut found[i];
                        *y += torus_difference(&w, y) / (*k as f64 + 1.0);
                        *k += 1;
                    }
                    None => found.push((w, 1)),
                }
            }
        }
    }
    found.into_iter().map(|(y, _)| wrap_point(&y).position).collect()
}

/// Deduplication radius: `dedup_tol` at regular roots, wider where the
/// Jacobian is nearly singular and Newton only converges linearly.
fn merge_radius(f: &DispersionRelation, energy: f64, e1: &Vec3, e2: &Vec3, x: &Vec3, opts: &SectionOptions) -> f64 {
    let (_, jac) = residual(f, energy, e1, e2, x);
    let smin = jac.singular_values().min();
    if smin < 1e-3 {
        opts.dedup_tol.max(100.0 * opts.newton_residual.sqrt())
    } else {
        opts.dedup_tol
    }
}

/// All critical points of the height on `{f = E}` in one fundamental domain,
/// cross-validated between two seed grids and sorted by phase.
pub fn find_critical_points(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    opts: &SectionOptions,
) -> Result<Vec<CriticalPoint>, DynamicsError> {
    let coarse = solve_grid(f, energy, dir, opts.seed_grid, 0.5, opts);
    let mut points = coarse.clone();
    if opts.seed_grid_check > 0 {
        let fine = solve_grid(f, energy, dir, opts.seed_grid_check, 0.37, opts);
        let (e1, e2) = dir.orthonormal_plane();
        let same = fine.len() == coarse.len()
            && fine.iter().all(|p| {
                let tol = merge_radius(f, energy, &e1, &e2, p, opts);
                coarse.iter().any(|q| torus_difference(p, q).norm() < tol)
            });
        if !same {
            return Err(DynamicsError::SeedExhaustion {
                coarse: coarse.len(),
                fine: fine.len(),
            });
        }
        points = fine;
    }
    let period = dir.height_period();
    let mut out: Vec<CriticalPoint> = points
        .into_iter()
        .map(|x| {
            let (mu, det) = restricted_hessian_det(f, dir, &x);
            let phase = dir.phase(&x).rem_euclid(TAU);
            CriticalPoint {
                point: wrap_point(&x),
                mu,
                kind: kind_from_det(mu, det, opts),
                height: dir.unit.dot(&x).rem_euclid(period),
                phase,
                det,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.phase
            .total_cmp(&b.phase)
            .then_with(|| lex(&a.point.position, &b.point.position))
    });
    Ok(out)
}

fn lex(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a[0].total_cmp(&b[0])
        .then(a[1].total_cmp(&b[1]))
        .then(a[2].total_cmp(&b[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn contains(points: &[CriticalPoint], x: Vec3, tol: f64) -> bool {
        points.iter().any(|p| torus_difference(&p.position(), &x).norm() < tol)
    }

    #[test]
    fn four_saddles_for_vertical_field() {
        let f = DispersionRelation::simple_cubic();
        let dir = RationalDirection::grid(0, 0, 1).unwrap();
        let pts = find_critical_points(&f, 0.0, &dir, &SectionOptions::default()).unwrap();
        assert_eq!(pts.len(), 4);
        for x in [
            Vec3::new(0.0, PI, FRAC_PI_2),
            Vec3::new(0.0, PI, 3.0 * FRAC_PI_2),
            Vec3::new(PI, 0.0, FRAC_PI_2),
            Vec3::new(PI, 0.0, 3.0 * FRAC_PI_2),
        ] {
            assert!(contains(&pts, x, 1e-8), "{x:?}");
        }
        assert!(pts.iter().all(|p| p.kind == CriticalKind::Saddle));
    }

    #[test]
    fn two_extrema_on_small_sphere() {
        let f = DispersionRelation::simple_cubic();
        let dir = RationalDirection::grid(0, 0, 1).unwrap();
        let pts = find_critical_points(&f, 2.5, &dir, &SectionOptions::default()).unwrap();
        assert_eq!(pts.len(), 2);
        let z = 0.5f64.acos();
        assert!(contains(&pts, Vec3::new(0.0, 0.0, z), 1e-8));
        assert!(contains(&pts, Vec3::new(0.0, 0.0, TAU - z), 1e-8));
        assert!(pts.iter().all(|p| p.kind == CriticalKind::Extremum));
    }

    #[test]
    fn monkey_saddles_on_the_diagonal() {
        let f = DispersionRelation::simple_cubic();
        let dir = RationalDirection::grid(1, 1, 1).unwrap();
        let pts = find_critical_points(&f, 0.0, &dir, &SectionOptions::default()).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(contains(&pts, Vec3::new(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2), 1e-8));
        assert!(contains(&pts, Vec3::repeat(3.0 * FRAC_PI_2), 1e-8));
        assert!(pts.iter().all(|p| p.kind == CriticalKind::Degenerate));
    }

    #[test]
    fn classify_examples() {
        let f = DispersionRelation::simple_cubic();
        let opts = SectionOptions::default();
        let z = RationalDirection::grid(0, 0, 1).unwrap();
        assert_eq!(
            classify_critical(&f, &z, &Vec3::new(0.0, PI, FRAC_PI_2), &opts).unwrap(),
            CriticalKind::Saddle
        );
        assert_eq!(
            classify_critical(&f, &z, &Vec3::new(0.0, 0.0, 0.5f64.acos()), &opts).unwrap(),
            CriticalKind::Extremum
        );
        let d = RationalDirection::grid(1, 1, 1).unwrap();
        assert_eq!(
            classify_critical(&f, &d, &Vec3::repeat(FRAC_PI_2), &opts).unwrap(),
            CriticalKind::Degenerate
        );
        let err = classify_critical(&f, &z, &Vec3::new(0.3, 0.2, 0.1), &opts).unwrap_err();
        assert!(matches!(err, DynamicsError::NotCritical { .. }));
    }

    #[test]
    fn restricted_hessian_matches_chart_finite_differences() {
        // Oracle: write the surface near the saddle as a graph over the
        // tangent plane and difference the height numerically.
        let f = DispersionRelation::simple_cubic();
        let dir = RationalDirection::grid(0, 0, 1).unwrap();
        let s = Vec3::new(0.0, PI, FRAC_PI_2);
        // height z(x, y) solves cos x + cos y + cos z = 0 near z = π/2
        let height = |x: f64, y: f64| (-(x.cos() + y.cos())).acos();
        let e = 1e-4;
        let hxx = (height(s[0] + e, s[1]) - 2.0 * height(s[0], s[1]) + height(s[0] - e, s[1])) / (e * e);
        let hyy = (height(s[0], s[1] + e) - 2.0 * height(s[0], s[1]) + height(s[0], s[1] - e)) / (e * e);
        let (mu, det) = restricted_hessian_det(&f, &dir, &s);
        assert!((mu + 1.0).abs() < 1e-12);
        assert!((det - hxx * hyy).abs() < 1e-5, "{det} vs {}", hxx * hyy);
        assert!(det < 0.0);
    }
}
