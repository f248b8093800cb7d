//! Curve tracing on the section `{f = E} ∩ {unit·x = const}`.
//!
//! The characteristic field `∇f × unit` is tangent to both the level surface
//! and the section plane. It is integrated with an adaptive Dormand–Prince
//! 5(4) scheme in arc length; after every accepted step the point is pulled
//! back onto both constraints by a minimum-norm Newton projection, so drift
//! never accumulates.

use std::f64::consts::TAU;


use crate::dynamics::direction::RationalDirection;
use crate::dynamics::options::SectionOptions;
use crate::error::DynamicsError;
use crate::geometry::{DispersionRelation, Mat3, Vec3};
use crate::lattice::IVec3;

/// A closed leaf of the section foliation, stored as a path in the
/// universal cover. `samples.last() ≈ samples[0] + 2π·winding`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub samples: Vec<Vec3>,
    pub winding: IVec3,
    /// plane offset `unit·x`.
    pub level: f64,
    pub closure_residual: f64,
    /// length of the sample polyline.
    pub arc_length: f64,
}

impl Orbit {
    /// Largest `|f - E|` and plane drift over the stored samples.
    pub fn constraint_residuals(&self, f: &DispersionRelation, energy: f64, unit: &Vec3) -> (f64, f64) {
        self.samples.iter().fold((0.0f64, 0.0f64), |(rf, rp), x| {
            (
                rf.max((f.value(x) - energy).abs()),
                rp.max((unit.dot(x) - self.level).abs()),
            )
        })
    }
}

/// `∇f(x) × unit`: tangent to the level surface and to the section plane.
pub fn characteristic_velocity(f: &DispersionRelation, dir: &RationalDirection, x: &Vec3) -> Vec3 {
    let (_, g) = f.value_gradient(x);
    g.cross(&dir.unit)
}

/// The level surface and one direction; everything the tracers need.
#[derive(Clone, Copy)]
pub(crate) struct Section<'a> {
    pub f: &'a DispersionRelation,
    pub energy: f64,
    pub dir: &'a RationalDirection,
    pub opts: &'a SectionOptions,
}

pub(crate) enum Control {
    Continue,
    /// stop; optionally replace the last sample by a refined point.
    Stop(Option<Vec3>),
}

pub(crate) trait Monitor {
    fn max_step(&self, _x: &Vec3) -> f64 {
        f64::INFINITY
    }
    fn on_step(&mut self, sec: &Section, p0: f64, xa: &Vec3, xb: &Vec3, arc: f64) -> Result<Control, DynamicsError>;
}

/// Smallest `|∇f × unit|` for which the normalized field is trusted.
const MIN_SPEED: f64 = 1e-13;

impl<'a> Section<'a> {
    pub fn new(f: &'a DispersionRelation, energy: f64, dir: &'a RationalDirection, opts: &'a SectionOptions) -> Self {
        Self { f, energy, dir, opts }
    }

    #[inline]
    pub fn velocity(&self, x: &Vec3, sign: f64) -> Option<Vec3> {
        let (_, g) = self.f.value_gradient(x);
        let v = g.cross(&self.dir.unit);
        let n = v.norm();
        (n > MIN_SPEED).then(|| v * (sign / n))
    }

    /// Newton projection onto `{f = E} ∩ {unit·x = p0}` with minimum-norm
    /// corrections.
    pub fn project(&self, mut x: Vec3, p0: f64) -> Result<Vec3, DynamicsError> {
        let u = self.dir.unit;
        let plane_tol = 1e-12 + 8.0 * f64::EPSILON * p0.abs();
        let mut r1 = f64::INFINITY;
        let mut r2 = f64::INFINITY;
        for _ in 0..30 {
            let (fv, g) = self.f.value_gradient(&x);
            r1 = fv - self.energy;
            r2 = u.dot(&x) - p0;
            if r1.abs() < 1e-13 && r2.abs() < plane_tol {
                return Ok(x);
            }
            let a = g.dot(&g);
            let b = g.dot(&u);
            let det = a - b * b;
            if det <= 1e-24 {
                break;
            }
            let l1 = (r1 - b * r2) / det;
            let l2 = (a * r2 - b * r1) / det;
            let dx = g * l1 + u * l2;
            if dx.norm() > 0.5 {
                break;
            }
            x -= dx;
        }
        if r1.abs() <= self.opts.tol_f && r2.abs() <= self.opts.tol_p.max(plane_tol) {
            Ok(x)
        } else {
            Err(DynamicsError::ProjectionFailure {
                residual: r1.abs().max(r2.abs()),
            })
        }
    }

    /// Projection with the additional linear constraint `a·x = a0`; used to
    /// pin down crossings of the traced curve with a transversal.
    pub fn project_with(&self, mut x: Vec3, p0: f64, a: &Vec3, a0: f64) -> Result<Vec3, DynamicsError> {
        let u = self.dir.unit;
        let lin_tol = 1e-12 + 8.0 * f64::EPSILON * (p0.abs() + a0.abs());
        let mut worst = f64::INFINITY;
        for _ in 0..30 {
            let (fv, g) = self.f.value_gradient(&x);
            let r = Vec3::new(fv - self.energy, u.dot(&x) - p0, a.dot(&x) - a0);
            worst = r[0].abs().max((r[1].abs() + r[2].abs()) * 1e-3);
            if r[0].abs() < 1e-13 && r[1].abs() < lin_tol && r[2].abs() < lin_tol {
                return Ok(x);
            }
            let jac = Mat3::from_rows(&[g.transpose(), u.transpose(), a.transpose()]);
            let Some(inv) = jac.try_inverse() else { break };
            let dx = inv * r;
            if dx.norm() > 0.5 {
                break;
            }
            x -= dx;
        }
        let (fv, _) = self.f.value_gradient(&x);
        if (fv - self.energy).abs() <= self.opts.tol_f
            && (u.dot(&x) - p0).abs() <= self.opts.tol_p.max(lin_tol)
            && (a.dot(&x) - a0).abs() <= 1e-9
        {
            Ok(x)
        } else {
            Err(DynamicsError::ProjectionFailure { residual: worst })
        }
    }

    /// Integrates the normalized characteristic field from `x0` (already on
    /// the section) until the monitor stops or `max_len` is exceeded.
    pub fn integrate<M: Monitor>(
        &self,
        x0: Vec3,
        p0: f64,
        sign: f64,
        max_len: f64,
        monitor: &mut M,
    ) -> Result<(Vec<Vec3>, f64), DynamicsError> {
        let mut samples = vec![x0];
        let mut x = x0;
        let mut arc = 0.0;
        let mut h = self.opts.max_step.min(0.05);
        let rtol = self.opts.rtol;
        loop {
            if arc > max_len {
                return Err(DynamicsError::MaxArcLength { max_len });
            }
            h = h.min(self.opts.max_step).min(monitor.max_step(&x));
            if h < 1e-13 {
                return Err(DynamicsError::ProjectionFailure { residual: h });
            }
            let Some(k1) = self.velocity(&x, sign) else {
                return Err(DynamicsError::BadStart);
            };
            match dp45_step(self, &x, &k1, h, sign) {
                Some((y5, err)) => {
                    let errn = err / rtol;
                    if errn <= 1.0 {
                        let xb = self.project(y5, p0)?;
                        arc += (xb - x).norm();
                        let xa = x;
                        x = xb;
                        match monitor.on_step(self, p0, &xa, &xb, arc)? {
                            Control::Continue => samples.push(xb),
                            Control::Stop(refined) => {
                                if let Some(z) = refined {
                                    arc += (z - xa).norm() - (xb - xa).norm();
                                }
                                samples.push(refined.unwrap_or(xb));
                                return Ok((samples, arc));
                            }
                        }
                        let fac = if errn == 0.0 { 5.0 } else { (0.9 * errn.powf(-0.2)).clamp(0.2, 5.0) };
                        h *= fac;
                    } else {
                        h *= (0.9 * errn.powf(-0.2)).clamp(0.1, 0.9);
                    }
                }
                None => h *= 0.25,
            }
        }
    }
}

/// One Dormand–Prince 5(4) step; returns the 5th-order point and the
/// sup-norm of the embedded error estimate.
fn dp45_step(sec: &Section, x: &Vec3, k1: &Vec3, h: f64, sign: f64) -> Option<(Vec3, f64)> {
    let v = |y: Vec3| sec.velocity(&y, sign);
    let k2 = v(x + h * (k1 * (1.0 / 5.0)))?;
    let k3 = v(x + h * (k1 * (3.0 / 40.0) + k2 * (9.0 / 40.0)))?;
    let k4 = v(x + h * (k1 * (44.0 / 45.0) - k2 * (56.0 / 15.0) + k3 * (32.0 / 9.0)))?;
    let k5 = v(x + h
        * (k1 * (19372.0 / 6561.0) - k2 * (25360.0 / 2187.0) + k3 * (64448.0 / 6561.0)
            - k4 * (212.0 / 729.0)))?;
    let k6 = v(x + h
        * (k1 * (9017.0 / 3168.0) - k2 * (355.0 / 33.0)
            + k3 * (46732.0 / 5247.0)
            + k4 * (49.0 / 176.0)
            - k5 * (5103.0 / 18656.0)))?;
    let y5 = x + h
        * (k1 * (35.0 / 384.0) + k3 * (500.0 / 1113.0) + k4 * (125.0 / 192.0) - k5 * (2187.0 / 6784.0)
            + k6 * (11.0 / 84.0));
    let k7 = v(y5)?;
    let e = h
        * (k1 * (71.0 / 57600.0) - k3 * (71.0 / 16695.0) + k4 * (71.0 / 1920.0) - k5 * (17253.0 / 339200.0)
            + k6 * (22.0 / 525.0)
            - k7 * (1.0 / 40.0));
    Some((y5, e.amax()))
}

/// Detects the first return of a traced path to `x0 + 2πL` with the
/// starting tangent direction.
pub(crate) struct ClosureWatch {
    x0: Vec3,
    t0: Vec3,
    pub result: Option<(IVec3, f64)>,
}

impl ClosureWatch {
    pub fn new(x0: Vec3, t0: Vec3) -> Self {
        Self { x0, t0, result: None }
    }

    pub fn check(&mut self, sec: &Section, p0: f64, xa: &Vec3, xb: &Vec3) -> Option<Vec3> {
        let turns = (xb - self.x0) / TAU;
        let l = [turns[0].round() as i64, turns[1].round() as i64, turns[2].round() as i64];
        let y = self.x0 + TAU * Vec3::new(l[0] as f64, l[1] as f64, l[2] as f64);
        let sa = self.t0.dot(&(xa - y));
        let sb = self.t0.dot(&(xb - y));
        let step = (xb - xa).norm();
        if !(sa < 0.0 && sb >= 0.0) || (xb - y).norm() > 2.0 * step + 1e-6 {
            return None;
        }
        let z0 = xa + (xb - xa) * (sa / (sa - sb));
        let z = sec.project_with(z0, p0, &self.t0, self.t0.dot(&y)).ok()?;
        let resid = (z - y).norm();
        if resid < sec.opts.tol_close {
            self.result = Some((l, resid));
            Some(z)
        } else {
            None
        }
    }
}

struct OrbitMonitor {
    closure: ClosureWatch,
}

impl Monitor for OrbitMonitor {
    fn on_step(&mut self, sec: &Section, p0: f64, xa: &Vec3, xb: &Vec3, _arc: f64) -> Result<Control, DynamicsError> {
        Ok(match self.closure.check(sec, p0, xa, xb) {
            Some(z) => Control::Stop(Some(z)),
            None => Control::Continue,
        })
    }
}

impl<'a> Section<'a> {
    /// Traces the closed leaf through `x0` (on the section, not critical).
    pub fn trace_orbit(&self, x0: Vec3, sign: f64) -> Result<Orbit, DynamicsError> {
        let p0 = self.dir.unit.dot(&x0);
        let t0 = self.velocity(&x0, sign).ok_or(DynamicsError::BadStart)?;
        let mut mon = OrbitMonitor {
            closure: ClosureWatch::new(x0, t0),
        };
        let max_len = self.opts.max_len_for(self.dir.h_norm());
        let (samples, arc) = self.integrate(x0, p0, sign, max_len, &mut mon)?;
        let (winding, closure_residual) = mon.closure.result.expect("stopped without closure");
        Ok(Orbit {
            samples,
            winding,
            level: p0,
            closure_residual,
            arc_length: arc,
        })
    }
}

/// Traces the section leaf through `x0` to closure.
///
/// `x0` must lie on `{f = E}` within `tol_f` and must not be within
/// `saddle_exclusion` of a critical point of the height.
pub fn trace_level_orbit(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    x0: &Vec3,
    opts: &SectionOptions,
) -> Result<Orbit, DynamicsError> {
    trace_level_orbit_oriented(f, energy, dir, x0, 1.0, opts)
}

/// As [`trace_level_orbit`], following `sign · ∇f × unit`.
pub fn trace_level_orbit_oriented(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    x0: &Vec3,
    sign: f64,
    opts: &SectionOptions,
) -> Result<Orbit, DynamicsError> {
    if (f.value(x0) - energy).abs() >= opts.tol_f {
        return Err(DynamicsError::BadStart);
    }
    if let Some(c) = crate::dynamics::critical::newton_critical(f, energy, dir, x0, opts) {
        if crate::geometry::torus_difference(&c, x0).norm() < opts.saddle_exclusion {
            return Err(DynamicsError::BadStart);
        }
    }
    let sec = Section::new(f, energy, dir, opts);
    sec.trace_orbit(*x0, sign)
}
