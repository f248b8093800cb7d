//! Regular orbits on sample levels between the critical ones.
//!
//! A section `{h·x ≡ φ}` of the torus is itself a flat 2-torus with integer
//! basis `u, v` of `h^⊥ ∩ Z^3`. Closed scanlines along `u` and `v` meet every
//! non-contractible leaf, so the leaves found from their roots include all
//! open-orbit families of the level. Each traced leaf remembers which roots
//! it passes and in which lattice copy, which later lets a point on the
//! level be attributed to its leaf.

use std::f64::consts::TAU;

use crate::dynamics::direction::RationalDirection;
use crate::dynamics::options::SectionOptions;
use crate::dynamics::trace::{ClosureWatch, Control, Monitor, Orbit, Section};
use crate::error::DynamicsError;
use crate::geometry::{kvec, DispersionRelation, Vec3};
use crate::homology::winding_from_lift;
use crate::lattice::IVec3;

/// Coordinates on the section tori of one direction.
#[derive(Debug, Clone)]
pub(crate) struct PlaneFrame {
    pub h: Vec3,
    /// real copies of the plane basis `u, v` and of `t` with `h·t = 1`.
    pub basis: [Vec3; 2],
    pub t: Vec3,
    /// dual covectors: `dual[i]·basis[j] = δij`, `dual[i]·h = 0`.
    pub dual: [Vec3; 2],
    pub offsets: Vec<f64>,
}

impl PlaneFrame {
    pub fn new(dir: &RationalDirection, lines_per_axis: usize) -> Self {
        let (u, v, t) = dir.lattice_frame();
        let h = kvec(dir.h);
        let (uu, vv) = (kvec(u), kvec(v));
        let h2 = h.norm_squared();
        let lines = lines_per_axis.max(1);
        Self {
            h,
            basis: [uu, vv],
            t: kvec(t),
            dual: [vv.cross(&h) / h2, h.cross(&uu) / h2],
            // irrational shift keeps scanlines off symmetry planes
            offsets: (0..lines).map(|k| (k as f64 + 0.2718281828) / lines as f64).collect(),
        }
    }

    pub fn coords(&self, x: &Vec3) -> [f64; 2] {
        [self.dual[0].dot(x) / TAU, self.dual[1].dot(x) / TAU]
    }

    /// Point of the plane `h·x = phase` with coordinate `c` on `axis` and
    /// `tau` on the other one.
    pub fn point(&self, phase: f64, axis: usize, c: f64, tau: f64) -> Vec3 {
        let centre = self.h * (phase / self.h.norm_squared());
        centre + TAU * (self.basis[axis] * c + self.basis[1 - axis] * tau)
    }

    /// Length of a scanline of `axis` (it runs along the other basis vector).
    pub fn line_length(&self, axis: usize) -> f64 {
        TAU * self.basis[1 - axis].norm()
    }

    /// Moves `x` by a multiple of `2πt` onto the plane `h·x = phase`.
    pub fn reduce_to_phase(&self, x: &Vec3, phase: f64) -> (Vec3, i64) {
        let k = ((self.h.dot(x) - phase) / TAU).round() as i64;
        (x - self.t * (TAU * k as f64), k)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Root {
    pub tau: f64,
    pub x: Vec3,
}

/// A leaf of the level with the roots it passes: `(root, J)` means the
/// traced lift meets `root.x + 2πJ`.
#[derive(Debug, Clone)]
pub(crate) struct CatalogOrbit {
    pub orbit: Orbit,
    pub crossings: Vec<(usize, IVec3)>,
}

#[derive(Debug, Clone)]
pub(crate) struct LevelCatalog {
    pub phase: f64,
    pub roots: Vec<Root>,
    /// start index into `roots` of each `(axis, line)`, plus an end marker.
    line_start: Vec<usize>,
    pub owner: Vec<Option<usize>>,
    pub orbits: Vec<CatalogOrbit>,
}

/// Tolerance (radians along a scanline) for identifying a crossing with a
/// root.
const MATCH_TOL: f64 = 1e-7;

impl LevelCatalog {
    fn line_index(&self, frame: &PlaneFrame, axis: usize, line: usize) -> usize {
        axis * frame.offsets.len() + line
    }

    pub fn find_root(&self, frame: &PlaneFrame, axis: usize, line: usize, tau: f64) -> Option<usize> {
        let li = self.line_index(frame, axis, line);
        let len = frame.line_length(axis);
        (self.line_start[li]..self.line_start[li + 1]).find(|&r| {
            let d = (self.roots[r].tau - tau).rem_euclid(1.0);
            d.min(1.0 - d) * len < MATCH_TOL
        })
    }
}

fn scan_line(sec: &Section, frame: &PlaneFrame, phase: f64, axis: usize, line: usize, step: f64) -> Vec<Root> {
    let c = frame.offsets[line];
    let n = ((frame.line_length(axis) / step).ceil() as usize).max(16);
    let g = |tau: f64| sec.f.value(&frame.point(phase, axis, c, tau)) - sec.energy;
    let mut roots = Vec::new();
    let g0 = g(0.0);
    let mut ga = g0;
    for i in 0..n {
        let (a, b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
        let gb = if i + 1 == n { g0 } else { g(b) };
        if (ga < 0.0) != (gb < 0.0) {
            let (mut lo, mut hi, mut glo) = (a, b, ga);
            for _ in 0..55 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            let tau = (0.5 * (lo + hi)).rem_euclid(1.0);
            roots.push(Root {
                tau,
                x: frame.point(phase, axis, c, tau),
            });
        }
        ga = gb;
    }
    roots
}

pub(crate) struct RawCrossing {
    pub axis: usize,
    pub line: usize,
    pub tau: f64,
    pub z: Vec3,
}

/// Watches a trace for scanline crossings and for closure.
pub(crate) struct ScanlineMonitor<'a> {
    pub frame: &'a PlaneFrame,
    pub closure: ClosureWatch,
    pub crossings: Vec<RawCrossing>,
    /// stop at the first crossing that matches a root of this catalog.
    pub stop_on: Option<&'a LevelCatalog>,
    pub matched: Option<(usize, Vec3)>,
}

impl Monitor for ScanlineMonitor<'_> {
    fn on_step(&mut self, sec: &Section, p0: f64, xa: &Vec3, xb: &Vec3, _arc: f64) -> Result<Control, DynamicsError> {
        let ca = self.frame.coords(xa);
        let cb = self.frame.coords(xb);
        for axis in 0..2 {
            let (lo, hi) = if ca[axis] <= cb[axis] { (ca[axis], cb[axis]) } else { (cb[axis], ca[axis]) };
            for (line, &c) in self.frame.offsets.iter().enumerate() {
                let n0 = (lo - c).ceil() as i64;
                let n1 = (hi - c).floor() as i64;
                for n in n0..=n1 {
                    let value = c + n as f64;
                    if value == ca[axis] {
                        continue;
                    }
                    let lam = (value - ca[axis]) / (cb[axis] - ca[axis]);
                    let z0 = xa + (xb - xa) * lam;
                    let Ok(z) = sec.project_with(z0, p0, &self.frame.dual[axis], TAU * value) else {
                        continue;
                    };
                    let tau = self.frame.coords(&z)[1 - axis].rem_euclid(1.0);
                    if let Some(cat) = self.stop_on {
                        if let Some(r) = cat.find_root(self.frame, axis, line, tau) {
                            self.matched = Some((r, z));
                            return Ok(Control::Stop(Some(z)));
                        }
                    }
                    self.crossings.push(RawCrossing { axis, line, tau, z });
                }
            }
        }
        Ok(match self.closure.check(sec, p0, xa, xb) {
            Some(z) => Control::Stop(Some(z)),
            None => Control::Continue,
        })
    }
}

fn round_lift(d: &Vec3) -> IVec3 {
    [
        (d[0] / TAU).round() as i64,
        (d[1] / TAU).round() as i64,
        (d[2] / TAU).round() as i64,
    ]
}

/// Finds and traces every leaf of the level `h·x = phase` met by the
/// scanlines.
pub(crate) fn catalog_level(sec: &Section, frame: &PlaneFrame, phase: f64) -> Result<LevelCatalog, DynamicsError> {
    let lines = frame.offsets.len();
    let mut roots = Vec::new();
    let mut line_start = Vec::with_capacity(2 * lines + 1);
    for axis in 0..2 {
        for line in 0..lines {
            line_start.push(roots.len());
            roots.extend(scan_line(sec, frame, phase, axis, line, sec.opts.scan_step));
        }
    }
    line_start.push(roots.len());
    let mut cat = LevelCatalog {
        phase,
        owner: vec![None; roots.len()],
        roots,
        line_start,
        orbits: Vec::new(),
    };
    let max_len = sec.opts.max_len_for(sec.dir.h_norm());
    for r0 in 0..cat.roots.len() {
        if cat.owner[r0].is_some() {
            continue;
        }
        let x0 = cat.roots[r0].x;
        let p0 = sec.dir.unit.dot(&x0);
        let t0 = sec.velocity(&x0, 1.0).ok_or(DynamicsError::BadStart)?;
        let mut mon = ScanlineMonitor {
            frame,
            closure: ClosureWatch::new(x0, t0),
            crossings: Vec::new(),
            stop_on: None,
            matched: None,
        };
        let (samples, arc) = sec.integrate(x0, p0, 1.0, max_len, &mut mon)?;
        let (winding, closure_residual) = mon.closure.result.expect("stopped without closure");
        let id = cat.orbits.len();
        let mut crossings = vec![(r0, [0, 0, 0])];
        cat.owner[r0] = Some(id);
        for c in &mon.crossings {
            if let Some(r) = cat.find_root(frame, c.axis, c.line, c.tau) {
                if cat.owner[r].is_none() {
                    cat.owner[r] = Some(id);
                    crossings.push((r, round_lift(&(c.z - cat.roots[r].x))));
                }
            }
        }
        cat.orbits.push(CatalogOrbit {
            orbit: Orbit {
                samples,
                winding,
                level: p0,
                closure_residual,
                arc_length: arc,
            },
            crossings,
        });
    }
    Ok(cat)
}

/// Phases (in `[0, 2π)`) of the sample levels: `per_gap` levels evenly
/// inside each gap between consecutive critical phases.
pub(crate) fn sample_phases(critical: &[f64], per_gap: usize, gap_min: f64) -> Vec<f64> {
    let per_gap = per_gap.max(1);
    let mut crit: Vec<f64> = critical.iter().map(|p| p.rem_euclid(TAU)).collect();
    crit.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::new();
    for p in crit {
        if merged.last().is_none_or(|q| p - q >= gap_min) {
            merged.push(p);
        }
    }
    if merged.len() > 1 && merged[0] + TAU - merged[merged.len() - 1] < gap_min {
        merged.pop();
    }
    if merged.is_empty() {
        return (0..per_gap).map(|k| TAU * (k as f64 + 0.5) / per_gap as f64).collect();
    }
    let mut out = Vec::new();
    for i in 0..merged.len() {
        let a = merged[i];
        let b = if i + 1 < merged.len() { merged[i + 1] } else { merged[0] + TAU };
        for k in 1..=per_gap {
            out.push((a + (b - a) * k as f64 / (per_gap + 1) as f64).rem_euclid(TAU));
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

pub(crate) fn catalog_levels(
    sec: &Section,
    frame: &PlaneFrame,
    critical_phases: &[f64],
) -> Result<Vec<LevelCatalog>, DynamicsError> {
    sample_phases(critical_phases, sec.opts.levels_per_gap, sec.opts.gap_min)
        .into_iter()
        .map(|p| catalog_level(sec, frame, p))
        .collect()
}

/// Closed leaves on sample levels strictly between the critical heights.
///
/// `critical_heights` are values of `unit·x` modulo the height period of
/// `dir`; levels that miss the surface contribute nothing.
pub fn sample_regular_orbits(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    critical_heights: &[f64],
    opts: &SectionOptions,
) -> Result<Vec<Orbit>, DynamicsError> {
    let sec = Section::new(f, energy, dir, opts);
    let frame = PlaneFrame::new(dir, opts.scanlines_per_axis);
    let phases: Vec<f64> = critical_heights.iter().map(|z| z * dir.h_norm()).collect();
    let cats = catalog_levels(&sec, &frame, &phases)?;
    let mut out = Vec::new();
    for cat in cats {
        for o in cat.orbits {
            let lift = o.orbit.samples.last().unwrap() - o.orbit.samples[0];
            winding_from_lift(&lift, 1e-6)?;
            out.push(o.orbit);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::critical::find_critical_points;
    use crate::lattice::dot;

    #[test]
    fn frame_duals() {
        for h in [[0, 0, 1], [1, 2, 40], [3, -5, 7]] {
            let dir = RationalDirection::from_vector(h).unwrap();
            let fr = PlaneFrame::new(&dir, 3);
            for i in 0..2 {
                assert!(fr.dual[i].dot(&fr.h).abs() < 1e-12);
                for j in 0..2 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((fr.dual[i].dot(&fr.basis[j]) - want).abs() < 1e-12);
                }
            }
            assert!((fr.h.dot(&fr.t) - 1.0).abs() < 1e-12);
            let x = fr.point(1.3, 0, 0.25, 0.5);
            assert!((fr.h.dot(&x) - 1.3).abs() < 1e-12);
            let c = fr.coords(&x);
            assert!((c[0] - 0.25).abs() < 1e-12 && (c[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn phases_sit_inside_gaps() {
        let p = sample_phases(&[1.0, 4.0], 2, 1e-7);
        assert_eq!(p.len(), 4);
        for q in &p {
            assert!((q - 1.0).abs() > 0.1 && (q - 4.0).abs() > 0.1);
        }
        assert_eq!(sample_phases(&[], 2, 1e-7), vec![TAU / 4.0, 3.0 * TAU / 4.0]);
        assert_eq!(sample_phases(&[2.0, 2.0 + 1e-9], 1, 1e-7).len(), 1);
    }

    fn orbits_for(energy: f64, h: [i64; 3]) -> Vec<Orbit> {
        let f = DispersionRelation::simple_cubic();
        let dir = RationalDirection::from_vector(h).unwrap();
        let opts = SectionOptions::default();
        let crit = find_critical_points(&f, energy, &dir, &opts).unwrap();
        let heights: Vec<f64> = crit.iter().map(|c| c.height).collect();
        sample_regular_orbits(&f, energy, &dir, &heights, &opts).unwrap()
    }

    #[test]
    fn vertical_field_orbits_are_contractible() {
        let orbits = orbits_for(0.0, [0, 0, 1]);
        assert!(!orbits.is_empty());
        assert!(orbits.iter().all(|o| o.winding == [0, 0, 0]));
    }

    #[test]
    fn small_sphere_orbits_are_circles() {
        let orbits = orbits_for(2.5, [0, 0, 1]);
        assert!(!orbits.is_empty());
        assert!(orbits.iter().all(|o| o.winding == [0, 0, 0]));
    }

    #[test]
    fn tilted_field_has_open_orbits() {
        let h = [1, 2, 7];
        let orbits = orbits_for(0.0, h);
        assert!(orbits.iter().all(|o| dot(o.winding, h) == 0));
        assert!(orbits.iter().any(|o| o.winding != [0, 0, 0]));
        let f = DispersionRelation::simple_cubic();
        let dir = RationalDirection::from_vector(h).unwrap();
        for o in &orbits {
            let (rf, rp) = o.constraint_residuals(&f, 0.0, &dir.unit);
            assert!(rf < 1e-8 && rp < 1e-8);
        }
    }
}
