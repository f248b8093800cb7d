//! Second homology direction of the open-orbit carrier.
//!
//! When every open leaf has class `±w`, the leaves alone only span a line.
//! Flowing an open leaf up or down along the height gradient to the next
//! sample level lands on another leaf; open leaves joined this way are
//! pieces of one carrier torus, and the lift shift picked up around a loop
//! of joins is a class of that torus. The zone is the plane spanned by `w`
//! and those classes. The carrier height need not be monotone: where it
//! folds back the leaves run the other way, so both `+w` and `-w` leaves
//! and joins in both directions are needed.

use std::collections::HashMap;
use std::f64::consts::TAU;

use crate::dynamics::orbits::{LevelCatalog, PlaneFrame, ScanlineMonitor};
use crate::dynamics::trace::{ClosureWatch, Section};
use crate::geometry::Vec3;
use crate::lattice::{add, is_zero, sub, IVec3};

/// Smallest tangential height gradient tolerated along a flow line.
const MIN_TANGENTIAL: f64 = 1e-4;

/// Moves `x` on the surface from phase `from` to phase `to` along the
/// tangential gradient of `h·x`.
fn flow(sec: &Section, frame: &PlaneFrame, x0: &Vec3, from: f64, to: f64) -> Option<Vec3> {
    let hn = frame.h.norm();
    let sign = (to - from).signum();
    let field = |x: &Vec3| -> Option<(Vec3, f64)> {
        let (_, g) = sec.f.value_gradient(x);
        let g2 = g.norm_squared();
        let ph = frame.h - g * (frame.h.dot(&g) / g2);
        let n2 = ph.norm_squared();
        let speed = n2.sqrt();
        (speed > MIN_TANGENTIAL).then(|| (ph / n2, speed))
    };
    let mut x = *x0;
    let mut phi = from;
    while (to - phi) * sign > 0.0 {
        let (k1, speed) = field(&x)?;
        let left = (to - phi).abs();
        let dphi = (0.05 * speed).min(0.5).min(left) * sign;
        let (k2, _) = field(&(x + k1 * (0.5 * dphi)))?;
        let (k3, _) = field(&(x + k2 * (0.5 * dphi)))?;
        let (k4, _) = field(&(x + k3 * dphi))?;
        let y = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dphi / 6.0);
        phi = if left <= dphi.abs() { to } else { phi + dphi };
        x = sec.project(y, phi / hn).ok()?;
    }
    Some(x)
}

/// Leaf of `cat` through `y` (a point on its plane modulo `2πt`) and the
/// lattice shift of the copy of that leaf that contains `y`, relative to
/// the leaf's traced lift.
fn identify(sec: &Section, frame: &PlaneFrame, cat: &LevelCatalog, y: &Vec3) -> Option<(usize, IVec3)> {
    let (y0, k) = frame.reduce_to_phase(y, cat.phase);
    let p0 = sec.dir.unit.dot(&y0);
    let y0 = sec.project(y0, p0).ok()?;
    let t0 = sec.velocity(&y0, 1.0)?;
    let mut mon = ScanlineMonitor {
        frame,
        closure: ClosureWatch::new(y0, t0),
        crossings: Vec::new(),
        stop_on: Some(cat),
        matched: None,
    };
    let max_len = sec.opts.max_len_for(sec.dir.h_norm());
    sec.integrate(y0, p0, 1.0, max_len, &mut mon).ok()?;
    let (r, z) = mon.matched?;
    let orbit = cat.owner[r]?;
    let (_, j) = cat.orbits[orbit].crossings.iter().find(|(rr, _)| *rr == r)?;
    let d = (z - cat.roots[r].x) / TAU;
    let kk = [d[0].round() as i64, d[1].round() as i64, d[2].round() as i64];
    let tk = [
        (frame.t[0] as i64) * k,
        (frame.t[1] as i64) * k,
        (frame.t[2] as i64) * k,
    ];
    Some((orbit, add(sub(kk, *j), tk)))
}

/// Joins from leaf `orbit` of `level` to the leaves of the adjacent level
/// above (`up`) or below, as `(level, orbit, shift)`.
fn joins(
    sec: &Section,
    frame: &PlaneFrame,
    cats: &[LevelCatalog],
    (level, orbit): (usize, usize),
    up: bool,
) -> Vec<(usize, usize, IVec3)> {
    let n = cats.len();
    let (next, to) = if up {
        let next = (level + 1) % n;
        (next, cats[next].phase + if next == 0 { TAU } else { 0.0 })
    } else {
        let next = (level + n - 1) % n;
        (next, cats[next].phase - if level == 0 { TAU } else { 0.0 })
    };
    let samples = &cats[level].orbits[orbit].orbit.samples;
    let attempts = sec.opts.flow_attempts.max(1);
    let mut out: Vec<(usize, usize, IVec3)> = Vec::new();
    for a in 0..attempts {
        let idx = ((a as f64 + 0.5) / attempts as f64 * (samples.len() - 1) as f64) as usize;
        let Some(y) = flow(sec, frame, &samples[idx], cats[level].phase, to) else {
            continue;
        };
        let Some((b, v)) = identify(sec, frame, &cats[next], &y) else {
            continue;
        };
        if !out.contains(&(next, b, v)) {
            out.push((next, b, v));
        }
    }
    out
}

/// Node of the join graph. A contractible leaf is cut in two, so that a
/// path may turn back through it but never cross it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Side {
    Whole,
    Below,
    Above,
}

/// Classes of the pieces of the surface that carry open leaves.
///
/// The surface is cut along every sampled contractible leaf; each piece
/// containing open leaves contributes the windings of those leaves and the
/// lift shifts around the loops of joins inside it.
pub(crate) fn carrier_pieces(sec: &Section, frame: &PlaneFrame, cats: &[LevelCatalog]) -> Vec<Vec<IVec3>> {
    type Node = (usize, usize, Side);
    let open = |l: usize, o: usize| !is_zero(cats[l].orbits[o].orbit.winding);
    let side = |l: usize, o: usize, s: Side| if open(l, o) { (l, o, Side::Whole) } else { (l, o, s) };
    let mut edges: Vec<(Node, Node, IVec3)> = Vec::new();
    for (l, c) in cats.iter().enumerate() {
        for o in 0..c.orbits.len() {
            for up in [true, false] {
                let (mine, theirs) = if up { (Side::Above, Side::Below) } else { (Side::Below, Side::Above) };
                for (m, b, v) in joins(sec, frame, cats, (l, o), up) {
                    edges.push((side(l, o, mine), side(m, b, theirs), v));
                }
            }
        }
    }
    let mut adj: HashMap<Node, Vec<(Node, IVec3)>> = HashMap::new();
    for &(x, y, v) in &edges {
        adj.entry(x).or_default().push((y, v));
        adj.entry(y).or_default().push((x, sub([0, 0, 0], v)));
    }
    // spanning forest potentials; every other edge closes a loop.
    let mut pot: HashMap<Node, IVec3> = HashMap::new();
    let mut pieces = Vec::new();
    for (l, c) in cats.iter().enumerate() {
        for o in 0..c.orbits.len() {
            let root = (l, o, Side::Whole);
            if !open(l, o) || pot.contains_key(&root) {
                continue;
            }
            let mut classes = Vec::new();
            pot.insert(root, [0, 0, 0]);
            let mut stack = vec![root];
            while let Some(a) = stack.pop() {
                if a.2 == Side::Whole {
                    classes.push(cats[a.0].orbits[a.1].orbit.winding);
                }
                for &(b, shift) in adj.get(&a).map(|v| v.as_slice()).unwrap_or(&[]) {
                    let pb = add(pot[&a], shift);
                    match pot.get(&b) {
                        Some(&q) => {
                            let c = sub(pb, q);
                            if !is_zero(c) {
                                classes.push(c);
                            }
                        }
                        None => {
                            pot.insert(b, pb);
                            stack.push(b);
                        }
                    }
                }
            }
            pieces.push(classes);
        }
    }
    pieces
}
