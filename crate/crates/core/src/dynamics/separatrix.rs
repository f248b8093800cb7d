//! Separatrix graphs on critical levels.
//!
//! Every saddle (or degenerate critical point) of the height on `{f = E}`
//! sends level-set branches out into its section plane. Each branch is
//! followed until it runs into a critical point of the same level, possibly
//! in another fundamental domain. The resulting graph carries exact lift
//! displacements on its edges, so its cycle space maps to integer classes.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use crate::dynamics::critical::CriticalPoint;
use crate::dynamics::direction::RationalDirection;
use crate::dynamics::options::SectionOptions;
use crate::dynamics::trace::{Control, Monitor, Section};
use crate::error::DynamicsError;
use crate::geometry::{torus_difference, DispersionRelation, Vec3};
use crate::homology::winding_from_lift;
use crate::lattice::IVec3;

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatrixEdge {
    pub from: usize,
    pub to: usize,
    /// lift of `to` minus lift of `from`, both taken at their wrapped
    /// positions.
    pub displacement: Vec3,
    pub samples: Vec<Vec3>,
}

/// One connected component of a critical level.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatrixGraph {
    pub vertices: Vec<CriticalPoint>,
    pub edges: Vec<SeparatrixEdge>,
    pub cycle_classes: Vec<IVec3>,
    /// `unit·x` of the level, reduced modulo the height period.
    pub height: f64,
}

const ANGULAR_SAMPLES: usize = 720;

/// Unit directions in the section plane along which the level set leaves
/// `s`, found as sign changes of `f - E` on a circle of radius `eps`.
pub(crate) fn branch_directions(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    s: &Vec3,
    eps: f64,
) -> Vec<Vec3> {
    let (e1, e2) = dir.orthonormal_plane();
    let ray = |theta: f64| e1 * theta.cos() + e2 * theta.sin();
    let g = |theta: f64| f.value(&(s + ray(theta) * eps)) - energy;
    let step = TAU / ANGULAR_SAMPLES as f64;
    let mut out = Vec::new();
    let mut ga = g(0.0);
    for i in 0..ANGULAR_SAMPLES {
        let (a, b) = (i as f64 * step, (i + 1) as f64 * step);
        let gb = g(b);
        if (ga < 0.0) != (gb < 0.0) {
            let (mut lo, mut hi, mut glo) = (a, b, ga);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            out.push(ray(0.5 * (lo + hi)));
        }
        ga = gb;
    }
    out
}

/// Groups points carrying branches by phase, treating phases within
/// `tol_h · |h|` (cyclically) as one level.
fn group_by_level(points: &[&CriticalPoint], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].phase.total_cmp(&points[b].phase));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if points[i].phase - points[*g.last().unwrap()].phase < tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    if groups.len() > 1 {
        let first = points[groups[0][0]].phase;
        let last = points[*groups.last().unwrap().last().unwrap()].phase;
        if first + TAU - last < tol {
            let tail = groups.pop().unwrap();
            groups[0].extend(tail);
        }
    }
    groups
}

struct Capture {
    vertex: usize,
    copy: Vec3,
    incoming: Vec3,
}

struct CaptureMonitor<'a> {
    targets: &'a [Vec3],
    radius: f64,
    hit: Option<Capture>,
}

impl CaptureMonitor<'_> {
    fn nearest(&self, x: &Vec3) -> f64 {
        self.targets
            .iter()
            .map(|c| torus_difference(x, c).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

impl Monitor for CaptureMonitor<'_> {
    fn max_step(&self, x: &Vec3) -> f64 {
        (0.5 * self.nearest(x)).max(0.5 * self.radius)
    }

    fn on_step(&mut self, _sec: &Section, _p0: f64, xa: &Vec3, xb: &Vec3, _arc: f64) -> Result<Control, DynamicsError> {
        let seg = xb - xa;
        let len2 = seg.norm_squared();
        for (j, c) in self.targets.iter().enumerate() {
            let copy = xb - torus_difference(xb, c);
            let lam = if len2 > 0.0 { ((copy - xa).dot(&seg) / len2).clamp(0.0, 1.0) } else { 1.0 };
            let closest = xa + seg * lam;
            if (closest - copy).norm() < self.radius {
                let back = xa - copy;
                self.hit = Some(Capture {
                    vertex: j,
                    copy,
                    incoming: if back.norm() > 0.0 { back.normalize() } else { -seg.normalize() },
                });
                return Ok(Control::Stop(Some(closest)));
            }
        }
        Ok(Control::Continue)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let r = self.find(p);
        self.0[i] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Builds the separatrix graphs of all critical levels.
///
/// Points without branches (extrema) are ignored. Graphs come out ordered
/// by level, then by their smallest vertex.
pub fn trace_separatrix_graph(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    saddles: &[CriticalPoint],
    opts: &SectionOptions,
) -> Result<Vec<SeparatrixGraph>, DynamicsError> {
    let sec = Section::new(f, energy, dir, opts);
    let branching: Vec<&CriticalPoint> = saddles.iter().filter(|c| c.has_branches()).collect();
    let max_len = opts.max_len_for(dir.h_norm());
    let mut graphs = Vec::new();
    for group in group_by_level(&branching, opts.tol_h * dir.h_norm()) {
        let verts: Vec<CriticalPoint> = group.iter().map(|&i| branching[i].clone()).collect();
        let targets: Vec<Vec3> = verts.iter().map(|c| c.position()).collect();
        let branches: Vec<Vec<Vec3>> = targets
            .iter()
            .map(|s| branch_directions(f, energy, dir, s, opts.eps_branch))
            .collect();
        let mut consumed: Vec<Vec<bool>> = branches.iter().map(|b| vec![false; b.len()]).collect();
        let mut edges: Vec<SeparatrixEdge> = Vec::new();
        for i in 0..verts.len() {
            for k in 0..branches[i].len() {
                if consumed[i][k] {
                    continue;
                }
                consumed[i][k] = true;
                let s = targets[i];
                let p0 = dir.unit.dot(&s);
                let start = sec.project(s + branches[i][k] * opts.eps_branch, p0)?;
                let v = sec.velocity(&start, 1.0).ok_or(DynamicsError::BadStart)?;
                let sign = if v.dot(&(start - s)) >= 0.0 { 1.0 } else { -1.0 };
                let mut mon = CaptureMonitor {
                    targets: &targets,
                    radius: opts.capture_radius,
                    hit: None,
                };
                let (samples, _) = match sec.integrate(start, p0, sign, max_len, &mut mon) {
                    Ok(r) => r,
                    Err(DynamicsError::MaxArcLength { max_len }) => {
                        return Err(DynamicsError::DanglingSeparatrix {
                            from: group[i],
                            max_len,
                        })
                    }
                    Err(e) => return Err(e),
                };
                let hit = mon.hit.expect("integration stopped without capture");
                let j = hit.vertex;
                if let Some(kk) = (0..branches[j].len())
                    .filter(|&kk| !consumed[j][kk])
                    .max_by(|&a, &b| branches[j][a].dot(&hit.incoming).total_cmp(&branches[j][b].dot(&hit.incoming)))
                {
                    consumed[j][kk] = true;
                }
                edges.push(SeparatrixEdge {
                    from: i,
                    to: j,
                    displacement: hit.copy - s,
                    samples,
                });
            }
        }
        graphs.extend(split_components(verts, edges)?);
    }
    Ok(graphs)
}

fn split_components(verts: Vec<CriticalPoint>, edges: Vec<SeparatrixEdge>) -> Result<Vec<SeparatrixGraph>, DynamicsError> {
    let n = verts.len();
    let mut uf = UnionFind((0..n).collect());
    for e in &edges {
        uf.union(e.from, e.to);
    }
    let mut out = Vec::new();
    for root in 0..n {
        if uf.find(root) != root {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&i| uf.find(i) == root).collect();
        let local = |i: usize| members.iter().position(|&m| m == i).unwrap();
        let sub_edges: Vec<SeparatrixEdge> = edges
            .iter()
            .filter(|e| uf.find(e.from) == root)
            .map(|e| SeparatrixEdge {
                from: local(e.from),
                to: local(e.to),
                ..e.clone()
            })
            .collect();
        let sub_verts: Vec<CriticalPoint> = members.iter().map(|&i| verts[i].clone()).collect();
        let cycle_classes = cycle_classes(sub_verts.len(), &sub_edges)?;
        out.push(SeparatrixGraph {
            height: sub_verts[0].height,
            vertices: sub_verts,
            edges: sub_edges,
            cycle_classes,
        });
    }
    Ok(out)
}

/// Classes of a fundamental cycle basis: a spanning tree assigns every
/// vertex a lift, and each non-tree edge closes one cycle.
fn cycle_classes(n: usize, edges: &[SeparatrixEdge]) -> Result<Vec<IVec3>, DynamicsError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
    for (idx, e) in edges.iter().enumerate() {
        adj[e.from].push((idx, e.to, 1.0));
        adj[e.to].push((idx, e.from, -1.0));
    }
    let mut lift: Vec<Option<Vec3>> = vec![None; n];
    let mut tree = vec![false; edges.len()];
    lift[0] = Some(Vec3::zeros());
    let mut queue = VecDeque::from([0]);
    while let Some(a) = queue.pop_front() {
        for &(idx, b, sgn) in &adj[a] {
            if lift[b].is_none() {
                lift[b] = Some(lift[a].unwrap() + edges[idx].displacement * sgn);
                tree[idx] = true;
                queue.push_back(b);
            }
        }
    }
    let mut classes = Vec::new();
    for (idx, e) in edges.iter().enumerate() {
        if tree[idx] {
            continue;
        }
        let d = lift[e.from].unwrap() + e.displacement - lift[e.to].unwrap();
        classes.push(winding_from_lift(&d, 1e-6)?);
    }
    Ok(classes)
}
