//! The per-direction pipeline: critical points, separatrix graphs, regular
//! leaves, and the label read off their classes.

use std::collections::HashMap;
use std::sync::RwLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::carrier::carrier_pieces;
use crate::dynamics::critical::{find_critical_points, CriticalKind};
use crate::dynamics::direction::RationalDirection;
use crate::dynamics::options::SectionOptions;
use crate::dynamics::orbits::{catalog_levels, PlaneFrame};
use crate::dynamics::separatrix::trace_separatrix_graph;
use crate::dynamics::trace::Section;
use crate::error::DynamicsError;
use crate::geometry::DispersionRelation;
use crate::homology::{canonical_label, cycle_lattice, miller_from_lattice, CycleLattice, UnresolvedReason, ZoneLabel};
use crate::lattice::{cross, is_zero, primitive_part, IVec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ClassifyOptions {
    pub section: SectionOptions,
    /// apply the 48-element cubic symmetry when canonicalizing labels;
    /// `None` detects it from the surface.
    pub symmetric: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    pub critical_count: usize,
    pub saddle_count: usize,
    pub orbit_count: usize,
    /// worst of the constraint and closure residuals over traced leaves.
    pub max_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub m: i64,
    pub n: i64,
    #[serde(rename = "N")]
    pub big_n: i64,
    pub h: IVec3,
    pub label: ZoneLabel,
    pub diag: Diagnostics,
}

fn unresolved(r: UnresolvedReason) -> ZoneLabel {
    ZoneLabel::Unresolved(r)
}

fn failure_reason(e: &DynamicsError) -> UnresolvedReason {
    match e {
        DynamicsError::DanglingSeparatrix { .. } => UnresolvedReason::DanglingSeparatrix,
        _ => UnresolvedReason::SolverFailure,
    }
}

/// Label and diagnostics of one direction; never fails, every stage error
/// ends up in the label.
pub fn classify_direction(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    opts: &ClassifyOptions,
) -> DirectionRecord {
    let start = Instant::now();
    let symmetric = opts.symmetric.unwrap_or_else(|| f.has_cubic_symmetry());
    let (label, mut diag) = label_direction(f, energy, dir, &opts.section, symmetric);
    diag.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    DirectionRecord {
        m: dir.m,
        n: dir.n,
        big_n: dir.big_n,
        h: dir.h,
        label,
        diag,
    }
}

fn label_direction(
    f: &DispersionRelation,
    energy: f64,
    dir: &RationalDirection,
    opts: &SectionOptions,
    symmetric: bool,
) -> (ZoneLabel, Diagnostics) {
    let mut diag = Diagnostics::default();
    let crit = match find_critical_points(f, energy, dir, opts) {
        Ok(c) => c,
        Err(e) => return (unresolved(failure_reason(&e)), diag),
    };
    diag.critical_count = crit.len();
    diag.saddle_count = crit.iter().filter(|c| c.kind == CriticalKind::Saddle).count();
    let graphs = match trace_separatrix_graph(f, energy, dir, &crit, opts) {
        Ok(g) => g,
        Err(e) => return (unresolved(failure_reason(&e)), diag),
    };
    let sec = Section::new(f, energy, dir, opts);
    let frame = PlaneFrame::new(dir, opts.scanlines_per_axis);
    let phases: Vec<f64> = crit.iter().map(|c| c.phase).collect();
    let cats = match catalog_levels(&sec, &frame, &phases) {
        Ok(c) => c,
        Err(e) => return (unresolved(failure_reason(&e)), diag),
    };
    let orbits: Vec<_> = cats.iter().flat_map(|c| c.orbits.iter().map(|o| o.orbit.clone())).collect();
    diag.orbit_count = orbits.len();
    diag.max_residual = orbits.iter().fold(0.0f64, |acc, o| {
        let (rf, rp) = o.constraint_residuals(f, energy, &dir.unit);
        acc.max(rf).max(rp).max(o.closure_residual)
    });
    let level = match cycle_lattice(&graphs, &orbits, dir.h) {
        Ok(l) => l,
        Err(_) => return (unresolved(UnresolvedReason::SolverFailure), diag),
    };
    let open: Vec<IVec3> = orbits.iter().map(|o| o.winding).filter(|w| !is_zero(*w)).collect();
    let open_rank = CycleLattice::from_generators(open.clone()).rank;
    let label = match (level.rank, open.first()) {
        (0, _) => ZoneLabel::Null,
        // critical levels span the whole plane lattice, every regular leaf
        // is contractible: the section planes themselves are the zone.
        (2, None) => miller_from_lattice(&level, symmetric),
        // open leaves of two independent classes: no single carrier.
        (2, Some(_)) if open_rank > 1 => unresolved(UnresolvedReason::Degenerate),
        (1, None) => unresolved(UnresolvedReason::RankOne),
        // A carrier whose height has nonzero degree meets every level, so a
        // level without open leaves means the carrier lies across the
        // section planes: its class is h itself.
        (_, Some(_)) if cats.iter().any(|c| c.orbits.iter().all(|o| is_zero(o.orbit.winding))) => {
            match canonical_label(dir.h, symmetric) {
                Ok(l) => ZoneLabel::Zone(l),
                Err(_) => unresolved(UnresolvedReason::SolverFailure),
            }
        }
        (_, Some(_)) => carrier_label(&carrier_pieces(&sec, &frame, &cats), symmetric),
        _ => unresolved(UnresolvedReason::SolverFailure),
    };
    (label, diag)
}

/// Zone shared by every carrier piece of rank two.
fn carrier_label(pieces: &[Vec<IVec3>], symmetric: bool) -> ZoneLabel {
    let mut zone: Option<IVec3> = None;
    for piece in pieces {
        let lattice = CycleLattice::from_generators(piece.clone());
        match lattice.rank {
            2 => {
                let l = primitive_part(cross(lattice.basis[0], lattice.basis[1])).unwrap();
                let Ok(l) = canonical_label(l, symmetric) else {
                    return unresolved(UnresolvedReason::SolverFailure);
                };
                match zone {
                    Some(z) if z != l => return unresolved(UnresolvedReason::Degenerate),
                    _ => zone = Some(l),
                }
            }
            3 => return unresolved(UnresolvedReason::Degenerate),
            _ => {}
        }
    }
    zone.map_or(unresolved(UnresolvedReason::RankOne), ZoneLabel::Zone)
}

/// [`classify_direction`] with a write-once cache keyed by the primitive
/// direction, so grid points sharing `h` share one computation.
pub struct Classifier {
    pub surface: DispersionRelation,
    pub energy: f64,
    pub opts: ClassifyOptions,
    cache: RwLock<HashMap<IVec3, (ZoneLabel, Diagnostics)>>,
}

impl Classifier {
    pub fn new(surface: DispersionRelation, energy: f64, mut opts: ClassifyOptions) -> Self {
        if opts.symmetric.is_none() {
            opts.symmetric = Some(surface.has_cubic_symmetry());
        }
        Self {
            surface,
            energy,
            opts,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn classify(&self, dir: &RationalDirection) -> DirectionRecord {
        let cached = self.cache.read().unwrap().get(&dir.h).cloned();
        let (label, diag) = match cached {
            Some(hit) => hit,
            None => {
                let rec = classify_direction(&self.surface, self.energy, dir, &self.opts);
                let mut map = self.cache.write().unwrap();
                map.entry(dir.h).or_insert((rec.label, rec.diag)).clone()
            }
        };
        DirectionRecord {
            m: dir.m,
            n: dir.n,
            big_n: dir.big_n,
            h: dir.h,
            label,
            diag,
        }
    }
}
