//! Integer homology of traced curves and the Miller-index rule.
//!
//! A closed curve in `T^3` has class `(lift displacement) / 2π ∈ Z^3`. A
//! family of such classes spans a sublattice; when a cycle lattice of rank
//! two is the homology of a torus carrying open orbits, the torus is the
//! indivisible 2-cycle `primitive(b1 × b2)`.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::separatrix::SeparatrixGraph;
use crate::dynamics::trace::Orbit;
use crate::error::HomologyError;
use crate::geometry::Vec3;
use crate::lattice::{cross, dot, gcd3, hermite_basis, is_zero, primitive_part, IVec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnresolvedReason {
    /// the classes found span only a line; no 2-cycle can be read off.
    RankOne,
    DanglingSeparatrix,
    SolverFailure,
    /// degenerate critical structure: inconsistent or non-generic sections.
    Degenerate,
}

/// Label of one field direction at fixed energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneLabel {
    Zone(IVec3),
    Null,
    Unresolved(UnresolvedReason),
}

impl ZoneLabel {
    pub fn zone(&self) -> Option<IVec3> {
        match self {
            ZoneLabel::Zone(l) => Some(*l),
            _ => None,
        }
    }

    pub fn is_unresolved(&self) -> bool {
        matches!(self, ZoneLabel::Unresolved(_))
    }

    /// `"a,b,c"`, `"null"` or `"unresolved:<reason>"`.
    pub fn render(&self) -> String {
        match self {
            ZoneLabel::Zone(l) => format!("{},{},{}", l[0], l[1], l[2]),
            ZoneLabel::Null => "null".to_string(),
            ZoneLabel::Unresolved(r) => format!("unresolved:{}", r.as_str()),
        }
    }
}

impl UnresolvedReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnresolvedReason::RankOne => "rank_one",
            UnresolvedReason::DanglingSeparatrix => "dangling_separatrix",
            UnresolvedReason::SolverFailure => "solver_failure",
            UnresolvedReason::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for ZoneLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZoneLabel::Zone(l) => write!(f, "({},{},{})", l[0], l[1], l[2]),
            other => f.write_str(&other.render()),
        }
    }
}

/// Sublattice of `Z^3` generated by cycle classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleLattice {
    pub generators: Vec<IVec3>,
    pub rank: usize,
    /// Hermite normal form basis.
    pub basis: Vec<IVec3>,
}

impl CycleLattice {
    /// Lattice of arbitrary generators; no orthogonality requirement.
    pub fn from_generators(generators: Vec<IVec3>) -> Self {
        let basis = hermite_basis(&generators);
        Self {
            rank: basis.len(),
            generators,
            basis,
        }
    }

    pub fn contains(&self, v: IVec3) -> bool {
        let mut ext = self.basis.clone();
        ext.push(v);
        hermite_basis(&ext) == self.basis
    }
}

/// Nearest-integer class of a lift displacement, refusing anything that is
/// not within `tol` turns of an integer.
pub fn winding_from_lift(displacement: &Vec3, tol: f64) -> Result<IVec3, HomologyError> {
    let mut out = [0i64; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        let turns = displacement[i] / TAU;
        let r = turns.round();
        if (turns - r).abs() > tol {
            return Err(HomologyError::NonIntegral {
                component: i,
                value: turns,
                tol,
            });
        }
        *slot = r as i64;
    }
    Ok(out)
}

pub fn primitive(v: IVec3) -> Result<IVec3, HomologyError> {
    primitive_part(v).ok_or(HomologyError::ZeroVector)
}

/// Lattice generated by the critical-level cycles and the regular orbit
/// windings; every class must lie in the plane `h^⊥`.
pub fn cycle_lattice(graphs: &[SeparatrixGraph], orbits: &[Orbit], h: IVec3) -> Result<CycleLattice, HomologyError> {
    let generators: Vec<IVec3> = graphs
        .iter()
        .flat_map(|g| g.cycle_classes.iter().copied())
        .chain(orbits.iter().map(|o| o.winding))
        .collect();
    for g in &generators {
        if dot(*g, h) != 0 {
            return Err(HomologyError::InvalidGenerator { generator: *g, h });
        }
    }
    Ok(CycleLattice::from_generators(generators))
}

/// Rank 2 gives the zone of the torus spanned by the basis, rank 0 the
/// null label, rank 1 stays unresolved.
pub fn miller_from_lattice(lattice: &CycleLattice, symmetric: bool) -> ZoneLabel {
    match lattice.rank {
        0 => ZoneLabel::Null,
        1 => ZoneLabel::Unresolved(UnresolvedReason::RankOne),
        2 => {
            let c = cross(lattice.basis[0], lattice.basis[1]);
            match primitive(c).and_then(|l| canonical_label(l, symmetric)) {
                Ok(l) => ZoneLabel::Zone(l),
                Err(_) => ZoneLabel::Unresolved(UnresolvedReason::SolverFailure),
            }
        }
        _ => ZoneLabel::Unresolved(UnresolvedReason::Degenerate),
    }
}

/// Canonical representative of a Miller index.
///
/// With cubic symmetry the orbit of `l` under the 48 signed permutations is
/// represented by its sorted absolute values; otherwise only the overall
/// sign is fixed (last nonzero component positive).
pub fn canonical_label(l: IVec3, symmetric: bool) -> Result<IVec3, HomologyError> {
    if is_zero(l) {
        return Err(HomologyError::ZeroVector);
    }
    debug_assert_eq!(gcd3(l), 1, "label must be primitive");
    if symmetric {
        let mut a = [l[0].abs(), l[1].abs(), l[2].abs()];
        a.sort_unstable();
        Ok(a)
    } else {
        let last = l.iter().rev().find(|c| **c != 0).copied().unwrap_or(1);
        Ok(if last < 0 { [-l[0], -l[1], -l[2]] } else { l })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_examples() {
        assert_eq!(winding_from_lift(&Vec3::new(TAU, -TAU, 0.0), 1e-6).unwrap(), [1, -1, 0]);
        assert_eq!(winding_from_lift(&Vec3::zeros(), 1e-6).unwrap(), [0, 0, 0]);
        let err = winding_from_lift(&Vec3::new(TAU + 1e-3, 0.0, 0.0), 1e-6).unwrap_err();
        assert!(matches!(err, HomologyError::NonIntegral { component: 0, .. }));
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(primitive([2, 4, 6]).unwrap(), [1, 2, 3]);
        assert_eq!(primitive([0, 0, -3]).unwrap(), [0, 0, -1]);
        assert_eq!(primitive([1, 2, 3]).unwrap(), [1, 2, 3]);
        assert_eq!(primitive([0, 0, 0]), Err(HomologyError::ZeroVector));
    }

    fn orbit(w: IVec3) -> Orbit {
        Orbit {
            samples: vec![],
            winding: w,
            level: 0.0,
            closure_residual: 0.0,
            arc_length: 0.0,
        }
    }

    fn graph(classes: Vec<IVec3>) -> SeparatrixGraph {
        SeparatrixGraph {
            vertices: vec![],
            edges: vec![],
            cycle_classes: classes,
            height: 0.0,
        }
    }

    #[test]
    fn lattice_examples() {
        let l = cycle_lattice(&[graph(vec![[1, 1, 0], [1, -1, 0]])], &[orbit([0, 0, 0])], [0, 0, 1]).unwrap();
        assert_eq!(l.rank, 2);
        assert_eq!(l.basis, vec![[1, 1, 0], [0, 2, 0]]);

        let l = cycle_lattice(&[], &[orbit([0, 0, 0]), orbit([0, 0, 0])], [0, 0, 1]).unwrap();
        assert_eq!(l.rank, 0);

        let l = cycle_lattice(&[], &[orbit([1, 0, 0]), orbit([2, 0, 0])], [0, 0, 1]).unwrap();
        assert_eq!(l.rank, 1);
        assert_eq!(l.basis, vec![[1, 0, 0]]);

        let err = cycle_lattice(&[], &[orbit([0, 0, 1])], [0, 0, 1]).unwrap_err();
        assert!(matches!(err, HomologyError::InvalidGenerator { .. }));
    }

    #[test]
    fn miller_examples() {
        let l = CycleLattice::from_generators(vec![[1, 1, 0], [1, -1, 0]]);
        assert_eq!(miller_from_lattice(&l, true), ZoneLabel::Zone([0, 0, 1]));
        assert_eq!(miller_from_lattice(&CycleLattice::from_generators(vec![]), true), ZoneLabel::Null);
        assert_eq!(
            miller_from_lattice(&CycleLattice::from_generators(vec![[1, 0, 0]]), true),
            ZoneLabel::Unresolved(UnresolvedReason::RankOne)
        );
    }

    #[test]
    fn miller_ignores_choice_of_basis() {
        let a = CycleLattice::from_generators(vec![[1, -2, 1], [3, 0, -1]]);
        let b = CycleLattice::from_generators(vec![[4, -2, 0], [5, -4, 1]]);
        assert_eq!(a.basis, b.basis);
        assert_eq!(miller_from_lattice(&a, false), miller_from_lattice(&b, false));
        let l = miller_from_lattice(&a, false).zone().unwrap();
        for g in a.generators.iter().chain(&b.generators) {
            assert_eq!(dot(l, *g), 0);
        }
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_label([0, 0, -1], true).unwrap(), [0, 0, 1]);
        assert_eq!(canonical_label([-2, 1, 0], true).unwrap(), [0, 1, 2]);
        assert_eq!(canonical_label([1, -2, 2], false).unwrap(), [1, -2, 2]);
        assert_eq!(canonical_label([1, 2, -2], false).unwrap(), [-1, -2, 2]);
        assert_eq!(canonical_label([0, 0, 0], true), Err(HomologyError::ZeroVector));
    }

    #[test]
    fn label_json_shapes() {
        assert_eq!(serde_json::to_string(&ZoneLabel::Zone([0, 1, 2])).unwrap(), r#"{"zone":[0,1,2]}"#);
        assert_eq!(serde_json::to_string(&ZoneLabel::Null).unwrap(), r#""null""#);
        assert_eq!(
            serde_json::to_string(&ZoneLabel::Unresolved(UnresolvedReason::RankOne)).unwrap(),
            r#"{"unresolved":"rank_one"}"#
        );
        let back: ZoneLabel = serde_json::from_str(r#"{"unresolved":"dangling_separatrix"}"#).unwrap();
        assert_eq!(back, ZoneLabel::Unresolved(UnresolvedReason::DanglingSeparatrix));
    }
}
