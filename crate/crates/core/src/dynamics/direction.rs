use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::DirectionError;
use crate::geometry::{kvec, Vec3};
use crate::lattice::{plane_basis, primitive_part, IVec3};

/// A magnetic field direction `(m/N, n/N, 1)` with its primitive integer
/// representative `h` and unit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalDirection {
    pub m: i64,
    pub n: i64,
    #[serde(rename = "N")]
    pub big_n: i64,
    pub h: IVec3,
    #[serde(skip)]
    pub unit: Vec3,
}

impl RationalDirection {
    /// Grid direction with `0 <= m <= n <= N`, `N >= 1`.
    pub fn grid(m: i64, n: i64, big_n: i64) -> Result<Self, DirectionError> {
        if !(big_n >= 1 && 0 <= m && m <= n && n <= big_n) {
            return Err(DirectionError::OutOfTriangle { m, n, big_n });
        }
        let mut d = Self::from_vector([m, n, big_n])?;
        d.m = m;
        d.n = n;
        d.big_n = big_n;
        Ok(d)
    }

    /// Any nonzero integer vector, e.g. a signed permutation of a grid
    /// direction. `m, n, N` keep the raw components.
    pub fn from_vector(v: IVec3) -> Result<Self, DirectionError> {
        let h = primitive_part(v).ok_or(DirectionError::Zero)?;
        let unit = kvec(h).normalize();
        Ok(Self {
            m: v[0],
            n: v[1],
            big_n: v[2],
            h,
            unit,
        })
    }

    pub fn h_norm(&self) -> f64 {
        kvec(self.h).norm()
    }

    /// Period of the height `unit·x` on the torus: `2π / |h|`.
    pub fn height_period(&self) -> f64 {
        TAU / self.h_norm()
    }

    /// Phase `h·x`, which is well defined modulo `2π` on the torus.
    pub fn phase(&self, x: &Vec3) -> f64 {
        kvec(self.h).dot(x)
    }

    /// Orthonormal basis of the plane orthogonal to `unit`.
    pub fn orthonormal_plane(&self) -> (Vec3, Vec3) {
        let u = self.unit;
        let pick = if u[0].abs() < 0.6 {
            Vec3::x()
        } else if u[1].abs() < 0.6 {
            Vec3::y()
        } else {
            Vec3::z()
        };
        let e1 = (pick - u * u.dot(&pick)).normalize();
        let e2 = u.cross(&e1);
        (e1, e2)
    }

    pub(crate) fn lattice_frame(&self) -> (IVec3, IVec3, IVec3) {
        plane_basis(self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_reduces_to_primitive() {
        let d = RationalDirection::grid(2, 2, 2).unwrap();
        assert_eq!(d.h, [1, 1, 1]);
        assert!((d.unit.norm() - 1.0).abs() < 1e-14);
        let d = RationalDirection::grid(0, 0, 1).unwrap();
        assert_eq!(d.h, [0, 0, 1]);
    }

    #[test]
    fn invalid_grid_points() {
        assert!(RationalDirection::grid(0, 0, 0).is_err());
        assert!(RationalDirection::grid(2, 1, 3).is_err());
        assert!(RationalDirection::grid(0, 4, 3).is_err());
        assert_eq!(RationalDirection::from_vector([0, 0, 0]), Err(DirectionError::Zero));
    }

    #[test]
    fn plane_basis_is_orthonormal() {
        let d = RationalDirection::from_vector([3, -5, 7]).unwrap();
        let (e1, e2) = d.orthonormal_plane();
        assert!(e1.dot(&d.unit).abs() < 1e-15);
        assert!(e2.dot(&d.unit).abs() < 1e-15);
        assert!(e1.dot(&e2).abs() < 1e-15);
        assert!((e1.norm() - 1.0).abs() < 1e-15);
    }
}
