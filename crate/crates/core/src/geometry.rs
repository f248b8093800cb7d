//! Trigonometric dispersion relations on the 3-torus `(R / 2πZ)^3`.
//!
//! A [`DispersionRelation`] is a finite sum `Σ a cos(k·x) + b sin(k·x)` over
//! integer frequency vectors `k`. Such functions are closed under exact
//! differentiation, so values, gradients and Hessians ([`Jet`]) are computed
//! term by term without finite differences.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rand::rngs::Xoshiro256PlusPlus;
use rand::{RngExt, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::SurfaceError;
use crate::lattice::{signed_permutations, IVec3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Name of the built-in surface `cos x + cos y + cos z`.
pub const SIMPLE_CUBIC: &str = "simple-cubic";

/// One Fourier term `a cos(k·x) + b sin(k·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub k: IVec3,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRelation {
    pub name: String,
    pub terms: Vec<Term>,
}

/// Value, gradient and Hessian of a dispersion relation at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec3,
    pub hessian: Mat3,
}

/// A point of the torus together with the number of fundamental domains
/// crossed to reach it in the universal cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub position: Vec3,
    pub lift_shift: IVec3,
}

impl TorusPoint {
    pub fn lifted(&self) -> Vec3 {
        self.position
            + TAU
                * Vec3::new(
                    self.lift_shift[0] as f64,
                    self.lift_shift[1] as f64,
                    self.lift_shift[2] as f64,
                )
    }
}

impl DispersionRelation {
    pub fn new(name: impl Into<String>, terms: Vec<Term>) -> Result<Self, SurfaceError> {
        if !terms.iter().any(|t| t.k != [0, 0, 0]) {
            return Err(SurfaceError::Constant);
        }
        for t in &terms {
            if !(t.a.is_finite() && t.b.is_finite()) {
                return Err(SurfaceError::NonFinite);
            }
        }
        Ok(Self {
            name: name.into(),
            terms,
        })
    }

    /// `cos x + cos y + cos z`.
    pub fn simple_cubic() -> Self {
        let term = |k: IVec3| Term { k, a: 1.0, b: 0.0 };
        Self {
            name: SIMPLE_CUBIC.to_string(),
            terms: vec![term([1, 0, 0]), term([0, 1, 0]), term([0, 0, 1])],
        }
    }

    /// Resolves a surface argument: a built-in name or a path to a term file.
    pub fn from_name_or_path(spec: &str) -> Result<Self, SurfaceError> {
        if spec == SIMPLE_CUBIC {
            return Ok(Self::simple_cubic());
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| SurfaceError::Io {
            path: spec.to_string(),
            source: e,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| spec.to_string());
        Self::parse(&name, &text)
    }

    /// Parses the line-oriented term format:
    ///
    /// ```text
    /// # comment
    /// cos 1,0,0 1.0
    /// sin 1,1,0 -0.25
    /// ```
    pub fn parse(name: &str, text: &str) -> Result<Self, SurfaceError> {
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| SurfaceError::Parse {
                line: line_no,
                message: format!("{msg}: `{}`", raw.trim()),
            };
            let mut fields = line.split_whitespace();
            let kind = fields.next().ok_or_else(|| bad("missing term kind"))?;
            let freq = fields.next().ok_or_else(|| bad("missing frequency vector"))?;
            let coeff = fields.next().ok_or_else(|| bad("missing coefficient"))?;
            if fields.next().is_some() {
                return Err(bad("trailing fields"));
            }
            let parts: Vec<&str> = freq.split(',').collect();
            if parts.len() != 3 {
                return Err(bad("frequency must be k1,k2,k3"));
            }
            let mut k = [0i64; 3];
            for (slot, p) in k.iter_mut().zip(&parts) {
                *slot = p.trim().parse().map_err(|_| bad("bad integer frequency"))?;
            }
            let c: f64 = coeff.parse().map_err(|_| bad("bad coefficient"))?;
            let term = match kind {
                "cos" => Term { k, a: c, b: 0.0 },
                "sin" => Term { k, a: 0.0, b: c },
                _ => return Err(bad("term kind must be `cos` or `sin`")),
            };
            terms.push(term);
        }
        Self::new(name, terms)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", self.name);
        for t in &self.terms {
            let k = format!("{},{},{}", t.k[0], t.k[1], t.k[2]);
            if t.a != 0.0 {
                out.push_str(&format!("cos {k} {}\n", t.a));
            }
            if t.b != 0.0 {
                out.push_str(&format!("sin {k} {}\n", t.b));
            }
        }
        out
    }

    #[inline]
    pub fn value(&self, x: &Vec3) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let (s, c) = phase(t.k, x).sin_cos();
                t.a * c + t.b * s
            })
            .sum()
    }

    /// Value and gradient, without the Hessian.
    #[inline]
    pub fn value_gradient(&self, x: &Vec3) -> (f64, Vec3) {
        let mut value = 0.0;
        let mut grad = Vec3::zeros();
        for t in &self.terms {
            let (s, c) = phase(t.k, x).sin_cos();
            value += t.a * c + t.b * s;
            let d = -t.a * s + t.b * c;
            grad += d * kvec(t.k);
        }
        (value, grad)
    }

    pub fn jet(&self, x: &Vec3) -> Jet {
        evaluate_jet(self, x)
    }

    /// Sup-norm bounds of `|f|`, `|∇f|` and `|Hess f|` over the torus.
    pub fn bounds(&self) -> (f64, f64, f64) {
        let mut b0 = 0.0;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for t in &self.terms {
            let amp = t.a.hypot(t.b);
            let kn = kvec(t.k).norm();
            b0 += amp;
            b1 += amp * kn;
            b2 += amp * kn * kn;
        }
        (b0, b1, b2)
    }

    /// True when `f(σx) = f(x)` for every signed coordinate permutation `σ`.
    pub fn has_cubic_symmetry(&self) -> bool {
        let samples = sample_points(12, 0x5eed);
        signed_permutations().iter().all(|sigma| {
            samples.iter().all(|x| {
                let y = apply_signed(sigma, x);
                (self.value(x) - self.value(&y)).abs() < 1e-12
            })
        })
    }
}

/// `value = Σ aₖcos(k·x) + bₖsin(k·x)` with exact first and second derivatives.
pub fn evaluate_jet(f: &DispersionRelation, x: &Vec3) -> Jet {
    let mut value = 0.0;
    let mut gradient = Vec3::zeros();
    let mut hessian = Mat3::zeros();
    for t in &f.terms {
        let (s, c) = phase(t.k, x).sin_cos();
        let k = kvec(t.k);
        value += t.a * c + t.b * s;
        gradient += (-t.a * s + t.b * c) * k;
        hessian += (-t.a * c - t.b * s) * (k * k.transpose());
    }
    Jet {
        value,
        gradient,
        hessian,
    }
}

/// Reduces a point of the universal cover to `[0, 2π)^3`.
pub fn wrap_point(x: &Vec3) -> TorusPoint {
    let mut position = Vec3::zeros();
    let mut lift_shift = [0i64; 3];
    for i in 0..3 {
        let mut q = (x[i] / TAU).floor();
        let mut r = x[i] - q * TAU;
        // rounding can leave r == 2π or a tiny negative value
        if r >= TAU {
            r -= TAU;
            q += 1.0;
        }
        if r < 0.0 {
            r += TAU;
            q -= 1.0;
            if r >= TAU {
                r = 0.0;
                q += 1.0;
            }
        }
        position[i] = r;
        lift_shift[i] = q as i64;
    }
    TorusPoint {
        position,
        lift_shift,
    }
}

/// Componentwise difference reduced to `[-π, π)`, i.e. the shortest
/// representative of `x - y` modulo `2πZ^3`.
pub fn torus_difference(x: &Vec3, y: &Vec3) -> Vec3 {
    let d = x - y;
    d.map(|c| c - TAU * ((c + PI) / TAU).floor())
}

#[inline]
pub(crate) fn phase(k: IVec3, x: &Vec3) -> f64 {
    k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]
}

#[inline]
pub fn kvec(k: IVec3) -> Vec3 {
    Vec3::new(k[0] as f64, k[1] as f64, k[2] as f64)
}

pub(crate) fn apply_signed(sigma: &[[i64; 3]; 3], x: &Vec3) -> Vec3 {
    let mut y = Vec3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            y[i] += sigma[i][j] as f64 * x[j];
        }
    }
    y
}

/// Deterministic pseudo-random points in `[0, 2π)^3`.
pub fn sample_points(count: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..count)
        .map(|_| Vec3::new(rng.random::<f64>() * TAU, rng.random::<f64>() * TAU, rng.random::<f64>() * TAU))
        .collect()
}

impl fmt::Display for DispersionRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} terms)", self.name, self.terms.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn jet_at_maximum() {
        let f = DispersionRelation::simple_cubic();
        let j = f.jet(&Vec3::zeros());
        assert_eq!(j.value, 3.0);
        assert_eq!(j.gradient, Vec3::zeros());
        assert_eq!(j.hessian, -Mat3::identity());
    }

    #[test]
    fn jet_at_quarter_turn() {
        let f = DispersionRelation::simple_cubic();
        let j = f.jet(&Vec3::new(FRAC_PI_2, 0.0, 0.0));
        assert!(close(j.value, 2.0, 1e-15));
        assert!((j.gradient - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn wrap_examples() {
        let p = wrap_point(&Vec3::new(TAU, 0.0, 0.0));
        assert_eq!(p.position, Vec3::zeros());
        assert_eq!(p.lift_shift, [1, 0, 0]);

        let p = wrap_point(&Vec3::new(7.0, -1.0, 0.0));
        assert!(close(p.position[0], 7.0 - TAU, 1e-15));
        assert!(close(p.position[1], -1.0 + TAU, 1e-15));
        assert_eq!(p.lift_shift, [1, -1, 0]);

        let q = wrap_point(&p.position);
        assert_eq!(q.position, p.position);
        assert_eq!(q.lift_shift, [0, 0, 0]);
    }

    #[test]
    fn wrap_never_returns_two_pi() {
        for x in [-1e-17, -0.0, TAU - 1e-16, 3.0 * TAU, -TAU] {
            let p = wrap_point(&Vec3::new(x, x, x));
            for i in 0..3 {
                assert!(p.position[i] >= 0.0 && p.position[i] < TAU, "{x}");
            }
        }
    }

    #[test]
    fn parse_term_file() {
        let text = "# simple cubic plus a twist\ncos 1,0,0 1\ncos 0,1,0 1 # y\ncos 0,0,1 1\nsin 1,1,0 -0.25\n";
        let f = DispersionRelation::parse("twist", text).unwrap();
        assert_eq!(f.terms.len(), 4);
        assert_eq!(f.terms[3], Term { k: [1, 1, 0], a: 0.0, b: -0.25 });
        let back = DispersionRelation::parse("twist", &f.to_text()).unwrap();
        assert_eq!(back.terms, f.terms);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = DispersionRelation::parse("bad", "cos 1,0,0 1\ntan 1,0,0 2\n").unwrap_err();
        assert!(matches!(err, SurfaceError::Parse { line: 2, .. }));
        let err = DispersionRelation::parse("bad", "cos 0,0,0 1\n").unwrap_err();
        assert!(matches!(err, SurfaceError::Constant));
        let err = DispersionRelation::parse("bad", "cos 1,0 1\n").unwrap_err();
        assert!(matches!(err, SurfaceError::Parse { line: 1, .. }));
    }

    #[test]
    fn cubic_symmetry_detection() {
        assert!(DispersionRelation::simple_cubic().has_cubic_symmetry());
        let f = DispersionRelation::parse("aniso", "cos 1,0,0 1\ncos 0,1,0 1\ncos 0,0,1 0.5\n")
            .unwrap();
        assert!(!f.has_cubic_symmetry());
    }
}
