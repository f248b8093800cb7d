//! Loads a Fermi surface from a term file (or the default cubic one) and
//! prints its value, gradient and Hessian at a few points.
//!
//! ```text
//! cargo run --example surface_jets -- [terms.txt]
//! ```
//!
//! A term file has one `cos|sin k1,k2,k3 coefficient` line per term.

use std::f64::consts::PI;

use novikov::geometry::evaluate_jet;
use novikov::{DispersionRelation, Vec3};

fn main() {
    let f = match std::env::args().nth(1) {
        Some(path) => DispersionRelation::from_name_or_path(&path).expect("readable term file"),
        None => DispersionRelation::simple_cubic(),
    };
    let (b0, b1, b2) = f.bounds();
    println!("{}: |f| <= {b0:.3}, |grad f| <= {b1:.3}, |Hess f| <= {b2:.3}", f.name);
    println!("cubic symmetry: {}", f.has_cubic_symmetry());
    print!("{}", f.to_text());
    for x in [Vec3::zeros(), Vec3::new(PI / 2.0, PI / 2.0, PI / 2.0), Vec3::new(0.0, PI, PI / 2.0)] {
        let jet = evaluate_jet(&f, &x);
        println!("\nx = {:.4?}\n  f = {:.6}\n  grad = {:.6?}", x.as_slice(), jet.value, jet.gradient.as_slice());
        for r in 0..3 {
            println!("  H[{r}] = {:.6?}", jet.hessian.row(r).iter().collect::<Vec<_>>());
        }
    }
}
