//! Walks one direction through the whole pipeline: critical points of the
//! height on the level surface, the separatrix graphs through the critical
//! levels, regular leaves between them and the lattice of their windings.
//!
//! ```text
//! cargo run --release --example section_topology -- 1,2,2 [energy]
//! ```

use novikov::dynamics::{
    find_critical_points, sample_regular_orbits, trace_separatrix_graph, SectionOptions,
};
use novikov::homology::{cycle_lattice, miller_from_lattice};
use novikov::{DispersionRelation, RationalDirection};

fn main() {
    let mut args = std::env::args().skip(1);
    let h: Vec<i64> = args
        .next()
        .unwrap_or_else(|| "0,0,1".into())
        .split(',')
        .map(|c| c.trim().parse().expect("integer component"))
        .collect();
    let energy: f64 = args.next().map_or(0.0, |e| e.parse().expect("number"));
    let f = DispersionRelation::simple_cubic();
    let dir = RationalDirection::from_vector([h[0], h[1], h[2]]).expect("nonzero direction");
    let opts = SectionOptions::default();

    let crit = find_critical_points(&f, energy, &dir, &opts).expect("critical points");
    println!("direction {:?}, E = {energy}: {} critical points", dir.h, crit.len());
    for c in &crit {
        println!("  {:?} at {:.4?} height {:.4}", c.kind, c.position().as_slice(), c.height);
    }

    let graphs = trace_separatrix_graph(&f, energy, &dir, &crit, &opts).expect("separatrix graph");
    for g in &graphs {
        println!(
            "level {:.4}: {} vertices, {} edges, cycle classes {:?}",
            g.height,
            g.vertices.len(),
            g.edges.len(),
            g.cycle_classes
        );
    }

    let heights: Vec<f64> = crit.iter().map(|c| c.height).collect();
    let orbits = sample_regular_orbits(&f, energy, &dir, &heights, &opts).expect("regular leaves");
    let mut windings: Vec<_> = orbits.iter().map(|o| o.winding).collect();
    windings.sort();
    windings.dedup();
    println!("{} regular leaves, distinct windings {:?}", orbits.len(), windings);

    let lattice = cycle_lattice(&graphs, &orbits, dir.h).expect("lattice");
    println!("lattice rank {} basis {:?}", lattice.rank, lattice.basis);
    println!("label from the lattice alone: {}", miller_from_lattice(&lattice, true));
    let rec = novikov::classify_direction(&f, energy, &dir, &Default::default());
    println!("full classification: {}", rec.label);
}
