//! Classifies single field directions and prints their records.
//!
//! ```text
//! cargo run --release --example classify_direction -- 1,2,7 0,0,1
//! ```

use novikov::{ClassifyOptions, DispersionRelation, RationalDirection};

fn main() {
    let f = DispersionRelation::simple_cubic();
    let opts = ClassifyOptions::default();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dirs = if args.is_empty() { vec!["0,0,1".to_string(), "1,1,1".into(), "1,2,7".into()] } else { args };
    for d in dirs {
        let v: Vec<i64> = d.split(',').map(|c| c.trim().parse().expect("integer component")).collect();
        let dir = RationalDirection::from_vector([v[0], v[1], v[2]]).expect("nonzero direction");
        let rec = novikov::classify_direction(&f, 0.0, &dir, &opts);
        println!("{:>12}  {:<28} {:?}", d, rec.label.to_string(), rec.diag);
    }
}
