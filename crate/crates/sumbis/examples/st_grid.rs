//! The sharp incidence construction: points [1..n] x [1..2n^2] against the
//! n^3 lines y = mx + b, counted exactly, with the incidence-to-bound ratio
//! I / (|P|^(2/3) |L|^(2/3) + |P| + |L|) tracked across grid doublings.
//!
//! Run: cargo run --release --example st_grid

use sumbis::incidence::st_experiment;
use sumbis::report::Budget;

fn main() {
    let budget = Budget::new(5_000_000_000, None);
    println!("{:>4} {:>9} {:>8} {:>12} {:>10}", "n", "points", "lines", "incidences", "ratio");
    for n in [2u64, 4, 8, 16] {
        let doc = st_experiment(n, &budget).unwrap();
        let q = &doc.quantities;
        println!(
            "{n:>4} {:>9} {:>8} {:>12} {:>10.4}",
            q["points"].as_u64().unwrap(),
            q["lines"].as_u64().unwrap(),
            q["incidences"].as_u64().unwrap(),
            q["st_ratio"].as_f64().unwrap(),
        );
    }
    println!("\neach line meets the grid in exactly n points, so I = n^4; the");
    println!("ratio settling to a constant is the sharpness of the construction");
}
