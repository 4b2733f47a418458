//! The two classical sum-product constructions: the (A+A) x (A*A) grid with
//! its |A|-rich line family, and the slope-family argument with its dyadic
//! ratio class and vector-sum sets.
//!
//! Run: cargo run --release --example elekes_solymosi

use sumbis::incidence::{elekes_config, solymosi_stats};
use sumbis::setalg::{generate_family, FamilyKind, FiniteSet, Universe};

fn main() {
    let a = FiniteSet::from_ints(Universe::Integers, &[1, 2, 3, 5, 8, 13, 21, 34]).unwrap();
    println!("A = {:?}", a.to_ints().unwrap());

    let cfg = elekes_config(&a).unwrap();
    println!(
        "grid construction: |P| = {}, lines = {} ({} distinct), incidences = {}",
        cfg.points.len(),
        cfg.raw_line_count,
        cfg.distinct_line_count,
        cfg.incidences
    );
    println!(
        "every line carries at least {} grid points (needs >= |A| = {})",
        cfg.min_line_richness,
        a.len()
    );

    println!();
    for (label, set) in [
        ("A as above", a),
        (
            "random positive set",
            generate_family(Universe::Integers, FamilyKind::RandomSubset { lo: 1, hi: 200 }, 12, 3)
                .unwrap(),
        ),
    ] {
        let doc = solymosi_stats(&set).unwrap();
        let q = &doc.quantities;
        println!("slope family for {label}:");
        println!(
            "  E^x = {}, popular ratio class: index {} with {} slopes, n*2^i0 = {}",
            q["energy_times"], q["class_index"], q["class_size"], q["n_times_2_i0"],
        );
        println!(
            "  vector sums between consecutive slope lines: total {}, union {} (disjoint: {})",
            q["vector_sum_total"], q["vector_sum_union"], q["vector_sums_disjoint"],
        );
        for c in &doc.checks {
            println!("  {}: {}", c.name, if c.verdict { "holds" } else { "fails" });
        }
    }
}
