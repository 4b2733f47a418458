//! The pair graph at p = 3, d = 1: vertices are point pairs at distance 1,
//! edges join pairs carried to each other by a census reflection. Builds the
//! graph, verifies the (p^6 - p^5)-regularity, streams the A^2 = c_J J +
//! c_I I + E decomposition, estimates the second eigenvalue, and runs an
//! expander-mixing check with the measured bound.
//!
//! Run: cargo run --release --example bisector_graph

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumbis::report::Budget;
use sumbis::ring::Modulus;
use sumbis::spectral::{
    a2_decomposition, build_bisector_graph, mixing_check, second_eigenvalue, RowSelection,
};

fn main() {
    let m = Modulus::zq(3).unwrap();
    let budget = Budget::new(1 << 40, None);
    let graph = build_bisector_graph(m, m.elem(1), &budget).unwrap();
    println!(
        "graph: {} vertices, degree {} (validated regular), {} edges",
        graph.vertex_count(),
        graph.declared_degree().unwrap(),
        graph.edge_count()
    );

    let (stats, closed_form) =
        a2_decomposition(&graph, 3, &RowSelection::Sample { count: 256, seed: 1 });
    println!(
        "A^2 - c_J J - c_I I: diagonal zero on {} sampled rows: {}, row sums {}..{} (predicted {})",
        stats.rows_checked, stats.diag_all_zero, stats.row_sum_min, stats.row_sum_max, closed_form
    );

    let l2 = second_eigenvalue(&graph, 1e-6, 50_000).unwrap();
    println!(
        "second eigenvalue: {:+.6} (residual {:.2e} in {} iterations), |lambda2|/p^5 = {:.3}",
        l2.value,
        l2.residual,
        l2.iterations,
        l2.value.abs() / 243.0
    );

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pick = |rng: &mut ChaCha8Rng| -> Vec<u32> {
        (0..2000).map(|_| rng.gen_range(0..graph.vertex_count() as u32)).collect()
    };
    let (s, t) = (pick(&mut rng), pick(&mut rng));
    let mix = mixing_check(&graph, &s, &t, l2.value.abs());
    println!(
        "mixing on random 2000-vertex sets: E(S,T) = {}, expectation {:.1}, deviation {:.1} <= bound {:.1}: {}",
        mix.e_st, mix.expected, mix.deviation, mix.bound, mix.holds
    );
}
