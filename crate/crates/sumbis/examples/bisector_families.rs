//! Bisector families of random point sets in the Z/p^3 Z plane: the
//! unit-difference pairs, the deduplicated bisector lines with their
//! multiplicities w(l), the per-distance quadruple counts, and the exact
//! Cauchy-Schwarz inequality |P~|^2 <= |B(P)| sum of w^2 behind the
//! bisector-count bound.
//!
//! Run: cargo run --release --example bisector_families

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumbis::ring::Modulus;
use sumbis::zqgeom::{quadruple_stats, Vec2};

fn main() {
    let m = Modulus::zq(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for size in [10usize, 20, 40] {
        let pts: Vec<Vec2> = (0..size)
            .map(|_| {
                Vec2::from_ints(m, rng.gen_range(0..m.q()) as i64, rng.gen_range(0..m.q()) as i64)
            })
            .collect();
        let stats = quadruple_stats(&pts).unwrap();
        println!("|P| = {size}:");
        println!(
            "  unit-difference pairs |P~| = {} ({} pairs skipped), distinct bisectors |B(P)| = {}",
            stats.p_tilde,
            stats.family.skipped_pairs,
            stats.family.lines.len()
        );
        println!("  pairs per distance: {:?}", stats.pi_d);
        println!("  shared-bisector quadruples per distance: {:?} (total {})", stats.q_d, stats.q_total);
        println!(
            "  |P~|^2 = {} <= |B(P)| * sum w^2 = {} * {} = {}: {}",
            (stats.p_tilde as u128).pow(2),
            stats.family.lines.len(),
            stats.weight_square_sum,
            stats.family.lines.len() as u128 * stats.weight_square_sum,
            stats.cauchy_schwarz_holds
        );
    }
}
