//! The reflection-pair census at p = 3: build the 486 reflections with
//! non-isotropic fixed lines, push all 486^2 ordered compositions through a
//! base point pair, and print the full histogram A_x(n) = #{y : N(x,y) = n}
//! together with its two mass identities and the merged n = 0 bin.
//!
//! Run: cargo run --release --example conjecture_census

use sumbis::ring::Modulus;
use sumbis::zqgeom::{n_distribution, reflection_census, Vec2};

fn main() {
    let m = Modulus::zq(3).unwrap();
    let census = reflection_census(m).unwrap();
    println!(
        "census: {} reflections with non-isotropic fixed lines ({} involutions total, {} candidate (matrix, center) pairs)",
        census.len(),
        census.involution_maps,
        census.candidate_pairs
    );

    let x1 = Vec2::from_ints(m, 0, 0);
    let x2 = Vec2::from_ints(m, 1, 0);
    let dist = n_distribution(&census, (&x1, &x2), 1 << 40).unwrap();

    println!("\nA_x(n) for x = ((0,0),(1,0)):");
    for (n, count) in &dist.histogram {
        println!("  N = {n:>4}: {count:>6} pairs y");
    }
    println!(
        "  N = {:>4}: {:>6} pairs y at the same distance ({} over all of (Z_q^2)^2)",
        0, dist.zero_within_distance_class, dist.zero_all_pairs
    );
    println!("\ndistinct reachable y: {}", dist.distinct_y);
    println!(
        "sum of n * A(n) = {} = census^2 = {}",
        dist.mass_pairs,
        (census.len() as u128).pow(2)
    );
    println!(
        "reachable + unreachable = {} = q^4 = {}",
        dist.distinct_y as u128 + dist.zero_all_pairs,
        (m.q() as u128).pow(4)
    );
    if dist.merged_zero_bin {
        println!("note: at p = 3 the table bin at n = p^3 - 3p^2 collides with n = 0 and is reported merged");
    }

    println!("\nJSON: {}", serde_json::to_string_pretty(&dist.to_json()).unwrap());
}
