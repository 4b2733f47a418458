//! The closed-form counting lemmas of the plane over Z/p^3 Z, each checked
//! against exhaustive enumeration: square-root counts Q(d), circle sizes
//! |C_rho(u)|, distance-pair counts D_{q,rho}, and the p^3 - p^2
//! non-isotropic lines through a point.
//!
//! Run: cargo run --release --example zq_lemmas

use sumbis::ring::{sqrt_count, sqrt_count_oracle, Modulus};
use sumbis::zqgeom::{
    circle_histogram, circle_size, distance_pair_count, nonisotropic_lines_through, Vec2,
};

fn main() {
    for p in [3u64, 7] {
        let m = Modulus::zq(p).unwrap();
        let q = m.q();
        println!("== p = {p}, q = {q} ==");

        let mismatch = (0..q)
            .filter(|&d| sqrt_count(m.elem_u(d)).unwrap() != sqrt_count_oracle(m.elem_u(d)))
            .count();
        let mass: u64 = (0..q).map(|d| sqrt_count_oracle(m.elem_u(d))).sum();
        println!("square-root counts: {mismatch} mismatches against the scan, total mass {mass} = q");

        println!("sample values: Q(0) = {}, Q(1) = {}, Q(p) = {}, Q(p^2) = {}",
            sqrt_count(m.elem(0)).unwrap(),
            sqrt_count(m.elem(1)).unwrap(),
            sqrt_count(m.elem(p as i64)).unwrap(),
            sqrt_count(m.elem((p * p) as i64)).unwrap(),
        );

        let u = Vec2::from_ints(m, 5, 11);
        let hist = circle_histogram(&u).unwrap();
        let bad = (0..q)
            .filter(|&rho| hist[rho as usize] != circle_size(m.elem_u(rho)).unwrap())
            .count();
        println!(
            "circle sizes: {bad} mismatches at center {:?}; |C_0| = {}, |C_1| = {}, |C_p| = {}",
            u.raw(),
            circle_size(m.elem(0)).unwrap(),
            circle_size(m.elem(1)).unwrap(),
            circle_size(m.elem(p as i64)).unwrap(),
        );

        let total: u128 = (0..q).map(|r| distance_pair_count(m.elem_u(r)).unwrap()).sum();
        println!("sum over rho of D_q,rho = {total} (q^4 = {})", (q as u128).pow(4));

        let lines = nonisotropic_lines_through(&u).unwrap();
        println!("non-isotropic lines through a point: {} (p^3 - p^2 = {})\n", lines.len(), q - q / p);
    }
}
