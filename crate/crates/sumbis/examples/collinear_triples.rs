//! Collinear-triple counts T (all determinant-vanishing coordinate tuples)
//! and T-distinct (the three points pairwise distinct) over grid products,
//! checked against the six-loop oracle, with the degenerate tuples split by
//! first-coordinate coincidence.
//!
//! Run: cargo run --release --example collinear_triples

use sumbis::incidence::{collinear_degenerate_subcases, collinear_t, collinear_t_oracle};
use sumbis::setalg::{FiniteSet, Universe};

fn main() {
    let f7 = Universe::prime_field(7).unwrap();
    let cases = [
        (vec![0i64, 1], vec![0, 1], vec![0, 1]),
        (vec![0, 1, 3], vec![1, 2], vec![0, 4, 5]),
        (vec![0, 1, 2, 3], vec![0, 1, 2, 3], vec![0, 1, 2, 3]),
    ];
    for (v1, v2, v3) in cases {
        let a1 = FiniteSet::from_ints(f7, &v1).unwrap();
        let a2 = FiniteSet::from_ints(f7, &v2).unwrap();
        let a3 = FiniteSet::from_ints(f7, &v3).unwrap();
        let t = collinear_t(&a1, &a2, &a3, false).unwrap();
        let t_distinct = collinear_t(&a1, &a2, &a3, true).unwrap();
        let oracle = collinear_t_oracle(&a1, &a2, &a3, false).unwrap();
        let (s_ab, s_ac, s_bc) = collinear_degenerate_subcases(&a1, &a2, &a3).unwrap();
        println!("A1 = {v1:?}, A2 = {v2:?}, A3 = {v3:?} over F_7");
        println!("  T = {t} (oracle {oracle}), T_distinct = {t_distinct}, difference = {}", t - t_distinct);
        println!("  degenerate split by first coordinates: a1=b1: {s_ab}, a1=c1: {s_ac}, b1=c1: {s_bc}");
        assert_eq!(t, oracle);
    }
}
