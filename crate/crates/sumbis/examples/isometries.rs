//! Norm-preserving maps of the Z/p^3 Z plane: reflections pinned to their
//! fixed lines, the unique rotation matching two circle points, and the
//! segment-transport dichotomy (a translate admits no rotation, anything
//! else exactly one).
//!
//! Run: cargo run --release --example isometries

use sumbis::ring::Modulus;
use sumbis::zqgeom::{
    bisector, reflection_fixing_line, segment_rotation, unique_rotation, Vec2, ZqLine,
};

fn main() {
    let m = Modulus::zq(3).unwrap();
    let o = Vec2::from_ints(m, 0, 0);

    // the reflection fixing x + y = 2
    let line = ZqLine::new(m, 1, 1, 2).unwrap();
    let s = reflection_fixing_line(&line).unwrap();
    println!("reflection fixing x + y = 2: matrix {:?}, translation {:?}", s.matrix(), s.translation_part());
    for v in [Vec2::from_ints(m, 1, 1), Vec2::from_ints(m, 2, 0), Vec2::from_ints(m, 0, 0)] {
        println!("  maps {:?} to {:?}", v.raw(), s.apply(&v).raw());
    }

    // a bisector is the fixed line of the reflection swapping the pair
    // (the difference (1, 4) has two unit coordinates, so the bisector is
    // a genuine non-isotropic line)
    let x = Vec2::from_ints(m, 1, 5);
    let y = Vec2::from_ints(m, 2, 9);
    let b = bisector(&x, &y).unwrap();
    let sb = reflection_fixing_line(&b).unwrap();
    println!(
        "\nbisector of {:?}, {:?} has coefficients {:?}; its reflection swaps the pair: {:?} -> {:?}",
        x.raw(), y.raw(), b.coefficients(), x.raw(), sb.apply(&x).raw(),
    );

    // rotations matching circle points
    let e1 = Vec2::from_ints(m, 1, 0);
    let e2 = Vec2::from_ints(m, 0, 1);
    let r = unique_rotation(&o, &e1, &e2).unwrap();
    println!("\nquarter turn at the origin: matrix {:?}", r.matrix());

    // segment transport
    let z = Vec2::from_ints(m, 7, 7);
    let w = Vec2::from_ints(m, 8, 7);
    println!("\nsegment ((1,0),(0,0)) onto ((8,7),(7,7)) [a translate]:");
    match segment_rotation(&e1, &o, &w, &z).unwrap() {
        None => println!("  no rotation exists, as the segments are translates"),
        Some(_) => unreachable!(),
    }
    println!("segment ((1,0),(0,0)) onto ((7,7),(8,7)) [reversed]:");
    match segment_rotation(&e1, &o, &z, &w).unwrap() {
        Some(rot) => println!(
            "  unique rotation: matrix {:?}, translation {:?}",
            rot.matrix(),
            rot.translation_part()
        ),
        None => unreachable!(),
    }
}
