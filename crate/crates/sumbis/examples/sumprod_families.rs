//! Sum-set and product-set growth for the three standard families, over the
//! integers and over a prime field, with the exact Cauchy-Schwarz check
//! |A|^4 <= |A+A| E+(A) on each report.
//!
//! Run: cargo run --release --example sumprod_families

use sumbis::setalg::{generate_family, sum_product_report, FamilyKind, Universe};

fn main() {
    let fp = Universe::prime_field(10007).unwrap();
    let families = [
        ("arithmetic progression", FamilyKind::Ap { start: 1, step: 1 }),
        ("geometric progression", FamilyKind::Gp { base: 2, ratio: 2 }),
        ("random subset of [1, 4n^2]", FamilyKind::RandomSubset { lo: 1, hi: 4 * 32 * 32 }),
    ];

    for universe in [Universe::Integers, fp] {
        println!("== universe {} ==", universe.tag());
        for (label, kind) in &families {
            let kind = if universe != Universe::Integers && *label == "geometric progression" {
                FamilyKind::Gp { base: 2, ratio: 3 }
            } else {
                kind.clone()
            };
            let a = match generate_family(universe, kind, 32, 7) {
                Ok(a) => a,
                Err(e) => {
                    println!("{label:32} skipped: {e}");
                    continue;
                }
            };
            let doc = sum_product_report(&a).unwrap();
            let q = &doc.quantities;
            println!(
                "{label:32} |A|={:>3} |A+A|={:>5} |A*A|={:>5}  E+={:>9}  E3+={:>12}  checks {}",
                q["size"], q["sumset"], q["prodset"], q["energy_plus"], q["energy3_plus"],
                if doc.all_passed() { "ok" } else { "FAILED" },
            );
            println!(
                "{:32}   |A+A|^8|AA|^3/|A|^12 = {}   |A+A|^2|AA|^3/|A|^6 = {}",
                "", q["ratio_s8m3_n12"], q["ratio_s2m3_n6"],
            );
        }
    }
}
