//! Acceptance suite: one test per numbered criterion, each printing a
//! `[PASS]`/`[FAIL]` line (run with `--nocapture` to see them). Every
//! tolerance is pinned here; the expected values come from closed forms
//! cross-checked against exhaustive oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use sumbis::incidence::{
    collinear_t, collinear_t_oracle, elekes_config, energy_plane_config, solymosi_stats,
};
use sumbis::report::Budget;
use sumbis::ring::{sqrt_count, sqrt_count_oracle, Modulus};
use sumbis::setalg::{
    combine, energy, energy_quadruple_oracle, generate_family, restricted_energy,
    sum_product_report, FamilyKind, FiniteSet, Rat, SetOp, Universe,
};
use sumbis::spectral::{
    a2_decomposition, build_bisector_graph, cayley_spectrum, cayley_trace_identities,
    second_eigenvalue, RowSelection,
};
use sumbis::zqgeom::{
    self, bisector_distance_lemma_search, circle, circle_histogram, circle_size,
    distance_pair_count, n_count, n_distribution, nonisotropic_lines_through, reflection_census,
    reflection_involutions, rotation_maps, segment_rotation, unique_rotation, Vec2,
};

/// Collects named failures for one criterion and prints its verdict line.
struct Gate {
    name: &'static str,
    failures: Vec<String>,
}

impl Gate {
    fn new(name: &'static str) -> Self {
        Gate { name, failures: Vec::new() }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        if !ok {
            self.failures.push(label.into());
        }
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, label: &str, got: T, expect: T) {
        if got != expect {
            self.failures.push(format!("{label}: got {got:?}, expected {expect:?}"));
        }
    }

    fn finish(self) {
        let ok = self.failures.is_empty();
        println!("[{}] {}", if ok { "PASS" } else { "FAIL" }, self.name);
        assert!(ok, "{}: {:?}", self.name, self.failures);
    }
}

fn random_point(m: Modulus, rng: &mut ChaCha8Rng) -> Vec2 {
    let q = m.q();
    Vec2::from_ints(m, rng.gen_range(0..q) as i64, rng.gen_range(0..q) as i64)
}

#[test]
fn criterion_01_square_root_counts() {
    let mut gate = Gate::new("criterion 1: square-root counts match the exhaustive oracle");
    let started = Instant::now();
    for p in [3u64, 7, 11] {
        let m = Modulus::zq(p).unwrap();
        let mut total = 0u64;
        for d in 0..m.q() {
            let e = m.elem_u(d);
            let fast = sqrt_count(e).unwrap();
            let slow = sqrt_count_oracle(e);
            if fast != slow {
                gate.check(format!("p={p} d={d}: {fast} vs {slow}"), false);
            }
            total += slow;
        }
        gate.eq(&format!("p={p}: total root mass"), total, m.q());
    }
    gate.check(
        format!("runtime {:?} under 10 s", started.elapsed()),
        started.elapsed().as_secs() < 10,
    );
    gate.finish();
}

#[test]
fn criterion_02_circle_and_distance_counts() {
    let mut gate = Gate::new("criterion 2: circle sizes and distance counts");
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in [3u64, 7] {
        let m = Modulus::zq(p).unwrap();
        let q = m.q();
        for _ in 0..50 {
            let u = random_point(m, &mut rng);
            let hist = circle_histogram(&u).unwrap();
            for rho in 0..q {
                if hist[rho as usize] != circle_size(m.elem_u(rho)).unwrap() {
                    gate.check(format!("p={p} u={u:?} rho={rho}"), false);
                }
            }
        }
        let total: u128 = (0..q).map(|r| distance_pair_count(m.elem_u(r)).unwrap()).sum();
        gate.eq(&format!("p={p}: sum of D_q,rho"), total, (q as u128).pow(4));
    }
    gate.check(
        format!("runtime {:?} under 60 s", started.elapsed()),
        started.elapsed().as_secs() < 60,
    );
    gate.finish();
}

#[test]
fn criterion_03_line_census() {
    let mut gate = Gate::new("criterion 3: non-isotropic lines through every point");
    // all points at p = 3, a seeded sample at p = 7
    let m3 = Modulus::zq(3).unwrap();
    for x1 in 0..m3.q() {
        for x2 in 0..m3.q() {
            let u = Vec2::from_ints(m3, x1 as i64, x2 as i64);
            let lines = nonisotropic_lines_through(&u).unwrap();
            if lines.len() != 18 {
                gate.eq(&format!("p=3 u=({x1},{x2})"), lines.len(), 18);
            }
        }
    }
    let m7 = Modulus::zq(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let u = random_point(m7, &mut rng);
        let lines = nonisotropic_lines_through(&u).unwrap();
        gate.eq(&format!("p=7 u={:?}", u.raw()), lines.len(), 294);
    }
    gate.finish();
}

#[test]
fn criterion_04_isometry_suite_exhaustive() {
    let mut gate = Gate::new("criterion 4: reflection/rotation suite at p = 3, exhaustive");
    let m = Modulus::zq(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // every non-isotropic line is fixed by exactly one reflection-shaped
    // involution, and census members realize that bijection
    let involutions = reflection_involutions(m).unwrap();
    gate.eq("involution count", involutions.len(), 972);
    let mut per_line: std::collections::HashMap<_, u64> = Default::default();
    for s in &involutions {
        *per_line.entry(s.fixed_line().unwrap()).or_insert(0) += 1;
    }
    let census = reflection_census(m).unwrap();
    gate.eq("census size", census.len(), 486);
    for l in census.fixed_lines() {
        if per_line.get(l).copied() != Some(1) {
            gate.check(format!("line {:?} fixing count", l.coefficients()), false);
        }
    }

    // rotation existence and uniqueness against the exhaustive map list
    let rotations = rotation_maps(m).unwrap();
    for trial in 0..1000 {
        let u = random_point(m, &mut rng);
        let x = loop {
            let c = random_point(m, &mut rng);
            if c.sub(&u).norm().is_unit() {
                break c;
            }
        };
        let ring = circle(&u, x.sub(&u).norm()).unwrap();
        let y = ring[rng.gen_range(0..ring.len())];
        let built = unique_rotation(&u, &x, &y).unwrap();
        let (ur, xr, yr) = (u.raw(), x.raw(), y.raw());
        let matches: Vec<_> = rotations
            .iter()
            .filter(|r| r.apply_raw(ur) == ur && r.apply_raw(xr) == yr)
            .collect();
        if matches.len() != 1
            || built.apply(&x) != y
            || matches[0].matrix() != built.matrix()
            || matches[0].translation_part() != built.translation_part()
        {
            gate.check(format!("rotation trial {trial}: {} candidates", matches.len()), false);
        }
    }

    // segment transport dichotomy: a rotation exists iff the segments are
    // not translates, and then it is the unique one in the map list
    for trial in 0..1000 {
        let x = random_point(m, &mut rng);
        let y = loop {
            let c = random_point(m, &mut rng);
            if c.sub(&x).norm().is_unit() {
                break c;
            }
        };
        let (z, w) = if trial % 2 == 0 {
            let shift = random_point(m, &mut rng);
            (x.add(&shift), y.add(&shift))
        } else {
            let z = random_point(m, &mut rng);
            let ring = circle(&z, x.sub(&y).norm()).unwrap();
            let w_from = ring[rng.gen_range(0..ring.len())];
            // want |z - w| = |x - y|: w on the circle about z
            (z, w_from)
        };
        if (x, y) == (z, w) {
            continue;
        }
        let (xr, yr, zr, wr) = (x.raw(), y.raw(), z.raw(), w.raw());
        let expected: Vec<_> = rotations
            .iter()
            .filter(|r| r.apply_raw(xr) == zr && r.apply_raw(yr) == wr)
            .collect();
        match segment_rotation(&x, &y, &z, &w) {
            Ok(None) => {
                gate.check(format!("t{trial}: None but segments differ"), x.sub(&y) == z.sub(&w));
                gate.eq(&format!("t{trial}: exhaustive count"), expected.len(), 0);
            }
            Ok(Some(rot)) => {
                gate.check(format!("t{trial}: Some but translates"), x.sub(&y) != z.sub(&w));
                gate.eq(&format!("t{trial}: exhaustive count"), expected.len(), 1);
                if expected.len() == 1
                    && (expected[0].matrix() != rot.matrix()
                        || expected[0].translation_part() != rot.translation_part())
                {
                    gate.check(format!("t{trial}: wrong rotation"), false);
                }
            }
            Err(e) => gate.check(format!("t{trial}: unexpected error {e}"), false),
        }
    }

    // the shared-bisector distance identity over the full quadruple space
    let search = bisector_distance_lemma_search(m, 1 << 40).unwrap();
    gate.eq("lines in the search", search.lines, 486);
    gate.eq("counterexamples to the distance identity", search.counterexamples, 0);
    gate.check(
        format!("full coverage: {} quadruples", search.quadruples_checked),
        search.quadruples_checked == 486u128 * 486 * 486,
    );
    gate.finish();
}

#[test]
fn criterion_05_census_histogram_p3() {
    let mut gate = Gate::new("criterion 5: reflection-pair histogram at p = 3");
    let started = Instant::now();
    let m = Modulus::zq(3).unwrap();
    let census = reflection_census(m).unwrap();
    let x1 = Vec2::from_ints(m, 0, 0);
    let x2 = Vec2::from_ints(m, 1, 0);
    let dist = n_distribution(&census, (&x1, &x2), 1 << 40).unwrap();

    for (n, expect) in [(18u64, 6561u64), (27, 2916), (54, 486), (81, 108), (162, 18), (243, 4), (486, 1)] {
        gate.eq(&format!("A[{n}]"), dist.histogram.get(&n).copied().unwrap_or(0), expect);
    }
    gate.eq("bins beyond the table", dist.histogram.len(), 7);

    // sum constraints
    let q4 = 27u128.pow(4);
    gate.eq("total y mass", dist.distinct_y as u128 + dist.zero_all_pairs, q4);
    gate.eq("pair mass", dist.mass_pairs, 486u128 * 486);
    gate.check("merged zero bin flagged at p = 3", dist.merged_zero_bin);

    // the n = 0 bin, resolved empirically: within the distance class it is
    // the conjectured (p^9 - p^8) plus the 2p^7 - 2p^6 + 2p^4 - 2p^3 + 2p - 2
    // complement
    println!(
        "  A[0] within distance class = {}, over all pairs = {}",
        dist.zero_within_distance_class, dist.zero_all_pairs
    );
    gate.eq("merged zero bin value", dist.zero_within_distance_class, 13122 + 3028);

    // histogram independent of the base pair
    let y1 = Vec2::from_ints(m, 5, 11);
    let y2 = Vec2::from_ints(m, 9, 13); // difference (-4, -2), norm 20: a unit
    let dist2 = n_distribution(&census, (&y1, &y2), 1 << 40).unwrap();
    gate.eq("x-independence", dist2.histogram, dist.histogram.clone());

    gate.check(
        format!("runtime {:?} under 30 min", started.elapsed()),
        started.elapsed().as_secs() < 1800,
    );
    gate.finish();
}

#[test]
fn criterion_06_bisector_graph_p3() {
    let mut gate = Gate::new("criterion 6: pair graph at p = 3, d = 1");
    let m = Modulus::zq(3).unwrap();
    let budget = Budget::new(1 << 40, None);
    let graph = build_bisector_graph(m, m.elem(1), &budget).unwrap();
    gate.eq("vertex count", graph.vertex_count(), 26244);
    // regularity is validated on construction; recheck explicitly
    let degrees: std::collections::HashSet<u64> =
        (0..graph.vertex_count() as u32).map(|v| graph.degree(v)).collect();
    gate.eq("degrees", degrees.into_iter().collect::<Vec<_>>(), vec![486]);

    // (A^2)_{xy} = N(x, y) on 1000 sampled pairs, half of them two-step
    // reachable, half uniform
    let census = reflection_census(m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0u64;
    for i in 0..1000u32 {
        let x = rng.gen_range(0..graph.vertex_count() as u32);
        let y = if i % 2 == 0 {
            let z = graph.neighbors(x)[rng.gen_range(0..486)];
            graph.neighbors(z)[rng.gen_range(0..486)]
        } else {
            rng.gen_range(0..graph.vertex_count() as u32)
        };
        let a2 = if x == y { graph.degree(x) } else { graph.a2_entry(x, y) };
        let (px, py) = (*graph.payload(x), *graph.payload(y));
        let to_vec = |r: (u64, u64)| Vec2::from_ints(m, r.0 as i64, r.1 as i64);
        let n = n_count(
            &census,
            (&to_vec(px.0), &to_vec(px.1)),
            (&to_vec(py.0), &to_vec(py.1)),
        )
        .unwrap();
        if a2 != n {
            mismatches += 1;
        }
    }
    gate.eq("(A^2)_xy = N(x,y) mismatches", mismatches, 0);

    // E diagonal and row sums. Exhaustive regularity already pins every
    // diagonal entry: (A^2)_xx is the degree, so E_xx = 486 - 0 - 486 = 0
    // for all x; the sampled rows double-check that and the row sums.
    let (stats, closed_form) =
        a2_decomposition(&graph, 3, &RowSelection::Sample { count: 2048, seed: 66 });
    gate.check("E diagonal all zero", stats.diag_all_zero);
    gate.check("E row sums all equal", stats.all_rows_equal);
    gate.eq("E row sum", stats.row_sum_max, closed_form);

    // second eigenvalue: residual under 1e-6 and |lambda_2| <= 10 p^5
    let l2 = second_eigenvalue(&graph, 1e-6, 50_000).unwrap();
    println!(
        "  |lambda2| = {:.6} (signed {:.6}, residual {:.2e}), C = |lambda2|/p^5 = {:.4}",
        l2.value.abs(),
        l2.value,
        l2.residual,
        l2.value.abs() / 243.0
    );
    gate.check(format!("residual {} < 1e-6", l2.residual), l2.residual < 1e-6);
    gate.check(
        format!("|lambda2| = {} <= 10 p^5 = 2430", l2.value.abs()),
        l2.value.abs() <= 2430.0,
    );
    gate.finish();
}

#[test]
fn criterion_07_cayley_spectrum_p3() {
    let mut gate = Gate::new("criterion 7: circle Cayley spectrum at p = 3");
    let m = Modulus::zq(3).unwrap();
    let conn = circle(&Vec2::from_ints(m, 0, 0), m.elem(1)).unwrap();
    gate.eq("connection set size", conn.len(), 36);

    let spec = cayley_spectrum(&conn, m).unwrap();
    gate.eq("lambda_max", spec[0], 36.0);

    // trace identities: exact counts, with the floating spectrum agreeing
    let (sum_exact, sum_sq_exact) = cayley_trace_identities(&conn, m);
    gate.eq("exact trace sum", sum_exact, 0);
    gate.eq("exact trace square sum", sum_sq_exact, 729 * 36);
    let s1: f64 = spec.iter().sum();
    let s2: f64 = spec.iter().map(|l| l * l).sum();
    gate.check(format!("float trace sum {s1}"), s1.abs() < 1e-6);
    gate.check(
        format!("float square sum {s2}"),
        (s2 - (729.0 * 36.0)).abs() < 1e-6 * 729.0 * 36.0,
    );

    // tensor-square graph: degree (p^3 + p^2)^2, traces squared
    let tensor_degree = (spec[0] * spec[0]).round() as u64;
    gate.eq("tensor degree", tensor_degree, 1296);
    gate.check(format!("tensor trace sum {}", s1 * s1), (s1 * s1).abs() < 1e-6);
    let t2 = s2 * s2;
    let t2_expect = (729.0f64 * 36.0) * (729.0 * 36.0);
    gate.check(
        format!("tensor square sum {t2}"),
        (t2 - t2_expect).abs() < 1e-6 * t2_expect,
    );
    gate.finish();
}

#[test]
fn criterion_08_set_algebra_exactness() {
    let mut gate = Gate::new("criterion 8: energies vs oracle, Eq.(2), Cauchy-Davenport");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let universes = [Universe::Integers, Universe::prime_field(101).unwrap()];

    // 200 random pairs per universe against the quadruple oracle
    for &u in &universes {
        for trial in 0..200u64 {
            let sa = rng.gen_range(1..=10);
            let sb = rng.gen_range(1..=10);
            let range = |n: usize| FamilyKind::RandomSubset { lo: 1, hi: (20 * n) as i64 };
            let a = generate_family(u, range(sa), sa, 1000 + trial).unwrap();
            let b = generate_family(u, range(sb), sb, 2000 + trial).unwrap();
            for op in [SetOp::Sum, SetOp::Product] {
                let zero = Rat::from_integer(0);
                if op == SetOp::Product && (a.contains(&zero) || b.contains(&zero)) {
                    continue;
                }
                let fast = energy(&a, &b, op.clone(), 2).unwrap();
                let slow = energy_quadruple_oracle(&a, &b, op.clone()).unwrap();
                if fast != slow {
                    gate.check(format!("{} trial {trial} {op:?}", u.tag()), false);
                }
            }
        }
    }

    // |A|^4 <= |A+A| E+(A) for every generated family
    for &u in &universes {
        for n in [4usize, 8, 16, 32] {
            let mut fams = vec![
                generate_family(u, FamilyKind::Ap { start: 1, step: 1 }, n, 0).unwrap(),
                generate_family(u, FamilyKind::RandomSubset { lo: 1, hi: 40 * n as i64 }, n, 5)
                    .unwrap(),
            ];
            if u == Universe::Integers {
                fams.push(generate_family(u, FamilyKind::Gp { base: 2, ratio: 2 }, n, 0).unwrap());
            } else if let Ok(gp) = generate_family(u, FamilyKind::Gp { base: 2, ratio: 3 }, n, 0) {
                fams.push(gp);
            }
            for a in &fams {
                let sum = combine(a, a, SetOp::Sum).unwrap();
                let e = energy(a, a, SetOp::Sum, 2).unwrap();
                let lhs = (a.len() as u128).pow(4);
                let rhs = sum.len() as u128 * e;
                gate.check(format!("{} n={n}: {lhs} <= {rhs}", u.tag()), lhs <= rhs);
            }
        }
    }

    // Cauchy-Davenport over two prime fields
    for p in [11u64, 101] {
        let u = Universe::prime_field(p).unwrap();
        for trial in 0..100u64 {
            let sa = rng.gen_range(1..=(p as usize).min(12));
            let sb = rng.gen_range(1..=(p as usize).min(12));
            let a = generate_family(u, FamilyKind::RandomSubset { lo: 0, hi: 0 }, sa, trial).unwrap();
            let b =
                generate_family(u, FamilyKind::RandomSubset { lo: 0, hi: 0 }, sb, 999 - trial)
                    .unwrap();
            let s = combine(&a, &b, SetOp::Sum).unwrap();
            let lower = (p as usize).min(sa + sb - 1);
            gate.check(
                format!("CD p={p} trial {trial}: {} >= {lower}", s.len()),
                s.len() >= lower,
            );
        }
    }
    gate.finish();
}

#[test]
fn criterion_09_elekes_and_solymosi() {
    let mut gate = Gate::new("criterion 9: line richness and the slope-family chain");
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // 50 random integer sets, |A| <= 30: every construction line carries
    // at least |A| grid points
    for trial in 0..50u64 {
        let n = rng.gen_range(2..=30usize);
        let hi = rng.gen_range(2 * n..=20 * n) as i64;
        let a = generate_family(Universe::Integers, FamilyKind::RandomSubset { lo: 1, hi }, n, trial)
            .unwrap();
        let cfg = elekes_config(&a).unwrap();
        gate.check(
            format!("richness trial {trial}: {} >= {n}", cfg.min_line_richness),
            cfg.min_line_richness as usize >= n,
        );
        gate.check(
            format!("incidence floor trial {trial}"),
            cfg.incidences >= (n as u128) * cfg.raw_line_count as u128,
        );
    }

    // 50 random positive integer sets: the two chain inequalities hold
    for trial in 0..50u64 {
        let n = rng.gen_range(4..=20usize);
        let choices = [5 * n, 10 * n, 40 * n, 1000];
        let hi = choices[rng.gen_range(0..choices.len())];
        let a = generate_family(
            Universe::Integers,
            FamilyKind::RandomSubset { lo: 1, hi: hi as i64 },
            n,
            7000 + trial,
        )
        .unwrap();
        let doc = solymosi_stats(&a).unwrap();
        for c in &doc.checks {
            gate.check(format!("solymosi trial {trial}: {}", c.name), c.verdict);
        }
    }
    gate.finish();
}

#[test]
fn criterion_10_collinear_triples_vs_oracle() {
    let mut gate = Gate::new("criterion 10: T and T-distinct against the six-loop oracle");
    for p in [5u64, 7] {
        let u = Universe::prime_field(p).unwrap();
        // all non-empty subsets of size <= 4
        let mut subsets: Vec<FiniteSet> = Vec::new();
        for mask in 1u32..(1 << p) {
            if mask.count_ones() <= 4 {
                let vals: Vec<i64> =
                    (0..p as i64).filter(|i| mask >> i & 1 == 1).collect();
                subsets.push(FiniteSet::from_ints(u, &vals).unwrap());
            }
        }
        use rayon::prelude::*;
        let count = subsets.len();
        let triples: Vec<(usize, usize, usize)> = (0..count)
            .flat_map(|i| (0..count).flat_map(move |j| (0..count).map(move |k| (i, j, k))))
            .collect();
        let bad: Vec<String> = triples
            .par_iter()
            .filter_map(|&(i, j, k)| {
                for flag in [false, true] {
                    let fast = collinear_t(&subsets[i], &subsets[j], &subsets[k], flag).unwrap();
                    let slow =
                        collinear_t_oracle(&subsets[i], &subsets[j], &subsets[k], flag).unwrap();
                    if fast != slow {
                        return Some(format!("p={p} triple ({i},{j},{k}) flag {flag}: {fast} vs {slow}"));
                    }
                }
                None
            })
            .collect();
        for b in bad {
            gate.check(b, false);
        }
    }
    gate.finish();
}

#[test]
fn criterion_11_asymptotic_ratio_sweep() {
    let mut gate = Gate::new("criterion 11: ratio sweep with exact side conditions");
    let p = 10007u64; // = 3 (mod 4), about 10^4
    let fp = Universe::prime_field(p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    for n in [8usize, 16, 32, 64] {
        let mut fams: Vec<(String, FiniteSet)> = vec![
            (
                format!("ap_{n}"),
                generate_family(fp, FamilyKind::Ap { start: 1, step: 1 }, n, 0).unwrap(),
            ),
            (
                format!("random_{n}"),
                generate_family(fp, FamilyKind::RandomSubset { lo: 0, hi: 0 }, n, n as u64)
                    .unwrap(),
            ),
        ];
        for ratio in [2i64, 3, 5] {
            if let Ok(gp) = generate_family(fp, FamilyKind::Gp { base: 2, ratio }, n, 0) {
                fams.push((format!("gp_{n}"), gp));
                break;
            }
        }
        for (name, a) in &fams {
            let doc = sum_product_report(a).unwrap();
            for c in &doc.checks {
                gate.check(format!("{name}: {}", c.name), c.verdict);
            }
            println!(
                "  {name}: |A+A|^8 |AA|^3 / |A|^12 = {}, |A+A|^2 |AA|^3 / |A|^6 = {}",
                doc.quantities["ratio_s8m3_n12"], doc.quantities["ratio_s2m3_n6"]
            );
        }
    }

    // trivial restricted-energy bound R <= |A1|^4 |A2|^3 for |A1| <= |A2|
    for trial in 0..20u64 {
        let s1 = rng.gen_range(1..=5usize);
        let s2 = rng.gen_range(s1..=6usize);
        let sz = rng.gen_range(1..=10usize);
        let a1 = generate_family(fp, FamilyKind::RandomSubset { lo: 0, hi: 0 }, s1, trial).unwrap();
        let a2 = generate_family(fp, FamilyKind::RandomSubset { lo: 0, hi: 0 }, s2, 77 + trial)
            .unwrap();
        let z = generate_family(fp, FamilyKind::RandomSubset { lo: 0, hi: 0 }, sz, 154 + trial)
            .unwrap();
        let r = restricted_energy(&z, &a1, &a2).unwrap();
        let bound = (s1 as u128).pow(4) * (s2 as u128).pow(3);
        gate.check(format!("R bound trial {trial}: {r} <= {bound}"), r <= bound);
    }

    // the restricted energy agrees with an eight-tuple oracle at desk size
    let f7 = Universe::prime_field(7).unwrap();
    for trial in 0..5u64 {
        let s1 = rng.gen_range(1..=3usize);
        let s2 = rng.gen_range(s1..=3usize);
        let a1 = generate_family(f7, FamilyKind::RandomSubset { lo: 0, hi: 0 }, s1, trial).unwrap();
        let a2 = generate_family(f7, FamilyKind::RandomSubset { lo: 0, hi: 0 }, s2, 31 + trial)
            .unwrap();
        let z = FiniteSet::from_ints(f7, &[1, 2, 3, 4, 5, 6]).unwrap();
        let fast = restricted_energy(&z, &a1, &a2).unwrap();
        let slow = restricted_energy_eight_tuple_oracle(&z, &a1, &a2);
        gate.eq(&format!("R oracle trial {trial}"), fast, slow);
    }

    // Cauchy-Schwarz chains: the bisector-family weights and the
    // point-plane energy bound
    let m = Modulus::zq(3).unwrap();
    for trial in 0..5u64 {
        let mut rng2 = ChaCha8Rng::seed_from_u64(3000 + trial);
        let pts: Vec<Vec2> = (0..30).map(|_| random_point(m, &mut rng2)).collect();
        let stats = zqgeom::quadruple_stats(&pts).unwrap();
        gate.check(format!("bisector CS trial {trial}"), stats.cauchy_schwarz_holds);
        let fam = zqgeom::bisector_family(&pts).unwrap();
        let total: u64 = fam.lines.values().sum();
        gate.eq(&format!("weight mass trial {trial}"), total, fam.p_tilde);
    }
    let f11 = Universe::prime_field(11).unwrap();
    for vals in [vec![1i64, 2], vec![2, 3, 7], vec![1, 4, 5, 9]] {
        let a = FiniteSet::from_ints(f11, &vals).unwrap();
        let (_, _, doc) = energy_plane_config(&a).unwrap();
        let c = doc.checks.iter().find(|c| c.name.contains("E+(A)")).unwrap();
        gate.check(format!("plane energy bound for {vals:?}"), c.verdict);
    }
    gate.finish();
}

/// Independent oracle: count solutions of
/// z = (a1 + a2)/(a1' + a2') = (a3 + a4)/(a3' + a4') with z in Z by
/// enumerating all eight-tuples.
fn restricted_energy_eight_tuple_oracle(z: &FiniteSet, a1: &FiniteSet, a2: &FiniteSet) -> u128 {
    let p = match z.universe() {
        Universe::PrimeField(p) => p as i128,
        _ => unreachable!(),
    };
    let inv = |x: i128| -> Option<i128> {
        // Fermat inverse
        if x.rem_euclid(p) == 0 {
            return None;
        }
        let mut acc = 1i128;
        let mut base = x.rem_euclid(p);
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        Some(acc)
    };
    let vals = |s: &FiniteSet| -> Vec<i128> { s.to_ints().unwrap() };
    let (zs, x1, x2) = (vals(z), vals(a1), vals(a2));
    let zset: std::collections::HashSet<i128> = zs.iter().copied().collect();
    let mut count = 0u128;
    for &a in &x1 {
        for &ap in &x1 {
            for &b in &x2 {
                for &bp in &x2 {
                    let Some(i1) = inv(ap + bp) else { continue };
                    let z1 = (a + b).rem_euclid(p) * i1 % p;
                    if !zset.contains(&z1) {
                        continue;
                    }
                    for &c in &x1 {
                        for &cp in &x1 {
                            for &d in &x2 {
                                for &dp in &x2 {
                                    let Some(i2) = inv(cp + dp) else { continue };
                                    let z2 = (c + d).rem_euclid(p) * i2 % p;
                                    if z1 == z2 {
                                        count += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    count
}
