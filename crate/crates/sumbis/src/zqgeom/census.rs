//! The reflection census of Z_q^2 and everything built on it: the pair
//! count N(x, y) (ordered reflection pairs whose composition carries the
//! point pair x to y), its full distribution over y, bisector families
//! with multiplicities, and the exhaustive shared-bisector search.
//!
//! "Census" means the duplicate-free list of reflection maps whose fixed
//! line is non-isotropic; there is exactly one per non-isotropic line, so
//! the census has (p^3 - p^2) p^3 members. Reflection-shaped involutions
//! whose fixed line is isotropic exist too (the same number again); they
//! are counted and reported but excluded from the census, which is what
//! makes the N-distribution mass identity (sum of n * A(n) = census^2)
//! come out exactly.

use super::isometry::{from_matrix_translation, reflection_fixing_line, IsometryMap};
use super::{all_nonisotropic_lines, bisector, circle_size, GeomError, LineClass, Vec2, ZqLine};
use crate::ring::Modulus;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};

/// All reflection-shaped affine involutions v -> S v + t: S = [[a,b],[b,-a]]
/// with a^2 + b^2 = 1 and t ranging over the q-element image of I - S
/// (exactly the translations that admit a center). There are
/// (p^3 + p^2) p^3 of them.
pub fn reflection_involutions(m: Modulus) -> Result<Vec<IsometryMap>, GeomError> {
    m.require_zq()?;
    census_size_guard(m)?;
    let q = m.q();
    let mut out = Vec::new();
    for a in 0..q {
        let asq = m.mul_raw(a, a);
        for b in 0..q {
            if m.add_raw(asq, m.mul_raw(b, b)) != 1 {
                continue;
            }
            let s = [[a, b], [b, m.sub_raw(0, a)]];
            // image of I - S is generated by whichever column holds a unit
            let col1 = (m.sub_raw(1, a), m.sub_raw(0, b));
            let col2 = (m.sub_raw(0, b), m.add_raw(1, a));
            let g = if m.is_unit_raw(col1.0) || m.is_unit_raw(col1.1) { col1 } else { col2 };
            for c in 0..q {
                let t = [m.mul_raw(c, g.0), m.mul_raw(c, g.1)];
                out.push(from_matrix_translation(m, s, t));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// All affine maps v -> R v + t with a non-identity rotation-shaped
/// matrix, every translation part included, plus the identity. Maps whose
/// matrix has 1 - a divisible by p can have t outside the image of I - R:
/// they arise as segment transports but are rotations about no center, and
/// the exhaustive searches must still see them. Maps with R = I and t != 0
/// are translations, not rotations, and are excluded.
pub fn rotation_maps(m: Modulus) -> Result<Vec<IsometryMap>, GeomError> {
    m.require_zq()?;
    census_size_guard(m)?;
    let q = m.q();
    let identity = [[1, 0], [0, 1]];
    let mut out = vec![from_matrix_translation(m, identity, [0, 0])];
    for a in 0..q {
        let asq = m.mul_raw(a, a);
        for b in 0..q {
            if m.add_raw(asq, m.mul_raw(b, b)) != 1 {
                continue;
            }
            let r = [[a, m.sub_raw(0, b)], [b, a]];
            if r == identity {
                continue;
            }
            for t1 in 0..q {
                for t2 in 0..q {
                    out.push(from_matrix_translation(m, r, [t1, t2]));
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// The census: one reflection per non-isotropic line, ordered by line.
#[derive(Clone, Debug)]
pub struct ReflectionCensus {
    modulus: Modulus,
    reflections: Vec<IsometryMap>,
    lines: Vec<ZqLine>,
    line_index: HashMap<ZqLine, u32>,
    /// all reflection-shaped involutions, good or not: (p^3 + p^2) p^3
    pub involution_maps: u64,
    /// (matrix, center) presentations before deduplication: (p^3 + p^2) p^6
    pub candidate_pairs: u128,
    /// involutions whose fixed line is isotropic (excluded from the census)
    pub isotropic_fixing: u64,
}

impl ReflectionCensus {
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.reflections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reflections.is_empty()
    }

    pub fn reflections(&self) -> &[IsometryMap] {
        &self.reflections
    }

    pub fn fixed_lines(&self) -> &[ZqLine] {
        &self.lines
    }

    pub fn by_line(&self, l: &ZqLine) -> Option<&IsometryMap> {
        self.line_index.get(l).map(|&i| &self.reflections[i as usize])
    }
}

fn census_size_guard(m: Modulus) -> Result<(), GeomError> {
    // the census and involution lists are O(p^6) maps
    let members = (m.q() as u128) * (m.q() as u128);
    if members > 50_000_000 {
        return Err(GeomError::ResourceLimit(format!(
            "census for q = {} would hold on the order of {members} maps",
            m.q()
        )));
    }
    Ok(())
}

/// Build the census by constructing the unique fixing reflection of every
/// non-isotropic line.
pub fn reflection_census(m: Modulus) -> Result<ReflectionCensus, GeomError> {
    census_size_guard(m)?;
    let lines = all_nonisotropic_lines(m)?;
    let reflections: Vec<IsometryMap> = lines
        .par_iter()
        .map(|l| reflection_fixing_line(l).expect("non-isotropic line"))
        .collect();
    let line_index =
        lines.iter().enumerate().map(|(i, l)| (*l, i as u32)).collect::<HashMap<_, _>>();
    let p = m.p();
    let unit_circle = p * p * p + p * p;
    let q = m.q();
    let involution_maps = unit_circle * q;
    Ok(ReflectionCensus {
        modulus: m,
        isotropic_fixing: involution_maps - reflections.len() as u64,
        involution_maps,
        candidate_pairs: unit_circle as u128 * (q as u128) * (q as u128),
        reflections,
        lines,
        line_index,
    })
}

/// The number of census reflections carrying the point z1 to y1 and z2 to
/// y2 simultaneously, for z1 != z2 with |z1 - z2| a unit. The matrix is
/// forced by S (z1 - z2) = y1 - y2, which is uniquely solvable, so the
/// count is 0 or 1.
fn second_reflection_count(
    m: Modulus,
    z1: (u64, u64),
    z2: (u64, u64),
    y1: (u64, u64),
    y2: (u64, u64),
) -> u64 {
    let dz = (m.sub_raw(z1.0, z2.0), m.sub_raw(z1.1, z2.1));
    let dy = (m.sub_raw(y1.0, y2.0), m.sub_raw(y1.1, y2.1));
    let nrm = m.add_raw(m.mul_raw(dz.0, dz.0), m.mul_raw(dz.1, dz.1));
    let Ok(inv) = m.inv_raw(nrm) else { return 0 };
    // solve [[dz1, dz2], [-dz2, dz1]] (alpha, beta)^T = dy
    let alpha = m.mul_raw(
        m.sub_raw(m.mul_raw(dz.0, dy.0), m.mul_raw(dz.1, dy.1)),
        inv,
    );
    let beta = m.mul_raw(
        m.add_raw(m.mul_raw(dz.1, dy.0), m.mul_raw(dz.0, dy.1)),
        inv,
    );
    if m.add_raw(m.mul_raw(alpha, alpha), m.mul_raw(beta, beta)) != 1 {
        return 0;
    }
    // goodness: the fixed direction (beta, 1 - alpha) needs both units
    if !m.is_unit_raw(beta) || !m.is_unit_raw(m.sub_raw(1, alpha)) {
        return 0;
    }
    // t = y1 - S z1 must admit a center: (S + I) t = 0
    let s_z1 = (
        m.add_raw(m.mul_raw(alpha, z1.0), m.mul_raw(beta, z1.1)),
        m.sub_raw(m.mul_raw(beta, z1.0), m.mul_raw(alpha, z1.1)),
    );
    let t = (m.sub_raw(y1.0, s_z1.0), m.sub_raw(y1.1, s_z1.1));
    let chk1 = m.add_raw(m.mul_raw(m.add_raw(alpha, 1), t.0), m.mul_raw(beta, t.1));
    let chk2 = m.add_raw(m.mul_raw(beta, t.0), m.mul_raw(m.sub_raw(1, alpha), t.1));
    if chk1 != 0 || chk2 != 0 {
        return 0;
    }
    // the remaining point constraint S z2 + t = y2 holds by construction
    debug_assert_eq!(
        (
            m.add_raw(m.add_raw(m.mul_raw(alpha, z2.0), m.mul_raw(beta, z2.1)), t.0),
            m.add_raw(m.sub_raw(m.mul_raw(beta, z2.0), m.mul_raw(alpha, z2.1)), t.1),
        ),
        y2
    );
    1
}

/// N(x, y): the number of ordered census pairs (S1, S2) with
/// y_i = S2(S1(x_i)) for i = 1, 2.
///
/// For |x1 - x2| a unit this scans S1 and solves for S2 in O(|census|).
/// Degenerate inputs (x1 = x2 or non-unit distance) fall back to the full
/// O(|census|^2) double loop, which is refused beyond p = 3.
pub fn n_count(
    census: &ReflectionCensus,
    x: (&Vec2, &Vec2),
    y: (&Vec2, &Vec2),
) -> Result<u64, GeomError> {
    let m = census.modulus;
    // compositions preserve the norm of the difference
    if x.0.sub(x.1).norm() != y.0.sub(y.1).norm() {
        return Ok(0);
    }
    let (x1, x2) = (x.0.raw(), x.1.raw());
    let (y1, y2) = (y.0.raw(), y.1.raw());
    if x1 != x2 && x.0.sub(x.1).norm().is_unit() {
        let count = census
            .reflections
            .par_iter()
            .map(|s1| {
                let z1 = s1.apply_raw(x1);
                let z2 = s1.apply_raw(x2);
                second_reflection_count(m, z1, z2, y1, y2)
            })
            .sum();
        return Ok(count);
    }
    // degenerate slow path
    let n = census.reflections.len() as u128;
    if n * n > 1_000_000 {
        return Err(GeomError::ResourceLimit(format!(
            "degenerate N(x,y) needs {} compositions",
            n * n
        )));
    }
    let mut count = 0u64;
    for s1 in &census.reflections {
        let z1 = s1.apply_raw(x1);
        let z2 = s1.apply_raw(x2);
        for s2 in &census.reflections {
            if s2.apply_raw(z1) == y1 && s2.apply_raw(z2) == y2 {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// The full histogram A_x(n) = #{ y : N(x, y) = n } together with both
/// readings of the N = 0 complement (all of (Z_q^2)^2, and only pairs at
/// the same distance as x). Computed by factoring through compositions:
/// every ordered census pair contributes its composition M with
/// multiplicity, and y = (M x1, M x2).
#[derive(Clone, Debug)]
pub struct NDistribution {
    pub p: u64,
    pub q: u64,
    pub x: ((u64, u64), (u64, u64)),
    pub distance: u64,
    pub census_size: u64,
    /// n -> #{ y : N(x, y) = n } for n > 0
    pub histogram: BTreeMap<u64, u64>,
    pub distinct_y: u64,
    pub zero_within_distance_class: u64,
    pub zero_all_pairs: u128,
    /// sum of n * A_x(n); equals census_size^2
    pub mass_pairs: u128,
    /// at p = 3 the conjectured bin at n = p^3 - 3 p^2 collides with n = 0
    pub merged_zero_bin: bool,
    /// reflection-shaped involutions excluded from the census
    pub skipped_degenerate: u64,
}

impl NDistribution {
    pub fn to_json(&self) -> serde_json::Value {
        let hist: BTreeMap<String, u64> =
            self.histogram.iter().map(|(n, c)| (n.to_string(), *c)).collect();
        serde_json::json!({
            "p": self.p,
            "x": [[self.x.0 .0, self.x.0 .1], [self.x.1 .0, self.x.1 .1]],
            "A": hist,
            "census_size": self.census_size,
            "skipped_degenerate": self.skipped_degenerate,
            "distance": self.distance,
            "distinct_y": self.distinct_y,
            "zero_within_distance_class": self.zero_within_distance_class,
            "zero_all_pairs": self.zero_all_pairs.to_string(),
            "mass_pairs": self.mass_pairs.to_string(),
            "merged_zero_bin": self.merged_zero_bin,
        })
    }
}

pub fn n_distribution(
    census: &ReflectionCensus,
    x: (&Vec2, &Vec2),
    max_compositions: u128,
) -> Result<NDistribution, GeomError> {
    let m = census.modulus;
    let d = x.0.sub(x.1).norm();
    if !d.is_unit() {
        return Err(GeomError::PreconditionUnmet("|x1 - x2| must be a unit"));
    }
    let n = census.reflections.len() as u128;
    if n * n > max_compositions {
        return Err(GeomError::ResourceLimit(format!(
            "{} compositions exceed the budget {max_compositions}",
            n * n
        )));
    }

    // multiplicity of each distinct composition
    let mut multiplicity: HashMap<([[u64; 2]; 2], (u64, u64)), u64> = HashMap::new();
    for s1 in &census.reflections {
        for s2 in &census.reflections {
            let c = super::isometry::compose(s2, s1);
            *multiplicity.entry((c.matrix(), c.translation_part())).or_insert(0) += 1;
        }
    }

    // push forward to y = (M x1 + t, M x2 + t)
    let (x1, x2) = (x.0.raw(), x.1.raw());
    let mut by_y: HashMap<((u64, u64), (u64, u64)), u64> = HashMap::new();
    for ((mat, t), f) in &multiplicity {
        let ap = |v: (u64, u64)| {
            (
                m.add_raw(m.add_raw(m.mul_raw(mat[0][0], v.0), m.mul_raw(mat[0][1], v.1)), t.0),
                m.add_raw(m.add_raw(m.mul_raw(mat[1][0], v.0), m.mul_raw(mat[1][1], v.1)), t.1),
            )
        };
        *by_y.entry((ap(x1), ap(x2))).or_insert(0) += f;
    }

    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut mass = 0u128;
    for &cnt in by_y.values() {
        *histogram.entry(cnt).or_insert(0) += 1;
        mass += cnt as u128;
    }
    let distinct_y = by_y.len() as u64;
    let q = m.q();
    let class_size = (q as u128) * (q as u128) * circle_size(d)? as u128;
    let all_pairs = (q as u128).pow(4);
    let p = m.p();
    Ok(NDistribution {
        p,
        q,
        x: (x1, x2),
        distance: d.value(),
        census_size: census.len() as u64,
        histogram,
        distinct_y,
        zero_within_distance_class: (class_size - distinct_y as u128) as u64,
        zero_all_pairs: all_pairs - distinct_y as u128,
        mass_pairs: mass,
        merged_zero_bin: p == 3,
        skipped_degenerate: census.isotropic_fixing,
    })
}

/// The deduplicated bisector family of a point set with multiplicities:
/// w(l) counts ordered pairs (x, y), x != y, whose difference has two unit
/// coordinates and whose bisector is l. Pairs outside that family are
/// tallied in `skipped_pairs`.
#[derive(Clone, Debug)]
pub struct BisectorFamily {
    pub lines: BTreeMap<ZqLine, u64>,
    pub p_tilde: u64,
    pub skipped_pairs: u64,
}

impl BisectorFamily {
    pub fn weight_square_sum(&self) -> u128 {
        self.lines.values().map(|&w| (w as u128) * (w as u128)).sum()
    }
}

pub fn bisector_family(points: &[Vec2]) -> Result<BisectorFamily, GeomError> {
    let mut lines: BTreeMap<ZqLine, u64> = BTreeMap::new();
    let mut p_tilde = 0u64;
    let mut skipped = 0u64;
    for (i, x) in points.iter().enumerate() {
        for (j, y) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            if x.sub(y).both_units() {
                let l = bisector(x, y)?;
                debug_assert_eq!(l.classify(), LineClass::NonIsotropic);
                *lines.entry(l).or_insert(0) += 1;
                p_tilde += 1;
            } else {
                skipped += 1;
            }
        }
    }
    Ok(BisectorFamily { lines, p_tilde, skipped_pairs: skipped })
}

/// Cardinalities of the pair and quadruple families of a point set:
/// the unit-difference pairs, their split by distance, the quadruples
/// sharing a non-isotropic bisector (crosswise, per distance and total),
/// and the Cauchy-Schwarz comparison of the bisector-family weights.
#[derive(Clone, Debug)]
pub struct QuadrupleStats {
    pub p_tilde: u64,
    pub pi_d: BTreeMap<u64, u64>,
    pub q_d: BTreeMap<u64, u64>,
    pub q_total: u128,
    pub family: BisectorFamily,
    pub weight_square_sum: u128,
    /// |P~|^2 <= |B(P)| * sum of w^2
    pub cauchy_schwarz_holds: bool,
}

pub fn quadruple_stats(points: &[Vec2]) -> Result<QuadrupleStats, GeomError> {
    let family = bisector_family(points)?;

    // ordered unit-difference pairs grouped by distance
    let mut by_distance: BTreeMap<u64, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, x) in points.iter().enumerate() {
        for (j, y) in points.iter().enumerate() {
            if i != j && x.sub(y).both_units() {
                let d = x.sub(y).norm();
                debug_assert!(d.is_unit());
                by_distance.entry(d.value()).or_default().push((i, j));
            }
        }
    }

    let mut pi_d = BTreeMap::new();
    let mut q_d = BTreeMap::new();
    let mut q_total = 0u128;
    for (&d, pairs) in &by_distance {
        pi_d.insert(d, pairs.len() as u64);
        // quadruples (x, y, z, w): (x, y) and (z, w) in Pi'_d with
        // B(x, z) = B(y, w) non-isotropic
        let count: u64 = pairs
            .par_iter()
            .map(|&(xi, yi)| {
                let mut local = 0u64;
                for &(zi, wi) in pairs {
                    let Ok(b1) = bisector(&points[xi], &points[zi]) else { continue };
                    if b1.classify() != LineClass::NonIsotropic {
                        continue;
                    }
                    let Ok(b2) = bisector(&points[yi], &points[wi]) else { continue };
                    if b1 == b2 {
                        local += 1;
                    }
                }
                local
            })
            .sum();
        q_d.insert(d, count);
        q_total += count as u128;
    }

    let w_sq = family.weight_square_sum();
    let lhs = (family.p_tilde as u128) * (family.p_tilde as u128);
    let rhs = family.lines.len() as u128 * w_sq;
    Ok(QuadrupleStats {
        p_tilde: family.p_tilde,
        pi_d,
        q_d,
        q_total,
        weight_square_sum: w_sq,
        cauchy_schwarz_holds: lhs <= rhs,
        family,
    })
}

/// Exhaustive search over every quadruple (x, z), (y, w) of unit-difference
/// pairs sharing a (necessarily non-isotropic) bisector, verifying
/// |x - y| = |z - w| on each. Feasible at p = 3, where there are 486 lines
/// with 486 ordered pairs each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaSearch {
    pub lines: u64,
    pub pairs_per_line_min: u64,
    pub pairs_per_line_max: u64,
    pub quadruples_checked: u128,
    pub counterexamples: u64,
}

pub fn bisector_distance_lemma_search(
    m: Modulus,
    max_quadruples: u128,
) -> Result<LemmaSearch, GeomError> {
    m.require_zq()?;
    let q = m.q();
    let units = m.units();
    let pair_count = (q * q) as u128 * (units.len() as u128) * (units.len() as u128);

    let mut classes: HashMap<ZqLine, Vec<(u32, u32)>> = HashMap::new();
    for x1 in 0..q {
        for x2 in 0..q {
            let x = Vec2::from_ints(m, x1 as i64, x2 as i64);
            for &d1 in &units {
                for &d2 in &units {
                    let y = Vec2::from_ints(
                        m,
                        m.add_raw(x1, d1) as i64,
                        m.add_raw(x2, d2) as i64,
                    );
                    let l = bisector(&x, &y).expect("unit differences");
                    classes
                        .entry(l)
                        .or_default()
                        .push(((x1 * q + x2) as u32, ((y.raw().0) * q + y.raw().1) as u32));
                }
            }
        }
    }
    debug_assert_eq!(
        classes.values().map(|v| v.len() as u128).sum::<u128>(),
        pair_count
    );
    let quadruples: u128 = classes.values().map(|v| (v.len() as u128) * (v.len() as u128)).sum();
    if quadruples > max_quadruples {
        return Err(GeomError::ResourceLimit(format!(
            "{quadruples} quadruples exceed the budget {max_quadruples}"
        )));
    }

    let norm_between = |a: u32, b: u32| -> u64 {
        let (a1, a2) = ((a / q as u32) as u64, (a % q as u32) as u64);
        let (b1, b2) = ((b / q as u32) as u64, (b % q as u32) as u64);
        let d1 = m.sub_raw(a1, b1);
        let d2 = m.sub_raw(a2, b2);
        m.add_raw(m.mul_raw(d1, d1), m.mul_raw(d2, d2))
    };

    let counterexamples: u64 = classes
        .par_iter()
        .map(|(_, pairs)| {
            let mut bad = 0u64;
            for &(x, z) in pairs {
                for &(y, w) in pairs {
                    if norm_between(x, y) != norm_between(z, w) {
                        bad += 1;
                    }
                }
            }
            bad
        })
        .sum();

    let sizes: Vec<u64> = classes.values().map(|v| v.len() as u64).collect();
    Ok(LemmaSearch {
        lines: classes.len() as u64,
        pairs_per_line_min: sizes.iter().copied().min().unwrap_or(0),
        pairs_per_line_max: sizes.iter().copied().max().unwrap_or(0),
        quadruples_checked: quadruples,
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zqgeom::isometry::{compose, IsometryKind};

    fn m3() -> Modulus {
        Modulus::zq(3).unwrap()
    }

    #[test]
    fn involution_and_census_counts() {
        let m = m3();
        let invs = reflection_involutions(m).unwrap();
        assert_eq!(invs.len(), 972); // (p^3 + p^2) p^3

        let census = reflection_census(m).unwrap();
        assert_eq!(census.len(), 486); // p^6 - p^5
        assert_eq!(census.involution_maps, 972);
        assert_eq!(census.candidate_pairs, 36 * 729);
        assert_eq!(census.isotropic_fixing, 486);

        // the census is exactly the involutions with non-isotropic fixed line
        let good: Vec<&IsometryMap> = invs
            .iter()
            .filter(|s| {
                s.fixed_line().map(|l| l.classify() == LineClass::NonIsotropic).unwrap_or(false)
            })
            .collect();
        assert_eq!(good.len(), census.len());
        let mut from_census: Vec<IsometryMap> = census.reflections().to_vec();
        from_census.sort_unstable();
        let mut from_invs: Vec<IsometryMap> = good.into_iter().copied().collect();
        from_invs.sort_unstable();
        assert_eq!(from_census, from_invs);
    }

    #[test]
    fn census_members_are_involutions_fixing_their_line() {
        let m = m3();
        let census = reflection_census(m).unwrap();
        for (s, l) in census.reflections().iter().zip(census.fixed_lines()) {
            assert_eq!(s.kind(), IsometryKind::Reflection);
            assert!(compose(s, s).is_identity());
            assert_eq!(s.fixed_line().unwrap(), *l);
            // fixes its line pointwise
            for v in l.points().iter().take(5) {
                assert_eq!(s.apply(v), *v);
            }
        }
    }

    #[test]
    fn each_nonisotropic_line_has_exactly_one_fixing_involution() {
        let m = m3();
        let invs = reflection_involutions(m).unwrap();
        let mut fixed: HashMap<ZqLine, u64> = HashMap::new();
        for s in &invs {
            *fixed.entry(s.fixed_line().unwrap()).or_insert(0) += 1;
        }
        for l in all_nonisotropic_lines(m).unwrap() {
            assert_eq!(fixed.get(&l).copied(), Some(1), "line {:?}", l.coefficients());
        }
    }

    #[test]
    fn n_count_examples() {
        let m = m3();
        let census = reflection_census(m).unwrap();
        let x1 = Vec2::from_ints(m, 0, 0);
        let x2 = Vec2::from_ints(m, 1, 0);

        // N(x, x) counts the pairs composing to a pair-fixing map
        assert_eq!(n_count(&census, (&x1, &x2), (&x1, &x2)).unwrap(), 486);

        // norm mismatch: always zero
        let y2 = Vec2::from_ints(m, 2, 2);
        assert_eq!(n_count(&census, (&x1, &x2), (&x1, &y2)).unwrap(), 0);

        // fast path agrees with the census double loop on a sample
        let s1 = &census.reflections()[17];
        let s2 = &census.reflections()[401];
        let c = compose(s2, s1);
        let y = (c.apply(&x1), c.apply(&x2));
        let fast = n_count(&census, (&x1, &x2), (&y.0, &y.1)).unwrap();
        let mut slow = 0u64;
        for a in census.reflections() {
            let z1 = a.apply(&x1);
            let z2 = a.apply(&x2);
            for b in census.reflections() {
                if b.apply(&z1) == y.0 && b.apply(&z2) == y.1 {
                    slow += 1;
                }
            }
        }
        assert_eq!(fast, slow);
        assert!(fast > 0);
    }

    #[test]
    fn bisector_family_examples() {
        let m = m3();
        let single = [Vec2::from_ints(m, 5, 5)];
        let fam = bisector_family(&single).unwrap();
        assert_eq!((fam.lines.len(), fam.p_tilde, fam.skipped_pairs), (0, 0, 0));

        let two = [Vec2::from_ints(m, 0, 0), Vec2::from_ints(m, 1, 1)];
        let fam = bisector_family(&two).unwrap();
        assert_eq!(fam.lines.len(), 1);
        assert_eq!(fam.p_tilde, 2);
        assert_eq!(fam.lines.values().copied().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn quadruple_stats_small() {
        let m = m3();
        let pts = [Vec2::from_ints(m, 0, 0), Vec2::from_ints(m, 1, 1)];
        let stats = quadruple_stats(&pts).unwrap();
        assert_eq!(stats.p_tilde, 2);
        // both ordered pairs have distance |(-1,-1)| = 2
        assert_eq!(stats.pi_d.get(&2).copied(), Some(2));
        assert!(stats.cauchy_schwarz_holds);
        // quadruple ((x,y),(y,x)): B(x,y) = B(y,x) non-isotropic, so both
        // cross pairings with distinct points count
        assert_eq!(stats.q_total, 2);
    }

    #[test]
    fn lemma_search_tiny_budget_rejected() {
        let m = m3();
        assert!(matches!(
            bisector_distance_lemma_search(m, 10),
            Err(GeomError::ResourceLimit(_))
        ));
    }
}
