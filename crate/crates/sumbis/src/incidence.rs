//! Exact incidence counting: point-line incidences over the rational or
//! prime-field plane, rich-line extraction, collinear-triple counts, and the
//! classical sum-product experiment constructions (grid-times-grid point
//! sets, slope-line families, point-plane configurations in 3-space).
//!
//! All counts are exact; coordinates are rationals or canonical residues and
//! no floating point is involved anywhere.

use crate::report::{json_uint, ReportDocument};
use crate::setalg::{
    self, all_positive, dyadic_popular, energy, rep_counts, FiniteSet, Rat, SetError, SetOp,
    Universe, Weight,
};
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use std::collections::{BTreeSet, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IncidenceError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("universe mismatch: {0} vs {1}")]
    UniverseMismatch(String, String),
    #[error("set must contain only positive elements")]
    NonPositiveElement,
    #[error("set must not contain zero")]
    ZeroElement,
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("tuple budget exceeded ({0} tuples needed)")]
    ResourceLimit(u128),
    #[error("line through the given points is not representable in this universe")]
    UnrepresentableLine,
}

/// A line in canonical coefficient form `a x + b y = c`.
///
/// Over the integers/rationals the triple is primitive integer with the
/// first nonzero of (a, b) positive; over F_p the first nonzero of (a, b)
/// is 1; over a ring the first unit of (a, b) is 1. Equality of canonical
/// triples is equality of solution sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    universe: Universe,
    a: Rat,
    b: Rat,
    c: Rat,
}

impl Line {
    fn canonicalize(universe: Universe, a: Rat, b: Rat, c: Rat) -> Option<Line> {
        match universe {
            Universe::Integers => {
                // clear denominators, divide by gcd, fix sign
                let lcm = a.denom().lcm(b.denom()).lcm(c.denom());
                let (mut ai, mut bi, mut ci) =
                    ((a * lcm).to_integer(), (b * lcm).to_integer(), (c * lcm).to_integer());
                if ai == 0 && bi == 0 {
                    return None;
                }
                let g = ai.gcd(&bi).gcd(&ci);
                ai /= g;
                bi /= g;
                ci /= g;
                let lead = if ai != 0 { ai } else { bi };
                if lead < 0 {
                    ai = -ai;
                    bi = -bi;
                    ci = -ci;
                }
                Some(Line {
                    universe,
                    a: Rat::from_integer(ai),
                    b: Rat::from_integer(bi),
                    c: Rat::from_integer(ci),
                })
            }
            Universe::PrimeField(p) => {
                let m = p as i128;
                let (ai, bi, ci) = (*a.numer() % m, *b.numer() % m, *c.numer() % m);
                let lead = if ai != 0 { ai } else { bi };
                if lead == 0 {
                    return None;
                }
                let inv = inverse_mod(lead, m)?;
                let f = |v: i128| Rat::from_integer(((v * inv) % m + m) % m);
                Some(Line { universe, a: f(ai), b: f(bi), c: f(ci) })
            }
            Universe::Ring(md) => {
                let m = md.q() as i128;
                let (ai, bi, ci) = (*a.numer() % m, *b.numer() % m, *c.numer() % m);
                let lead = if md.is_unit_raw(((ai % m + m) % m) as u64) {
                    ai
                } else if md.is_unit_raw(((bi % m + m) % m) as u64) {
                    bi
                } else {
                    return None;
                };
                let inv = md.inv_raw(((lead % m + m) % m) as u64).ok()? as i128;
                let f = |v: i128| Rat::from_integer(((v * inv) % m + m) % m);
                Some(Line { universe, a: f(ai), b: f(bi), c: f(ci) })
            }
        }
    }

    pub fn from_slope_intercept(universe: Universe, m: Rat, b: Rat) -> Option<Line> {
        Line::canonicalize(universe, -m, Rat::from_integer(1), b)
    }

    pub fn vertical(universe: Universe, c: Rat) -> Option<Line> {
        Line::canonicalize(universe, Rat::from_integer(1), Rat::zero(), c)
    }

    /// The line through two distinct points, when representable.
    pub fn through(universe: Universe, p: (Rat, Rat), q: (Rat, Rat)) -> Option<Line> {
        if p == q {
            return None;
        }
        let a = q.1 - p.1;
        let b = p.0 - q.0;
        let c = a * p.0 + b * p.1;
        Line::canonicalize(universe, a, b, c)
    }

    pub fn contains(&self, x: Rat, y: Rat) -> bool {
        // canonical coefficients are integers except over Q with rational
        // input; keep the all-integer case free of rational reductions
        if x.is_integer()
            && y.is_integer()
            && self.a.is_integer()
            && self.b.is_integer()
            && self.c.is_integer()
        {
            let v = self.a.numer() * x.numer() + self.b.numer() * y.numer() - self.c.numer();
            return match self.universe {
                Universe::Integers => v == 0,
                Universe::PrimeField(p) => v % (p as i128) == 0,
                Universe::Ring(m) => v % (m.q() as i128) == 0,
            };
        }
        let v = self.a * x + self.b * y - self.c;
        match self.universe {
            Universe::Integers => v.is_zero(),
            Universe::PrimeField(p) => v.is_integer() && v.numer() % (p as i128) == 0,
            Universe::Ring(m) => v.is_integer() && v.numer() % (m.q() as i128) == 0,
        }
    }

    /// (slope, intercept) when the line is a function graph y = m x + y0.
    pub fn slope_intercept(&self) -> Option<(Rat, Rat)> {
        let u = self.universe;
        if let Universe::Integers = u {
            if self.b.is_zero() {
                return None;
            }
            return Some((-self.a / self.b, self.c / self.b));
        }
        // modular: b must be invertible; canonical forms have b in {0, 1}
        // after normalization only when a leads, otherwise b = 1
        if self.b.is_zero() {
            return None;
        }
        let inv = match u {
            Universe::PrimeField(p) => inverse_mod(*self.b.numer(), p as i128)?,
            Universe::Ring(m) => m.inv_raw(*self.b.numer() as u64).ok()? as i128,
            Universe::Integers => unreachable!(),
        };
        let md = u.modulus_value().unwrap() as i128;
        let f = |v: i128| Rat::from_integer(((v * inv) % md + md) % md);
        Some((f((-self.a.numer()).rem_euclid(md)), f(*self.c.numer())))
    }

    /// x0 for a vertical line x = x0.
    pub fn vertical_offset(&self) -> Option<Rat> {
        if !self.b.is_zero() {
            return None;
        }
        match self.universe {
            Universe::Integers => Some(self.c / self.a),
            _ => Some(self.c), // canonical a = 1
        }
    }

    pub fn coefficients(&self) -> (Rat, Rat, Rat) {
        (self.a, self.b, self.c)
    }
}

fn inverse_mod(a: i128, m: i128) -> Option<i128> {
    let a = ((a % m) + m) % m;
    if a == 0 {
        return None;
    }
    let (mut t, mut t1) = (0i128, 1i128);
    let (mut r, mut r1) = (m, a);
    while r1 != 0 {
        let q = r / r1;
        (t, t1) = (t1, t - q * t1);
        (r, r1) = (r1, r - q * r1);
    }
    if r != 1 {
        None
    } else {
        Some(((t % m) + m) % m)
    }
}

/// A duplicate-free planar point configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    universe: Universe,
    pts: Vec<(Rat, Rat)>,
}

impl PointSet {
    pub fn new(universe: Universe, pts: impl IntoIterator<Item = (Rat, Rat)>) -> Self {
        let mut v: Vec<(Rat, Rat)> = pts.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        PointSet { universe, pts: v }
    }

    pub fn from_ints(universe: Universe, pts: &[(i64, i64)]) -> Self {
        PointSet::new(
            universe,
            pts.iter().map(|&(x, y)| (Rat::from_integer(x as i128), Rat::from_integer(y as i128))),
        )
    }

    /// Cartesian product A x B.
    pub fn grid(a: &FiniteSet, b: &FiniteSet) -> Result<Self, IncidenceError> {
        if a.universe() != b.universe() {
            return Err(IncidenceError::UniverseMismatch(
                a.universe().tag(),
                b.universe().tag(),
            ));
        }
        let mut pts = Vec::with_capacity(a.len() * b.len());
        for &x in a.elems() {
            for &y in b.elems() {
                pts.push((x, y));
            }
        }
        Ok(PointSet::new(a.universe(), pts))
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn points(&self) -> &[(Rat, Rat)] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn index(&self) -> HashSet<(Rat, Rat)> {
        self.pts.iter().copied().collect()
    }
}

/// Exact point-line incidence count; duplicate lines count per occurrence.
pub fn incidences(points: &PointSet, lines: &[Line]) -> Result<u128, IncidenceError> {
    for l in lines {
        if l.universe != points.universe {
            return Err(IncidenceError::UniverseMismatch(
                points.universe.tag(),
                l.universe.tag(),
            ));
        }
    }
    Ok(lines
        .par_iter()
        .map(|l| points.pts.iter().filter(|(x, y)| l.contains(*x, *y)).count() as u128)
        .sum())
}

/// Every line spanned by at least two points of P that carries at least k
/// points, with its exact point count. k >= 2. Point pairs that span no
/// representable line (possible over a ring) are ignored.
pub fn rich_lines(points: &PointSet, k: u64) -> Result<Vec<(Line, u64)>, IncidenceError> {
    if k < 2 {
        return Err(IncidenceError::ParamOutOfRange("rich_lines needs k >= 2".into()));
    }
    let mut span: HashMap<Line, BTreeSet<usize>> = HashMap::new();
    for i in 0..points.pts.len() {
        for j in (i + 1)..points.pts.len() {
            if let Some(l) = Line::through(points.universe, points.pts[i], points.pts[j]) {
                let e = span.entry(l).or_default();
                e.insert(i);
                e.insert(j);
            }
        }
    }
    let mut out: Vec<(Line, u64)> = span
        .into_iter()
        .filter(|(_, members)| members.len() as u64 >= k)
        .map(|(l, members)| (l, members.len() as u64))
        .collect();
    out.sort_unstable_by(|(l1, _), (l2, _)| l1.cmp(l2));
    Ok(out)
}

/// The grid-times-grid construction: points (A+A) x (A*A) and the |A|^2
/// lines y = a1 (x - a2), each guaranteed to carry at least |A| points.
#[derive(Clone, Debug)]
pub struct ElekesConfig {
    pub points: PointSet,
    pub lines: Vec<Line>,
    pub raw_line_count: u64,
    pub distinct_line_count: u64,
    pub min_line_richness: u64,
    pub incidences: u128,
}

pub fn elekes_config(a: &FiniteSet) -> Result<ElekesConfig, IncidenceError> {
    if a.len() < 2 {
        return Err(IncidenceError::ParamOutOfRange("elekes_config needs |A| >= 2".into()));
    }
    let u = a.universe();
    let sum = setalg::combine(a, a, SetOp::Sum)?;
    let prod = setalg::combine(a, a, SetOp::Product)?;
    let points = PointSet::grid(&sum, &prod)?;
    let pt_index = points.index();

    let mut lines = Vec::with_capacity(a.len() * a.len());
    for &a1 in a.elems() {
        for &a2 in a.elems() {
            // y = a1 (x - a2)
            let l = Line::from_slope_intercept(u, a1, canon_mul(u, -a1, a2))
                .ok_or(IncidenceError::UnrepresentableLine)?;
            lines.push(l);
        }
    }
    let raw = lines.len() as u64;
    let distinct = lines.iter().collect::<HashSet<_>>().len() as u64;

    // exact per-line point count: every point of the line inside the grid
    // has x-coordinate in A+A
    let counts: Vec<u64> = lines
        .par_iter()
        .map(|l| {
            let (m, y0) = l.slope_intercept().expect("slope lines by construction");
            sum.elems()
                .iter()
                .filter(|&&x| {
                    let y = canon_add(u, canon_mul(u, m, x), y0);
                    pt_index.contains(&(x, y))
                })
                .count() as u64
        })
        .collect();
    let min_rich = counts.iter().copied().min().unwrap_or(0);
    let total: u128 = counts.iter().map(|&c| c as u128).sum();

    Ok(ElekesConfig {
        points,
        lines,
        raw_line_count: raw,
        distinct_line_count: distinct,
        min_line_richness: min_rich,
        incidences: total,
    })
}

fn canon_mul(u: Universe, a: Rat, b: Rat) -> Rat {
    match u.modulus_value() {
        None => a * b,
        Some(m) => {
            let m = m as i128;
            Rat::from_integer((((a * b).numer() % m) + m) % m)
        }
    }
}

fn canon_add(u: Universe, a: Rat, b: Rat) -> Rat {
    match u.modulus_value() {
        None => a + b,
        Some(m) => {
            let m = m as i128;
            Rat::from_integer((((a + b).numer() % m) + m) % m)
        }
    }
}

/// The slope-family statistics behind the multiplicative-energy versus
/// doubled-sumset argument: the popular dyadic ratio class, the vector-sum
/// sets between consecutive slope lines, and the two chain inequalities
/// E^x(A)/ceil(log2 |A|) <= n 2^i0 and n 2^i0 <= |A+A|^2, recorded
/// pass/fail. The class is selected by linear mass.
pub fn solymosi_stats(a: &FiniteSet) -> Result<ReportDocument, IncidenceError> {
    if a.universe() != Universe::Integers {
        return Err(IncidenceError::UniverseMismatch(
            a.universe().tag(),
            Universe::Integers.tag(),
        ));
    }
    if !all_positive(a) {
        return Err(IncidenceError::NonPositiveElement);
    }
    if a.len() < 2 {
        return Err(IncidenceError::ParamOutOfRange("solymosi_stats needs |A| >= 2".into()));
    }
    let started = std::time::Instant::now();
    let mut doc = ReportDocument::new(
        "solymosi_stats",
        serde_json::json!({"universe": "Z", "size": a.len()}),
    );

    let ratios = rep_counts(a, a, SetOp::Ratio)?;
    let e_times: u128 = ratios.counts.values().map(|&c| (c as u128) * (c as u128)).sum();
    let class = dyadic_popular(&ratios, Weight::Linear)?;
    let n = class.members.len() as u128;
    let two_i0 = 1u128 << class.index;
    let sumset = setalg::combine(a, a, SetOp::Sum)?;
    let aa2 = (sumset.len() as u128) * (sumset.len() as u128);
    let log2 = 64 - ((a.len() as u64 - 1).leading_zeros() as u128).min(63);
    let log2 = (log2 as u32).max(1) as u128;

    // points of A x A on each slope line y = s x, slopes ascending; the
    // closing line is vertical at the least element of A
    let grid: Vec<(Rat, Rat)> = a
        .elems()
        .iter()
        .flat_map(|&x| a.elems().iter().map(move |&y| (x, y)))
        .collect();
    let mut line_pts: Vec<Vec<(Rat, Rat)>> = Vec::with_capacity(class.members.len() + 1);
    for &s in &class.members {
        line_pts.push(grid.iter().copied().filter(|(x, y)| *y == s * *x).collect());
    }
    let a_min = a.elems()[0];
    line_pts.push(grid.iter().copied().filter(|(x, _)| *x == a_min).collect());

    let mut union: BTreeSet<(Rat, Rat)> = BTreeSet::new();
    let mut sum_sizes = 0u128;
    let mut sizes = Vec::new();
    for w in line_pts.windows(2) {
        let mut p_i: BTreeSet<(Rat, Rat)> = BTreeSet::new();
        for &(x1, y1) in &w[0] {
            for &(x2, y2) in &w[1] {
                p_i.insert((x1 + x2, y1 + y2));
            }
        }
        sum_sizes += p_i.len() as u128;
        sizes.push(p_i.len() as u64);
        union.extend(p_i);
    }
    let disjoint = union.len() as u128 == sum_sizes;

    doc.uint("energy_times", e_times);
    doc.uint("log2_ceil", log2);
    doc.uint("class_index", class.index as u128);
    doc.uint("class_size", n);
    doc.uint("class_mass_linear", class.mass);
    doc.uint("n_times_2_i0", n * two_i0);
    doc.uint("sumset", sumset.len() as u128);
    doc.uint("vector_sum_total", sum_sizes);
    doc.uint("vector_sum_union", union.len() as u128);
    doc.quantity("vector_sums_disjoint", serde_json::Value::from(disjoint));
    doc.quantity(
        "p_i_sizes",
        serde_json::Value::from(sizes.iter().map(|&s| s as u64).collect::<Vec<_>>()),
    );

    // E^x / ceil(log2 |A|) <= n 2^i0, compared without division
    doc.check_u(
        "E_times/log2_ceil <= n*2^i0",
        e_times,
        n * two_i0 * log2,
        e_times <= n * two_i0 * log2,
    );
    doc.check_u("n*2^i0 <= |A+A|^2", n * two_i0, aa2, n * two_i0 <= aa2);
    doc.finish(started);
    Ok(doc)
}

/// Collinear-triple count over grids A1^2 x A2^2 x A3^2: the number of
/// coordinate tuples with (b1-a1)(c2-a2) = (c1-a1)(b2-a2). With
/// `distinct_only` the three points must also be pairwise distinct.
/// Counted by hashing direction classes around each anchor point.
pub fn collinear_t(
    a1: &FiniteSet,
    a2: &FiniteSet,
    a3: &FiniteSet,
    distinct_only: bool,
) -> Result<u128, IncidenceError> {
    let modulus = check_t_universe(a1, a2, a3)?;
    let p1 = square_points(a1)?;
    let p2 = square_points(a2)?;
    let p3 = square_points(a3)?;
    let set2: HashSet<(i128, i128)> = p2.iter().copied().collect();
    let set3: HashSet<(i128, i128)> = p3.iter().copied().collect();

    let total: u128 = p1
        .par_iter()
        .map(|&anchor| {
            let mut dirs2: HashMap<(i128, i128), u64> = HashMap::new();
            let mut dirs3: HashMap<(i128, i128), u64> = HashMap::new();
            for &q in &p2 {
                if q != anchor {
                    *dirs2.entry(direction(modulus, anchor, q)).or_insert(0) += 1;
                }
            }
            for &q in &p3 {
                if q != anchor {
                    *dirs3.entry(direction(modulus, anchor, q)).or_insert(0) += 1;
                }
            }
            let parallel: u128 = dirs2
                .iter()
                .map(|(d, &c2)| c2 as u128 * dirs3.get(d).map_or(0, |&c3| c3 as u128))
                .sum();
            if distinct_only {
                // subtract coincident pairs b = c (same point in both grids)
                let shared =
                    set2.intersection(&set3).filter(|&&q| q != anchor).count() as u128;
                parallel - shared
            } else {
                let in2 = set2.contains(&anchor) as u128;
                let in3 = set3.contains(&anchor) as u128;
                parallel + in2 * p3.len() as u128 + in3 * p2.len() as u128 - in2 * in3
            }
        })
        .sum();
    Ok(total)
}

/// The six-nested-loop oracle for [`collinear_t`]; kept deliberately naive.
pub fn collinear_t_oracle(
    a1: &FiniteSet,
    a2: &FiniteSet,
    a3: &FiniteSet,
    distinct_only: bool,
) -> Result<u128, IncidenceError> {
    let modulus = check_t_universe(a1, a2, a3)?;
    let (v1, v2, v3) = (a1.to_ints()?, a2.to_ints()?, a3.to_ints()?);
    let mut count = 0u128;
    for &x1 in &v1 {
        for &x2 in &v1 {
            for &y1 in &v2 {
                for &y2 in &v2 {
                    for &z1 in &v3 {
                        for &z2 in &v3 {
                            if !det_zero(modulus, (x1, x2), (y1, y2), (z1, z2)) {
                                continue;
                            }
                            if distinct_only
                                && ((x1, x2) == (y1, y2)
                                    || (x1, x2) == (z1, z2)
                                    || (y1, y2) == (z1, z2))
                            {
                                continue;
                            }
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(count)
}

/// Counts of degenerate solutions by first-coordinate coincidence:
/// tuples with determinant zero and a1 = b1, a1 = c1, b1 = c1 respectively
/// (overlapping cases counted in each).
pub fn collinear_degenerate_subcases(
    a1: &FiniteSet,
    a2: &FiniteSet,
    a3: &FiniteSet,
) -> Result<(u128, u128, u128), IncidenceError> {
    let modulus = check_t_universe(a1, a2, a3)?;
    let (v1, v2, v3) = (a1.to_ints()?, a2.to_ints()?, a3.to_ints()?);
    let (mut s_ab, mut s_ac, mut s_bc) = (0u128, 0u128, 0u128);
    for &x1 in &v1 {
        for &x2 in &v1 {
            for &y1 in &v2 {
                for &y2 in &v2 {
                    for &z1 in &v3 {
                        for &z2 in &v3 {
                            if !det_zero(modulus, (x1, x2), (y1, y2), (z1, z2)) {
                                continue;
                            }
                            if x1 == y1 {
                                s_ab += 1;
                            }
                            if x1 == z1 {
                                s_ac += 1;
                            }
                            if y1 == z1 {
                                s_bc += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((s_ab, s_ac, s_bc))
}

/// Shared-universe guard; returns the modulus (None over Z). Triple counts
/// work with plain integer coordinates, so ring universes are rejected and
/// rational members are not expected.
fn check_t_universe(
    a1: &FiniteSet,
    a2: &FiniteSet,
    a3: &FiniteSet,
) -> Result<Option<i128>, IncidenceError> {
    if a1.universe() != a2.universe() || a1.universe() != a3.universe() {
        return Err(IncidenceError::UniverseMismatch(a1.universe().tag(), a3.universe().tag()));
    }
    match a1.universe() {
        Universe::Ring(_) => {
            Err(IncidenceError::UniverseMismatch(a1.universe().tag(), "Z or Fp".into()))
        }
        Universe::Integers => Ok(None),
        Universe::PrimeField(p) => Ok(Some(p as i128)),
    }
}

fn square_points(a: &FiniteSet) -> Result<Vec<(i128, i128)>, IncidenceError> {
    let vals = a.to_ints()?;
    Ok(vals.iter().flat_map(|&x| vals.iter().map(move |&y| (x, y))).collect())
}

fn det_zero(modulus: Option<i128>, a: (i128, i128), b: (i128, i128), c: (i128, i128)) -> bool {
    let v = (b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1);
    match modulus {
        None => v == 0,
        Some(m) => v % m == 0,
    }
}

/// Canonical projective direction of the nonzero vector q - anchor.
fn direction(modulus: Option<i128>, anchor: (i128, i128), q: (i128, i128)) -> (i128, i128) {
    let dx = q.0 - anchor.0;
    let dy = q.1 - anchor.1;
    match modulus {
        None => {
            if dx == 0 {
                (0, 1)
            } else {
                let g = dx.gcd(&dy);
                let s = if dx < 0 { -1 } else { 1 };
                (s * dx / g, s * dy / g)
            }
        }
        Some(m) => {
            let dxn = dx.rem_euclid(m);
            let dyn_ = dy.rem_euclid(m);
            if dxn == 0 {
                (0, 1)
            } else {
                let inv = inverse_mod(dxn, m).expect("prime field");
                (1, dyn_ * inv % m)
            }
        }
    }
}

/// A plane alpha x + beta y + gamma z = delta over F_p, normalized so the
/// first nonzero of (alpha, beta, gamma) is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plane {
    p: u64,
    coeffs: [u64; 4],
}

impl Plane {
    pub fn new(p: u64, alpha: i64, beta: i64, gamma: i64, delta: i64) -> Result<Self, IncidenceError> {
        let m = p as i128;
        let red = |v: i64| (((v as i128 % m) + m) % m) as u64;
        let (a, b, g, d) = (red(alpha), red(beta), red(gamma), red(delta));
        let lead = [a, b, g].into_iter().find(|&v| v != 0).ok_or_else(|| {
            IncidenceError::ParamOutOfRange("plane with zero normal".into())
        })?;
        let inv = inverse_mod(lead as i128, m).expect("prime field") as u64;
        let f = |v: u64| (v as u128 * inv as u128 % p as u128) as u64;
        Ok(Plane { p, coeffs: [f(a), f(b), f(g), f(d)] })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> [u64; 4] {
        self.coeffs
    }

    pub fn contains(&self, pt: (u64, u64, u64)) -> bool {
        let [a, b, g, d] = self.coeffs;
        let m = self.p as u128;
        ((a as u128 * pt.0 as u128 + b as u128 * pt.1 as u128 + g as u128 * pt.2 as u128) % m)
            == (d as u128 % m)
    }
}

/// Duplicate-free 3-space point configuration over F_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet3 {
    p: u64,
    pts: Vec<(u64, u64, u64)>,
}

impl PointSet3 {
    pub fn new(p: u64, pts: impl IntoIterator<Item = (u64, u64, u64)>) -> Self {
        let mut v: Vec<(u64, u64, u64)> =
            pts.into_iter().map(|(x, y, z)| (x % p, y % p, z % p)).collect();
        v.sort_unstable();
        v.dedup();
        PointSet3 { p, pts: v }
    }

    pub fn points(&self) -> &[(u64, u64, u64)] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }
}

/// Exact point-plane incidence count over F_p^3.
pub fn point_plane_incidences(points: &PointSet3, planes: &[Plane]) -> Result<u128, IncidenceError> {
    for pl in planes {
        if pl.p != points.p {
            return Err(IncidenceError::UniverseMismatch(
                format!("Fp:{}", points.p),
                format!("Fp:{}", pl.p),
            ));
        }
    }
    Ok(planes
        .par_iter()
        .map(|pl| points.pts.iter().filter(|&&pt| pl.contains(pt)).count() as u128)
        .sum())
}

/// The largest number of (distinct) planes sharing a common line, found by
/// grouping pairwise intersection lines under a canonical key. Parallel or
/// identical plane pairs contribute no line. Returns 1 for a non-empty
/// family with no shared lines and 0 for an empty one.
pub fn max_collinear_planes(planes: &[Plane]) -> u64 {
    let distinct: Vec<&Plane> = {
        let mut seen = HashSet::new();
        planes.iter().filter(|pl| seen.insert((*pl).clone())).collect()
    };
    if distinct.is_empty() {
        return 0;
    }
    let p = distinct[0].p as i128;
    let mut groups: HashMap<([i128; 3], [i128; 3]), HashSet<usize>> = HashMap::new();
    for i in 0..distinct.len() {
        for j in (i + 1)..distinct.len() {
            if let Some(key) = intersection_line_key(distinct[i], distinct[j], p) {
                let e = groups.entry(key).or_default();
                e.insert(i);
                e.insert(j);
            }
        }
    }
    groups.values().map(|s| s.len() as u64).max().unwrap_or(0).max(1)
}

fn intersection_line_key(pl1: &Plane, pl2: &Plane, p: i128) -> Option<([i128; 3], [i128; 3])> {
    let n1: Vec<i128> = pl1.coeffs[..3].iter().map(|&v| v as i128).collect();
    let n2: Vec<i128> = pl2.coeffs[..3].iter().map(|&v| v as i128).collect();
    let d1 = pl1.coeffs[3] as i128;
    let d2 = pl2.coeffs[3] as i128;
    let md = |v: i128| ((v % p) + p) % p;
    let mut dir = [
        md(n1[1] * n2[2] - n1[2] * n2[1]),
        md(n1[2] * n2[0] - n1[0] * n2[2]),
        md(n1[0] * n2[1] - n1[1] * n2[0]),
    ];
    if dir == [0, 0, 0] {
        return None; // parallel or identical
    }
    // normalize direction: first nonzero = 1
    let lead = dir.iter().position(|&v| v != 0).unwrap();
    let inv = inverse_mod(dir[lead], p).expect("prime field");
    for v in dir.iter_mut() {
        *v = md(*v * inv);
    }
    // particular solution of the 2x3 system by Gaussian elimination
    let pt = solve_two_planes(&n1, d1, &n2, d2, p)?;
    // canonicalize the base point: zero out the coordinate where dir leads
    let t = pt[lead];
    let base = [
        md(pt[0] - t * dir[0]),
        md(pt[1] - t * dir[1]),
        md(pt[2] - t * dir[2]),
    ];
    Some((dir, base))
}

fn solve_two_planes(n1: &[i128], d1: i128, n2: &[i128], d2: i128, p: i128) -> Option<[i128; 3]> {
    let md = |v: i128| ((v % p) + p) % p;
    // rows [n | d]; eliminate to echelon form
    let mut rows = [[n1[0], n1[1], n1[2], d1], [n2[0], n2[1], n2[2], d2]];
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..3 {
        if r >= 2 {
            break;
        }
        let pr = (r..2).find(|&i| md(rows[i][c]) != 0);
        let Some(pr) = pr else { continue };
        rows.swap(r, pr);
        let inv = inverse_mod(rows[r][c], p)?;
        for v in rows[r].iter_mut() {
            *v = md(*v * inv);
        }
        for i in 0..2 {
            if i != r && md(rows[i][c]) != 0 {
                let f = rows[i][c];
                for cc in 0..4 {
                    rows[i][cc] = md(rows[i][cc] - f * rows[r][cc]);
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    if r < 2 {
        return None; // rank deficient: identical planes
    }
    let mut pt = [0i128; 3];
    for (row, &c) in pivot_cols.iter().enumerate() {
        pt[c] = md(rows[row][3]); // free columns stay 0
    }
    Some(pt)
}

/// The point-plane configuration behind the additive-energy bound: points
/// (A*A) x A x A^{-1}, planes a x + y = b z + c, the incidence count N2,
/// the exact check E+(A) |A|^2 <= N2, and the collinear-plane statistic k
/// with its (not always true) comparison against |A|.
pub fn energy_plane_config(
    a: &FiniteSet,
) -> Result<(PointSet3, Vec<Plane>, ReportDocument), IncidenceError> {
    let p = match a.universe() {
        Universe::PrimeField(p) => p,
        _ => return Err(IncidenceError::UniverseMismatch(a.universe().tag(), "Fp".into())),
    };
    if a.contains(&Rat::zero()) {
        return Err(IncidenceError::ZeroElement);
    }
    let started = std::time::Instant::now();
    let prod = setalg::combine(a, a, SetOp::Product)?;
    let mut inv_elems: Vec<i64> = Vec::new();
    for &x in a.elems() {
        let xi = *x.numer() as i128;
        inv_elems.push(inverse_mod(xi, p as i128).expect("nonzero") as i64);
    }
    let a_inv = FiniteSet::from_ints(a.universe(), &inv_elems)?;

    let mut pts = Vec::new();
    for &u1 in prod.elems() {
        for &a1 in a.elems() {
            for &v2 in a_inv.elems() {
                pts.push((*u1.numer() as u64, *a1.numer() as u64, *v2.numer() as u64));
            }
        }
    }
    let points = PointSet3::new(p, pts);

    let mut planes = Vec::new();
    for &ainv in a_inv.elems() {
        for &b in prod.elems() {
            for &c in a.elems() {
                planes.push(Plane::new(
                    p,
                    *ainv.numer() as i64,
                    1,
                    -(*b.numer() as i64),
                    *c.numer() as i64,
                )?);
            }
        }
    }

    let n2 = point_plane_incidences(&points, &planes)?;
    let e_plus = energy(a, a, SetOp::Sum, 2)?;
    let k = max_collinear_planes(&planes);

    let mut doc = ReportDocument::new(
        "energy_plane_config",
        serde_json::json!({"p": p, "size": a.len()}),
    );
    doc.uint("points", points.len() as u128);
    doc.uint("planes", planes.len() as u128);
    doc.uint("incidences_n2", n2);
    doc.uint("energy_plus", e_plus);
    doc.uint("max_collinear_planes", k as u128);
    let lhs = e_plus * (a.len() as u128) * (a.len() as u128);
    doc.check_u("E+(A)*|A|^2 <= N2", lhs, n2, lhs <= n2);
    // reported, not asserted: fails for some A (lines in the z = const
    // direction can lie in |A*A| planes)
    doc.quantity("k_le_size", serde_json::Value::from(k as usize <= a.len()));
    doc.finish(started);
    Ok((points, planes, doc))
}

/// The sharp Szemeredi-Trotter grid construction over Z: points
/// [1..n] x [1..2n^2], lines y = m x + b with m in [1..n], b in [1..n^2].
/// Reports the exact incidence count and its ratio to
/// |P|^(2/3) |L|^(2/3) + |P| + |L|. No pass/fail: the O-constant is free.
pub fn st_experiment(n: u64, budget: &crate::report::Budget) -> Result<ReportDocument, IncidenceError> {
    if n < 2 {
        return Err(IncidenceError::ParamOutOfRange("st_experiment needs n >= 2".into()));
    }
    let started = std::time::Instant::now();
    let n_pts = 2 * n * n * n;
    let n_lines = n * n * n;
    budget
        .charge(n_pts.saturating_mul(n_lines))
        .map_err(|_| IncidenceError::ResourceLimit(n_pts as u128 * n_lines as u128))?;

    let mut pts = Vec::with_capacity(n_pts as usize);
    for x in 1..=n {
        for y in 1..=2 * n * n {
            pts.push((Rat::from_integer(x as i128), Rat::from_integer(y as i128)));
        }
    }
    let points = PointSet::new(Universe::Integers, pts);
    let mut lines = Vec::with_capacity(n_lines as usize);
    for m in 1..=n {
        for b in 1..=n * n {
            lines.push(
                Line::from_slope_intercept(
                    Universe::Integers,
                    Rat::from_integer(m as i128),
                    Rat::from_integer(b as i128),
                )
                .expect("slope line"),
            );
        }
    }
    let count = incidences(&points, &lines)?;

    let pf = points.len() as f64;
    let lf = lines.len() as f64;
    let denom = pf.powf(2.0 / 3.0) * lf.powf(2.0 / 3.0) + pf + lf;
    let mut doc =
        ReportDocument::new("st_experiment", serde_json::json!({"n": n}));
    doc.uint("points", points.len() as u128);
    doc.uint("lines", lines.len() as u128);
    doc.uint("incidences", count);
    doc.float("st_ratio", count as f64 / denom);
    doc.quantity("incidences_exact", json_uint(count));
    doc.finish(started);
    Ok(doc)
}

/// CSV serialization: points as `kind,x,y` rows, lines as `kind,m,b` rows
/// (`slope,m,b` or `vertical,c,`). Rationals print as `n` or `n/d`.
pub mod csv {
    use super::*;

    fn rat_str(r: &Rat) -> String {
        if r.is_integer() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }

    fn parse_rat(s: &str) -> Result<Rat, IncidenceError> {
        let parse_int = |t: &str| {
            t.trim()
                .parse::<i128>()
                .map_err(|_| IncidenceError::ParamOutOfRange(format!("bad rational: {s}")))
        };
        match s.split_once('/') {
            Some((n, d)) => Ok(Rat::new(parse_int(n)?, parse_int(d)?)),
            None => Ok(Rat::from_integer(parse_int(s)?)),
        }
    }

    pub fn write_points(points: &PointSet) -> String {
        let mut out = String::from("kind,x,y\n");
        for (x, y) in points.points() {
            out.push_str(&format!("point,{},{}\n", rat_str(x), rat_str(y)));
        }
        out
    }

    pub fn read_points(universe: Universe, text: &str) -> Result<PointSet, IncidenceError> {
        let mut pts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 || cols[0] != "point" {
                return Err(IncidenceError::ParamOutOfRange(format!("bad point row: {line}")));
            }
            pts.push((parse_rat(cols[1])?, parse_rat(cols[2])?));
        }
        Ok(PointSet::new(universe, pts))
    }

    pub fn write_points3(points: &PointSet3) -> String {
        let mut out = String::from("kind,x,y,z\n");
        for (x, y, z) in points.points() {
            out.push_str(&format!("point,{x},{y},{z}\n"));
        }
        out
    }

    pub fn write_lines(lines: &[Line]) -> String {
        let mut out = String::from("kind,m,b\n");
        for l in lines {
            if let Some((m, b)) = l.slope_intercept() {
                out.push_str(&format!("slope,{},{}\n", rat_str(&m), rat_str(&b)));
            } else if let Some(c) = l.vertical_offset() {
                out.push_str(&format!("vertical,{},\n", rat_str(&c)));
            }
        }
        out
    }

    pub fn read_lines(universe: Universe, text: &str) -> Result<Vec<Line>, IncidenceError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            match cols.first().copied() {
                Some("slope") if cols.len() == 3 => {
                    out.push(
                        Line::from_slope_intercept(universe, parse_rat(cols[1])?, parse_rat(cols[2])?)
                            .ok_or(IncidenceError::UnrepresentableLine)?,
                    );
                }
                Some("vertical") if cols.len() >= 2 => {
                    out.push(
                        Line::vertical(universe, parse_rat(cols[1])?)
                            .ok_or(IncidenceError::UnrepresentableLine)?,
                    );
                }
                _ => {
                    return Err(IncidenceError::ParamOutOfRange(format!("bad line row: {line}")))
                }
            }
        }
        Ok(out)
    }
}
