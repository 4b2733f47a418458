//! Set algebra over Z, F_p, and Z/p^k Z: sumsets and product sets,
//! representation functions, energies of every order, dyadic pigeonholing,
//! family generators, and the sum-product report.
//!
//! Elements are exact rationals (`Ratio<i128>`): integer universes stay
//! closed under ratios (slopes of integer sets are rationals), and modular
//! universes keep canonical integer representatives. No floating point
//! touches any count.

use crate::report::{json_uint, ReportDocument};
use crate::ring::{is_prime, Modulus};
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use thiserror::Error;

pub type Rat = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("universe mismatch: {0} vs {1}")]
    UniverseMismatch(String, String),
    #[error("zero (or non-invertible) denominator in ratio operation")]
    ZeroDenominator,
    #[error("empty input")]
    EmptyInput,
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("operation needs universe {0}")]
    WrongUniverse(&'static str),
    #[error("energy is defined for Sum and Product only")]
    UnsupportedOp,
    #[error("set contains a non-integer value; this operation needs integers")]
    NonIntegral,
    #[error("set must not contain zero")]
    ZeroElement,
    #[error("set must have at least {0} elements")]
    TooSmall(usize),
    #[error("malformed set file: {0}")]
    Parse(String),
}

/// The universe a set lives in. Modular universes keep canonical
/// representatives in `[0, m)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Universe {
    Integers,
    PrimeField(u64),
    Ring(Modulus),
}

impl Universe {
    pub fn prime_field(p: u64) -> Result<Self, SetError> {
        if p < 3 || !is_prime(p) {
            return Err(SetError::NotPrime(p));
        }
        Ok(Universe::PrimeField(p))
    }

    fn validate(&self) -> Result<(), SetError> {
        match self {
            Universe::PrimeField(p) if *p < 3 || !is_prime(*p) => Err(SetError::NotPrime(*p)),
            _ => Ok(()),
        }
    }

    pub fn modulus_value(&self) -> Option<u64> {
        match self {
            Universe::Integers => None,
            Universe::PrimeField(p) => Some(*p),
            Universe::Ring(m) => Some(m.q()),
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Universe::Integers => "Z".to_string(),
            Universe::PrimeField(p) => format!("Fp:{p}"),
            Universe::Ring(m) => format!("Zq:{}", m.q()),
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self, SetError> {
        if tag == "Z" {
            return Ok(Universe::Integers);
        }
        if let Some(p) = tag.strip_prefix("Fp:") {
            let p: u64 = p.parse().map_err(|_| SetError::Parse(tag.to_string()))?;
            return Universe::prime_field(p);
        }
        if let Some(q) = tag.strip_prefix("Zq:") {
            let q: u64 = q.parse().map_err(|_| SetError::Parse(tag.to_string()))?;
            // recover (p, k) from q = p^k
            let mut p = 2u64;
            while p * p <= q && q % p != 0 {
                p += 1;
            }
            if q % p != 0 {
                p = q; // q itself prime
            }
            let mut k = 0u32;
            let mut rest = q;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            if rest != 1 {
                return Err(SetError::Parse(format!("{q} is not a prime power")));
            }
            let m = Modulus::new(p, k).map_err(|e| SetError::Parse(e.to_string()))?;
            return Ok(Universe::Ring(m));
        }
        Err(SetError::Parse(tag.to_string()))
    }

    /// Canonical form of one element of this universe.
    fn canon(&self, v: Rat) -> Result<Rat, SetError> {
        match self {
            Universe::Integers => Ok(v),
            Universe::PrimeField(p) => {
                let m = *p as i128;
                if !v.is_integer() {
                    // a/b in F_p means a * b^{-1}
                    let inv = mod_inverse(*v.denom(), m).ok_or(SetError::ZeroDenominator)?;
                    return Ok(Rat::from_integer((v.numer() % m * inv % m + m) % m));
                }
                Ok(Rat::from_integer(((v.numer() % m) + m) % m))
            }
            Universe::Ring(md) => {
                if !v.is_integer() {
                    return Err(SetError::NonIntegral);
                }
                let m = md.q() as i128;
                Ok(Rat::from_integer(((v.numer() % m) + m) % m))
            }
        }
    }

    fn add(&self, a: Rat, b: Rat) -> Rat {
        self.canon(a + b).expect("canonical inputs")
    }

    fn sub(&self, a: Rat, b: Rat) -> Rat {
        self.canon(a - b).expect("canonical inputs")
    }

    fn mul(&self, a: Rat, b: Rat) -> Rat {
        self.canon(a * b).expect("canonical inputs")
    }

    /// Division; `None` when `b` is not invertible in this universe.
    fn div(&self, a: Rat, b: Rat) -> Option<Rat> {
        match self {
            Universe::Integers => {
                if b.is_zero() {
                    None
                } else {
                    Some(a / b)
                }
            }
            Universe::PrimeField(p) => {
                let m = *p as i128;
                let bv = *b.numer();
                let inv = mod_inverse(bv, m)?;
                Some(Rat::from_integer(a.numer() * inv % m))
                    .map(|r| self.canon(r).expect("int"))
            }
            Universe::Ring(md) => {
                let bv = *b.numer() as u64;
                let inv = md.inv_raw(bv).ok()?;
                Some(self.canon(a * Rat::from_integer(inv as i128)).expect("int"))
            }
        }
    }
}

fn mod_inverse(a: i128, m: i128) -> Option<i128> {
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
        return None;
    }
    Some(((t % m) + m) % m)
}

/// A duplicate-free finite set, sorted ascending by canonical value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSet {
    universe: Universe,
    elems: Vec<Rat>,
}

impl FiniteSet {
    pub fn new(universe: Universe, values: impl IntoIterator<Item = Rat>) -> Result<Self, SetError> {
        universe.validate()?;
        let mut elems = values
            .into_iter()
            .map(|v| universe.canon(v))
            .collect::<Result<Vec<_>, _>>()?;
        elems.sort_unstable();
        elems.dedup();
        Ok(FiniteSet { universe, elems })
    }

    pub fn from_ints(universe: Universe, values: &[i64]) -> Result<Self, SetError> {
        Self::new(universe, values.iter().map(|&v| Rat::from_integer(v as i128)))
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn elems(&self) -> &[Rat] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, v: &Rat) -> bool {
        self.elems.binary_search(v).is_ok()
    }

    /// Integer values, for sets whose members are all integral.
    pub fn to_ints(&self) -> Result<Vec<i128>, SetError> {
        self.elems
            .iter()
            .map(|r| if r.is_integer() { Ok(*r.numer()) } else { Err(SetError::NonIntegral) })
            .collect()
    }

    fn same_universe(&self, other: &FiniteSet) -> Result<(), SetError> {
        if self.universe != other.universe {
            return Err(SetError::UniverseMismatch(self.universe.tag(), other.universe.tag()));
        }
        Ok(())
    }
}

/// Pairwise set operations. `Dilate(x)` maps `A` to `xA` and ignores the
/// second operand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetOp {
    Sum,
    Difference,
    Product,
    Ratio,
    Dilate(Rat),
}

/// Representation counts r(z): for each attainable value z, the number of
/// ordered pairs producing it. `dropped_pairs` counts ratio pairs whose
/// denominator was not invertible (Ring universe only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepCounts {
    pub op: SetOp,
    pub counts: BTreeMap<Rat, u64>,
    pub dropped_pairs: u64,
}

impl RepCounts {
    pub fn total(&self) -> u128 {
        self.counts.values().map(|&c| c as u128).sum()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    pub fn get(&self, z: &Rat) -> u64 {
        self.counts.get(z).copied().unwrap_or(0)
    }
}

fn ratio_denominators(b: &FiniteSet) -> Result<(Vec<Rat>, u64), SetError> {
    match b.universe {
        Universe::Integers | Universe::PrimeField(_) => {
            if b.contains(&Rat::zero()) {
                return Err(SetError::ZeroDenominator);
            }
            Ok((b.elems.clone(), 0))
        }
        Universe::Ring(m) => {
            let (ok, bad): (Vec<_>, Vec<_>) = b
                .elems
                .iter()
                .partition(|v| m.is_unit_raw(*v.numer() as u64));
            if ok.is_empty() {
                return Err(SetError::ZeroDenominator);
            }
            Ok((ok.into_iter().copied().collect(), bad.len() as u64))
        }
    }
}

/// The multiplicity map of `A op B`.
pub fn rep_counts(a: &FiniteSet, b: &FiniteSet, op: SetOp) -> Result<RepCounts, SetError> {
    a.same_universe(b)?;
    let u = a.universe;
    let mut counts: BTreeMap<Rat, u64> = BTreeMap::new();
    let mut dropped = 0u64;
    match &op {
        SetOp::Sum => {
            for &x in &a.elems {
                for &y in &b.elems {
                    *counts.entry(u.add(x, y)).or_insert(0) += 1;
                }
            }
        }
        SetOp::Difference => {
            for &x in &a.elems {
                for &y in &b.elems {
                    *counts.entry(u.sub(x, y)).or_insert(0) += 1;
                }
            }
        }
        SetOp::Product => {
            for &x in &a.elems {
                for &y in &b.elems {
                    *counts.entry(u.mul(x, y)).or_insert(0) += 1;
                }
            }
        }
        SetOp::Ratio => {
            let (dens, dropped_elems) = ratio_denominators(b)?;
            dropped = dropped_elems * a.elems.len() as u64;
            for &x in &a.elems {
                for &y in &dens {
                    let z = u.div(x, y).ok_or(SetError::ZeroDenominator)?;
                    *counts.entry(z).or_insert(0) += 1;
                }
            }
        }
        SetOp::Dilate(s) => {
            let s = u.canon(*s)?;
            for &x in &a.elems {
                *counts.entry(u.mul(s, x)).or_insert(0) += 1;
            }
        }
    }
    Ok(RepCounts { op, counts, dropped_pairs: dropped })
}

/// The set `A op B` itself (the key set of [`rep_counts`]).
pub fn combine(a: &FiniteSet, b: &FiniteSet, op: SetOp) -> Result<FiniteSet, SetError> {
    let r = rep_counts(a, b, op)?;
    FiniteSet::new(a.universe, r.counts.into_keys())
}

/// n-th order energy. `Sum` is computed over the difference map, `Product`
/// over the ratio map; for n = 2 both coincide with the quadruple counts.
pub fn energy(a: &FiniteSet, b: &FiniteSet, op: SetOp, n: u32) -> Result<u128, SetError> {
    if n < 2 {
        return Err(SetError::ParamOutOfRange(format!("energy order n = {n} < 2")));
    }
    let map_op = match op {
        SetOp::Sum => SetOp::Difference,
        SetOp::Product => SetOp::Ratio,
        _ => return Err(SetError::UnsupportedOp),
    };
    let r = rep_counts(a, b, map_op)?;
    Ok(r.counts.values().map(|&c| (c as u128).pow(n)).sum())
}

/// Quadruple-counting oracle for second-order energy:
/// `#{a1 + b1 = a2 + b2}` resp. `#{a1 b1 = a2 b2}` over A x A x B x B.
/// Deliberately O(|A|^2 |B|^2); it exists to check [`energy`].
pub fn energy_quadruple_oracle(a: &FiniteSet, b: &FiniteSet, op: SetOp) -> Result<u128, SetError> {
    a.same_universe(b)?;
    let u = a.universe;
    let pair = |x: Rat, y: Rat| -> Rat {
        match op {
            SetOp::Sum => u.add(x, y),
            SetOp::Product => u.mul(x, y),
            _ => unreachable!(),
        }
    };
    if !matches!(op, SetOp::Sum | SetOp::Product) {
        return Err(SetError::UnsupportedOp);
    }
    let mut count = 0u128;
    for &a1 in &a.elems {
        for &a2 in &a.elems {
            for &b1 in &b.elems {
                for &b2 in &b.elems {
                    if pair(a1, b1) == pair(a2, b2) {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// r_Q(z) for z restricted to Z: the number of quadruples
/// (a1, a1', a2, a2') with z = (a1 + a2) / (a1' + a2'). Quadruples whose
/// denominator vanishes contribute to no z.
pub fn variant_slope_counts(
    z_set: &FiniteSet,
    a1: &FiniteSet,
    a2: &FiniteSet,
) -> Result<BTreeMap<Rat, u64>, SetError> {
    z_set.same_universe(a1)?;
    z_set.same_universe(a2)?;
    if !matches!(z_set.universe, Universe::PrimeField(_)) {
        return Err(SetError::WrongUniverse("PrimeField"));
    }
    let u = z_set.universe;
    // multiplicity of each value of A1 + A2, shared by numerator and
    // denominator positions
    let sums = rep_counts(a1, a2, SetOp::Sum)?;
    let mut out: BTreeMap<Rat, u64> = BTreeMap::new();
    for &z in &z_set.elems {
        let mut r = 0u64;
        for (&s, &den_count) in &sums.counts {
            if s.is_zero() {
                continue;
            }
            let num = u.mul(z, s);
            r += den_count * sums.counts.get(&num).copied().unwrap_or(0);
        }
        if r > 0 {
            out.insert(z, r);
        }
    }
    Ok(out)
}

/// Restricted variant-slope energy R(Z, A1, A2) = sum over z in Z of r_Q(z)^2.
pub fn restricted_energy(
    z_set: &FiniteSet,
    a1: &FiniteSet,
    a2: &FiniteSet,
) -> Result<u128, SetError> {
    let r = variant_slope_counts(z_set, a1, a2)?;
    Ok(r.values().map(|&c| (c as u128) * (c as u128)).sum())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Weight {
    Linear,
    Square,
}

/// One dyadic level set of a representation function: the values x with
/// 2^(i0 - 1) <= r(x) < 2^i0, together with its mass under the chosen
/// weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicClass {
    pub index: u32,
    pub members: Vec<Rat>,
    pub mass: u128,
    pub weight: Weight,
    pub class_count: u32,
}

/// The dyadic class maximizing the weight mass; ties break toward the
/// smaller index. The exact pigeonhole guarantee is
/// `mass >= total_mass / class_count` with `class_count = floor(log2 M) + 1`.
pub fn dyadic_popular(r: &RepCounts, weight: Weight) -> Result<DyadicClass, SetError> {
    if r.counts.is_empty() {
        return Err(SetError::EmptyInput);
    }
    let mut classes: BTreeMap<u32, (Vec<Rat>, u128)> = BTreeMap::new();
    for (&x, &c) in &r.counts {
        let i = 64 - (c.leading_zeros()); // bit length: 2^(i-1) <= c < 2^i
        let w = match weight {
            Weight::Linear => c as u128,
            Weight::Square => (c as u128) * (c as u128),
        };
        let e = classes.entry(i).or_insert_with(|| (Vec::new(), 0));
        e.0.push(x);
        e.1 += w;
    }
    let max_count = r.max_count();
    let class_count = 64 - max_count.leading_zeros();
    let (&index, _) = classes
        .iter()
        .max_by(|(i1, (_, m1)), (i2, (_, m2))| m1.cmp(m2).then(i2.cmp(i1)))
        .expect("non-empty");
    let (members, mass) = classes.remove(&index).expect("chosen class");
    Ok(DyadicClass { index, members, mass, weight, class_count })
}

/// Deterministic set families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// start, start + step, ..., n terms
    Ap { start: i64, step: i64 },
    /// base, base * ratio, ..., n terms
    Gp { base: i64, ratio: i64 },
    /// n distinct elements drawn from [lo, hi] (Integers) or the whole
    /// universe (modular), deterministic in the seed
    RandomSubset { lo: i64, hi: i64 },
}

pub fn generate_family(
    universe: Universe,
    kind: FamilyKind,
    n: usize,
    seed: u64,
) -> Result<FiniteSet, SetError> {
    universe.validate()?;
    if n == 0 {
        return Err(SetError::ParamOutOfRange("family size 0".into()));
    }
    let set = match kind {
        FamilyKind::Ap { start, step } => {
            if step == 0 {
                return Err(SetError::ParamOutOfRange("AP step 0".into()));
            }
            let vals: Vec<i64> = (0..n as i64).map(|i| start + i * step).collect();
            FiniteSet::from_ints(universe, &vals)?
        }
        FamilyKind::Gp { base, ratio } => {
            if universe == Universe::Integers && ratio < 2 {
                return Err(SetError::ParamOutOfRange("GP over Z needs ratio >= 2".into()));
            }
            if base == 0 || ratio == 0 {
                return Err(SetError::ParamOutOfRange("GP base/ratio 0".into()));
            }
            let mut vals = Vec::with_capacity(n);
            let mut cur = Rat::from_integer(base as i128);
            let r = Rat::from_integer(ratio as i128);
            for _ in 0..n {
                vals.push(cur);
                cur *= r;
            }
            FiniteSet::new(universe, vals)?
        }
        FamilyKind::RandomSubset { lo, hi } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let candidates: Vec<i64> = match universe {
                Universe::Integers => {
                    if lo > hi {
                        return Err(SetError::ParamOutOfRange("empty range".into()));
                    }
                    (lo..=hi).collect()
                }
                Universe::PrimeField(p) => (0..p as i64).collect(),
                Universe::Ring(m) => (0..m.q() as i64).collect(),
            };
            if candidates.len() < n {
                return Err(SetError::ParamOutOfRange(format!(
                    "universe of size {} cannot hold {} distinct elements",
                    candidates.len(),
                    n
                )));
            }
            let picked: Vec<i64> = candidates
                .choose_multiple(&mut rng, n)
                .copied()
                .collect();
            FiniteSet::from_ints(universe, &picked)?
        }
    };
    if set.len() != n {
        return Err(SetError::ParamOutOfRange(format!(
            "family collapsed to {} < {} distinct elements",
            set.len(),
            n
        )));
    }
    Ok(set)
}

/// Sum-product experiment record for a single set: sizes, energies, the
/// exact Cauchy-Schwarz check |A|^4 <= |A+A| E+(A), and the two headline
/// ratios, with size-precondition flags when the universe is F_p.
pub fn sum_product_report(a: &FiniteSet) -> Result<ReportDocument, SetError> {
    if a.len() < 2 {
        return Err(SetError::TooSmall(2));
    }
    let started = std::time::Instant::now();
    let mut doc = ReportDocument::new(
        "sum_product_report",
        serde_json::json!({"universe": a.universe.tag(), "size": a.len()}),
    );
    let n = a.len() as u128;
    let sumset = combine(a, a, SetOp::Sum)?;
    let prodset = combine(a, a, SetOp::Product)?;
    let e_plus = energy(a, a, SetOp::Sum, 2)?;
    let e3_plus = energy(a, a, SetOp::Sum, 3)?;
    // the ratio route needs invertible denominators; over rings the dropped
    // pair count is part of the record
    let ratio_map = rep_counts(a, a, SetOp::Ratio).ok();
    let e_times = ratio_map
        .as_ref()
        .map(|r| r.counts.values().map(|&c| (c as u128) * (c as u128)).sum::<u128>());
    let dropped = ratio_map.as_ref().map_or(0, |r| r.dropped_pairs);

    doc.uint("size", n);
    doc.uint("sumset", sumset.len() as u128);
    doc.uint("prodset", prodset.len() as u128);
    doc.uint("energy_plus", e_plus);
    doc.uint("energy3_plus", e3_plus);
    match e_times {
        Some(v) => doc.uint("energy_times", v),
        None => doc.quantity("energy_times", serde_json::Value::Null),
    };

    // |A|^4 <= |A+A| * E+(A), exact integers
    let lhs = n.pow(4);
    let rhs = sumset.len() as u128 * e_plus;
    doc.check_u("|A|^4 <= |A+A|*E+(A)", lhs, rhs, lhs <= rhs);

    let nf = a.len() as f64;
    let s = sumset.len() as f64;
    let m = prodset.len() as f64;
    doc.float("ratio_s8m3_n12", s.powi(8) * m.powi(3) / nf.powi(12));
    doc.float("ratio_s2m3_n6", s.powi(2) * m.powi(3) / nf.powi(6));

    if let Universe::PrimeField(p) = a.universe {
        let pf = p as f64;
        doc.quantity("size_le_p25", serde_json::Value::from(nf <= pf.powf(0.4)));
        doc.quantity("size_le_p12", serde_json::Value::from(nf <= pf.sqrt()));
    } else {
        doc.quantity("size_le_p25", serde_json::Value::Null);
        doc.quantity("size_le_p12", serde_json::Value::Null);
    }
    doc.quantity("dropped_ratio_pairs", json_uint(dropped as u128));
    doc.finish(started);
    Ok(doc)
}

/// Write a set as newline-delimited decimal integers after a one-line
/// header `universe=<Z|Fp:p|Zq:q>`.
pub fn write_set(set: &FiniteSet, mut w: impl Write) -> Result<(), SetError> {
    let ints = set.to_ints()?;
    writeln!(w, "universe={}", set.universe.tag()).map_err(|e| SetError::Parse(e.to_string()))?;
    for v in ints {
        writeln!(w, "{v}").map_err(|e| SetError::Parse(e.to_string()))?;
    }
    Ok(())
}

pub fn read_set(r: impl BufRead) -> Result<FiniteSet, SetError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| SetError::Parse("empty file".into()))?
        .map_err(|e| SetError::Parse(e.to_string()))?;
    let tag = header
        .strip_prefix("universe=")
        .ok_or_else(|| SetError::Parse(format!("bad header: {header}")))?;
    let universe = Universe::from_tag(tag.trim())?;
    let mut vals = Vec::new();
    for line in lines {
        let line = line.map_err(|e| SetError::Parse(e.to_string()))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: i128 = t.parse().map_err(|_| SetError::Parse(format!("bad integer: {t}")))?;
        vals.push(Rat::from_integer(v));
    }
    FiniteSet::new(universe, vals)
}

/// True when every member is strictly positive (needed by the Solymosi
/// machinery, which works with positive reals).
pub fn all_positive(a: &FiniteSet) -> bool {
    a.elems.iter().all(|v| v.is_positive())
}
