//! Geometry of the plane over Z_q = Z/p^3 Z with p = 3 (mod 4): the
//! quadratic "norm" |x| = x1^2 + x2^2, circles and distance counts,
//! perpendicular bisectors, the isotropic/non-isotropic line dichotomy,
//! norm-preserving affine maps, and the reflection census with the
//! N(x, y) distribution behind the bisector-count estimate.
//!
//! The choice p = 3 (mod 4) keeps -1 a non-residue, so a^2 + b^2 is a unit
//! whenever a and b are; several constructions lean on that and check it.

pub mod census;
pub mod isometry;

pub use census::{
    bisector_distance_lemma_search, bisector_family, n_count, n_distribution, quadruple_stats,
    reflection_census, reflection_involutions, rotation_maps, BisectorFamily, LemmaSearch,
    NDistribution, QuadrupleStats, ReflectionCensus,
};
pub use isometry::{
    bisector_equal_distance_check, compose, make_reflection, make_rotation, make_translation,
    reflection_fixing_line, segment_rotation, unique_rotation, IsometryKind, IsometryMap,
};

use crate::ring::{Modulus, RingElem, RingError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("points must be distinct")]
    EqualPoints,
    #[error("bisector is degenerate: no unit coefficient, the solution set is not a line")]
    DegenerateBisector,
    #[error("coefficients (a, b) contain no unit; not a q-point line")]
    NotALine,
    #[error("(a, b) is not on the unit circle a^2 + b^2 = 1")]
    NotOnUnitCircle,
    #[error("line is isotropic")]
    IsotropicLine,
    #[error("radius (or segment length) is not a unit")]
    NonUnitRadius,
    #[error("norms do not match")]
    NormMismatch,
    #[error("the two point pairs must differ")]
    IdenticalPairs,
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(&'static str),
    #[error("computation exceeds the resource budget: {0}")]
    ResourceLimit(String),
}

/// A point of Z_q^2; both components share one modulus.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vec2 {
    x1: RingElem,
    x2: RingElem,
}

impl Vec2 {
    pub fn new(x1: RingElem, x2: RingElem) -> Result<Self, GeomError> {
        if x1.modulus() != x2.modulus() {
            return Err(GeomError::Ring(RingError::MismatchedModuli(
                x1.modulus().q(),
                x2.modulus().q(),
            )));
        }
        Ok(Vec2 { x1, x2 })
    }

    pub fn from_ints(m: Modulus, x1: i64, x2: i64) -> Self {
        Vec2 { x1: m.elem(x1), x2: m.elem(x2) }
    }

    pub fn x1(&self) -> RingElem {
        self.x1
    }

    pub fn x2(&self) -> RingElem {
        self.x2
    }

    pub fn modulus(&self) -> Modulus {
        self.x1.modulus()
    }

    pub fn raw(&self) -> (u64, u64) {
        (self.x1.value(), self.x2.value())
    }

    pub fn add(&self, other: &Vec2) -> Vec2 {
        Vec2 { x1: self.x1 + other.x1, x2: self.x2 + other.x2 }
    }

    pub fn sub(&self, other: &Vec2) -> Vec2 {
        Vec2 { x1: self.x1 - other.x1, x2: self.x2 - other.x2 }
    }

    /// x1^2 + x2^2 mod q.
    pub fn norm(&self) -> RingElem {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    /// Both coordinates are units; pairs with this difference property have
    /// genuine, non-isotropic bisectors.
    pub fn both_units(&self) -> bool {
        self.x1.is_unit() && self.x2.is_unit()
    }
}

pub fn norm(v: &Vec2) -> RingElem {
    v.norm()
}

/// The circle C_rho(u) = { v : |v - u| = rho }, by exhaustive scan.
pub fn circle(u: &Vec2, rho: RingElem) -> Result<Vec<Vec2>, GeomError> {
    let m = u.modulus();
    m.require_zq()?;
    let q = m.q();
    let target = rho.value();
    let (u1, u2) = u.raw();
    let mut out = Vec::new();
    for v1 in 0..q {
        let d1 = m.sub_raw(v1, u1);
        let d1sq = m.mul_raw(d1, d1);
        for v2 in 0..q {
            let d2 = m.sub_raw(v2, u2);
            if m.add_raw(d1sq, m.mul_raw(d2, d2)) == target {
                out.push(Vec2 { x1: m.elem_u(v1), x2: m.elem_u(v2) });
            }
        }
    }
    Ok(out)
}

/// Histogram of |v - u| over all v, indexed by canonical rho. One O(q^2)
/// pass gives |C_rho(u)| for every rho at once.
pub fn circle_histogram(u: &Vec2) -> Result<Vec<u64>, GeomError> {
    let m = u.modulus();
    m.require_zq()?;
    let q = m.q();
    let (u1, u2) = u.raw();
    let mut hist = vec![0u64; q as usize];
    for v1 in 0..q {
        let d1 = m.sub_raw(v1, u1);
        let d1sq = m.mul_raw(d1, d1);
        for v2 in 0..q {
            let d2 = m.sub_raw(v2, u2);
            hist[m.add_raw(d1sq, m.mul_raw(d2, d2)) as usize] += 1;
        }
    }
    Ok(hist)
}

/// |C_rho(u)| by the four-case closed form: p^2 at rho = 0, p^3 + p^2 for
/// unit rho, 0 for rho in p Z_q^*, and p^3 + p^2 for rho in p^2 Z_q^*.
/// Independent of the center.
pub fn circle_size(rho: RingElem) -> Result<u64, GeomError> {
    let m = rho.modulus();
    m.require_zq()?;
    let p = m.p();
    let v = rho.value();
    Ok(if v == 0 {
        p * p
    } else if v % p != 0 {
        p * p * p + p * p
    } else if v % (p * p) == 0 {
        p * p * p + p * p
    } else {
        0
    })
}

/// D_{q,rho}: the number of ordered pairs (u1, u2) at distance rho,
/// which is q^2 * |C_rho|.
pub fn distance_pair_count(rho: RingElem) -> Result<u128, GeomError> {
    let m = rho.modulus();
    let q = m.q() as u128;
    Ok(q * q * circle_size(rho)? as u128)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LineClass {
    NonIsotropic,
    Isotropic,
}

/// A line a x + b y = c over Z_q in canonical form: the first unit among
/// (a, b) is scaled to 1. Coefficient pairs without a unit do not define a
/// q-point line and are rejected at construction.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZqLine {
    a: u64,
    b: u64,
    c: u64,
    modulus: Modulus,
}

impl ZqLine {
    pub fn new(m: Modulus, a: i64, b: i64, c: i64) -> Result<Self, GeomError> {
        Self::from_raw(m, m.elem(a).value(), m.elem(b).value(), m.elem(c).value())
    }

    pub fn from_raw(m: Modulus, a: u64, b: u64, c: u64) -> Result<Self, GeomError> {
        let lead = if m.is_unit_raw(a) {
            a
        } else if m.is_unit_raw(b) {
            b
        } else {
            return Err(GeomError::NotALine);
        };
        let inv = m.inv_raw(lead).expect("unit");
        Ok(ZqLine {
            a: m.mul_raw(a, inv),
            b: m.mul_raw(b, inv),
            c: m.mul_raw(c, inv),
            modulus: m,
        })
    }

    pub fn coefficients(&self) -> (u64, u64, u64) {
        (self.a, self.b, self.c)
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn contains(&self, v: &Vec2) -> bool {
        let m = self.modulus;
        let (v1, v2) = v.raw();
        m.add_raw(m.mul_raw(self.a, v1), m.mul_raw(self.b, v2)) == self.c
    }

    /// All q points of the line.
    pub fn points(&self) -> Vec<Vec2> {
        let m = self.modulus;
        let q = m.q();
        let mut out = Vec::with_capacity(q as usize);
        if m.is_unit_raw(self.a) {
            // canonical a = 1: x = c - b t, y = t
            for t in 0..q {
                let x = m.sub_raw(self.c, m.mul_raw(self.b, t));
                out.push(Vec2 { x1: m.elem_u(x), x2: m.elem_u(t) });
            }
        } else {
            // canonical b = 1: x = t, y = c - a t
            for t in 0..q {
                let y = m.sub_raw(self.c, m.mul_raw(self.a, t));
                out.push(Vec2 { x1: m.elem_u(t), x2: m.elem_u(y) });
            }
        }
        out
    }

    pub fn classify(&self) -> LineClass {
        let m = self.modulus;
        let sum_sq = m.add_raw(m.mul_raw(self.a, self.a), m.mul_raw(self.b, self.b));
        if m.is_unit_raw(self.a) && m.is_unit_raw(self.b) && m.is_unit_raw(sum_sq) {
            LineClass::NonIsotropic
        } else {
            LineClass::Isotropic
        }
    }
}

pub fn classify_line(l: &ZqLine) -> LineClass {
    l.classify()
}

/// The perpendicular bisector B(x, y) = { z : |z - x| = |z - y| } as a line:
/// 2 (y - x) . z = |y| - |x|. Errors when x = y or when neither coefficient
/// is a unit (then the solution set is not a q-point line).
pub fn bisector(x: &Vec2, y: &Vec2) -> Result<ZqLine, GeomError> {
    if x == y {
        return Err(GeomError::EqualPoints);
    }
    let m = x.modulus();
    let two = m.elem_u(2);
    let a = two * (y.x1 - x.x1);
    let b = two * (y.x2 - x.x2);
    let c = y.norm() - x.norm();
    ZqLine::from_raw(m, a.value(), b.value(), c.value()).map_err(|_| GeomError::DegenerateBisector)
}

/// All p^3 - p^2 non-isotropic lines through u: one for each unit slope.
pub fn nonisotropic_lines_through(u: &Vec2) -> Result<Vec<ZqLine>, GeomError> {
    let m = u.modulus();
    m.require_zq()?;
    let (u1, u2) = u.raw();
    let mut out = Vec::new();
    for s in m.units() {
        // direction (1, s): s x - y = s u1 - u2
        let c = m.sub_raw(m.mul_raw(s, u1), u2);
        out.push(ZqLine::from_raw(m, s, m.sub_raw(0, 1), c).expect("unit slope line"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Every non-isotropic line of the plane, in canonical order: a = 1, b a
/// unit, c arbitrary, so there are (p^3 - p^2) p^3 of them.
pub fn all_nonisotropic_lines(m: Modulus) -> Result<Vec<ZqLine>, GeomError> {
    m.require_zq()?;
    let q = m.q();
    let mut out = Vec::new();
    for b in m.units() {
        for c in 0..q {
            let l = ZqLine { a: 1, b, c, modulus: m };
            debug_assert_eq!(l.classify(), LineClass::NonIsotropic);
            out.push(l);
        }
    }
    Ok(out)
}
