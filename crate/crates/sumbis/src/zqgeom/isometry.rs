//! Norm-preserving affine maps of Z_q^2: rotations, reflections, and
//! translations, together with the three existence/uniqueness constructions
//! (the reflection fixing a non-isotropic line, the rotation about a center
//! matching two circle points, and the rotation carrying one unit-length
//! segment onto another).

use super::{bisector, GeomError, LineClass, Vec2, ZqLine};
use crate::ring::{Modulus, RingElem};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IsometryKind {
    Rotation,
    Reflection,
    Translation,
}

/// An affine map v -> M v + t with M a rotation matrix [[a,-b],[b,a]], a
/// reflection matrix [[a,b],[b,-a]] (a^2 + b^2 = 1 in both cases), or the
/// identity. The kind is derived from the matrix; maps with M = I are
/// translations.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsometryMap {
    m: [[u64; 2]; 2],
    t: [u64; 2],
    kind: IsometryKind,
    modulus: Modulus,
}

fn classify_matrix(md: Modulus, m: &[[u64; 2]; 2]) -> Option<IsometryKind> {
    let one = 1 % md.q();
    if m[0][0] == one && m[1][1] == one && m[0][1] == 0 && m[1][0] == 0 {
        return Some(IsometryKind::Translation);
    }
    let unit_circle =
        |a: u64, b: u64| md.add_raw(md.mul_raw(a, a), md.mul_raw(b, b)) == one;
    if m[0][0] == m[1][1] && m[0][1] == md.sub_raw(0, m[1][0]) && unit_circle(m[0][0], m[1][0]) {
        return Some(IsometryKind::Rotation);
    }
    if m[0][0] == md.sub_raw(0, m[1][1]) && m[0][1] == m[1][0] && unit_circle(m[0][0], m[0][1]) {
        return Some(IsometryKind::Reflection);
    }
    None
}

impl IsometryMap {
    fn from_parts(modulus: Modulus, m: [[u64; 2]; 2], t: [u64; 2]) -> Self {
        let kind = classify_matrix(modulus, &m)
            .expect("matrix is rotation-, reflection-shaped, or the identity");
        IsometryMap { m, t, kind, modulus }
    }

    pub fn kind(&self) -> IsometryKind {
        self.kind
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn matrix(&self) -> [[u64; 2]; 2] {
        self.m
    }

    pub fn translation_part(&self) -> (u64, u64) {
        (self.t[0], self.t[1])
    }

    pub fn is_identity(&self) -> bool {
        self.kind == IsometryKind::Translation && self.t == [0, 0]
    }

    #[inline]
    pub fn apply_raw(&self, v: (u64, u64)) -> (u64, u64) {
        let md = self.modulus;
        (
            md.add_raw(md.add_raw(md.mul_raw(self.m[0][0], v.0), md.mul_raw(self.m[0][1], v.1)), self.t[0]),
            md.add_raw(md.add_raw(md.mul_raw(self.m[1][0], v.0), md.mul_raw(self.m[1][1], v.1)), self.t[1]),
        )
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        let md = self.modulus;
        assert_eq!(md, v.modulus(), "mixed moduli");
        let (x, y) = self.apply_raw(v.raw());
        Vec2::from_ints(md, x as i64, y as i64)
    }

    /// The pointwise-fixed line, for reflections. The fixed set of a
    /// reflection v -> S v + t is a coset of ker(I - S), a q-point line.
    pub fn fixed_line(&self) -> Option<ZqLine> {
        if self.kind != IsometryKind::Reflection {
            return None;
        }
        let md = self.modulus;
        let (a, b) = (self.m[0][0], self.m[0][1]);
        let one_minus_a = md.sub_raw(1, a);
        let one_plus_a = md.add_raw(1, a);
        // particular fixed point: solve (I - S) v = t using whichever row
        // coefficient is a unit
        let v0 = if md.is_unit_raw(b) {
            // row 1: (1-a) v1 - b v2 = t1 with v1 = 0
            let inv = md.inv_raw(b).unwrap();
            (0, md.mul_raw(md.sub_raw(0, self.t[0]), inv))
        } else if md.is_unit_raw(one_minus_a) {
            let inv = md.inv_raw(one_minus_a).unwrap();
            (md.mul_raw(self.t[0], inv), 0)
        } else {
            // row 2: -b v1 + (1+a) v2 = t2 with v1 = 0
            let inv = md.inv_raw(one_plus_a).unwrap();
            (0, md.mul_raw(self.t[1], inv))
        };
        debug_assert_eq!(self.apply_raw(v0), v0);
        // fixed direction g: S g = g
        let g = {
            let g1 = (b, one_minus_a);
            if md.is_unit_raw(g1.0) || md.is_unit_raw(g1.1) {
                g1
            } else {
                (one_plus_a, b)
            }
        };
        // line through v0 with direction g: g2 x - g1 y = g2 v01 - g1 v02
        let c = md.sub_raw(md.mul_raw(g.1, v0.0), md.mul_raw(g.0, v0.1));
        Some(
            ZqLine::from_raw(md, g.1, md.sub_raw(0, g.0), c)
                .expect("fixed direction has a unit coordinate"),
        )
    }
}

/// Rotation about `center` by the matrix [[a,-b],[b,a]]; needs a^2 + b^2 = 1.
pub fn make_rotation(a: RingElem, b: RingElem, center: &Vec2) -> Result<IsometryMap, GeomError> {
    let md = center.modulus();
    if a * a + b * b != md.one() {
        return Err(GeomError::NotOnUnitCircle);
    }
    let m = [
        [a.value(), md.sub_raw(0, b.value())],
        [b.value(), a.value()],
    ];
    Ok(with_center(md, m, center))
}

/// Reflection about `center` by the matrix [[a,b],[b,-a]]; needs a^2 + b^2 = 1.
pub fn make_reflection(a: RingElem, b: RingElem, center: &Vec2) -> Result<IsometryMap, GeomError> {
    let md = center.modulus();
    if a * a + b * b != md.one() {
        return Err(GeomError::NotOnUnitCircle);
    }
    let m = [
        [a.value(), b.value()],
        [b.value(), md.sub_raw(0, a.value())],
    ];
    Ok(with_center(md, m, center))
}

pub fn make_translation(t: &Vec2) -> IsometryMap {
    let md = t.modulus();
    let one = 1 % md.q();
    IsometryMap::from_parts(md, [[one, 0], [0, one]], [t.raw().0, t.raw().1])
}

/// v -> M (v - u) + u, i.e. translation part t = (I - M) u.
fn with_center(md: Modulus, m: [[u64; 2]; 2], center: &Vec2) -> IsometryMap {
    let (u1, u2) = center.raw();
    let t = [
        md.sub_raw(u1, md.add_raw(md.mul_raw(m[0][0], u1), md.mul_raw(m[0][1], u2))),
        md.sub_raw(u2, md.add_raw(md.mul_raw(m[1][0], u1), md.mul_raw(m[1][1], u2))),
    ];
    IsometryMap::from_parts(md, m, t)
}

pub(crate) fn from_matrix_translation(
    md: Modulus,
    m: [[u64; 2]; 2],
    t: [u64; 2],
) -> IsometryMap {
    IsometryMap::from_parts(md, m, t)
}

/// Function composition `outer after inner`.
pub fn compose(outer: &IsometryMap, inner: &IsometryMap) -> IsometryMap {
    let md = outer.modulus;
    assert_eq!(md, inner.modulus, "mixed moduli");
    let (a, b) = (&outer.m, &inner.m);
    let mut m = [[0u64; 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = md.add_raw(md.mul_raw(a[i][0], b[0][j]), md.mul_raw(a[i][1], b[1][j]));
        }
    }
    let t = [
        md.add_raw(
            md.add_raw(md.mul_raw(a[0][0], inner.t[0]), md.mul_raw(a[0][1], inner.t[1])),
            outer.t[0],
        ),
        md.add_raw(
            md.add_raw(md.mul_raw(a[1][0], inner.t[0]), md.mul_raw(a[1][1], inner.t[1])),
            outer.t[1],
        ),
    ];
    IsometryMap::from_parts(md, m, t)
}

/// The unique reflection whose fixed line is the non-isotropic line l,
/// built from two points u1, u2 of l with d = u1 - u2 via the matrix
/// (d1^2 + d2^2)^{-1} [[d1^2 - d2^2, 2 d1 d2], [2 d1 d2, d2^2 - d1^2]]
/// about u1.
pub fn reflection_fixing_line(l: &ZqLine) -> Result<IsometryMap, GeomError> {
    if l.classify() != LineClass::NonIsotropic {
        return Err(GeomError::IsotropicLine);
    }
    let md = l.modulus();
    let pts = two_points_on(l);
    let d = pts.0.sub(&pts.1);
    let (d1, d2) = (d.x1(), d.x2());
    let denom = (d1 * d1 + d2 * d2).inverse().map_err(|_| GeomError::NonUnitRadius)?;
    let a = (d1 * d1 - d2 * d2) * denom;
    let b = (md.elem_u(2) * d1 * d2) * denom;
    let refl = make_reflection(a, b, &pts.0)?;
    debug_assert_eq!(refl.fixed_line().as_ref(), Some(l));
    Ok(refl)
}

fn two_points_on(l: &ZqLine) -> (Vec2, Vec2) {
    let pts = l.points();
    (pts[0], pts[1])
}

/// The unique rotation about u sending x to y, given that both lie on a
/// common circle of unit radius about u. Solves the 2x2 linear system for
/// (a, b), which is invertible exactly because the radius is a unit.
pub fn unique_rotation(u: &Vec2, x: &Vec2, y: &Vec2) -> Result<IsometryMap, GeomError> {
    let xr = x.sub(u);
    let yr = y.sub(u);
    let r = xr.norm();
    if yr.norm() != r {
        return Err(GeomError::NormMismatch);
    }
    let rinv = r.inverse().map_err(|_| GeomError::NonUnitRadius)?;
    // [[x1, -x2], [x2, x1]] (a, b)^T = (y1, y2)^T
    let a = (xr.x1() * yr.x1() + xr.x2() * yr.x2()) * rinv;
    let b = (xr.x1() * yr.x2() - xr.x2() * yr.x1()) * rinv;
    let rot = make_rotation(a, b, u)?;
    debug_assert_eq!(rot.apply(x), *y);
    Ok(rot)
}

/// The rotation carrying the segment (x, y) onto (z, w), when one exists:
/// for |x - y| = |z - w| a unit and (x, y) != (z, w), the rotation exists
/// and is unique iff x - y != z - w; otherwise the two segments are
/// translates of each other and `Ok(None)` is returned.
pub fn segment_rotation(
    x: &Vec2,
    y: &Vec2,
    z: &Vec2,
    w: &Vec2,
) -> Result<Option<IsometryMap>, GeomError> {
    if (x, y) == (z, w) {
        return Err(GeomError::IdenticalPairs);
    }
    let d1 = x.sub(y);
    let d2 = z.sub(w);
    if d1.norm() != d2.norm() {
        return Err(GeomError::NormMismatch);
    }
    if !d1.norm().is_unit() {
        return Err(GeomError::NonUnitRadius);
    }
    if d1 == d2 {
        return Ok(None);
    }
    // translate x onto z, then rotate about z to bring the translated y
    // onto w
    let shift = z.sub(x);
    let y_shifted = y.add(&shift);
    let rot = unique_rotation(z, &y_shifted, w)?;
    let translation = make_translation(&shift);
    let combined = compose(&rot, &translation);
    debug_assert_eq!(combined.apply(x), *z);
    debug_assert_eq!(combined.apply(y), *w);
    debug_assert_eq!(combined.kind(), IsometryKind::Rotation);
    Ok(Some(combined))
}

/// Property probe for the shared-bisector distance identity: given that
/// B(x, z) = B(y, w) is non-isotropic, |x - y| must equal |z - w|. Returns
/// that truth value; errors when the precondition does not hold.
pub fn bisector_equal_distance_check(
    x: &Vec2,
    y: &Vec2,
    z: &Vec2,
    w: &Vec2,
) -> Result<bool, GeomError> {
    let b1 = bisector(x, z).map_err(|_| {
        GeomError::PreconditionUnmet("B(x,z) is not a line")
    })?;
    let b2 = bisector(y, w).map_err(|_| {
        GeomError::PreconditionUnmet("B(y,w) is not a line")
    })?;
    if b1 != b2 {
        return Err(GeomError::PreconditionUnmet("bisectors differ"));
    }
    if b1.classify() != LineClass::NonIsotropic {
        return Err(GeomError::PreconditionUnmet("common bisector is isotropic"));
    }
    Ok(x.sub(y).norm() == z.sub(w).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Modulus;

    fn m3() -> Modulus {
        Modulus::zq(3).unwrap()
    }

    #[test]
    fn identity_rotation() {
        let m = m3();
        for center in [Vec2::from_ints(m, 0, 0), Vec2::from_ints(m, 4, 17)] {
            let r = make_rotation(m.one(), m.zero(), &center).unwrap();
            assert!(r.is_identity());
            assert_eq!(r.kind(), IsometryKind::Translation);
        }
    }

    #[test]
    fn reflection_application() {
        let m = m3();
        let s =
            make_reflection(m.one(), m.zero(), &Vec2::from_ints(m, 0, 0)).unwrap();
        // [[1,0],[0,-1]] maps (3,5) to (3,-5) = (3,22)
        assert_eq!(s.apply(&Vec2::from_ints(m, 3, 5)), Vec2::from_ints(m, 3, 22));
        assert_eq!(s.kind(), IsometryKind::Reflection);
        // involution
        let twice = compose(&s, &s);
        assert!(twice.is_identity());
    }

    #[test]
    fn rejects_off_circle_matrices() {
        let m = m3();
        let c = Vec2::from_ints(m, 0, 0);
        assert!(matches!(
            make_rotation(m.elem(2), m.elem(0), &c),
            Err(GeomError::NotOnUnitCircle)
        ));
        assert!(matches!(
            make_reflection(m.elem(2), m.elem(2), &c),
            Err(GeomError::NotOnUnitCircle)
        ));
    }

    #[test]
    fn norm_preservation_samples() {
        let m = m3();
        let maps = [
            make_rotation(m.elem(0), m.elem(1), &Vec2::from_ints(m, 5, 7)).unwrap(),
            make_reflection(m.elem(0), m.elem(1), &Vec2::from_ints(m, 2, 2)).unwrap(),
            make_translation(&Vec2::from_ints(m, 13, 24)),
        ];
        for map in &maps {
            for (v, w) in [((1, 2), (4, 8)), ((0, 26), (25, 3)), ((9, 9), (10, 0))] {
                let v = Vec2::from_ints(m, v.0, v.1);
                let w = Vec2::from_ints(m, w.0, w.1);
                assert_eq!(
                    map.apply(&v).sub(&map.apply(&w)).norm(),
                    v.sub(&w).norm()
                );
            }
        }
    }

    #[test]
    fn composition_kinds() {
        let m = m3();
        let o = Vec2::from_ints(m, 0, 0);
        let s1 = make_reflection(m.elem(0), m.elem(1), &o).unwrap();
        let s2 = make_reflection(m.one(), m.zero(), &Vec2::from_ints(m, 1, 1)).unwrap();
        let c = compose(&s2, &s1);
        assert!(matches!(c.kind(), IsometryKind::Rotation | IsometryKind::Translation));
        // two reflections across the same line compose to the identity
        let c2 = compose(&s1, &s1);
        assert!(c2.is_identity());
    }

    #[test]
    fn fixing_reflection_examples() {
        let m = m3();
        // x + y = 0: swaps (1,0) and (0,-1)
        let l = ZqLine::new(m, 1, 1, 0).unwrap();
        let s = reflection_fixing_line(&l).unwrap();
        assert_eq!(s.apply(&Vec2::from_ints(m, 1, 0)), Vec2::from_ints(m, 0, -1));
        assert_eq!(s.apply(&Vec2::from_ints(m, 0, -1)), Vec2::from_ints(m, 1, 0));
        assert_eq!(s.fixed_line().unwrap(), l);

        // x + y = 2 fixes (1,1) and (2,0)
        let l2 = ZqLine::new(m, 1, 1, 2).unwrap();
        let s2 = reflection_fixing_line(&l2).unwrap();
        for fp in [Vec2::from_ints(m, 1, 1), Vec2::from_ints(m, 2, 0)] {
            assert_eq!(s2.apply(&fp), fp);
        }

        let iso = ZqLine::new(m, 1, 0, 1).unwrap();
        assert!(matches!(reflection_fixing_line(&iso), Err(GeomError::IsotropicLine)));
    }

    #[test]
    fn unique_rotation_examples() {
        let m = m3();
        let o = Vec2::from_ints(m, 0, 0);
        let e1 = Vec2::from_ints(m, 1, 0);

        let id = unique_rotation(&o, &e1, &e1).unwrap();
        assert!(id.is_identity());

        let r = unique_rotation(&o, &e1, &Vec2::from_ints(m, 0, 1)).unwrap();
        assert_eq!(r.matrix(), [[0, m.q() - 1], [1, 0]]);

        let far = Vec2::from_ints(m, 3, 0); // norm 9 is not a unit
        assert!(matches!(
            unique_rotation(&o, &far, &Vec2::from_ints(m, 0, 3)),
            Err(GeomError::NonUnitRadius)
        ));
        assert!(matches!(
            unique_rotation(&o, &e1, &Vec2::from_ints(m, 1, 1)),
            Err(GeomError::NormMismatch)
        ));
    }

    #[test]
    fn segment_rotation_examples() {
        let m = m3();
        let o = Vec2::from_ints(m, 0, 0);
        let e1 = Vec2::from_ints(m, 1, 0);
        let e2 = Vec2::from_ints(m, 0, 1);

        // parallel transport: x - y = z - w, no rotation
        let z = Vec2::from_ints(m, 5, 7);
        let w = Vec2::from_ints(m, 4, 7);
        assert_eq!(segment_rotation(&e1, &o, &z, &w).unwrap(), None);

        // the quarter turn
        let r = segment_rotation(&o, &e1, &o, &e2).unwrap().unwrap();
        assert_eq!(r.matrix(), [[0, m.q() - 1], [1, 0]]);
        assert_eq!(r.kind(), IsometryKind::Rotation);

        assert!(matches!(
            segment_rotation(&o, &e1, &o, &e1),
            Err(GeomError::IdenticalPairs)
        ));
    }

    #[test]
    fn bisector_distance_probe() {
        let m = m3();
        let x = Vec2::from_ints(m, 0, 0);
        let z = Vec2::from_ints(m, 2, 2);
        // trivially equal bisectors
        assert!(bisector_equal_distance_check(&x, &x, &z, &z).unwrap());

        // a reflected pair shares the bisector with the original pair
        let l = bisector(&x, &z).unwrap();
        let s = reflection_fixing_line(&l).unwrap();
        let y = Vec2::from_ints(m, 1, 5);
        let w = s.apply(&y);
        assert!(bisector_equal_distance_check(&x, &y, &z, &w).unwrap());

        // precondition violation: different bisectors
        let far = Vec2::from_ints(m, 1, 1);
        assert!(matches!(
            bisector_equal_distance_check(&x, &far, &z, &Vec2::from_ints(m, 4, 4)),
            Err(GeomError::PreconditionUnmet(_))
        ));
    }
}
