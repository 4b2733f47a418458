//! Exact arithmetic in Z/p^k Z for odd primes p.
//!
//! Everything here is 64-bit: moduli are capped at 2^31 so that a product of
//! two canonical representatives never overflows a `u64` before reduction.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("modulus must be an odd prime >= 3, got p = {0}")]
    BadPrime(u64),
    #[error("exponent must satisfy 1 <= k <= 3, got k = {0}")]
    BadExponent(u32),
    #[error("p^k = {0} exceeds the 2^31 arithmetic cap")]
    ModulusTooLarge(u64),
    #[error("{0} is not a unit modulo {1}")]
    NonUnit(u64, u64),
    #[error("operation requires k = 3 and p = 3 (mod 4), got p = {p}, k = {k}")]
    BadModulus { p: u64, k: u32 },
    #[error("mixed moduli: {0} vs {1}")]
    MismatchedModuli(u64, u64),
}

/// Deterministic trial-division primality check; fine for the desk-scale
/// moduli this crate works with.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The residue-ring context Z/p^k Z.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus {
    p: u64,
    k: u32,
    q: u64,
}

impl Modulus {
    pub fn new(p: u64, k: u32) -> Result<Self, RingError> {
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(RingError::BadPrime(p));
        }
        if k == 0 || k > 3 {
            return Err(RingError::BadExponent(k));
        }
        let q = p.checked_pow(k).ok_or(RingError::ModulusTooLarge(u64::MAX))?;
        if q > 1 << 31 {
            return Err(RingError::ModulusTooLarge(q));
        }
        Ok(Modulus { p, k, q })
    }

    /// Context for Z/p^3 Z with p = 3 (mod 4), the setting of the bisector
    /// geometry. Errors with `BadModulus` otherwise.
    pub fn zq(p: u64) -> Result<Self, RingError> {
        let m = Modulus::new(p, 3)?;
        m.require_zq()?;
        Ok(m)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn require_zq(&self) -> Result<(), RingError> {
        if self.k != 3 || self.p % 4 != 3 {
            return Err(RingError::BadModulus { p: self.p, k: self.k });
        }
        Ok(())
    }

    /// Canonical element from a possibly negative integer.
    pub fn elem(&self, v: i64) -> RingElem {
        let q = self.q as i64;
        let mut r = v % q;
        if r < 0 {
            r += q;
        }
        RingElem { value: r as u64, modulus: *self }
    }

    pub fn elem_u(&self, v: u64) -> RingElem {
        RingElem { value: v % self.q, modulus: *self }
    }

    pub fn zero(&self) -> RingElem {
        self.elem_u(0)
    }

    pub fn one(&self) -> RingElem {
        self.elem_u(1)
    }

    pub fn is_unit_raw(&self, v: u64) -> bool {
        (v % self.q) % self.p != 0
    }

    /// All canonical unit representatives, ascending.
    pub fn units(&self) -> Vec<u64> {
        (0..self.q).filter(|v| v % self.p != 0).collect()
    }

    pub fn add_raw(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    pub fn sub_raw(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b % self.q) % self.q
    }

    pub fn mul_raw(&self, a: u64, b: u64) -> u64 {
        a % self.q * (b % self.q) % self.q
    }

    pub fn inv_raw(&self, a: u64) -> Result<u64, RingError> {
        let a = a % self.q;
        if a % self.p == 0 {
            return Err(RingError::NonUnit(a, self.q));
        }
        // extended Euclid
        let (mut t, mut t1) = (0i64, 1i64);
        let (mut r, mut r1) = (self.q as i64, a as i64);
        while r1 != 0 {
            let quo = r / r1;
            (t, t1) = (t1, t - quo * t1);
            (r, r1) = (r1, r - quo * r1);
        }
        debug_assert_eq!(r, 1);
        let q = self.q as i64;
        Ok(((t % q + q) % q) as u64)
    }
}

/// A canonical residue in [0, q) tied to its modulus. Arithmetic between
/// elements of different moduli panics rather than coercing.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElem {
    value: u64,
    modulus: Modulus,
}

impl RingElem {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_unit(&self) -> bool {
        self.value % self.modulus.p != 0
    }

    pub fn inverse(&self) -> Result<RingElem, RingError> {
        let v = self.modulus.inv_raw(self.value)?;
        Ok(RingElem { value: v, modulus: self.modulus })
    }

    pub fn pow(&self, mut e: u64) -> RingElem {
        let m = self.modulus;
        let mut base = self.value;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = m.mul_raw(acc, base);
            }
            base = m.mul_raw(base, base);
            e >>= 1;
        }
        RingElem { value: acc, modulus: m }
    }

    fn check(&self, rhs: &RingElem) {
        assert_eq!(
            self.modulus, rhs.modulus,
            "mixed moduli: {} vs {}",
            self.modulus.q, rhs.modulus.q
        );
    }
}

impl std::ops::Add for RingElem {
    type Output = RingElem;
    fn add(self, rhs: RingElem) -> RingElem {
        self.check(&rhs);
        RingElem { value: self.modulus.add_raw(self.value, rhs.value), modulus: self.modulus }
    }
}

impl std::ops::Sub for RingElem {
    type Output = RingElem;
    fn sub(self, rhs: RingElem) -> RingElem {
        self.check(&rhs);
        RingElem { value: self.modulus.sub_raw(self.value, rhs.value), modulus: self.modulus }
    }
}

impl std::ops::Mul for RingElem {
    type Output = RingElem;
    fn mul(self, rhs: RingElem) -> RingElem {
        self.check(&rhs);
        RingElem { value: self.modulus.mul_raw(self.value, rhs.value), modulus: self.modulus }
    }
}

impl std::ops::Neg for RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem { value: self.modulus.sub_raw(0, self.value), modulus: self.modulus }
    }
}

impl std::fmt::Display for RingElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus.q)
    }
}

fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    base %= m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

/// Legendre symbol (d | p) by Euler's criterion: d^((p-1)/2) mod p.
pub fn legendre(d: i64, p: u64) -> i32 {
    debug_assert!(p >= 3 && is_prime(p));
    let q = p as i64;
    let r = ((d % q + q) % q) as u64;
    if r == 0 {
        return 0;
    }
    let e = pow_mod(r, (p - 1) / 2, p);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// Number of square roots of d in Z/p^3 Z, by the six-case closed form:
/// 2 for a unit residue, 0 for a unit non-residue, 0 when p | d but p^2 does
/// not, 2p or 0 depending on (d/p^2 | p) when p^2 | d, and p when d = 0.
pub fn sqrt_count(d: RingElem) -> Result<u64, RingError> {
    let m = d.modulus();
    if m.k != 3 {
        return Err(RingError::BadModulus { p: m.p, k: m.k });
    }
    let p = m.p;
    let v = d.value();
    if v == 0 {
        return Ok(p);
    }
    if v % p != 0 {
        return Ok(if legendre(v as i64, p) == 1 { 2 } else { 0 });
    }
    if v % (p * p) != 0 {
        return Ok(0);
    }
    let rest = v / (p * p);
    Ok(if legendre(rest as i64, p) == 1 { 2 * p } else { 0 })
}

/// Independent oracle: count x in [0, q) with x^2 = d by exhaustive scan.
pub fn sqrt_count_oracle(d: RingElem) -> u64 {
    let m = d.modulus();
    let target = d.value();
    (0..m.q()).filter(|&x| m.mul_raw(x, x) == target).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zq27() -> Modulus {
        Modulus::new(3, 3).unwrap()
    }

    #[test]
    fn unit_detection() {
        let m = zq27();
        assert!(m.elem(1).is_unit());
        assert!(!m.elem(9).is_unit());
        assert!(m.elem(25).is_unit());
        assert!(!m.elem(0).is_unit());
    }

    #[test]
    fn inverses() {
        let m = zq27();
        assert_eq!(m.elem(1).inverse().unwrap().value(), 1);
        assert_eq!(m.elem(2).inverse().unwrap().value(), 14);
        assert!(matches!(m.elem(3).inverse(), Err(RingError::NonUnit(3, 27))));
        for v in m.units() {
            let e = m.elem_u(v);
            let inv = e.inverse().unwrap();
            assert_eq!((e * inv).value(), 1);
            assert_eq!(inv.inverse().unwrap(), e);
        }
    }

    #[test]
    fn negative_values_reduce_canonically() {
        let m = zq27();
        assert_eq!(m.elem(-1).value(), 26);
        assert_eq!(m.elem(-27).value(), 0);
        assert_eq!((m.elem(5) - m.elem(11)).value(), 21);
    }

    #[test]
    #[should_panic(expected = "mixed moduli")]
    fn mixed_moduli_panic() {
        let a = Modulus::new(3, 3).unwrap().elem(1);
        let b = Modulus::new(7, 3).unwrap().elem(1);
        let _ = a + b;
    }

    #[test]
    fn legendre_small_cases() {
        assert_eq!(legendre(1, 3), 1);
        assert_eq!(legendre(3, 3), 0);
        assert_eq!(legendre(2, 3), -1);
    }

    #[test]
    fn legendre_matches_qr_scan() {
        for p in (3..=97u64).filter(|&p| is_prime(p)) {
            let squares: std::collections::HashSet<u64> =
                (1..p).map(|x| x * x % p).collect();
            for d in 0..p {
                let expect = if d == 0 {
                    0
                } else if squares.contains(&d) {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre(d as i64, p), expect, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn sqrt_count_closed_form_examples() {
        let m = zq27();
        assert_eq!(sqrt_count(m.elem(0)).unwrap(), 3);
        assert_eq!(sqrt_count(m.elem(1)).unwrap(), 2);
        assert_eq!(sqrt_count(m.elem(9)).unwrap(), 6);
        assert_eq!(sqrt_count(m.elem(3)).unwrap(), 0);
    }

    #[test]
    fn sqrt_count_oracle_examples() {
        let m = zq27();
        assert_eq!(sqrt_count_oracle(m.elem(0)), 3);
        assert_eq!(sqrt_count_oracle(m.elem(4)), 2);
        let f3 = Modulus::new(3, 1).unwrap();
        assert_eq!(sqrt_count_oracle(f3.elem(0)), 1);
    }

    #[test]
    fn sqrt_count_matches_oracle_everywhere_p3() {
        let m = zq27();
        let mut total = 0;
        for d in 0..m.q() {
            let e = m.elem_u(d);
            assert_eq!(sqrt_count(e).unwrap(), sqrt_count_oracle(e), "d={d}");
            total += sqrt_count_oracle(e);
        }
        // each x lands on exactly one d
        assert_eq!(total, m.q());
    }

    #[test]
    fn modulus_validation() {
        assert!(Modulus::new(4, 1).is_err());
        assert!(Modulus::new(2, 3).is_err());
        assert!(Modulus::new(3, 0).is_err());
        assert!(Modulus::new(3, 4).is_err());
        assert!(Modulus::zq(5).is_err()); // 5 = 1 (mod 4)
        assert!(Modulus::zq(7).is_ok());
    }
}
