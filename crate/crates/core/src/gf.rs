//! Exact arithmetic in GF(p^k).
//!
//! Elements are encoded as integers in `[0, q)`: the base-p digits of the
//! encoding are the coefficients of the residue polynomial (digit `i` is the
//! coefficient of `x^i`), so for prime fields the encoding is the residue
//! itself. All arithmetic is exact; there is no floating point anywhere.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

/// Pascal triangles are precomputed only for small characteristics; larger
/// primes fall back to the multiplicative formula per digit.
const PASCAL_LIMIT: u64 = 101;

#[derive(Debug)]
struct FieldRepr {
    p: u64,
    k: u32,
    q: u64,
    /// Monic irreducible of degree k over F_p, constant term first.
    /// Empty exactly when k == 1.
    modulus: Vec<u64>,
    /// Row-major p x p table of C(i, j) mod p, empty when p > PASCAL_LIMIT.
    pascal: Vec<u64>,
}

/// A finite field GF(p^k), shared read-only across workers.
///
/// Elements are plain `u64` values in `[0, q)`; the field is passed
/// contextually to every operation. [`FieldElement`] offers a checked wrapper
/// that carries its field along.
#[derive(Clone)]
pub struct Field(Arc<FieldRepr>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.k == other.0.k && self.0.modulus == other.0.modulus)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0.q)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0.q)
    }
}

impl Field {
    /// Builds the field of order `q`, with the canonical modulus for k > 1:
    /// the lexicographically smallest monic irreducible of degree k over F_p,
    /// coefficients compared from the constant term upward.
    pub fn new(q: u64) -> Result<Field> {
        Self::from_parts(q, None)
    }

    /// Builds the field of order `q` with an explicit modulus (constant term
    /// first, monic, length k+1). `None` selects the canonical modulus.
    pub fn from_parts(q: u64, modulus: Option<&[u64]>) -> Result<Field> {
        let (p, k) = prime_power_split(q).ok_or(Error::NotAPrimePower(q))?;
        if q > MAX_FIELD_ORDER {
            return Err(Error::SizeLimitExceeded(format!(
                "field order {q} exceeds {MAX_FIELD_ORDER}"
            )));
        }
        let modulus = match (k, modulus) {
            (1, None) | (1, Some([])) => Vec::new(),
            (1, Some(_)) => {
                return Err(Error::InvalidModulus(
                    "prime fields carry no modulus".into(),
                ))
            }
            (_, None) => smallest_irreducible(p, k),
            (_, Some(m)) => {
                if m.len() != k as usize + 1 {
                    return Err(Error::InvalidModulus(format!(
                        "expected degree {k}, got {} coefficients",
                        m.len()
                    )));
                }
                if m[k as usize] != 1 {
                    return Err(Error::InvalidModulus("modulus must be monic".into()));
                }
                if m.iter().any(|&c| c >= p) {
                    return Err(Error::InvalidModulus(format!(
                        "coefficients must lie in [0, {p})"
                    )));
                }
                if !is_irreducible(m, p) {
                    return Err(Error::InvalidModulus(format!(
                        "polynomial is reducible over F_{p}"
                    )));
                }
                m.to_vec()
            }
        };
        let pascal = if p <= PASCAL_LIMIT {
            pascal_table(p)
        } else {
            Vec::new()
        };
        Ok(Field(Arc::new(FieldRepr {
            p,
            k,
            q,
            modulus,
            pascal,
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn k(&self) -> u32 {
        self.0.k
    }

    pub fn q(&self) -> u64 {
        self.0.q
    }

    /// Modulus coefficients, constant term first; `None` for prime fields.
    pub fn modulus(&self) -> Option<&[u64]> {
        if self.0.k == 1 {
            None
        } else {
            Some(&self.0.modulus)
        }
    }

    /// All q elements in encoding order 0..q-1.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.0.q
    }

    pub fn elem(&self, value: u64) -> FieldElement {
        debug_assert!(value < self.0.q);
        FieldElement {
            value,
            field: self.clone(),
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.0.q && b < self.0.q);
        if self.0.k == 1 {
            let s = a + b;
            if s >= self.0.p {
                s - self.0.p
            } else {
                s
            }
        } else {
            let p = self.0.p;
            let mut out = 0;
            let mut base = 1;
            let (mut x, mut y) = (a, b);
            while x > 0 || y > 0 {
                let d = (x % p + y % p) % p;
                out += d * base;
                base *= p;
                x /= p;
                y /= p;
            }
            out
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        debug_assert!(a < self.0.q);
        if self.0.k == 1 {
            if a == 0 {
                0
            } else {
                self.0.p - a
            }
        } else {
            let p = self.0.p;
            let mut out = 0;
            let mut base = 1;
            let mut x = a;
            while x > 0 {
                let d = x % p;
                if d != 0 {
                    out += (p - d) * base;
                }
                base *= p;
                x /= p;
            }
            out
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.0.q && b < self.0.q);
        if self.0.k == 1 {
            a * b % self.0.p
        } else {
            let da = self.digits(a);
            let db = self.digits(b);
            let prod = fp_poly_mul(&da, &db, self.0.p);
            let rem = fp_poly_rem(&prod, &self.0.modulus, self.0.p);
            self.from_digits(&rem)
        }
    }

    /// Square-and-multiply; `pow(a, 0) = 1` for every a, so that monomial
    /// evaluation treats `x^0` as the constant 1 even at x = 0.
    pub fn pow(&self, a: u64, e: u64) -> u64 {
        let mut result = 1;
        let mut base = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        result
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.0.q - 2))
    }

    /// C(m, r) reduced into the field via Lucas' theorem on base-p digits.
    /// The result lies in [0, p) and is its own encoding as a field element.
    pub fn binom(&self, m: u64, r: u64) -> u64 {
        if r > m {
            return 0;
        }
        let p = self.0.p;
        let (mut m, mut r) = (m, r);
        let mut acc = 1;
        while r > 0 || m > 0 {
            let (md, rd) = (m % p, r % p);
            if rd > md {
                return 0;
            }
            acc = acc * self.digit_binom(md, rd) % p;
            if acc == 0 {
                return 0;
            }
            m /= p;
            r /= p;
        }
        acc
    }

    /// C(a, b) mod p for digits a, b < p.
    fn digit_binom(&self, a: u64, b: u64) -> u64 {
        let p = self.0.p;
        if b > a {
            return 0;
        }
        if !self.0.pascal.is_empty() {
            return self.0.pascal[(a * p + b) as usize];
        }
        // Multiplicative formula mod p; exact because b < p keeps every
        // factor t invertible.
        let mut acc = 1u64;
        for t in 1..=b {
            let num = (a - b + t) % p;
            acc = acc * num % p;
            acc = acc * mod_pow(t % p, p - 2, p) % p;
        }
        acc
    }

    /// Base-p digits of an element, length k, least significant first.
    pub fn digits(&self, a: u64) -> Vec<u64> {
        let mut out = vec![0; self.0.k as usize];
        let mut x = a;
        for d in out.iter_mut() {
            *d = x % self.0.p;
            x /= self.0.p;
        }
        out
    }

    pub fn from_digits(&self, digits: &[u64]) -> u64 {
        let mut out = 0;
        for &d in digits.iter().rev() {
            debug_assert!(d < self.0.p);
            out = out * self.0.p + d;
        }
        out
    }

    pub(crate) fn require_same(&self, other: &Field) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::MixedFields)
        }
    }
}

/// An element paired with its field; arithmetic checks field agreement.
#[derive(Clone, Debug)]
pub struct FieldElement {
    value: u64,
    field: Field,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn try_add(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.field.require_same(&rhs.field)?;
        Ok(self.field.elem(self.field.add(self.value, rhs.value)))
    }

    pub fn try_sub(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.field.require_same(&rhs.field)?;
        Ok(self.field.elem(self.field.sub(self.value, rhs.value)))
    }

    pub fn try_mul(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.field.require_same(&rhs.field)?;
        Ok(self.field.elem(self.field.mul(self.value, rhs.value)))
    }

    pub fn neg(&self) -> FieldElement {
        self.field.elem(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(self.field.elem(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        self.field.elem(self.field.pow(self.value, e))
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.value == other.value
    }
}

impl Eq for FieldElement {}

impl std::ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.try_add(rhs).expect("mixed fields")
    }
}

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.try_sub(rhs).expect("mixed fields")
    }
}

impl std::ops::Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.try_mul(rhs).expect("mixed fields")
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

fn mod_pow(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Splits q = p^k with p prime, or None if q is not a prime power.
pub fn prime_power_split(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut rest = q;
            let mut k = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                k += 1;
            }
            return if rest == 1 { Some((p, k)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

fn pascal_table(p: u64) -> Vec<u64> {
    let n = p as usize;
    let mut t = vec![0u64; n * n];
    for i in 0..n {
        t[i * n] = 1;
        for j in 1..=i {
            t[i * n + j] = (t[(i - 1) * n + j - 1] + t[(i - 1) * n + j]) % p;
        }
    }
    t
}

/// Degree of an F_p polynomial given constant-first coefficients.
fn fp_poly_deg(poly: &[u64]) -> Option<usize> {
    poly.iter().rposition(|&c| c != 0)
}

fn fp_poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ca) in a.iter().enumerate() {
        if ca == 0 {
            continue;
        }
        for (j, &cb) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ca * cb) % p;
        }
    }
    out
}

/// Remainder of `dividend` modulo the monic `divisor` over F_p.
fn fp_poly_rem(dividend: &[u64], divisor: &[u64], p: u64) -> Vec<u64> {
    let ddeg = fp_poly_deg(divisor).expect("divisor must be nonzero");
    debug_assert_eq!(divisor[ddeg], 1, "divisor must be monic");
    let mut rem = dividend.to_vec();
    while let Some(rdeg) = fp_poly_deg(&rem) {
        if rdeg < ddeg {
            break;
        }
        let lead = rem[rdeg];
        let shift = rdeg - ddeg;
        for (i, &c) in divisor.iter().enumerate().take(ddeg + 1) {
            let sub = lead * c % p;
            let idx = i + shift;
            rem[idx] = (rem[idx] + p - sub) % p;
        }
    }
    rem.truncate(ddeg);
    rem.resize(ddeg, 0);
    rem
}

/// Trial division against every monic polynomial of degree <= k/2.
fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let k = fp_poly_deg(poly).unwrap_or(0);
    if k == 0 {
        return false;
    }
    if poly[0] == 0 {
        // x divides it.
        return k == 1;
    }
    for d in 1..=(k / 2) {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut divisor = vec![0u64; d + 1];
            let mut x = idx;
            for c in divisor.iter_mut().take(d) {
                *c = x % p;
                x /= p;
            }
            divisor[d] = 1;
            let rem = fp_poly_rem(poly, &divisor, p);
            if fp_poly_deg(&rem).is_none() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of degree k over F_p,
/// coefficients compared from the constant term upward.
fn smallest_irreducible(p: u64, k: u32) -> Vec<u64> {
    let k = k as usize;
    let total = p.pow(k as u32);
    for t in 0..total {
        // Decompose t with the constant coefficient as the most significant
        // digit, so ascending t enumerates candidates in the required order.
        let mut cand = vec![0u64; k + 1];
        let mut x = t;
        for i in (0..k).rev() {
            cand[i] = x % p;
            x /= p;
        }
        cand[k] = 1;
        if is_irreducible(&cand, p) {
            return cand;
        }
    }
    unreachable!("an irreducible of every degree exists over F_p")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constructs_prime_and_extension_fields() {
        let f5 = Field::new(5).unwrap();
        assert_eq!((f5.p(), f5.k(), f5.q()), (5, 1, 5));
        assert!(f5.modulus().is_none());

        let f4 = Field::new(4).unwrap();
        assert_eq!((f4.p(), f4.k(), f4.q()), (2, 2, 4));
        // x^2 + x + 1, the unique monic irreducible quadratic over F_2.
        assert_eq!(f4.modulus(), Some(&[1, 1, 1][..]));

        let f9 = Field::new(9).unwrap();
        // x^2 + 1 has no root mod 3 and precedes every other candidate.
        assert_eq!(f9.modulus(), Some(&[1, 0, 1][..]));
    }

    #[test]
    fn rejects_non_prime_powers() {
        assert_eq!(Field::new(6).unwrap_err(), Error::NotAPrimePower(6));
        assert_eq!(Field::new(0).unwrap_err(), Error::NotAPrimePower(0));
        assert_eq!(Field::new(1).unwrap_err(), Error::NotAPrimePower(1));
        assert_eq!(Field::new(12).unwrap_err(), Error::NotAPrimePower(12));
    }

    #[test]
    fn rejects_orders_beyond_the_cap() {
        assert!(Field::new(MAX_FIELD_ORDER).is_ok());
        assert!(matches!(
            Field::new(1 << 21),
            Err(Error::SizeLimitExceeded(_))
        ));
    }

    #[test]
    fn rejects_invalid_modulus() {
        // x^2 + 1 = (x + 1)^2 over F_2.
        assert!(matches!(
            Field::from_parts(4, Some(&[1, 0, 1])),
            Err(Error::InvalidModulus(_))
        ));
        assert!(matches!(
            Field::from_parts(4, Some(&[1, 1, 2])),
            Err(Error::InvalidModulus(_))
        ));
        assert!(Field::from_parts(4, Some(&[1, 1, 1])).is_ok());
        assert!(Field::from_parts(5, None).is_ok());
    }

    #[test]
    fn extension_multiplication_reduces_by_modulus() {
        let f4 = Field::new(4).unwrap();
        // Independent digit-level check: x * x = x^2 = x + 1 mod x^2+x+1.
        let prod = fp_poly_mul(&[0, 1], &[0, 1], 2);
        let rem = fp_poly_rem(&prod, &[1, 1, 1], 2);
        assert_eq!(f4.from_digits(&rem), 3);
        assert_eq!(f4.mul(2, 2), 3);

        let f5 = Field::new(5).unwrap();
        assert_eq!(f5.mul(2, 3), 1);
    }

    #[test]
    fn additive_inverses_cancel() {
        for q in [2, 3, 4, 5, 7, 8, 9] {
            let f = Field::new(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
            }
        }
    }

    #[test]
    fn inverses_and_powers() {
        let f5 = Field::new(5).unwrap();
        assert_eq!(f5.inv(2).unwrap(), 3);
        assert_eq!(f5.inv(0).unwrap_err(), Error::DivisionByZero);

        // Exhaustive oracle: the inverse of x in GF(4) is the unique b with
        // x * b = 1.
        let f4 = Field::new(4).unwrap();
        let witnesses: Vec<u64> = f4.elements().filter(|&b| f4.mul(2, b) == 1).collect();
        assert_eq!(witnesses, vec![3]);
        assert_eq!(f4.inv(2).unwrap(), 3);

        let f7 = Field::new(7).unwrap();
        assert_eq!(f7.pow(3, 6), 1);
        assert_eq!(f7.pow(0, 0), 1);
        assert_eq!(f7.pow(0, 3), 0);
    }

    #[test]
    fn element_order_is_encoding_order() {
        let f2 = Field::new(2).unwrap();
        assert_eq!(f2.elements().collect::<Vec<_>>(), vec![0, 1]);
        let f4 = Field::new(4).unwrap();
        assert_eq!(f4.elements().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        let f3 = Field::new(3).unwrap();
        assert_eq!(f3.elements().collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn field_axioms_exhaustive_small_orders() {
        for q in [2, 3, 4, 5, 7, 8, 9] {
            let f = Field::new(q).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn field_axioms_random_larger_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [16, 25, 27, 32, 49, 64, 81, 121, 128] {
            let f = Field::new(q).unwrap();
            for _ in 0..200 {
                let a = rng.gen_range(0..q);
                let b = rng.gen_range(0..q);
                let c = rng.gen_range(0..q);
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.mul(a, b), f.mul(b, a));
            }
        }
    }

    #[test]
    fn multiplicative_group_has_order_q_minus_one() {
        for q in [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32, 37, 41, 43, 47, 49]
        {
            let f = Field::new(q).unwrap();
            for a in 1..q {
                assert_eq!(f.pow(a, q - 1), 1, "a={a} in GF({q})");
            }
        }
    }

    #[test]
    fn lucas_binomials_match_pascal_recursion() {
        for p in [2u64, 3, 5, 7] {
            let f = Field::new(p).unwrap();
            // Oracle: plain Pascal recursion mod p up to 64.
            let mut table = vec![vec![0u64; 65]; 65];
            for m in 0..=64usize {
                table[m][0] = 1;
                for r in 1..=m {
                    table[m][r] = (table[m - 1][r - 1] + table[m - 1][r]) % p;
                }
            }
            for m in 0..=64u64 {
                for r in 0..=64u64 {
                    let expect = if r > m {
                        0
                    } else {
                        table[m as usize][r as usize]
                    };
                    assert_eq!(f.binom(m, r), expect, "C({m},{r}) mod {p}");
                }
            }
        }
    }

    #[test]
    fn binomials_without_pascal_table() {
        // 127 > PASCAL_LIMIT exercises the multiplicative fallback.
        let f = Field::new(127).unwrap();
        assert_eq!(f.binom(10, 3), 120);
        assert_eq!(f.binom(130, 2), {
            // Lucas: 130 = (1, 3) base 127, 2 = (0, 2): C(1,0)*C(3,2) = 3.
            3
        });
        assert_eq!(f.binom(5, 9), 0);
    }

    #[test]
    fn mixed_fields_are_rejected() {
        let f5 = Field::new(5).unwrap();
        let f7 = Field::new(7).unwrap();
        let a = f5.elem(2);
        let b = f7.elem(2);
        assert_eq!(a.try_add(&b).unwrap_err(), Error::MixedFields);
        assert_eq!(a.try_mul(&b).unwrap_err(), Error::MixedFields);
        let c = f5.elem(4);
        assert_eq!((&a + &c).value(), 1);
        assert_eq!((&a * &c).value(), 3);
        assert_eq!((&a - &a).value(), 0);
    }

    #[test]
    fn random_elementwise_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in [4, 8, 9, 25, 27] {
            let f = Field::new(q).unwrap();
            for _ in 0..100 {
                let a = rng.gen_range(1..q);
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                let e = rng.gen_range(0..50);
                let mut slow = 1;
                for _ in 0..e {
                    slow = f.mul(slow, a);
                }
                assert_eq!(f.pow(a, e), slow);
            }
        }
    }
}
