//! Binary finite fields `F_{2^k}` for `1 <= k <= 16`.
//!
//! Every field is defined by the Conway polynomial of its degree, so the
//! family forms a compatible tower: when `d | m` the canonical generator of
//! `F_{2^d}` is sent to the `(2^m - 1)/(2^d - 1)`-th power of the canonical
//! generator of `F_{2^m}`. Enlarging a working field is then a plain [`FieldElem::embed`].
//!
//! Elements are coefficient bit vectors (bit `i` is the coefficient of `x^i`),
//! multiplied carrylessly and reduced by the defining polynomial.

mod factor;
mod poly;

pub use factor::Factorization;
pub use poly::Poly;

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub};

use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Conway polynomials over `F_2` for degrees `1..=16`, bit `i` = coefficient of `x^i`.
const CONWAY: [u32; 17] = [
    0,
    0b11,
    0b111,
    0b1011,
    0b10011,
    0b100101,
    0b1011011,
    0b1000_0011,
    0b1_0001_1101,
    0b10_0001_0001,
    0b100_0110_1111,
    0b1000_0000_0101,
    0b1_0000_1110_1011,
    0b10_0000_0001_1011,
    0b100_0000_1010_1001,
    0b1000_0000_0011_0101,
    0b1_0000_0000_0010_1101,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field degree {0} outside 1..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("value {value} is not an element of F_2^{degree}")]
    ValueOutOfRange { value: u32, degree: u32 },
    #[error("cannot embed F_2^{from} into F_2^{to}: degree does not divide")]
    IncompatibleDegrees { from: u32, to: u32 },
    #[error("operation on the zero polynomial")]
    ZeroPolynomial,
}

/// The canonical field of `2^degree` elements.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryField {
    degree: u32,
    modulus: u32,
}

impl fmt::Debug for BinaryField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_2^{}", self.degree)
    }
}

impl fmt::Display for BinaryField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", 1u32 << self.degree)
    }
}

impl BinaryField {
    pub fn new(degree: u32) -> Result<Self, FieldError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(FieldError::DegreeOutOfRange(degree));
        }
        Ok(Self {
            degree,
            modulus: CONWAY[degree as usize],
        })
    }

    /// `F_2`.
    pub fn prime() -> Self {
        Self::new(1).expect("degree 1")
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Number of elements.
    pub fn order(&self) -> u32 {
        1 << self.degree
    }

    /// Defining polynomial as a bit mask including the leading term.
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Defining polynomial as a polynomial over `F_2`.
    pub fn defining_poly(&self) -> Poly {
        let f2 = Self::prime();
        let coeffs = (0..=self.degree).map(|i| (self.modulus >> i) & 1).collect();
        Poly::from_raw(f2, coeffs)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem {
            field: *self,
            value: 0,
        }
    }

    pub fn one(&self) -> FieldElem {
        FieldElem {
            field: *self,
            value: 1,
        }
    }

    /// The class of `x`, a root of the defining polynomial. Primitive, since
    /// Conway polynomials are primitive.
    pub fn generator(&self) -> FieldElem {
        self.reduce_value(0b10)
    }

    pub fn elem(&self, value: u32) -> Result<FieldElem, FieldError> {
        if value >= self.order() {
            return Err(FieldError::ValueOutOfRange {
                value,
                degree: self.degree,
            });
        }
        Ok(FieldElem { field: *self, value })
    }

    /// Element from a value already known to be in range.
    pub(crate) fn elem_unchecked(&self, value: u32) -> FieldElem {
        debug_assert!(value < self.order());
        FieldElem { field: *self, value }
    }

    fn reduce_value(&self, mut v: u32) -> FieldElem {
        let k = self.degree;
        let top = 32 - v.leading_zeros();
        if top > k {
            for i in (k..top).rev() {
                if (v >> i) & 1 == 1 {
                    v ^= self.modulus << (i - k);
                }
            }
        }
        FieldElem { field: *self, value: v }
    }

    /// All elements in increasing bit-value order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.order()).map(move |v| self.elem_unchecked(v))
    }

    /// True when `F_2^other` embeds into this field.
    pub fn contains_degree(&self, other: u32) -> bool {
        other != 0 && self.degree.is_multiple_of(other)
    }

    /// Smallest canonical field containing both.
    pub fn compositum(&self, other: &BinaryField) -> Result<BinaryField, FieldError> {
        BinaryField::new(lcm(self.degree, other.degree))
    }

    /// Canonical element of multiplicative order `n` (requires `n | 2^k - 1`).
    pub fn root_of_unity(&self, n: u64) -> Option<FieldElem> {
        let q1 = (self.order() - 1) as u64;
        if n == 0 || !q1.is_multiple_of(n) {
            return None;
        }
        Some(self.generator().pow(q1 / n))
    }

    fn mul_values(&self, a: u32, b: u32) -> u32 {
        let mut prod: u32 = 0;
        let mut b = b;
        let mut shift = 0;
        while b != 0 {
            if b & 1 == 1 {
                prod ^= a << shift;
            }
            b >>= 1;
            shift += 1;
        }
        self.reduce_value(prod).value
    }
}

pub(crate) fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

/// Element of a [`BinaryField`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem {
    field: BinaryField,
    value: u32,
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{:?}", self.value, self.field)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value <= 1 {
            return write!(f, "{}", self.value);
        }
        let name = match self.field.degree {
            2 => "w",
            3 => "v",
            _ => "a",
        };
        let mut terms = Vec::new();
        for i in (0..self.field.degree).rev() {
            if (self.value >> i) & 1 == 1 {
                terms.push(match i {
                    0 => "1".to_string(),
                    1 => name.to_string(),
                    _ => format!("{name}^{i}"),
                });
            }
        }
        write!(f, "{}", terms.join("+"))
    }
}

impl FieldElem {
    pub fn field(&self) -> BinaryField {
        self.field
    }

    /// Coefficient bits, low bit = constant term.
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_one(&self) -> bool {
        self.value == 1
    }

    pub fn square(self) -> Self {
        self * self
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    pub fn inverse(self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.pow(self.field.order() as u64 - 2))
        }
    }

    /// Apply the absolute Frobenius `a -> a^2` `times` times.
    pub fn frobenius(self, times: u32) -> Self {
        let mut a = self;
        for _ in 0..(times % self.field.degree) {
            a = a.square();
        }
        a
    }

    /// Square root (the inverse Frobenius).
    pub fn sqrt(self) -> Self {
        self.frobenius(self.field.degree - 1)
    }

    /// `[a, a^2, a^4, ...]` up to the first repetition.
    pub fn frobenius_orbit(self) -> Vec<FieldElem> {
        let mut orbit = vec![self];
        let mut next = self.square();
        while next != self {
            orbit.push(next);
            next = next.square();
        }
        orbit
    }

    /// Degree of the smallest subfield containing this element.
    pub fn degree_over_f2(&self) -> u32 {
        self.frobenius_orbit().len() as u32
    }

    /// True when the element lies in the subfield `F_2^d` (requires `d | k`).
    pub fn in_subfield(&self, d: u32) -> bool {
        self.field.contains_degree(d) && self.frobenius(d) == *self
    }

    /// Minimal polynomial over `F_2`.
    pub fn minimal_poly(&self) -> Poly {
        let mut acc = Poly::one(self.field);
        for r in self.frobenius_orbit() {
            acc = &acc * &Poly::from_elems(self.field, &[r, self.field.one()]);
        }
        let f2 = BinaryField::prime();
        let coeffs = acc.coeff_values().iter().map(|&c| {
            debug_assert!(c <= 1);
            c
        });
        Poly::from_raw(f2, coeffs.collect())
    }

    /// Multiplicative order (`None` for zero).
    pub fn multiplicative_order(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let n = (self.field.order() - 1) as u64;
        let mut ord = n;
        for p in prime_factors(n) {
            while ord.is_multiple_of(p) && self.pow(ord / p).is_one() {
                ord /= p;
            }
        }
        Some(ord)
    }

    /// Image under the canonical embedding into `target`.
    pub fn embed(self, target: BinaryField) -> Result<FieldElem, FieldError> {
        let from = self.field.degree;
        if !target.contains_degree(from) {
            return Err(FieldError::IncompatibleDegrees {
                from,
                to: target.degree,
            });
        }
        if from == target.degree {
            return Ok(self);
        }
        let image_gen = embedded_generator(self.field, target);
        let mut acc = target.zero();
        let mut power = target.one();
        for i in 0..from {
            if (self.value >> i) & 1 == 1 {
                acc += power;
            }
            power *= image_gen;
        }
        Ok(acc)
    }

    /// Inverse of [`embed`](Self::embed): the preimage in `sub`, if the element lies there.
    pub fn restrict(self, sub: BinaryField) -> Option<FieldElem> {
        if !self.field.contains_degree(sub.degree) || !self.in_subfield(sub.degree) {
            return None;
        }
        if sub.degree == self.field.degree {
            return Some(self);
        }
        // linear solve over F_2 on the image of the power basis of `sub`
        let image_gen = embedded_generator(sub, self.field);
        let mut columns = Vec::with_capacity(sub.degree as usize);
        let mut power = self.field.one();
        for _ in 0..sub.degree {
            columns.push(power.value);
            power *= image_gen;
        }
        solve_f2_combination(&columns, self.value).map(|v| sub.elem_unchecked(v))
    }
}

/// Canonical image of the generator of `from` inside `to`.
fn embedded_generator(from: BinaryField, to: BinaryField) -> FieldElem {
    let exp = ((to.order() - 1) / (from.order() - 1)) as u64;
    to.generator().pow(exp)
}

/// Find bits `c` with `xor_{i: c_i = 1} columns[i] == target`.
fn solve_f2_combination(columns: &[u32], target: u32) -> Option<u32> {
    // Gaussian elimination on (column, tag) pairs
    let mut basis: Vec<(u32, u32)> = Vec::new();
    for (i, &c) in columns.iter().enumerate() {
        let mut v = (c, 1u32 << i);
        for &(b, tag) in &basis {
            if v.0 ^ b < v.0 {
                v = (v.0 ^ b, v.1 ^ tag);
            }
        }
        if v.0 != 0 {
            basis.push(v);
            basis.sort_by(|a, b| b.0.cmp(&a.0));
        }
    }
    let mut t = (target, 0u32);
    for &(b, tag) in &basis {
        if t.0 ^ b < t.0 {
            t = (t.0 ^ b, t.1 ^ tag);
        }
    }
    (t.0 == 0).then_some(t.1)
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: FieldElem) -> FieldElem {
        assert_eq!(self.field, rhs.field, "field mismatch");
        FieldElem {
            field: self.field,
            value: self.value ^ rhs.value,
        }
    }
}

impl AddAssign for FieldElem {
    fn add_assign(&mut self, rhs: FieldElem) {
        *self = *self + rhs;
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: FieldElem) -> FieldElem {
        self + rhs
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        self
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: FieldElem) -> FieldElem {
        assert_eq!(self.field, rhs.field, "field mismatch");
        FieldElem {
            field: self.field,
            value: self.field.mul_values(self.value, rhs.value),
        }
    }
}

impl MulAssign for FieldElem {
    fn mul_assign(&mut self, rhs: FieldElem) {
        *self = *self * rhs;
    }
}

impl Div for FieldElem {
    type Output = FieldElem;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: FieldElem) -> FieldElem {
        self * rhs.inverse().expect("division by zero in binary field")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_primitive(field: BinaryField) -> bool {
        field.generator().multiplicative_order() == Some((field.order() - 1) as u64)
    }

    #[test]
    fn canonical_table_is_irreducible_and_primitive() {
        for k in 1..=MAX_DEGREE {
            let field = BinaryField::new(k).unwrap();
            assert!(field.defining_poly().is_irreducible(), "degree {k}");
            assert!(is_primitive(field), "degree {k}");
        }
    }

    #[test]
    fn canonical_table_is_embedding_compatible() {
        // the embedded generator must satisfy the smaller field's Conway polynomial
        for m in 1..=MAX_DEGREE {
            for d in (1..=m).filter(|d| m % d == 0) {
                let big = BinaryField::new(m).unwrap();
                let small = BinaryField::new(d).unwrap();
                let image = embedded_generator(small, big);
                let minpoly = small.defining_poly().embed(big).unwrap();
                assert!(minpoly.eval(image).is_zero(), "F_2^{d} -> F_2^{m}");
            }
        }
    }

    #[test]
    fn field_create_examples() {
        assert!(BinaryField::new(0).is_err());
        assert!(BinaryField::new(17).is_err());
        let f2 = BinaryField::new(1).unwrap();
        assert_eq!(f2.order(), 2);
        assert_eq!(f2.generator(), f2.one());

        let f4 = BinaryField::new(2).unwrap();
        let w = f4.generator();
        assert!((w * w + w + f4.one()).is_zero());

        let f8 = BinaryField::new(3).unwrap();
        let v = f8.generator();
        assert!((v.pow(3) + v + f8.one()).is_zero());
        assert_eq!(BinaryField::new(3).unwrap(), f8);
    }

    #[test]
    fn frobenius_additivity_exhaustive() {
        for k in 1..=8 {
            let field = BinaryField::new(k).unwrap();
            for a in field.elements() {
                for b in field.elements() {
                    assert_eq!((a + b).square(), a.square() + b.square());
                }
            }
        }
    }

    #[test]
    fn field_axioms_small() {
        for k in 1..=5 {
            let field = BinaryField::new(k).unwrap();
            for a in field.elements() {
                assert!((a + a).is_zero());
                if !a.is_zero() {
                    assert!((a * a.inverse().unwrap()).is_one());
                }
                for b in field.elements() {
                    for c in field.elements() {
                        assert_eq!(a * (b + c), a * b + a * c);
                        assert_eq!((a * b) * c, a * (b * c));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_orbit_examples() {
        let f2 = BinaryField::prime();
        assert_eq!(f2.one().frobenius_orbit(), vec![f2.one()]);

        let f4 = BinaryField::new(2).unwrap();
        let w = f4.generator();
        assert_eq!(w.frobenius_orbit(), vec![w, w + f4.one()]);

        let f8 = BinaryField::new(3).unwrap();
        let v = f8.generator();
        let orbit = v.frobenius_orbit();
        assert_eq!(orbit.len(), 3);
        assert_eq!(orbit, vec![v, v * v, v * v + v]);
    }

    #[test]
    fn orbit_length_divides_degree() {
        let f64_ = BinaryField::new(6).unwrap();
        for a in f64_.elements() {
            assert_eq!(6 % a.frobenius_orbit().len(), 0);
        }
    }

    #[test]
    fn embed_examples() {
        let f2 = BinaryField::prime();
        let f4 = BinaryField::new(2).unwrap();
        let f8 = BinaryField::new(3).unwrap();
        let f64_ = BinaryField::new(6).unwrap();
        for a in f2.elements() {
            assert_eq!(a.embed(f64_).unwrap().value(), a.value());
        }
        let w = f4.generator().embed(f64_).unwrap();
        assert!((w * w + w + f64_.one()).is_zero());
        assert_ne!(w, f64_.one());

        // the embedded root of x^3+x+1 is the 9th power of the F64 generator
        let v = f8.generator().embed(f64_).unwrap();
        assert_eq!(v, f64_.generator().pow(9));
        assert!((v.pow(3) + v + f64_.one()).is_zero());
        // exhaustive: exactly three roots of x^3+x+1 in F64, the Frobenius orbit of v
        let roots: Vec<_> = f64_
            .elements()
            .filter(|x| (x.pow(3) + *x + f64_.one()).is_zero())
            .collect();
        let mut orbit = v.frobenius_orbit();
        orbit.sort();
        assert_eq!(roots, orbit);

        assert_eq!(
            f8.generator().embed(f4),
            Err(FieldError::IncompatibleDegrees { from: 3, to: 2 })
        );
    }

    #[test]
    fn embed_is_ring_homomorphism_and_composes() {
        let f4 = BinaryField::new(2).unwrap();
        let f16 = BinaryField::new(4).unwrap();
        let f256 = BinaryField::new(8).unwrap();
        for a in f4.elements() {
            let direct = a.embed(f256).unwrap();
            let staged = a.embed(f16).unwrap().embed(f256).unwrap();
            assert_eq!(direct, staged);
            for b in f4.elements() {
                assert_eq!((a * b).embed(f16).unwrap(), a.embed(f16).unwrap() * b.embed(f16).unwrap());
                assert_eq!((a + b).embed(f16).unwrap(), a.embed(f16).unwrap() + b.embed(f16).unwrap());
            }
        }
        for a in f16.elements() {
            let img = a.embed(f256).unwrap();
            assert_eq!(img.restrict(f16), Some(a));
            assert_eq!(a.minimal_poly(), img.minimal_poly());
        }
    }

    #[test]
    fn restrict_rejects_elements_outside_subfield() {
        let f4 = BinaryField::new(2).unwrap();
        let f16 = BinaryField::new(4).unwrap();
        assert_eq!(f16.generator().restrict(f4), None);
    }

    #[test]
    fn roots_of_unity() {
        let f4 = BinaryField::new(2).unwrap();
        let w = f4.root_of_unity(3).unwrap();
        assert_eq!(w.multiplicative_order(), Some(3));
        assert!(f4.root_of_unity(5).is_none());
        let f16 = BinaryField::new(4).unwrap();
        assert_eq!(f16.root_of_unity(5).unwrap().multiplicative_order(), Some(5));
    }
}
