//! Dense univariate polynomials over a [`BinaryField`].

use std::fmt;
use std::ops::{Add, Mul, Sub};

use super::{BinaryField, FieldElem, FieldError};

/// Polynomial with coefficients in `field`, constant term first.
///
/// The coefficient vector is kept normalized (no trailing zeros), so the zero
/// polynomial has an empty coefficient vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    field: BinaryField,
    coeffs: Vec<u32>,
}

impl Poly {
    pub(crate) fn from_raw(field: BinaryField, coeffs: Vec<u32>) -> Self {
        debug_assert!(coeffs.iter().all(|&c| c < field.order()));
        let mut p = Self { field, coeffs };
        p.normalize();
        p
    }

    /// Build from integer coefficients (constant term first).
    pub fn from_values(field: BinaryField, coeffs: &[u32]) -> Result<Self, FieldError> {
        for &c in coeffs {
            field.elem(c)?;
        }
        Ok(Self::from_raw(field, coeffs.to_vec()))
    }

    pub fn from_elems(field: BinaryField, coeffs: &[FieldElem]) -> Self {
        let raw = coeffs
            .iter()
            .map(|c| {
                assert_eq!(c.field(), field, "field mismatch");
                c.value()
            })
            .collect();
        Self::from_raw(field, raw)
    }

    pub fn zero(field: BinaryField) -> Self {
        Self {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: BinaryField) -> Self {
        Self {
            field,
            coeffs: vec![1],
        }
    }

    /// The indeterminate `X`.
    pub fn x(field: BinaryField) -> Self {
        Self {
            field,
            coeffs: vec![0, 1],
        }
    }

    /// `c * X^n`.
    pub fn monomial(c: FieldElem, n: usize) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[n] = c.value();
        Self::from_raw(c.field(), coeffs)
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> BinaryField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `X^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> FieldElem {
        self.field
            .elem_unchecked(self.coeffs.get(i).copied().unwrap_or(0))
    }

    pub fn coeff_values(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn coeffs(&self) -> Vec<FieldElem> {
        self.coeffs
            .iter()
            .map(|&c| self.field.elem_unchecked(c))
            .collect()
    }

    pub fn leading_coeff(&self) -> Option<FieldElem> {
        self.coeffs.last().map(|&c| self.field.elem_unchecked(c))
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn make_monic(&self) -> Self {
        match self.leading_coeff() {
            None => self.clone(),
            Some(lc) => self.scale(lc.inverse().expect("nonzero leading coefficient")),
        }
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        let coeffs = self.coeffs().into_iter().map(|a| (a * c).value()).collect();
        Self::from_raw(self.field, coeffs)
    }

    pub fn eval(&self, x: FieldElem) -> FieldElem {
        let mut acc = self.field.zero();
        for c in self.coeffs().into_iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
            .collect();
        Self::from_raw(self.field, coeffs)
    }

    /// Apply `a -> a^(2^times)` to every coefficient.
    pub fn frobenius(&self, times: u32) -> Self {
        let coeffs = self
            .coeffs()
            .into_iter()
            .map(|c| c.frobenius(times).value())
            .collect();
        Self::from_raw(self.field, coeffs)
    }

    /// Coefficient-wise canonical embedding.
    pub fn embed(&self, target: BinaryField) -> Result<Self, FieldError> {
        let coeffs = self
            .coeffs()
            .into_iter()
            .map(|c| c.embed(target).map(|e| e.value()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_raw(target, coeffs))
    }

    /// Coefficient-wise restriction to a subfield, if every coefficient lies there.
    pub fn restrict(&self, sub: BinaryField) -> Option<Self> {
        let coeffs = self
            .coeffs()
            .into_iter()
            .map(|c| c.restrict(sub).map(|e| e.value()))
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_raw(sub, coeffs))
    }

    /// Quotient and remainder. Panics on division by zero.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert_eq!(self.field, divisor.field, "field mismatch");
        let dd = divisor.degree().expect("division by the zero polynomial");
        let mut rem: Vec<FieldElem> = self.coeffs();
        if rem.len() <= dd {
            return (Poly::zero(self.field), self.clone());
        }
        let inv_lead = divisor.leading_coeff().unwrap().inverse().unwrap();
        let dcoeffs = divisor.coeffs();
        let mut quot = vec![self.field.zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd] * inv_lead;
            if c.is_zero() {
                continue;
            }
            quot[i] = c;
            for (j, &d) in dcoeffs.iter().enumerate() {
                rem[i + j] += c * d;
            }
        }
        rem.truncate(dd);
        (
            Poly::from_elems(self.field, &quot),
            Poly::from_elems(self.field, &rem),
        )
    }

    pub fn rem(&self, divisor: &Poly) -> Poly {
        self.div_rem(divisor).1
    }

    /// Exact quotient, or `None` if `divisor` does not divide `self`.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(divisor);
        r.is_zero().then_some(q)
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.rem(self).is_zero()
    }

    /// Monic greatest common divisor (zero only if both inputs are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.make_monic()
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// `self^e mod modulus`.
    pub fn pow_mod(&self, e: u128, modulus: &Poly) -> Poly {
        let mut base = self.rem(modulus);
        let mut acc = Poly::one(self.field).rem(modulus);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = (&acc * &base).rem(modulus);
            }
            base = (&base * &base).rem(modulus);
            e >>= 1;
        }
        acc
    }

    /// `self^(2^times) mod modulus` by repeated squaring.
    pub fn pow_two_power_mod(&self, times: u32, modulus: &Poly) -> Poly {
        let mut acc = self.rem(modulus);
        for _ in 0..times {
            acc = (&acc * &acc).rem(modulus);
        }
        acc
    }

    /// Square root of a polynomial that is a perfect square (all odd
    /// coefficients zero).
    pub(crate) fn sqrt(&self) -> Poly {
        debug_assert!(self.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0));
        let coeffs = self
            .coeffs()
            .into_iter()
            .step_by(2)
            .map(|c| c.sqrt().value())
            .collect();
        Poly::from_raw(self.field, coeffs)
    }

    /// Reverse the coefficient list (reciprocal polynomial relative to the degree).
    pub fn reversed(&self) -> Poly {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Poly::from_raw(self.field, coeffs)
    }

    /// True when the polynomial is irreducible over its own field: no
    /// common factor with `X^(q^d) - X` for `d <= deg/2`.
    pub fn is_irreducible(&self) -> bool {
        let Some(n) = self.degree() else {
            return false;
        };
        if n == 0 {
            return false;
        }
        let f = self.make_monic();
        let k = self.field.degree();
        let x = Poly::x(self.field);
        let mut h = x.clone();
        for _ in 1..=(n / 2) {
            h = h.pow_two_power_mod(k, &f);
            if !f.gcd(&(&h - &x)).is_one() {
                return false;
            }
        }
        true
    }

    /// Exhaustive root search in `field` (which must contain the coefficient
    /// field), each root repeated according to its multiplicity.
    pub fn roots_in(&self, field: BinaryField) -> Result<Vec<FieldElem>, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroPolynomial);
        }
        let f = self.embed(field)?;
        let mut out = Vec::new();
        for a in field.elements() {
            let lin = Poly::from_elems(field, &[a, field.one()]);
            let mut g = f.clone();
            while let Some(q) = g.exact_div(&lin) {
                out.push(a);
                g = q;
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} over {:?}", self.field)
    }
}

/// Printed in descending powers of `x`, e.g. `x^4+x^3+1`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms = Vec::new();
        for (i, c) in self.coeffs().into_iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let term = if c.is_one() {
                if mono.is_empty() {
                    "1".to_string()
                } else {
                    mono
                }
            } else {
                let cs = c.to_string();
                let cs = if cs.contains('+') { format!("({cs})") } else { cs };
                if mono.is_empty() {
                    cs
                } else {
                    format!("{cs}*{mono}")
                }
            };
            terms.push(term);
        }
        write!(f, "{}", terms.join("+"))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.field, rhs.field, "field mismatch");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0) ^ rhs.coeffs.get(i).unwrap_or(&0))
            .collect();
        Poly::from_raw(self.field, coeffs)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    // characteristic 2
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: &Poly) -> Poly {
        self + rhs
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.field, rhs.field, "field mismatch");
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(self.field);
        }
        let a = self.coeffs();
        let b = rhs.coeffs();
        let mut out = vec![self.field.zero(); a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        Poly::from_elems(self.field, &out)
    }
}
