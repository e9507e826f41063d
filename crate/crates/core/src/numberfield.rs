//! Orders in number fields and their reduction modulo primes above 2.
//!
//! An [`Order`] is a free Z-module with basis `b_0 = 1, b_1, ..., b_{d-1}` and
//! an integer multiplication table. Reduction works in the F_2-algebra
//! `A = O/2O`: its idempotents (the kernel of `x -> x^2 + x`) split it into
//! local factors, the nilradical is the kernel of iterated squaring, and each
//! residue field is identified with a canonical [`BinaryField`] by sending a
//! generator to a root of its minimal polynomial.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2k::{BinaryField, FieldElem, FieldError, Poly};
use crate::matf2k::BitMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("defining polynomial is not monic")]
    NotMonic,
    #[error("defining polynomial is reducible: {0}")]
    Reducible(String),
    #[error("inconsistent multiplication table: {0}")]
    BadTable(String),
    #[error("element has an even denominator and cannot be reduced mod 2")]
    EvenDenominator,
    #[error("coordinate vector has length {got}, order has degree {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("no prime above 2 with index {0}")]
    NoSuchIdeal(usize),
    #[error("embedding index {index} out of range for residue degree {f}")]
    NoSuchEmbedding { index: u32, f: u32 },
    #[error("order of degree {0} is too large for the mod-2 engine")]
    TooLarge(usize),
    #[error("order needs a multiplication table or a defining polynomial")]
    MissingData,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Free Z-module with integral basis and multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Order {
    degree: usize,
    /// `table[i][j]` = coordinates of `b_i * b_j`.
    table: Vec<Vec<Vec<i64>>>,
    defining_poly: Option<Vec<i64>>,
}

/// Serialized form of an [`Order`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRepr {
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defining_poly: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral_basis_denominator: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mult_table: Option<Vec<Vec<Vec<i64>>>>,
}

impl Order {
    /// `Z[x]/(minpoly)` with the power basis. Coefficients constant term first.
    pub fn from_poly(minpoly: &[i64]) -> Result<Self, OrderError> {
        let minpoly = trim(minpoly);
        let d = minpoly.len().checked_sub(1).ok_or(OrderError::NotMonic)?;
        if d == 0 || minpoly[d] != 1 {
            return Err(OrderError::NotMonic);
        }
        check_irreducible_hints(&minpoly)?;
        // reduce x^n for n < 2d - 1 to the power basis
        let mut powers: Vec<Vec<i64>> = Vec::with_capacity(2 * d);
        for n in 0..(2 * d).saturating_sub(1) {
            let v = if n < d {
                let mut v = vec![0; d];
                v[n] = 1;
                v
            } else {
                // x^n = x * x^{n-1}
                let prev = &powers[n - 1];
                let mut v = vec![0i64; d];
                for i in 1..d {
                    v[i] = prev[i - 1];
                }
                let top = prev[d - 1];
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi = vi
                        .checked_sub(top.checked_mul(minpoly[i]).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
                v
            };
            powers.push(v);
        }
        let table = (0..d)
            .map(|i| (0..d).map(|j| powers[i + j].clone()).collect())
            .collect();
        Ok(Self {
            degree: d,
            table,
            defining_poly: Some(minpoly),
        })
    }

    /// Order given by a multiplication table; `b_0` must be the identity.
    pub fn from_table(table: Vec<Vec<Vec<i64>>>, defining_poly: Option<Vec<i64>>) -> Result<Self, OrderError> {
        let d = table.len();
        if d == 0 {
            return Err(OrderError::BadTable("empty table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != d || row.iter().any(|c| c.len() != d) {
                return Err(OrderError::BadTable(format!("row {i} has the wrong shape")));
            }
        }
        let order = Self {
            degree: d,
            table,
            defining_poly,
        };
        order.validate()?;
        Ok(order)
    }

    pub fn from_repr(repr: &OrderRepr) -> Result<Self, OrderError> {
        let order = match (&repr.mult_table, &repr.defining_poly) {
            (Some(t), p) => Self::from_table(t.clone(), p.clone())?,
            (None, Some(p)) => Self::from_poly(p)?,
            (None, None) => return Err(OrderError::MissingData),
        };
        if order.degree != repr.degree {
            return Err(OrderError::BadTable(format!(
                "declared degree {} but table has degree {}",
                repr.degree, order.degree
            )));
        }
        Ok(order)
    }

    pub fn to_repr(&self) -> OrderRepr {
        OrderRepr {
            degree: self.degree,
            defining_poly: self.defining_poly.clone(),
            integral_basis_denominator: None,
            mult_table: Some(self.table.clone()),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn defining_poly(&self) -> Option<&[i64]> {
        self.defining_poly.as_deref()
    }

    pub fn table(&self) -> &[Vec<Vec<i64>>] {
        &self.table
    }

    /// Identity, commutativity and associativity on all basis triples.
    fn validate(&self) -> Result<(), OrderError> {
        let d = self.degree;
        for j in 0..d {
            let mut unit = vec![0; d];
            unit[j] = 1;
            if self.table[0][j] != unit {
                return Err(OrderError::BadTable(format!("b_0 * b_{j} != b_{j}")));
            }
        }
        for i in 0..d {
            for j in 0..i {
                if self.table[i][j] != self.table[j][i] {
                    return Err(OrderError::BadTable(format!("b_{i} b_{j} != b_{j} b_{i}")));
                }
            }
        }
        let basis = |i: usize| OrderElem::basis(d, i);
        for i in 1..d {
            for j in 1..d {
                for k in 1..d {
                    let left = self.mul(&self.mul(&basis(i), &basis(j))?, &basis(k))?;
                    let right = self.mul(&basis(i), &self.mul(&basis(j), &basis(k))?)?;
                    if left != right {
                        return Err(OrderError::BadTable(format!("(b_{i} b_{j}) b_{k} != b_{i} (b_{j} b_{k})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn mul(&self, x: &OrderElem, y: &OrderElem) -> Result<OrderElem, OrderError> {
        self.check_len(x)?;
        self.check_len(y)?;
        let d = self.degree;
        let mut out = vec![0i128; d];
        for i in 0..d {
            if x.num[i] == 0 {
                continue;
            }
            for j in 0..d {
                if y.num[j] == 0 {
                    continue;
                }
                let c = x.num[i].checked_mul(y.num[j]).ok_or_else(overflow)?;
                for (k, o) in out.iter_mut().enumerate() {
                    let t = self.table[i][j][k] as i128;
                    if t != 0 {
                        *o = o.checked_add(c.checked_mul(t).ok_or_else(overflow)?).ok_or_else(overflow)?;
                    }
                }
            }
        }
        Ok(OrderElem::new(out, x.den.checked_mul(y.den).ok_or_else(overflow)?))
    }

    fn check_len(&self, x: &OrderElem) -> Result<(), OrderError> {
        if x.num.len() == self.degree {
            Ok(())
        } else {
            Err(OrderError::WrongLength {
                got: x.num.len(),
                expected: self.degree,
            })
        }
    }

    /// Multiplication on `O/2O`: `products[i][j]` = bitmask of `b_i b_j mod 2`.
    fn mod2_table(&self) -> Vec<Vec<u64>> {
        self.table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.iter().enumerate().fold(0u64, |m, (k, &v)| m | (((v & 1) as u64) << k)))
                    .collect()
            })
            .collect()
    }

    /// Maximal ideals of `O/2O` with residue maps, ordered by `(f, e)` and
    /// then by the idempotent's coordinate bits.
    pub fn decompose_mod2(&self) -> Result<Prime2Data, OrderError> {
        let d = self.degree;
        if d > 64 {
            return Err(OrderError::TooLarge(d));
        }
        let alg = Mod2Algebra {
            d,
            table: self.mod2_table(),
        };
        let rad = alg.radical();
        let idempotents = alg.primitive_idempotents();
        let mut ideals = Vec::with_capacity(idempotents.len());
        for (n, &e) in idempotents.iter().enumerate() {
            let local = alg.ideal_basis(e);
            let local_rad: Vec<u64> = rad
                .iter()
                .map(|&r| alg.mul(e, r))
                .collect();
            let local_rad = span_basis(&local_rad);
            let f = local.len() - local_rad.len();
            let images = alg.residue_images(e, &local_rad, f as u32, n as u64)?;
            ideals.push(PrimeIdeal {
                f: f as u32,
                e: (local.len() / f) as u32,
                idempotent: e,
                images,
            });
        }
        ideals.sort_by_key(|p| (p.f, p.e, p.idempotent.reverse_bits()));
        Ok(Prime2Data {
            degree: d,
            ideals,
        })
    }
}

fn overflow() -> OrderError {
    OrderError::BadTable("integer overflow".into())
}

fn trim(p: &[i64]) -> Vec<i64> {
    let mut v = p.to_vec();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// Rejects integer polynomials with a rational root or a repeated factor.
/// Other reducible polynomials pass; the data source guarantees irreducibility.
fn check_irreducible_hints(f: &[i64]) -> Result<(), OrderError> {
    let d = f.len() - 1;
    if d == 1 {
        return Ok(());
    }
    if f[0] == 0 {
        return Err(OrderError::Reducible("root 0".into()));
    }
    let bound = 1 + f.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    for r in crate::arith::divisors(f[0].unsigned_abs()) {
        if r > bound {
            break;
        }
        for s in [r as i128, -(r as i128)] {
            if eval_is_zero(f, s) {
                return Err(OrderError::Reducible(format!("root {s}")));
            }
        }
    }
    if !is_squarefree_over_q(f) {
        return Err(OrderError::Reducible("repeated factor".into()));
    }
    Ok(())
}

/// Primes just below 2^31, used for exact modular tests.
fn large_primes() -> impl Iterator<Item = u64> {
    (1u64..)
        .map(|i| (1u64 << 31) - 2 * i + 1)
        .filter(|&n| crate::arith::factorize(n).len() == 1 && crate::arith::factorize(n)[0].1 == 1)
}

/// Exact zero test for `f(s)`: modular evaluation at primes whose product
/// exceeds a bound on `|f(s)|`.
fn eval_is_zero(f: &[i64], s: i128) -> bool {
    let log_bound: f64 = f
        .iter()
        .enumerate()
        .map(|(i, &c)| (c.unsigned_abs() as f64 + 1.0).log2() + i as f64 * (s.unsigned_abs() as f64).log2().max(0.0))
        .fold(0.0, f64::max)
        + (f.len() as f64).log2()
        + 1.0;
    let mut covered = 0.0;
    for p in large_primes() {
        let pm = p as i128;
        let sm = s.rem_euclid(pm);
        let v = f.iter().rev().fold(0i128, |acc, &c| (acc * sm + c as i128).rem_euclid(pm));
        if v != 0 {
            return false;
        }
        covered += (p as f64).log2();
        if covered > log_bound {
            return true;
        }
    }
    unreachable!()
}

/// `gcd(f, f') = 1` over Q, decided modulo primes: a squarefree reduction
/// proves squarefreeness, and once the primes tried multiply past the
/// Hadamard bound on the discriminant every failure would divide it.
fn is_squarefree_over_q(f: &[i64]) -> bool {
    let d = f.len() - 1;
    let norm = f.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
    let dnorm = f
        .iter()
        .enumerate()
        .map(|(i, &c)| (i as f64 * c as f64).powi(2))
        .sum::<f64>()
        .sqrt();
    // |Res(f, f')| <= |f|^{d-1} |f'|^{d}
    let log_bound = (d as f64 - 1.0) * norm.log2() + d as f64 * dnorm.max(1.0).log2() + 1.0;
    let mut covered = 0.0;
    for p in large_primes() {
        let fp: Vec<u64> = f.iter().map(|&c| (c as i128).rem_euclid(p as i128) as u64).collect();
        let dp: Vec<u64> = (1..=d).map(|i| (i as u64 % p) * fp[i] % p).collect();
        if fp_gcd_degree(fp, dp, p) == 0 {
            return true;
        }
        covered += (p as f64).log2();
        if covered > log_bound {
            return false;
        }
    }
    unreachable!()
}

fn fp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Degree of `gcd(a, b)` in `F_p[x]`.
fn fp_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> usize {
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        // a = a mod b
        let lead_inv = crate::arith::pow_mod(*b.last().unwrap(), p - 2, p);
        while a.len() >= b.len() {
            let c = a.last().unwrap() * lead_inv % p;
            let shift = a.len() - b.len();
            for (i, &bi) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + p - c * bi % p) % p;
            }
            fp_trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Element of an order, `num / den` coordinatewise, with `den > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderElem {
    num: Vec<i128>,
    den: i128,
}

impl OrderElem {
    pub fn new(num: Vec<i128>, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let sign = den.signum();
        let mut num: Vec<i128> = num.into_iter().map(|c| c * sign).collect();
        let mut den = den.abs();
        let g = num.iter().fold(den, |g, &c| gcd_i128(g, c));
        if g > 1 {
            num.iter_mut().for_each(|c| *c /= g);
            den /= g;
        }
        Self { num, den }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Self::new(coords.iter().map(|&c| c as i128).collect(), 1)
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut num = vec![0; d];
        num[i] = 1;
        Self { num, den: 1 }
    }

    pub fn one(d: usize) -> Self {
        Self::basis(d, 0)
    }

    pub fn coords(&self) -> &[i128] {
        &self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.num.len(), other.num.len());
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a * other.den + b * self.den)
            .collect();
        Self::new(num, self.den * other.den)
    }

    pub fn scale(&self, c: i128) -> Self {
        Self::new(self.num.iter().map(|a| a * c).collect(), self.den)
    }

    /// Coordinates mod 2 as a bitmask, when the denominator is odd.
    fn mod2_bits(&self) -> Result<u64, OrderError> {
        if self.den % 2 == 0 {
            return Err(OrderError::EvenDenominator);
        }
        // num/den = num mod 2 since den is odd
        Ok(self
            .num
            .iter()
            .enumerate()
            .fold(0u64, |m, (k, &v)| m | (((v & 1) as u64) << k)))
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A maximal ideal of `O/2O` with its residue map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeIdeal {
    /// Residue degree.
    pub f: u32,
    /// Ramification index, `dim(local factor) / f`.
    pub e: u32,
    /// Primitive idempotent of the local factor, as a bitmask in the basis.
    pub idempotent: u64,
    /// Residues of the basis elements in the canonical `F_{2^f}`.
    images: Vec<FieldElem>,
}

impl PrimeIdeal {
    pub fn residue_field(&self) -> BinaryField {
        BinaryField::new(self.f).expect("residue degree checked")
    }

    pub fn basis_images(&self) -> &[FieldElem] {
        &self.images
    }

    fn reduce_bits(&self, bits: u64) -> FieldElem {
        self.images
            .iter()
            .enumerate()
            .filter(|(k, _)| (bits >> k) & 1 == 1)
            .fold(self.residue_field().zero(), |acc, (_, &x)| acc + x)
    }
}

/// The primes above 2 of an order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prime2Data {
    pub degree: usize,
    pub ideals: Vec<PrimeIdeal>,
}

impl fmt::Display for Prime2Data {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ideals
            .iter()
            .map(|p| format!("(e={}, f={})", p.e, p.f))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl Prime2Data {
    /// `sum e_i f_i`; equals the degree when the order is maximal at 2.
    pub fn sum_ef(&self) -> usize {
        self.ideals.iter().map(|p| (p.e * p.f) as usize).sum()
    }

    /// Residue of `x` at ideal `ideal`, embedded into `target` and twisted by
    /// `frobenius^embedding`.
    pub fn reduce_elem(
        &self,
        x: &OrderElem,
        ideal: usize,
        target: BinaryField,
        embedding: u32,
    ) -> Result<FieldElem, OrderError> {
        let p = self.ideals.get(ideal).ok_or(OrderError::NoSuchIdeal(ideal))?;
        if embedding >= p.f {
            return Err(OrderError::NoSuchEmbedding {
                index: embedding,
                f: p.f,
            });
        }
        if x.num.len() != self.degree {
            return Err(OrderError::WrongLength {
                got: x.num.len(),
                expected: self.degree,
            });
        }
        let r = p.reduce_bits(x.mod2_bits()?);
        Ok(r.frobenius(embedding).embed(target)?)
    }
}

/// `O/2O` as an F_2-algebra on bitmasks.
struct Mod2Algebra {
    d: usize,
    table: Vec<Vec<u64>>,
}

impl Mod2Algebra {
    fn one(&self) -> u64 {
        1
    }

    fn mul(&self, x: u64, y: u64) -> u64 {
        let mut out = 0;
        for i in (0..self.d).filter(|i| (x >> i) & 1 == 1) {
            for j in (0..self.d).filter(|j| (y >> j) & 1 == 1) {
                out ^= self.table[i][j];
            }
        }
        out
    }

    fn square(&self, x: u64) -> u64 {
        // cross terms cancel in characteristic 2
        (0..self.d)
            .filter(|i| (x >> i) & 1 == 1)
            .fold(0, |acc, i| acc ^ self.table[i][i])
    }

    /// Matrix (acting on columns) of an F_2-linear map given on the basis.
    fn linear_map(&self, f: impl Fn(u64) -> u64) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.d, self.d);
        for j in 0..self.d {
            let img = f(1 << j);
            for i in 0..self.d {
                m.set(i, j, (img >> i) & 1 == 1);
            }
        }
        m
    }

    fn kernel(&self, m: &BitMatrix) -> Vec<u64> {
        let k = m.kernel();
        (0..k.rows()).map(|r| row_bits(&k, r)).collect()
    }

    /// Nilradical: kernel of `x -> x^(2^m)` with `2^m >= d`.
    fn radical(&self) -> Vec<u64> {
        let mut m = 0;
        while (1usize << m) < self.d {
            m += 1;
        }
        let map = self.linear_map(|x| (0..m).fold(x, |acc, _| self.square(acc)));
        self.kernel(&map)
    }

    /// Primitive idempotents, obtained by refining `{1}` against a basis of
    /// the idempotent subspace `ker(x -> x^2 + x)`.
    fn primitive_idempotents(&self) -> Vec<u64> {
        let map = self.linear_map(|x| self.square(x) ^ x);
        let idem = self.kernel(&map);
        let mut parts = vec![self.one()];
        for &b in &idem {
            let mut next = Vec::new();
            for &e in &parts {
                for piece in [self.mul(e, b), self.mul(e, b) ^ e] {
                    if piece != 0 {
                        next.push(piece);
                    }
                }
            }
            parts = next;
        }
        parts
    }

    /// F_2-basis of `eA`.
    fn ideal_basis(&self, e: u64) -> Vec<u64> {
        span_basis(&(0..self.d).map(|i| self.mul(e, 1 << i)).collect::<Vec<_>>())
    }

    /// Residues of `e * b_i` in the canonical field of degree `f`, for the
    /// local factor `eA` with radical `rad`.
    fn residue_images(&self, e: u64, rad: &[u64], f: u32, salt: u64) -> Result<Vec<FieldElem>, OrderError> {
        let field = BinaryField::new(f)?;
        let reducer = Reducer::new(rad);
        let local: Vec<u64> = (0..self.d).map(|i| self.mul(e, 1 << i)).collect();
        // find a generator of the residue field
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ salt);
        let mut candidates: Vec<u64> = local.clone();
        let (alpha_powers, minpoly) = loop {
            let a = match candidates.pop() {
                Some(a) => a,
                None => {
                    let mask: u64 = rng.gen::<u64>() & if self.d == 64 { u64::MAX } else { (1 << self.d) - 1 };
                    self.mul(e, mask)
                }
            };
            // powers e, a, a^2, ... until dependent mod rad
            let mut powers = vec![reducer.reduce(e)];
            let mut cur = e;
            let found = loop {
                cur = self.mul(cur, a);
                let r = reducer.reduce(cur);
                if let Some(rel) = solve_in_span(&powers, r) {
                    break Some(rel);
                }
                powers.push(r);
                if powers.len() > f as usize {
                    break None;
                }
            };
            if let Some(rel) = found {
                if powers.len() == f as usize {
                    // a^f = sum rel_j a^j
                    let mut coeffs: Vec<u32> = (0..f).map(|j| ((rel >> j) & 1) as u32).collect();
                    coeffs.push(1);
                    break (powers, Poly::from_values(BinaryField::prime(), &coeffs)?);
                }
            }
        };
        let beta = minpoly
            .roots_in(field)?
            .into_iter()
            .min()
            .expect("minimal polynomial splits in the residue field");
        let beta_powers: Vec<FieldElem> = (0..f).map(|j| beta.pow(j as u64)).collect();
        local
            .iter()
            .map(|&x| {
                let r = reducer.reduce(x);
                let coords = solve_in_span(&alpha_powers, r).ok_or_else(|| {
                    OrderError::BadTable("residue field is not generated by the chosen element".into())
                })?;
                Ok((0..f as usize)
                    .filter(|j| (coords >> j) & 1 == 1)
                    .fold(field.zero(), |acc, j| acc + beta_powers[j]))
            })
            .collect()
    }
}

fn row_bits(m: &BitMatrix, r: usize) -> u64 {
    m.row(r).first().copied().unwrap_or(0)
}

/// RREF basis of the span of the given bitmasks.
fn span_basis(vs: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &v in vs {
        let mut v = v;
        for &b in &basis {
            let top = 63 - b.leading_zeros();
            if (v >> top) & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            let top = 63 - v.leading_zeros();
            for b in basis.iter_mut() {
                if (*b >> top) & 1 == 1 {
                    *b ^= v;
                }
            }
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}

/// Canonical representatives modulo a subspace.
struct Reducer {
    basis: Vec<u64>,
}

impl Reducer {
    fn new(sub: &[u64]) -> Self {
        Self {
            basis: span_basis(sub),
        }
    }

    fn reduce(&self, mut v: u64) -> u64 {
        for &b in &self.basis {
            let top = 63 - b.leading_zeros();
            if (v >> top) & 1 == 1 {
                v ^= b;
            }
        }
        v
    }
}

/// If `target` lies in the span of `vs` (assumed independent), the
/// coefficient bitmask expressing it.
fn solve_in_span(vs: &[u64], target: u64) -> Option<u64> {
    // eliminate while tracking combinations
    let mut rows: Vec<(u64, u64)> = vs.iter().enumerate().map(|(i, &v)| (v, 1u64 << i)).collect();
    let mut pivots: Vec<(u64, u64)> = Vec::new();
    for (mut v, mut c) in rows.drain(..) {
        for &(b, bc) in &pivots {
            let top = 63 - b.leading_zeros();
            if (v >> top) & 1 == 1 {
                v ^= b;
                c ^= bc;
            }
        }
        if v != 0 {
            pivots.push((v, c));
        }
    }
    let (mut t, mut c) = (target, 0u64);
    for &(b, bc) in &pivots {
        let top = 63 - b.leading_zeros();
        if (t >> top) & 1 == 1 {
            t ^= b;
            c ^= bc;
        }
    }
    (t == 0).then_some(c)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn ef(data: &Prime2Data) -> Vec<(u32, u32)> {
        data.ideals.iter().map(|p| (p.e, p.f)).collect()
    }

    /// Residue maps are ring homomorphisms on all basis pairs and kill 2.
    fn assert_homomorphic(order: &Order, data: &Prime2Data) {
        let d = order.degree();
        for (n, p) in data.ideals.iter().enumerate() {
            let field = p.residue_field();
            let one = data.reduce_elem(&OrderElem::one(d), n, field, 0).unwrap();
            assert!(one.is_one());
            let two = OrderElem::one(d).scale(2);
            assert!(data.reduce_elem(&two, n, field, 0).unwrap().is_zero());
            for i in 0..d {
                for j in 0..d {
                    let (bi, bj) = (OrderElem::basis(d, i), OrderElem::basis(d, j));
                    let prod = order.mul(&bi, &bj).unwrap();
                    let lhs = data.reduce_elem(&prod, n, field, 0).unwrap();
                    let rhs = data.reduce_elem(&bi, n, field, 0).unwrap()
                        * data.reduce_elem(&bj, n, field, 0).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn golden_ratio_order_is_inert() {
        let o = Order::from_poly(&[-1, -1, 1]).unwrap();
        let data = o.decompose_mod2().unwrap();
        assert_eq!(ef(&data), vec![(1, 2)]);
        assert_homomorphic(&o, &data);
        // b0 reduces to a root of x^2 + x + 1, i.e. a generator of F_4^x
        let f4 = BinaryField::new(2).unwrap();
        let b0 = data.reduce_elem(&OrderElem::basis(2, 1), 0, f4, 0).unwrap();
        assert_eq!(b0.multiplicative_order(), Some(3));
        let two_b0 = OrderElem::basis(2, 1).scale(2);
        assert!(data.reduce_elem(&two_b0, 0, f4, 0).unwrap().is_zero());
        // the two embeddings are Frobenius conjugates
        let conj = data.reduce_elem(&OrderElem::basis(2, 1), 0, f4, 1).unwrap();
        assert_eq!(conj, b0.frobenius(1));
        assert_ne!(conj, b0);
    }

    #[test]
    fn split_and_trivial_orders() {
        let z = Order::from_poly(&[-1, 1]).unwrap();
        let data = z.decompose_mod2().unwrap();
        assert_eq!(ef(&data), vec![(1, 1)]);
        let f2 = BinaryField::prime();
        assert!(data.reduce_elem(&OrderElem::one(1), 0, f2, 0).unwrap().is_one());
        assert!(data.reduce_elem(&OrderElem::from_ints(&[-3]), 0, f2, 0).unwrap().is_one());

        // Z x Z given by the idempotent table
        let table = vec![
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![0, 1], vec![0, 1]],
        ];
        let o = Order::from_table(table, None).unwrap();
        let data = o.decompose_mod2().unwrap();
        assert_eq!(ef(&data), vec![(1, 1), (1, 1)]);
        assert_homomorphic(&o, &data);
    }

    #[test]
    fn level59_quintic() {
        let o = Order::from_poly(&[-8, 16, 2, -9, 0, 1]).unwrap();
        let data = o.decompose_mod2().unwrap();
        // Z[b0] is not maximal at 2: f = x^3 (x+1)^2 mod 2 gives two local
        // factors with residue field F_2; the maximal order is checked
        // against the fixture data in the integration tests
        assert_eq!(ef(&data), vec![(2, 1), (3, 1)]);
        assert_eq!(data.sum_ef(), 5);
        assert_homomorphic(&o, &data);
    }

    #[test]
    fn defining_poly_checks() {
        assert_eq!(Order::from_poly(&[1, 2]), Err(OrderError::NotMonic));
        assert!(matches!(Order::from_poly(&[-1, 0, 1]), Err(OrderError::Reducible(_))));
        assert!(matches!(Order::from_poly(&[1, 2, 1]), Err(OrderError::Reducible(_))));
        // (x^2 + 1)^2 has no rational root but a repeated factor
        assert!(matches!(Order::from_poly(&[1, 0, 2, 0, 1]), Err(OrderError::Reducible(_))));
        assert!(Order::from_poly(&[509, 0, 215, 0, 27, 0, 1]).is_ok());
    }

    #[test]
    fn table_validation() {
        let bad = vec![
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![1, 0], vec![0, 0]],
        ];
        assert!(matches!(Order::from_table(bad, None), Err(OrderError::BadTable(_))));
        let o = Order::from_poly(&[-1, -1, 1]).unwrap();
        let round = Order::from_repr(&o.to_repr()).unwrap();
        assert_eq!(round, o);
    }

    #[test]
    fn even_denominators_are_rejected() {
        let o = Order::from_poly(&[-1, -1, 1]).unwrap();
        let data = o.decompose_mod2().unwrap();
        let half = OrderElem::new(vec![1, 0], 2);
        assert_eq!(
            data.reduce_elem(&half, 0, BinaryField::new(2).unwrap(), 0),
            Err(OrderError::EvenDenominator)
        );
        // odd denominators are fine: 1/3 = 1 mod 2
        let third = OrderElem::new(vec![1, 0], 3);
        assert!(data
            .reduce_elem(&third, 0, BinaryField::new(2).unwrap(), 0)
            .unwrap()
            .is_one());
    }

    #[test]
    fn agrees_with_factoring_the_defining_polynomial() {
        // when Z[x]/(f) is 2-maximal, (e, f) come from f mod 2
        let polys: &[&[i64]] = &[
            &[1, 1, 1],          // inert
            &[-2, 1, 1],         // x^2+x-2 = (x-1)(x+2): reducible, skip
            &[1, 1, 0, 1],       // x^3+x+1 irreducible mod 2
            &[-1, 1, 1, 1],      // x^3+x^2+x-1 = x^3+x^2+x+1 = (x+1)^3 mod 2
            &[3, 1, 0, 0, 1],    // x^4+x+3
            &[-2, 0, 0, 0, 1],   // Eisenstein at 2: totally ramified
        ];
        for p in polys {
            let Ok(o) = Order::from_poly(p) else { continue };
            let data = o.decompose_mod2().unwrap();
            let f2poly = Poly::from_values(
                BinaryField::prime(),
                &p.iter().map(|c| c.rem_euclid(2) as u32).collect::<Vec<_>>(),
            )
            .unwrap();
            let mut expected: Vec<(u32, u32)> = f2poly
                .factor()
                .unwrap()
                .factors
                .iter()
                .map(|(g, m)| (*m, g.degree().unwrap() as u32))
                .collect();
            expected.sort_by_key(|&(e, f)| (f, e));
            let mut got: Vec<(u32, u32)> = ef(&data);
            got.sort_by_key(|&(e, f)| (f, e));
            // the local dimensions always match the factorization
            let dims: Vec<u32> = got.iter().map(|(e, f)| e * f).collect();
            let edims: Vec<u32> = expected.iter().map(|(e, f)| e * f).collect();
            assert_eq!(dims, edims, "{p:?}");
            let fs: Vec<u32> = got.iter().map(|(_, f)| *f).collect();
            let efs: Vec<u32> = expected.iter().map(|(_, f)| *f).collect();
            assert_eq!(fs, efs, "{p:?}");
            assert_homomorphic(&o, &data);
        }
    }
}
