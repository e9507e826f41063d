//! Sharbly chains for `SL(4, Z)` and the combinatorics around them.
//!
//! A symbol `[v1, ..., v_{4+k}]` of degree `k` is stored in canonical form:
//! every vector primitive with first nonzero coordinate positive, the list
//! sorted. Symbols whose vectors do not span `Q^4` vanish. Over `F_2` the sign
//! of a permutation is 1, so repeated vectors are allowed; over an odd prime a
//! transposition fixing the symbol forces it to vanish.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factorize, gcd, inv_mod};

pub type Vector = [i64; 4];
pub type Mat4 = [[i64; 4]; 4];

pub const IDENTITY: Mat4 = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];

#[derive(Debug, Error)]
pub enum SharblyError {
    #[error("sharbly symbols cannot contain the zero vector")]
    ZeroVector,
    #[error("a symbol of degree {0} has no boundary")]
    DegreeZero(usize),
    #[error("Voronoi cells of dimension above 5 are not simplices (k = {0})")]
    VoronoiDegree(usize),
    #[error("symbol needs at least 4 vectors, got {0}")]
    TooFewVectors(usize),
    #[error("{0} is not an odd prime")]
    BadPrime(u64),
    #[error("k must lie in 1..=4, got {0}")]
    BadK(u32),
    #[error("coefficient modulus {0} must be 2 or an odd prime")]
    BadModulus(u64),
    #[error("cannot halve multiplicities modulo {0}")]
    DivideByTwo(u64),
    #[error("chain mixes degrees {expected} and {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("chain moduli differ: {0} and {1}")]
    ModulusMismatch(u64, u64),
    #[error("facet {facet} of tuple {tuple} does not exist")]
    BadIndex { tuple: usize, facet: usize },
    #[error("gamma does not stabilize the facet")]
    NotStabilizer,
    #[error("gamma preserves the orientation of the facet")]
    NotOrientationReversing,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn content(v: &Vector) -> i64 {
    v.iter().fold(0, |g, &x| gcd(g as u64, x.unsigned_abs()) as i64)
}

/// Primitive, first nonzero coordinate positive.
fn canonical_vector(v: &Vector) -> Result<Vector, SharblyError> {
    let c = content(v);
    if c == 0 {
        return Err(SharblyError::ZeroVector);
    }
    let lead = v.iter().find(|&&x| x != 0).copied().unwrap_or(1);
    let s = if lead < 0 { -c } else { c };
    Ok(v.map(|x| x / s))
}

/// Rank over `Q` by fraction-free elimination.
pub fn rank(vectors: &[Vector]) -> usize {
    let mut rows: Vec<[i128; 4]> = vectors.iter().map(|v| v.map(i128::from)).collect();
    let mut r = 0;
    for col in 0..4 {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r];
        for row in rows.iter_mut().skip(r + 1) {
            let f = row[col];
            if f == 0 {
                continue;
            }
            let mut g = 0i128;
            for j in 0..4 {
                row[j] = row[j] * pivot[col] - f * pivot[j];
                g = gcd_i128(g, row[j]);
            }
            if g > 1 {
                for x in row.iter_mut() {
                    *x /= g;
                }
            }
        }
        r += 1;
        if r == 4 {
            break;
        }
    }
    r
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A canonical sharbly symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SharblySymbol {
    vectors: Vec<Vector>,
}

impl SharblySymbol {
    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn degree(&self) -> usize {
        self.vectors.len() - 4
    }

    /// `[v_1, ..., v_{4+k}]` with `v_i` deleted, not normalized.
    fn facet_raw(&self, i: usize) -> Vec<Vector> {
        let mut v = self.vectors.clone();
        v.remove(i);
        v
    }

    /// Right translation `v -> v g` of every vector.
    pub fn translate_raw(&self, g: &Mat4) -> Vec<Vector> {
        self.vectors.iter().map(|v| mul_vec(v, g)).collect()
    }
}

impl fmt::Display for SharblySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .vectors
            .iter()
            .map(|v| format!("({},{},{},{})", v[0], v[1], v[2], v[3]))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Canonical form of a raw symbol with the sign of the sorting permutation,
/// or `None` when the vectors do not span `Q^4`.
pub fn normalize_signed(raw: &[Vector]) -> Result<Option<(SharblySymbol, bool)>, SharblyError> {
    if raw.len() < 4 {
        return Err(SharblyError::TooFewVectors(raw.len()));
    }
    let canon = raw.iter().map(canonical_vector).collect::<Result<Vec<_>, _>>()?;
    if rank(&canon) < 4 {
        return Ok(None);
    }
    let mut idx: Vec<usize> = (0..canon.len()).collect();
    idx.sort_by_key(|&i| canon[i]);
    // parity of the sorting permutation by cycle decomposition
    let mut seen = vec![false; idx.len()];
    let mut odd = false;
    for s in 0..idx.len() {
        let mut len = 0;
        let mut j = s;
        while !seen[j] {
            seen[j] = true;
            j = idx[j];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            odd = !odd;
        }
    }
    let vectors = idx.iter().map(|&i| canon[i]).collect();
    Ok(Some((SharblySymbol { vectors }, odd)))
}

/// Canonical form over `F_2`, or `None` for the zero symbol.
pub fn normalize(raw: &[Vector]) -> Result<Option<SharblySymbol>, SharblyError> {
    Ok(normalize_signed(raw)?.map(|(s, _)| s))
}

/// The symbol of a Voronoi simplex with `k + 4` vertices, `k <= 2`.
pub fn voronoi_to_sharbly(vectors: &[Vector]) -> Result<Option<SharblySymbol>, SharblyError> {
    if vectors.len() < 4 {
        return Err(SharblyError::TooFewVectors(vectors.len()));
    }
    if vectors.len() > 6 {
        return Err(SharblyError::VoronoiDegree(vectors.len() - 4));
    }
    normalize(vectors)
}

fn check_modulus(p: u64) -> Result<(), SharblyError> {
    if p == 2 || (p > 2 && factorize(p).len() == 1 && factorize(p)[0].1 == 1) {
        Ok(())
    } else {
        Err(SharblyError::BadModulus(p))
    }
}

/// A linear combination of symbols of one degree with coefficients mod `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharblyChain {
    modulus: u64,
    degree: usize,
    terms: BTreeMap<SharblySymbol, u64>,
}

impl SharblyChain {
    pub fn zero(modulus: u64, degree: usize) -> Result<Self, SharblyError> {
        check_modulus(modulus)?;
        Ok(Self {
            modulus,
            degree,
            terms: BTreeMap::new(),
        })
    }

    /// Over `F_2`.
    pub fn from_symbol(symbol: SharblySymbol) -> Self {
        let mut c = Self {
            modulus: 2,
            degree: symbol.degree(),
            terms: BTreeMap::new(),
        };
        c.terms.insert(symbol, 1);
        c
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SharblySymbol, u64)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    pub fn coefficient(&self, s: &SharblySymbol) -> u64 {
        self.terms.get(s).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, symbol: SharblySymbol, coeff: u64) -> Result<(), SharblyError> {
        if symbol.degree() != self.degree {
            return Err(SharblyError::DegreeMismatch {
                expected: self.degree,
                found: symbol.degree(),
            });
        }
        let p = self.modulus;
        let c = coeff % p;
        if c == 0 {
            return Ok(());
        }
        let e = self.terms.entry(symbol).or_insert(0);
        *e = (*e + c) % p;
        if *e == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
        Ok(())
    }

    /// Adds `coeff * [raw]`, normalizing and applying the relations.
    pub fn add_raw(&mut self, raw: &[Vector], coeff: u64) -> Result<(), SharblyError> {
        let Some((s, odd)) = normalize_signed(raw)? else {
            return Ok(());
        };
        if self.modulus == 2 {
            return self.add_term(s, coeff);
        }
        if s.vectors.windows(2).any(|w| w[0] == w[1]) {
            return Ok(());
        }
        let p = self.modulus;
        let c = coeff % p;
        self.add_term(s, if odd { (p - c) % p } else { c })
    }

    pub fn add(&mut self, other: &Self) -> Result<(), SharblyError> {
        if other.modulus != self.modulus {
            return Err(SharblyError::ModulusMismatch(self.modulus, other.modulus));
        }
        if other.is_zero() {
            return Ok(());
        }
        for (s, c) in other.iter() {
            self.add_term(s.clone(), c)?;
        }
        Ok(())
    }

    /// `sum_i (-1)^i [v_1, ..., ^v_i, ..., v_{4+k}]`, extended linearly.
    pub fn boundary(&self) -> Result<Self, SharblyError> {
        if self.degree == 0 {
            return Err(SharblyError::DegreeZero(0));
        }
        let p = self.modulus;
        let mut out = Self::zero(p, self.degree - 1)?;
        for (s, c) in self.iter() {
            for i in 0..s.vectors.len() {
                let sign_c = if i % 2 == 1 { (p - c) % p } else { c };
                out.add_raw(&s.facet_raw(i), sign_c)?;
            }
        }
        Ok(out)
    }

    /// Sum of the right translates by every matrix of `reps`.
    pub fn translate(&self, reps: &[Mat4]) -> Result<Self, SharblyError> {
        let parts = reps
            .par_iter()
            .map(|g| {
                let mut part = Self::zero(self.modulus, self.degree)?;
                for (s, c) in self.iter() {
                    part.add_raw(&s.translate_raw(g), c)?;
                }
                Ok(part)
            })
            .collect::<Result<Vec<_>, SharblyError>>()?;
        let mut out = Self::zero(self.modulus, self.degree)?;
        for part in &parts {
            out.add(part)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> ChainJson {
        ChainJson {
            degree: self.degree,
            modulus: self.modulus,
            terms: self
                .iter()
                .map(|(s, c)| TermJson {
                    vectors: s.vectors.clone(),
                    coeff: c as i64,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ChainJson) -> Result<Self, SharblyError> {
        let mut c = Self::zero(j.modulus, j.degree)?;
        for t in &j.terms {
            if t.vectors.len() != j.degree + 4 {
                return Err(SharblyError::DegreeMismatch {
                    expected: j.degree,
                    found: t.vectors.len().saturating_sub(4),
                });
            }
            c.add_raw(&t.vectors, t.coeff.rem_euclid(j.modulus as i64) as u64)?;
        }
        Ok(c)
    }
}

/// Hecke translate of `chain` by `T(ell, k)`.
pub fn hecke_translate(chain: &SharblyChain, ell: u64, k: u32) -> Result<SharblyChain, SharblyError> {
    chain.translate(&coset_reps(ell, k)?.matrices)
}

fn default_modulus() -> u64 {
    2
}

/// File form of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainJson {
    pub degree: usize,
    #[serde(default = "default_modulus")]
    pub modulus: u64,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub vectors: Vec<Vector>,
    pub coeff: i64,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SharblyError> {
    let text = std::fs::read_to_string(path).map_err(|source| SharblyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_chain(path: &Path) -> Result<SharblyChain, SharblyError> {
    SharblyChain::from_json(&read_json(path)?)
}

pub fn mul_vec(v: &Vector, g: &Mat4) -> Vector {
    let mut out = [0i64; 4];
    for (j, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|i| v[i] * g[i][j]).sum();
    }
    out
}

pub fn mul_mat(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0i64; 4]; 4];
    for i in 0..4 {
        out[i] = mul_vec(&a[i], b);
    }
    out
}

pub fn det(m: &Mat4) -> i64 {
    fn minor(m: &[[i64; 4]], rows: &[usize], cols: &[usize]) -> i64 {
        if rows.len() == 1 {
            return m[rows[0]][cols[0]];
        }
        let mut total = 0;
        for (j, &c) in cols.iter().enumerate() {
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            total += sign * m[rows[0]][c] * minor(m, &rows[1..], &rest);
        }
        total
    }
    minor(m, &[0, 1, 2, 3], &[0, 1, 2, 3])
}

/// Row-style Hermite normal form of a nonsingular integer matrix: upper
/// triangular, positive diagonal, entries above each pivot reduced modulo it.
/// Two matrices have the same form iff they differ by a left factor in `GL(4, Z)`.
pub fn hermite_form(m: &Mat4) -> Mat4 {
    let mut a: Vec<[i128; 4]> = m.iter().map(|r| r.map(i128::from)).collect();
    for col in 0..4 {
        // Euclid on column `col` among rows col..4
        loop {
            let nz: Vec<usize> = (col..4).filter(|&i| a[i][col] != 0).collect();
            let Some(&piv) = nz.iter().min_by_key(|&&i| a[i][col].abs()) else {
                break;
            };
            a.swap(col, piv);
            let mut done = true;
            for i in col + 1..4 {
                let q = a[i][col].div_euclid(a[col][col]);
                let pivot = a[col];
                for j in 0..4 {
                    a[i][j] -= q * pivot[j];
                }
                if a[i][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[col][col] < 0 {
            for x in a[col].iter_mut() {
                *x = -*x;
            }
        }
        let d = a[col][col];
        if d == 0 {
            continue;
        }
        for i in 0..col {
            let q = a[i][col].div_euclid(d);
            let pivot = a[col];
            for j in 0..4 {
                a[i][j] -= q * pivot[j];
            }
        }
    }
    let mut out = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[i][j] as i64;
        }
    }
    out
}

/// Gaussian binomial coefficient `binom(n, k)_q`.
pub fn gaussian_binomial(n: u32, k: u32, q: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= u128::from(q).pow(n - i) - 1;
        den *= u128::from(q).pow(i + 1) - 1;
    }
    (num / den) as u64
}

/// Single-coset representatives of `T(ell, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetRepSet {
    pub ell: u64,
    pub k: u32,
    pub matrices: Vec<Mat4>,
}

fn is_odd_prime(n: u64) -> bool {
    n > 2 && n % 2 == 1 && factorize(n) == vec![(n, 1)]
}

/// Pivot columns and rows of every reduced row-echelon `r x 4` matrix over `F_ell`.
fn rref_subspaces(ell: u64, r: usize) -> Vec<Vec<Vector>> {
    fn pivot_sets(r: usize, start: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if acc.len() == r {
            out.push(acc.clone());
            return;
        }
        for c in start..4 {
            acc.push(c);
            pivot_sets(r, c + 1, acc, out);
            acc.pop();
        }
    }
    let mut sets = Vec::new();
    pivot_sets(r, 0, &mut Vec::new(), &mut sets);
    let mut out = Vec::new();
    for pivots in sets {
        // free positions: (row, col) with col after the row's pivot and not a pivot
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (p + 1..4).filter(|c| !pivots.contains(c)).map(move |c| (i, c)))
            .collect();
        let total = ell.pow(free.len() as u32);
        for mut code in 0..total {
            let mut rows: Vec<Vector> = pivots
                .iter()
                .map(|&p| {
                    let mut v = [0i64; 4];
                    v[p] = 1;
                    v
                })
                .collect();
            for &(i, c) in &free {
                rows[i][c] = (code % ell) as i64;
                code /= ell;
            }
            out.push(rows);
        }
    }
    out
}

/// Representatives `g` with `det g = ell^k` and elementary divisors
/// `(1^{4-k}, ell^k)`, one per left coset, each in Hermite form.
///
/// The row lattice of `g` contains `ell Z^4` with quotient a subspace of
/// dimension `4 - k` in `F_ell^4`; each subspace is written in reduced
/// row-echelon form and completed by `ell e_j` on the non-pivot columns.
pub fn coset_reps(ell: u64, k: u32) -> Result<CosetRepSet, SharblyError> {
    if !is_odd_prime(ell) {
        return Err(SharblyError::BadPrime(ell));
    }
    if !(1..=4).contains(&k) {
        return Err(SharblyError::BadK(k));
    }
    let r = 4 - k as usize;
    let l = ell as i64;
    let matrices = rref_subspaces(ell, r)
        .into_iter()
        .map(|rows| {
            let mut m = [[0i64; 4]; 4];
            for j in 0..4 {
                match rows.iter().find(|v| v[j] == 1 && v[..j].iter().all(|&x| x == 0)) {
                    Some(v) => m[j] = *v,
                    None => m[j][j] = l,
                }
            }
            m
        })
        .collect();
    Ok(CosetRepSet { ell, k, matrices })
}

/// One 4-tuple of a cycle encoding: a degree-1 symbol, its multiplicity, its
/// boundary facets and a lift matrix for each facet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingTuple {
    pub x: Vec<Vector>,
    pub coeff: i64,
    pub facets: Vec<Vec<Vector>>,
    pub lifts: Vec<Mat4>,
}

/// The assertion that facet `a` equals facet `b` translated by `gamma`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub gamma: Mat4,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleEncoding {
    pub tuples: Vec<EncodingTuple>,
    pub gluings: Vec<Gluing>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    /// Rows of the lift are not the facet's vectors up to order and sign.
    Lift,
    /// `L(y) != L(y') gamma`.
    Equivariance { gluing: usize },
    Determinant { gluing: usize, det: i64 },
    NotInGamma0 { gluing: usize, level: u64 },
    MissingFacet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub tuple: usize,
    pub facet: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tuple {}, facet {}: ", self.tuple, self.facet)?;
        match &self.kind {
            ViolationKind::Lift => write!(f, "lift rows do not match the facet"),
            ViolationKind::Equivariance { gluing } => write!(f, "equivariance fails for gluing {gluing}"),
            ViolationKind::Determinant { gluing, det } => {
                write!(f, "gamma of gluing {gluing} has determinant {det}")
            }
            ViolationKind::NotInGamma0 { gluing, level } => {
                write!(f, "gamma of gluing {gluing} is not in Gamma0({level})")
            }
            ViolationKind::MissingFacet => write!(f, "no such facet"),
        }
    }
}

fn sign_normal(v: &Vector) -> Vector {
    if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        v.map(|x| -x)
    } else {
        *v
    }
}

fn rows_match(lift: &Mat4, facet: &[Vector]) -> bool {
    let mut a: Vec<Vector> = lift.iter().map(sign_normal).collect();
    let mut b: Vec<Vector> = facet.iter().map(sign_normal).collect();
    a.sort();
    b.sort();
    a == b
}

fn lift_at(enc: &CycleEncoding, (t, f): (usize, usize)) -> Option<&Mat4> {
    enc.tuples.get(t).and_then(|x| x.lifts.get(f))
}

/// Checks lifts, equivariance and membership of every `gamma` in `Gamma0(level)`.
pub fn validate_encoding(enc: &CycleEncoding, level: u64) -> Vec<Violation> {
    let mut out = Vec::new();
    for (t, tuple) in enc.tuples.iter().enumerate() {
        for (f, facet) in tuple.facets.iter().enumerate() {
            match tuple.lifts.get(f) {
                Some(l) if rows_match(l, facet) => {}
                _ => out.push(Violation { tuple: t, facet: f, kind: ViolationKind::Lift }),
            }
        }
    }
    let n = level as i64;
    for (gi, g) in enc.gluings.iter().enumerate() {
        let (Some(la), Some(lb)) = (lift_at(enc, g.a), lift_at(enc, g.b)) else {
            let (tuple, facet) = if lift_at(enc, g.a).is_none() { g.a } else { g.b };
            out.push(Violation { tuple, facet, kind: ViolationKind::MissingFacet });
            continue;
        };
        let (tuple, facet) = g.a;
        let d = det(&g.gamma);
        if d != 1 {
            out.push(Violation { tuple, facet, kind: ViolationKind::Determinant { gluing: gi, det: d } });
        }
        if n > 1 && g.gamma[0][1..].iter().any(|&x| x.rem_euclid(n) != 0) {
            out.push(Violation { tuple, facet, kind: ViolationKind::NotInGamma0 { gluing: gi, level } });
        }
        if *la != mul_mat(lb, &g.gamma) {
            out.push(Violation { tuple, facet, kind: ViolationKind::Equivariance { gluing: gi } });
        }
    }
    out
}

/// Splits a tuple whose facet `facet` has an orientation-reversing stabilizer
/// `gamma` into two of half the multiplicity modulo `p`, the second carrying
/// the lift `L(y) gamma`. Over `F_2` halving is impossible and never needed.
pub fn split_encoding(
    tuple: &EncodingTuple,
    facet: usize,
    gamma: &Mat4,
    p: u64,
) -> Result<(EncodingTuple, EncodingTuple), SharblyError> {
    if p.is_multiple_of(2) {
        return Err(SharblyError::DivideByTwo(p));
    }
    check_modulus(p)?;
    let bad = SharblyError::BadIndex { tuple: 0, facet };
    let y = tuple.facets.get(facet).ok_or(bad)?;
    let lift = tuple.lifts.get(facet).ok_or(SharblyError::BadIndex { tuple: 0, facet })?;
    let canon_y: Vec<Vector> = y.iter().map(canonical_vector).collect::<Result<_, _>>()?;
    let moved: Vec<Vector> = canon_y
        .iter()
        .map(|v| canonical_vector(&mul_vec(v, gamma)))
        .collect::<Result<_, _>>()?;
    // permutation induced by gamma on the facet's vectors
    let perm: Option<Vec<usize>> = moved.iter().map(|m| canon_y.iter().position(|v| v == m)).collect();
    let perm = perm.ok_or(SharblyError::NotStabilizer)?;
    let mut sorted = perm.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != perm.len() {
        return Err(SharblyError::NotStabilizer);
    }
    let inversions = (0..perm.len())
        .flat_map(|i| (i + 1..perm.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count();
    if inversions % 2 == 0 {
        return Err(SharblyError::NotOrientationReversing);
    }
    let half = inv_mod(2, p).expect("p odd");
    let c = (tuple.coeff.rem_euclid(p as i64) as u64 * half % p) as i64;
    let mut first = tuple.clone();
    first.coeff = c;
    let mut second = tuple.clone();
    second.coeff = c;
    second.lifts[facet] = mul_mat(lift, gamma);
    Ok((first, second))
}
