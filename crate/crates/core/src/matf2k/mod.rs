//! Dense linear algebra over `F_2` and `F_{2^k}`.
//!
//! Matrices act on column vectors. Over `F_2` rows are bit-packed
//! ([`BitMatrix`]); over larger fields entries are stored as raw field values.

mod bitmatrix;
mod io;

pub use bitmatrix::BitMatrix;
pub use io::{load_operators, LoadError, OperatorEntry, OperatorFile};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2k::{BinaryField, FieldElem, FieldError, Poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrices live over different fields ({0} vs {1})")]
    FieldMismatch(BinaryField, BinaryField),
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("matrix is singular")]
    Singular,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Hecke operator kind: `T` away from the level, `U` at primes dividing it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    T,
    U,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::T => "T",
            OpKind::U => "U",
        })
    }
}

/// Identifies the operator `T(ell, k)` or `U(ell, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OperatorLabel {
    pub ell: u32,
    pub k: u32,
    pub kind: OpKind,
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind, self.ell, self.k)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Storage {
    Packed(BitMatrix),
    Dense(Vec<u32>),
}

/// Matrix over a [`BinaryField`]. `F_2` matrices are always bit-packed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatF2k {
    field: BinaryField,
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl fmt::Debug for MatF2k {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatF2k over {} ({}x{})", self.field, self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<u32> = (0..self.cols).map(|j| self.value(i, j)).collect();
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

impl MatF2k {
    pub fn zeros(field: BinaryField, rows: usize, cols: usize) -> Self {
        let storage = if field.degree() == 1 {
            Storage::Packed(BitMatrix::zeros(rows, cols))
        } else {
            Storage::Dense(vec![0; rows * cols])
        };
        Self {
            field,
            rows,
            cols,
            storage,
        }
    }

    pub fn identity(field: BinaryField, n: usize) -> Self {
        Self::scalar(field.one(), n)
    }

    /// `c * I_n`.
    pub fn scalar(c: FieldElem, n: usize) -> Self {
        let mut m = Self::zeros(c.field(), n, n);
        for i in 0..n {
            m.set(i, i, c);
        }
        m
    }

    /// Build from rows of raw field values.
    pub fn from_values(field: BinaryField, rows: &[Vec<u32>]) -> Result<Self, MatError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(field, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(MatError::RaggedRow {
                    row: i,
                    len: row.len(),
                    expected: cols,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, field.elem(v)?);
            }
        }
        Ok(m)
    }

    pub fn from_bits(bits: BitMatrix) -> Self {
        Self {
            field: BinaryField::prime(),
            rows: bits.rows(),
            cols: bits.cols(),
            storage: Storage::Packed(bits),
        }
    }

    /// Block-diagonal matrix with the given square blocks.
    pub fn block_diagonal(field: BinaryField, blocks: &[MatF2k]) -> Result<Self, MatError> {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut m = Self::zeros(field, n, n);
        let mut off = 0;
        for b in blocks {
            b.require_square()?;
            let b = b.extend_scalars(field)?;
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(off + i, off + j, b.get(i, j));
                }
            }
            off += b.rows;
        }
        Ok(m)
    }

    /// Companion matrix of a monic polynomial: ones on the subdiagonal and
    /// `-c_i` in the last column.
    pub fn companion(p: &Poly) -> Result<Self, MatError> {
        let n = p.degree().ok_or(FieldError::ZeroPolynomial)?;
        let p = p.make_monic();
        let mut m = Self::zeros(p.field(), n, n);
        for i in 1..n {
            m.set(i, i - 1, p.field().one());
        }
        for i in 0..n {
            m.set(i, n - 1, p.coeff(i));
        }
        Ok(m)
    }

    pub fn field(&self) -> BinaryField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        match &self.storage {
            Storage::Packed(b) => (0..b.rows()).all(|i| b.row(i).iter().all(|&w| w == 0)),
            Storage::Dense(d) => d.iter().all(|&v| v == 0),
        }
    }

    /// Bit-packed view when the field is `F_2`.
    pub fn as_bits(&self) -> Option<&BitMatrix> {
        match &self.storage {
            Storage::Packed(b) => Some(b),
            Storage::Dense(_) => None,
        }
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> u32 {
        match &self.storage {
            Storage::Packed(b) => b.get(i, j) as u32,
            Storage::Dense(d) => d[i * self.cols + j],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.field.elem_unchecked(self.value(i, j))
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        debug_assert_eq!(v.field(), self.field);
        match &mut self.storage {
            Storage::Packed(b) => b.set(i, j, v.value() == 1),
            Storage::Dense(d) => d[i * self.cols + j] = v.value(),
        }
    }

    pub fn row(&self, i: usize) -> Vec<FieldElem> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn row_values(&self, i: usize) -> Vec<u32> {
        (0..self.cols).map(|j| self.value(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    fn require_square(&self) -> Result<(), MatError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(MatError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn require_same_field(&self, other: &Self) -> Result<(), MatError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(MatError::FieldMismatch(self.field, other.field))
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, MatError> {
        self.require_same_field(rhs)?;
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(MatError::DimensionMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j) + rhs.get(i, j));
            }
        }
        Ok(out)
    }

    /// Subtraction is addition in characteristic 2.
    pub fn sub(&self, rhs: &Self) -> Result<Self, MatError> {
        self.add(rhs)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, MatError> {
        self.require_same_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(MatError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        if let (Storage::Packed(a), Storage::Packed(b)) = (&self.storage, &rhs.storage) {
            return Ok(Self::from_bits(a.mul(b)));
        }
        let mut out = Self::zeros(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(self.field.zero(), |acc, j| acc + self.get(i, j) * v[j])
            })
            .collect()
    }

    /// Vertical concatenation.
    pub fn stack(&self, below: &Self) -> Result<Self, MatError> {
        self.require_same_field(below)?;
        if self.cols != below.cols {
            return Err(MatError::DimensionMismatch(format!(
                "stacking {} columns on {}",
                below.cols, self.cols
            )));
        }
        let mut out = Self::zeros(self.field, self.rows + below.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..below.rows {
            for j in 0..self.cols {
                out.set(self.rows + i, j, below.get(i, j));
            }
        }
        Ok(out)
    }

    /// First `n` rows.
    fn top_rows(&self, n: usize) -> Self {
        match &self.storage {
            Storage::Packed(b) => {
                let mut b = b.clone();
                b.truncate_rows(n);
                Self::from_bits(b)
            }
            Storage::Dense(d) => Self {
                field: self.field,
                rows: n,
                cols: self.cols,
                storage: Storage::Dense(d[..n * self.cols].to_vec()),
            },
        }
    }

    /// Reduced row-echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        match &self.storage {
            Storage::Packed(b) => {
                let mut b = b.clone();
                let pivots = b.rref();
                (Self::from_bits(b), pivots)
            }
            Storage::Dense(_) => {
                let mut m = self.clone();
                let pivots = m.rref_dense();
                (m, pivots)
            }
        }
    }

    fn rref_dense(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.value(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    let (a, b) = (self.get(r, j), self.get(p, j));
                    self.set(r, j, b);
                    self.set(p, j, a);
                }
            }
            let inv = self.get(r, c).inverse().expect("pivot is nonzero");
            for j in c..self.cols {
                let v = self.get(r, j) * inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                let factor = self.get(i, c);
                if i == r || factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let v = self.get(i, j) + factor * self.get(r, j);
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// `{v : A v = 0}`.
    pub fn kernel(&self) -> Subspace {
        if let Storage::Packed(b) = &self.storage {
            return Subspace::from_spanning(&Self::from_bits(b.kernel()));
        }
        let (m, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = Self::zeros(self.field, free.len(), self.cols);
        for (r, &f) in free.iter().enumerate() {
            basis.set(r, f, self.field.one());
            for (pr, &p) in pivots.iter().enumerate() {
                // characteristic 2: -x = x
                basis.set(r, p, m.get(pr, f));
            }
        }
        Subspace::from_spanning(&basis)
    }

    pub fn inverse(&self) -> Result<Self, MatError> {
        self.require_square()?;
        let n = self.rows;
        let mut aug = Self::zeros(self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, self.field.one());
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(MatError::Singular);
        }
        let mut inv = Self::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, red.get(i, n + j));
            }
        }
        Ok(inv)
    }

    /// Entrywise embedding into a larger canonical field.
    pub fn extend_scalars(&self, field: BinaryField) -> Result<Self, MatError> {
        if field == self.field {
            return Ok(self.clone());
        }
        if !field.degree().is_multiple_of(self.field.degree()) {
            return Err(FieldError::IncompatibleDegrees {
                from: self.field.degree(),
                to: field.degree(),
            }
            .into());
        }
        let mut out = Self::zeros(field, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).embed(field)?);
            }
        }
        Ok(out)
    }

    /// Characteristic polynomial `det(x I - A)` via reduction to upper
    /// Hessenberg form followed by the standard determinant recurrence.
    pub fn charpoly(&self) -> Result<Poly, MatError> {
        self.require_square()?;
        let field = self.field;
        let n = self.rows;
        let mut h: Vec<Vec<FieldElem>> = (0..n).map(|i| self.row(i)).collect();
        // similarity transform to Hessenberg form
        for m in 1..n.saturating_sub(1) {
            let Some(piv) = (m..n).find(|&i| !h[i][m - 1].is_zero()) else {
                continue;
            };
            if piv != m {
                h.swap(piv, m);
                for row in h.iter_mut() {
                    row.swap(piv, m);
                }
            }
            let inv = h[m][m - 1].inverse().expect("nonzero pivot");
            for i in (m + 1)..n {
                let u = h[i][m - 1] * inv;
                if u.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = h[m][j];
                    h[i][j] += u * v;
                }
                for row in h.iter_mut() {
                    let v = row[i];
                    row[m] += u * v;
                }
            }
        }
        // p_0 = 1, p_{m+1} = (x - h_mm) p_m - sum_{i<m} h_im (prod_{j=i+1}^{m} h_{j,j-1}) p_i
        let x = Poly::x(field);
        let mut p: Vec<Poly> = vec![Poly::one(field)];
        for m in 0..n {
            let lin = &x - &Poly::from_elems(field, &[h[m][m]]);
            let mut next = &lin * &p[m];
            let mut prod = field.one();
            for i in (0..m).rev() {
                prod *= h[i + 1][i];
                if prod.is_zero() {
                    break;
                }
                let c = prod * h[i][m];
                next = &next - &p[i].scale(c);
            }
            p.push(next);
        }
        Ok(p.pop().unwrap())
    }

    /// Plain eigenspaces over `field` for every eigenvalue lying in `field`.
    pub fn eigenspaces(
        &self,
        label: OperatorLabel,
        field: BinaryField,
    ) -> Result<EigenDecomposition, MatError> {
        self.require_square()?;
        let a = self.extend_scalars(field)?;
        let cp = a.charpoly()?;
        let mut roots: Vec<FieldElem> = cp
            .factor()?
            .factors
            .iter()
            .filter(|(f, _)| f.degree() == Some(1))
            .map(|(f, _)| f.coeff(0))
            .collect();
        roots.sort();
        let spaces = roots
            .into_iter()
            .map(|lambda| {
                let shifted = a.add(&Self::scalar(lambda, a.rows)).expect("same shape");
                (lambda, shifted.kernel())
            })
            .collect();
        Ok(EigenDecomposition {
            label,
            field,
            ambient: self.rows,
            spaces,
        })
    }
}

/// Smallest canonical field containing every eigenvalue of every matrix.
pub fn eigenvalue_field(mats: &[&MatF2k]) -> Result<BinaryField, MatError> {
    let mut degree = 1;
    for m in mats {
        let split = m.charpoly()?.factor()?.splitting_degree();
        degree = crate::gf2k::lcm(degree, split);
    }
    Ok(BinaryField::new(degree)?)
}

/// Subspace of `field^ambient`, stored as a canonical RREF basis.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: MatF2k,
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |s: &Subspace| {
            (
                s.field(),
                s.ambient,
                s.dim(),
                (0..s.dim()).map(|i| s.basis.row_values(i)).collect::<Vec<_>>(),
            )
        };
        key(self).cmp(&key(other))
    }
}

impl Subspace {
    pub fn zero(field: BinaryField, ambient: usize) -> Self {
        Self {
            ambient,
            basis: MatF2k::zeros(field, 0, ambient),
        }
    }

    pub fn full(field: BinaryField, ambient: usize) -> Self {
        Self {
            ambient,
            basis: MatF2k::identity(field, ambient),
        }
    }

    /// Row space of `rows`.
    pub fn from_spanning(rows: &MatF2k) -> Self {
        let (m, pivots) = rows.rref();
        Self {
            ambient: rows.cols(),
            basis: m.top_rows(pivots.len()),
        }
    }

    pub fn field(&self) -> BinaryField {
        self.basis.field()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Basis vectors as the rows of an RREF matrix.
    pub fn basis(&self) -> &MatF2k {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<FieldElem>> {
        (0..self.dim()).map(|i| self.basis.row(i)).collect()
    }

    /// Vectors orthogonal to every basis vector under the dot product.
    fn annihilator(&self) -> MatF2k {
        if self.dim() == 0 {
            return MatF2k::identity(self.field(), self.ambient);
        }
        self.basis.kernel().basis
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, MatError> {
        if self.ambient != other.ambient {
            return Err(MatError::DimensionMismatch(format!(
                "ambient {} vs {}",
                self.ambient, other.ambient
            )));
        }
        self.basis.require_same_field(&other.basis)?;
        let constraints = self.annihilator().stack(&other.annihilator())?;
        if constraints.rows() == 0 {
            return Ok(Self::full(self.field(), self.ambient));
        }
        Ok(constraints.kernel())
    }

    pub fn sum(&self, other: &Self) -> Result<Self, MatError> {
        Ok(Self::from_spanning(&self.basis.stack(&other.basis)?))
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        let mut m = MatF2k::zeros(self.field(), 1, self.ambient);
        for (j, &x) in v.iter().enumerate() {
            m.set(0, j, x);
        }
        let stacked = self.basis.stack(&m).expect("same shape");
        stacked.rank() == self.dim()
    }

    /// Whether `a * v` stays in the subspace for every basis vector `v`.
    pub fn is_invariant_under(&self, a: &MatF2k) -> bool {
        self.basis_vectors()
            .iter()
            .all(|v| self.contains(&a.mul_vec(v)))
    }
}

/// Eigenspaces of one operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenDecomposition {
    pub label: OperatorLabel,
    pub field: BinaryField,
    pub ambient: usize,
    /// `(eigenvalue, eigenspace)`, sorted by eigenvalue.
    pub spaces: Vec<(FieldElem, Subspace)>,
}

impl EigenDecomposition {
    pub fn total_dim(&self) -> usize {
        self.spaces.iter().map(|(_, s)| s.dim()).sum()
    }
}

/// Common eigenspace of several operators, with the eigenvalue of each.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SimultaneousEigenspace {
    pub eigenvalues: BTreeMap<OperatorLabel, FieldElem>,
    pub space: Subspace,
}

/// All nonzero intersections of one eigenspace per operator.
///
/// Output is sorted, so it does not depend on the order of `decomps`.
pub fn refine(decomps: &[EigenDecomposition]) -> Result<Vec<SimultaneousEigenspace>, MatError> {
    let Some(first) = decomps.first() else {
        return Ok(Vec::new());
    };
    for d in decomps {
        if d.ambient != first.ambient {
            return Err(MatError::DimensionMismatch(format!(
                "{} acts on dimension {}, {} on {}",
                d.label, d.ambient, first.label, first.ambient
            )));
        }
        if d.field != first.field {
            return Err(MatError::FieldMismatch(d.field, first.field));
        }
    }
    let mut current = vec![SimultaneousEigenspace {
        eigenvalues: BTreeMap::new(),
        space: Subspace::full(first.field, first.ambient),
    }];
    for d in decomps {
        let mut next = Vec::new();
        for cell in &current {
            for (lambda, e) in &d.spaces {
                let meet = cell.space.intersect(e)?;
                if meet.dim() > 0 {
                    let mut eigenvalues = cell.eigenvalues.clone();
                    eigenvalues.insert(d.label, *lambda);
                    next.push(SimultaneousEigenspace {
                        eigenvalues,
                        space: meet,
                    });
                }
            }
        }
        current = next;
    }
    current.sort();
    Ok(current)
}
