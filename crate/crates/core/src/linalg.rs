//! Exact linear algebra over [`Scalar`].
//!
//! Dense [`Matrix`] for small square work (ad-matrices, basis changes) and a
//! sparse incremental [`Echelon`] for spans, ranks and nullspaces of the
//! larger constraint systems.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, found: row.len() });
            }
            data.extend(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn diagonal_from(values: &[Scalar]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
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

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn diagonal(&self) -> Vec<Scalar> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    /// Zero strictly below the diagonal.
    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..i.min(self.cols)).all(|j| self[(i, j)].is_zero()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(l, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// `AB - BA`.
    pub fn commutator(&self, rhs: &Matrix) -> Result<Matrix> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    /// True iff some power up to the size vanishes.
    pub fn is_nilpotent(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let mut p = self.clone();
        for _ in 0..self.rows {
            if p.is_zero() {
                return true;
            }
            p = p.mul(self).expect("square");
        }
        p.is_zero()
    }

    pub fn trace(&self) -> Scalar {
        self.diagonal().into_iter().fold(Scalar::zero(), |acc, x| acc + x)
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(self.cols);
        for i in 0..self.rows {
            e.insert_dense(self.row(i));
        }
        e.rank()
    }

    /// Right nullspace `{x : M x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let mut e = Echelon::new(self.cols);
        for i in 0..self.rows {
            e.insert_dense(self.row(i));
        }
        e.nullspace()
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] /= &p;
                inv[(col, j)] /= &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for j in 0..n {
                    let av = &a[(col, j)] * &factor;
                    a[(r, j)] -= av;
                    let iv = &inv[(col, j)] * &factor;
                    inv[(r, j)] -= iv;
                }
            }
        }
        Some(inv)
    }

    /// `x^T M` for a row vector `x`.
    pub fn left_apply(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: x.len() });
        }
        let mut out = vec![Scalar::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let m = &self[(i, j)];
                if !m.is_zero() {
                    *o += xi * m;
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub type SparseRow = BTreeMap<usize, Scalar>;

pub fn sparse_from_dense(v: &[Scalar]) -> SparseRow {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

/// Incrementally maintained reduced row echelon form.
///
/// Every stored row has a leading 1 in its pivot column and zeros in all
/// other pivot columns, so the stored basis is the unique RREF of the span.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    cols: usize,
    rows: Vec<SparseRow>,
    pivot_row: BTreeMap<usize, usize>,
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new(), pivot_row: BTreeMap::new() }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the stored basis.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let hits: Vec<(usize, Scalar)> = row
            .iter()
            .filter(|(c, _)| self.pivot_row.contains_key(c))
            .map(|(c, v)| (*c, v.clone()))
            .collect();
        for (c, v) in hits {
            let basis = &self.rows[self.pivot_row[&c]];
            for (j, b) in basis {
                let entry = row.entry(*j).or_insert_with(Scalar::zero);
                *entry -= &v * b;
                if entry.is_zero() {
                    row.remove(j);
                }
            }
        }
        row
    }

    /// Adds a row; returns true when the rank grows.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let mut row = self.reduce(row);
        let Some((&pc, pv)) = row.iter().next() else {
            return false;
        };
        let pv = pv.clone();
        for v in row.values_mut() {
            *v /= &pv;
        }
        for existing in &mut self.rows {
            if let Some(f) = existing.get(&pc).cloned() {
                for (j, b) in &row {
                    let e = existing.entry(*j).or_insert_with(Scalar::zero);
                    *e -= &f * b;
                    if e.is_zero() {
                        existing.remove(j);
                    }
                }
            }
        }
        self.pivot_row.insert(pc, self.rows.len());
        self.rows.push(row);
        true
    }

    pub fn insert_dense(&mut self, row: &[Scalar]) -> bool {
        self.insert(sparse_from_dense(row))
    }

    pub fn contains(&self, row: &SparseRow) -> bool {
        self.reduce(row.clone()).is_empty()
    }

    pub fn contains_dense(&self, row: &[Scalar]) -> bool {
        self.contains(&sparse_from_dense(row))
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.pivot_row.keys().copied().collect()
    }

    /// Basis rows ordered by pivot column (the RREF).
    pub fn basis(&self) -> Vec<SparseRow> {
        self.pivot_row.values().map(|&r| self.rows[r].clone()).collect()
    }

    pub fn basis_dense(&self) -> Vec<Vec<Scalar>> {
        self.basis().iter().map(|r| to_dense(r, self.cols)).collect()
    }

    /// Basis of `{x : row . x = 0 for every stored row}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !self.pivot_row.contains_key(c)) {
            let mut v = vec![Scalar::zero(); self.cols];
            v[free] = Scalar::one();
            for (&pc, &r) in &self.pivot_row {
                if let Some(x) = self.rows[r].get(&free) {
                    v[pc] = -x.clone();
                }
            }
            out.push(v);
        }
        out
    }
}

pub fn to_dense(row: &SparseRow, cols: usize) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(); cols];
    for (j, x) in row {
        v[*j] = x.clone();
    }
    v
}

/// Rank of a list of dense vectors.
pub fn rank_of(vectors: &[Vec<Scalar>]) -> usize {
    let cols = vectors.first().map_or(0, Vec::len);
    let mut e = Echelon::new(cols);
    for v in vectors {
        e.insert_dense(v);
    }
    e.rank()
}

/// Some solution of `M x = b`, with free variables set to zero.
pub fn solve(m: &Matrix, b: &[Scalar]) -> Option<Vec<Scalar>> {
    if b.len() != m.rows() {
        return None;
    }
    let cols = m.cols();
    let mut e = Echelon::new(cols + 1);
    for (i, bi) in b.iter().enumerate() {
        let mut row = m.row(i).to_vec();
        row.push(bi.clone());
        e.insert_dense(&row);
    }
    if e.pivots().contains(&cols) {
        return None;
    }
    let mut x = vec![Scalar::zero(); cols];
    for row in e.basis() {
        let (&pc, _) = row.iter().next().expect("nonzero row");
        x[pc] = row.get(&cols).cloned().unwrap_or_else(Scalar::zero);
    }
    Some(x)
}
