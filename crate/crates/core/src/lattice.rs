//! Exact integer linear algebra over `Z^n`.
//!
//! All entries are arbitrary-precision integers. Matrices act on column
//! vectors: an `r x c` matrix maps `Z^c` to `Z^r`.
//!
//! Hermite normal form convention (row style): `u * m = h` with `u`
//! unimodular and `h` in row echelon form. Pivot columns strictly increase
//! going down, every entry below a pivot is zero, pivots are positive, and
//! the entries above each pivot are reduced into `[0, pivot)`. Zero rows come
//! last.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The ambient group `Z^rank`, used both for character lattices and their duals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lattice {
    pub rank: usize,
}

impl Lattice {
    pub fn new(rank: usize) -> Self {
        Lattice { rank }
    }
}

/// An element of `Z^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IntVector(pub Vec<BigInt>);

impl IntVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        IntVector(coords)
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        IntVector(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        IntVector(vec![BigInt::zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = BigInt::one();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &IntVector) -> BigInt {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, k: &BigInt) -> IntVector {
        IntVector(self.0.iter().map(|a| a * k).collect())
    }

    /// Gcd of the coordinates (zero for the zero vector).
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, a| g.gcd(a))
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    /// `self / gcd(self)`; sign is preserved.
    pub fn primitive(&self) -> Result<IntVector> {
        let g = self.content();
        if g.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(IntVector(self.0.iter().map(|a| a / &g).collect()))
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|a| a.to_i64()).collect()
    }

    /// Degree with respect to a grading functional.
    pub fn degree(&self, grading: &IntVector) -> BigInt {
        self.dot(grading)
    }
}

impl fmt::Debug for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl Add for &IntVector {
    type Output = IntVector;
    fn add(self, rhs: &IntVector) -> IntVector {
        debug_assert_eq!(self.len(), rhs.len());
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &IntVector {
    type Output = IntVector;
    fn sub(self, rhs: &IntVector) -> IntVector {
        debug_assert_eq!(self.len(), rhs.len());
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &IntVector {
    type Output = IntVector;
    fn neg(self) -> IntVector {
        IntVector(self.0.iter().map(|a| -a).collect())
    }
}

/// Dense integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn scalar(n: usize, k: &BigInt) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = k.clone();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is needed when there are no rows.
    pub fn from_row_vectors(cols: usize, rows: &[IntVector]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!("row of length {} in a {cols}-column matrix", r.len())));
            }
            data.extend(r.0.iter().cloned());
        }
        Ok(IntMatrix { rows: rows.len(), cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_column_vectors(rows: usize, cols: &[IntVector]) -> Result<Self> {
        Ok(Self::from_row_vectors(rows, cols)?.transpose())
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let vs: Vec<IntVector> = rows.iter().map(|r| IntVector::from_i64(r)).collect();
        Self::from_row_vectors(cols, &vs).expect("ragged rows")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> IntVector {
        IntVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> IntVector {
        IntVector((0..self.rows).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn row_vectors(&self) -> Vec<IntVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn col_vectors(&self) -> Vec<IntVector> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &IntVector) -> Result<IntVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(IntVector(
            (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v.0[j]).sum())
                .collect(),
        ))
    }

    pub fn scale(&self, k: &BigInt) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * k).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.row_vectors().iter().map(IntVector::to_i64).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] -= k * row[source]
    fn sub_row_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = self.get(source, j) * k;
            self.data[target * self.cols + j] -= s;
        }
    }

    /// col[target] -= k * col[source]
    fn sub_col_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = self.get(i, source) * k;
            self.data[i * self.cols + target] -= s;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let idx = i * self.cols + j;
            self.data[idx] = -&self.data[idx];
        }
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        Ok(sign * a.get(n - 1, n - 1))
    }

    pub fn rank(&self) -> usize {
        let (h, _) = hermite_normal_form(self);
        (0..h.rows).filter(|&i| !h.row(i).is_zero()).count()
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.determinant().map(|d| d.abs().is_one()).unwrap_or(false)
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        if !self.is_unimodular() {
            return Err(Error::NotABasis);
        }
        let (h, u) = hermite_normal_form(self);
        debug_assert_eq!(h, IntMatrix::identity(self.rows));
        Ok(u)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch("vstack column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(IntMatrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Rows `range` as a new matrix.
    pub fn select_rows(&self, range: std::ops::Range<usize>) -> IntMatrix {
        let rows: Vec<IntVector> = range.map(|i| self.row(i)).collect();
        Self::from_row_vectors(self.cols, &rows).expect("consistent")
    }

    pub fn select_cols(&self, range: std::ops::Range<usize>) -> IntMatrix {
        self.transpose().select_rows(range).transpose()
    }
}

/// Row-style Hermite normal form: returns `(h, u)` with `u * m = h`.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        loop {
            let pivot = (row..m.rows)
                .filter(|&i| !h.get(i, col).is_zero())
                .min_by(|&a, &b| h.get(a, col).abs().cmp(&h.get(b, col).abs()).then(a.cmp(&b)));
            let Some(p) = pivot else { break };
            h.swap_rows(row, p);
            u.swap_rows(row, p);
            let mut done = true;
            for k in row + 1..m.rows {
                if h.get(k, col).is_zero() {
                    continue;
                }
                let q = h.get(k, col) / h.get(row, col);
                h.sub_row_multiple(k, row, &q);
                u.sub_row_multiple(k, row, &q);
                if !h.get(k, col).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.get(row, col).is_zero() {
            continue;
        }
        if h.get(row, col).is_negative() {
            h.negate_row(row);
            u.negate_row(row);
        }
        let pivot = h.get(row, col).clone();
        for k in 0..row {
            let q = h.get(k, col).div_floor(&pivot);
            h.sub_row_multiple(k, row, &q);
            u.sub_row_multiple(k, row, &q);
        }
        row += 1;
    }
    (h, u)
}

/// Smith normal form: returns `(d, u, v)` with `u * m * v = d`, `d` diagonal,
/// nonnegative, and `d_i | d_{i+1}`.
pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let mut d = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut v = IntMatrix::identity(m.cols);
    let n = m.rows.min(m.cols);
    let mut t = 0;
    while t < n {
        let pivot = (t..m.rows)
            .flat_map(|i| (t..m.cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !d.get(i, j).is_zero())
            .min_by(|&a, &b| d.get(a.0, a.1).abs().cmp(&d.get(b.0, b.1).abs()).then(a.cmp(&b)));
        let Some((pi, pj)) = pivot else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..m.rows {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = d.get(i, t).div_floor(d.get(t, t));
                d.sub_row_multiple(i, t, &q);
                u.sub_row_multiple(i, t, &q);
                if !d.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..m.cols {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = d.get(t, j).div_floor(d.get(t, t));
                d.sub_col_multiple(j, t, &q);
                v.sub_col_multiple(j, t, &q);
                if !d.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if clean {
                // divisibility of the remaining block
                let bad = (t + 1..m.rows)
                    .flat_map(|i| (t + 1..m.cols).map(move |j| (i, j)))
                    .find(|&(i, j)| !(d.get(i, j) % d.get(t, t)).is_zero());
                match bad {
                    None => break,
                    Some((i, _)) => {
                        // row t += row i, then keep reducing
                        let minus_one = -BigInt::one();
                        d.sub_row_multiple(t, i, &minus_one);
                        u.sub_row_multiple(t, i, &minus_one);
                    }
                }
            }
            // move the smallest nonzero entry of row/col t to the pivot
            let best = (t..m.rows)
                .map(|i| (i, t))
                .chain((t..m.cols).map(|j| (t, j)))
                .filter(|&(i, j)| !d.get(i, j).is_zero())
                .min_by(|&a, &b| d.get(a.0, a.1).abs().cmp(&d.get(b.0, b.1).abs()).then(a.cmp(&b)));
            if let Some((bi, bj)) = best {
                d.swap_rows(t, bi);
                u.swap_rows(t, bi);
                d.swap_cols(t, bj);
                v.swap_cols(t, bj);
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    (d, u, v)
}

/// `v / gcd(v)`.
pub fn primitive(v: &IntVector) -> Result<IntVector> {
    v.primitive()
}

/// Extends a primitive vector to a lattice basis whose first element is `v`.
///
/// The completion is computed from the Hermite reduction of `v` viewed as a
/// column: with `u * v = e_1`, the basis is the columns of `u^{-1}`.
pub fn extend_to_basis(v: &IntVector) -> Result<Vec<IntVector>> {
    if v.is_empty() || v.is_zero() || !v.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let col = IntMatrix::from_column_vectors(v.len(), std::slice::from_ref(v))?;
    let (h, u) = hermite_normal_form(&col);
    debug_assert!(h.get(0, 0).is_one());
    let inv = u.inverse_unimodular()?;
    let basis = inv.col_vectors();
    debug_assert_eq!(&basis[0], v);
    Ok(basis)
}

/// The dual basis `m_j` with `<n_i, m_j> = delta_ij`.
pub fn dual_basis(basis: &[IntVector]) -> Result<Vec<IntVector>> {
    let n = basis.len();
    if basis.iter().any(|b| b.len() != n) {
        return Err(Error::NotABasis);
    }
    let b = IntMatrix::from_row_vectors(n, basis)?;
    let inv = b.inverse_unimodular()?;
    Ok(inv.col_vectors())
}

/// Lexicographically least `x` with `0 <= x_i <= bound` and `a x = b`.
pub fn solve_nonneg(a: &IntMatrix, b: &IntVector, bound: u64) -> Result<Option<IntVector>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!("rhs of length {} for {} rows", b.len(), a.rows())));
    }
    let cols = a.col_vectors();
    let mut x = vec![BigInt::zero(); a.cols()];
    let bound = BigInt::from(bound);
    fn rec(i: usize, cols: &[IntVector], residual: &IntVector, x: &mut Vec<BigInt>, bound: &BigInt) -> bool {
        if i == cols.len() {
            return residual.is_zero();
        }
        let mut r = residual.clone();
        let mut k = BigInt::zero();
        while &k <= bound {
            x[i] = k.clone();
            if rec(i + 1, cols, &r, x, bound) {
                return true;
            }
            r = &r - &cols[i];
            k += 1;
        }
        x[i] = BigInt::zero();
        false
    }
    if rec(0, &cols, b, &mut x, &bound) {
        Ok(Some(IntVector(x)))
    } else {
        Ok(None)
    }
}

/// A basis of the integer kernel `{x : m x = 0}` (a saturated lattice).
pub fn kernel(m: &IntMatrix) -> Vec<IntVector> {
    let t = m.transpose();
    let (h, u) = hermite_normal_form(&t);
    (0..h.rows()).filter(|&i| h.row(i).is_zero()).map(|i| u.row(i)).collect()
}

/// Solves `a x = b` over the rationals for square invertible `a`.
pub fn solve_rational(a: &IntMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return None;
    }
    let mut aug: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n).map(|j| BigRational::from_integer(a.get(i, j).clone())).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !aug[i][c].is_zero())?;
        aug.swap(c, p);
        let pivot = aug[c][c].clone();
        for x in aug[c].iter_mut() {
            *x /= &pivot;
        }
        for i in 0..n {
            if i != c && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in c..=n {
                    let s = &aug[c][j] * &f;
                    aug[i][j] -= s;
                }
            }
        }
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Clears denominators and returns the primitive integer vector on the same ray.
pub fn primitive_from_rational(v: &[BigRational]) -> Result<IntVector> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let iv = IntVector(v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect());
    iv.primitive()
}

/// Sublattice of `Z^n` with a basis in Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sublattice {
    ambient: usize,
    basis: Vec<IntVector>,
}

impl Sublattice {
    pub fn generated_by(ambient: usize, gens: &[IntVector]) -> Sublattice {
        let m = IntMatrix::from_row_vectors(ambient, gens).expect("generator length");
        let (h, _) = hermite_normal_form(&m);
        let basis = h.row_vectors().into_iter().filter(|r| !r.is_zero()).collect();
        Sublattice { ambient, basis }
    }

    pub fn full(ambient: usize) -> Sublattice {
        Sublattice { ambient, basis: (0..ambient).map(|i| IntVector::unit(ambient, i)).collect() }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[IntVector] {
        &self.basis
    }

    /// Coordinates of `v` in the stored basis, if `v` lies in the lattice.
    pub fn coords(&self, v: &IntVector) -> Option<IntVector> {
        let mut residual = v.clone();
        let mut c = Vec::with_capacity(self.basis.len());
        for b in &self.basis {
            let p = b.0.iter().position(|x| !x.is_zero()).expect("nonzero basis row");
            if residual.0[..p].iter().any(|x| !x.is_zero()) {
                return None;
            }
            let (q, r) = residual.0[p].div_rem(&b.0[p]);
            if !r.is_zero() {
                return None;
            }
            residual = &residual - &b.scale(&q);
            c.push(q);
        }
        if residual.is_zero() {
            Some(IntVector(c))
        } else {
            None
        }
    }

    pub fn contains(&self, v: &IntVector) -> bool {
        self.coords(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Sublattice) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    /// `(span_R L) ∩ Z^n`.
    pub fn saturation(&self) -> Sublattice {
        if self.basis.is_empty() {
            return self.clone();
        }
        let m = IntMatrix::from_row_vectors(self.ambient, &self.basis).unwrap();
        let perp = kernel(&m);
        if perp.is_empty() {
            return Sublattice::full(self.ambient);
        }
        let pm = IntMatrix::from_row_vectors(self.ambient, &perp).unwrap();
        Sublattice::generated_by(self.ambient, &kernel(&pm))
    }

    pub fn is_saturated(&self) -> bool {
        self.contains_lattice(&self.saturation())
    }

    /// Realizes `Z^n / sat(L)` as `Z^{n-k}`.
    pub fn quotient_map(&self) -> QuotientMap {
        let sat = self.saturation();
        let k = sat.rank();
        let n = self.ambient;
        if k == 0 {
            return QuotientMap { projection: IntMatrix::identity(n), section: IntMatrix::identity(n) };
        }
        let b = IntMatrix::from_row_vectors(n, sat.basis()).unwrap();
        let (_d, _u, v) = smith_normal_form(&b);
        let vinv = v.inverse_unimodular().expect("unimodular");
        // coordinates y = x^T v, the first k of which span sat(L)
        let projection = v.select_cols(k..n).transpose();
        let section = vinv.select_rows(k..n).transpose();
        QuotientMap { projection, section }
    }

    /// Coordinates of this lattice's generators inside a larger lattice; used for
    /// torsion checks of `big / self`.
    pub fn is_saturated_in(&self, big: &Sublattice) -> bool {
        let coords: Vec<IntVector> = match self.basis.iter().map(|b| big.coords(b)).collect::<Option<Vec<_>>>() {
            Some(c) => c,
            None => return false,
        };
        Sublattice::generated_by(big.rank(), &coords).is_saturated()
    }
}

/// A surjection `Z^n -> Z^m` with kernel a saturated sublattice, plus a section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientMap {
    pub projection: IntMatrix,
    pub section: IntMatrix,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows)
    }

    fn v(c: &[i64]) -> IntVector {
        IntVector::from_i64(c)
    }

    fn assert_hnf_shape(h: &IntMatrix) {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for i in 0..h.rows() {
            let r = h.row(i);
            match r.0.iter().position(|x| !x.is_zero()) {
                None => seen_zero = true,
                Some(p) => {
                    assert!(!seen_zero, "nonzero row after zero row");
                    if let Some(lp) = last_pivot {
                        assert!(p > lp);
                    }
                    assert!(h.get(i, p).is_positive());
                    for k in 0..i {
                        assert!(!h.get(k, p).is_negative() && h.get(k, p) < h.get(i, p));
                    }
                    last_pivot = Some(p);
                }
            }
        }
    }

    #[test]
    fn hnf_examples() {
        let id = IntMatrix::identity(2);
        assert_eq!(hermite_normal_form(&id), (id.clone(), id.clone()));
        let d = m(&[&[2, 0], &[0, 3]]);
        assert_eq!(hermite_normal_form(&d), (d.clone(), id.clone()));
        let a = m(&[&[2, 4], &[1, 3]]);
        let (h, u) = hermite_normal_form(&a);
        assert_eq!(u.mul(&a).unwrap(), h);
        assert!(u.is_unimodular());
        assert_eq!(h.determinant().unwrap().abs(), BigInt::from(2));
        assert_hnf_shape(&h);
    }

    #[test]
    fn snf_examples() {
        let z = IntMatrix::zeros(2, 3);
        assert!(smith_normal_form(&z).0.is_zero());
        let (d, u, w) = smith_normal_form(&m(&[&[2, 0], &[0, 3]]));
        assert_eq!(d, m(&[&[1, 0], &[0, 6]]));
        assert_eq!(u.mul(&m(&[&[2, 0], &[0, 3]])).unwrap().mul(&w).unwrap(), d);
        let id = IntMatrix::identity(3);
        assert_eq!(smith_normal_form(&id).0, id);
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(primitive(&v(&[2, 4])).unwrap(), v(&[1, 2]));
        assert_eq!(primitive(&v(&[1, 1])).unwrap(), v(&[1, 1]));
        assert_eq!(primitive(&v(&[0, -6])).unwrap(), v(&[0, -1]));
        assert_eq!(primitive(&v(&[0, 0])), Err(Error::ZeroVector));
    }

    #[test]
    fn basis_extension_examples() {
        assert_eq!(extend_to_basis(&v(&[1, 0])).unwrap(), vec![v(&[1, 0]), v(&[0, 1])]);
        assert_eq!(extend_to_basis(&v(&[1, 1])).unwrap(), vec![v(&[1, 1]), v(&[0, 1])]);
        let b = extend_to_basis(&v(&[2, 3])).unwrap();
        assert_eq!(b[0], v(&[2, 3]));
        assert!(IntMatrix::from_row_vectors(2, &b).unwrap().is_unimodular());
        assert_eq!(extend_to_basis(&v(&[2, 4])), Err(Error::NotPrimitive));
    }

    #[test]
    fn dual_basis_examples() {
        let std = vec![v(&[1, 0]), v(&[0, 1])];
        assert_eq!(dual_basis(&std).unwrap(), std);
        assert_eq!(dual_basis(&[v(&[1, 1]), v(&[0, 1])]).unwrap(), vec![v(&[1, 0]), v(&[-1, 1])]);
        assert_eq!(dual_basis(&[v(&[1, 0]), v(&[1, 1])]).unwrap(), vec![v(&[1, -1]), v(&[0, 1])]);
        assert_eq!(dual_basis(&[v(&[2, 0]), v(&[0, 1])]), Err(Error::NotABasis));
    }

    #[test]
    fn solve_nonneg_examples() {
        let id = IntMatrix::identity(2);
        assert_eq!(solve_nonneg(&id, &v(&[1, 2]), 2).unwrap(), Some(v(&[1, 2])));
        let a = m(&[&[2, 3]]);
        assert_eq!(solve_nonneg(&a, &v(&[1]), 10).unwrap(), None);
        assert_eq!(solve_nonneg(&a, &v(&[5]), 10).unwrap(), Some(v(&[1, 1])));
        assert!(matches!(solve_nonneg(&a, &v(&[1, 2]), 3), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn kernel_and_saturation() {
        let a = m(&[&[1, 1, 1]]);
        let k = kernel(&a);
        assert_eq!(k.len(), 2);
        for x in &k {
            assert!(a.apply(x).unwrap().is_zero());
        }
        let l = Sublattice::generated_by(2, &[v(&[2, 0])]);
        assert!(!l.is_saturated());
        assert_eq!(l.saturation(), Sublattice::generated_by(2, &[v(&[1, 0])]));
        let q = Sublattice::generated_by(3, &[v(&[1, 1, 0])]).quotient_map();
        assert_eq!(q.projection.rows(), 2);
        assert!(q.projection.apply(&v(&[1, 1, 0])).unwrap().is_zero());
        assert_eq!(q.projection.mul(&q.section).unwrap(), IntMatrix::identity(2));
    }

    #[test]
    fn sublattice_coords() {
        let l = Sublattice::generated_by(2, &[v(&[1, 0]), v(&[1, 2])]);
        assert_eq!(l.rank(), 2);
        assert!(l.contains(&v(&[0, 2])));
        assert!(!l.contains(&v(&[1, 1])));
    }

    #[test]
    fn determinant_matches_expansion() {
        let a = m(&[&[2, -1, 3], &[0, 4, 1], &[5, 2, -2]]);
        // cofactor expansion by hand: 2(-8-2) +1(0-5) +3(0-20) = -85
        assert_eq!(a.determinant().unwrap(), BigInt::from(-85));
    }
}
