//! Dense matrices over an exact [`Field`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::ops::Mul;

use sha2::{Digest, Sha256};

use crate::error::{AlgebraError, Error};
use crate::field::{Field, Scalar, ScalarText};

/// Default number of powers tried by [`Mat::power_period`].
pub const DEFAULT_POWER_CAP: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
            && self.field == other.field
    }
}

impl Eq for Mat {}

impl Hash for Mat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.data.hash(state);
    }
}

impl PartialOrd for Mat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mat {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.rows, self.cols, &self.data).cmp(&(other.rows, other.cols, &other.data))
    }
}

/// Smallest index and period with `s^index = s^(index + period)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PowerPeriod {
    pub index: u64,
    pub period: u64,
}

/// Reduced row-echelon form with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub reduced: Mat,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl Mat {
    pub fn new(field: &Field, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Mat, AlgebraError> {
        if data.len() != rows * cols {
            return Err(AlgebraError::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Mat {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Mat {
        Mat {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    /// Build from integer rows, reducing into the field.
    pub fn from_i64(field: &Field, rows: &[&[i64]]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| field.from_i64(v)))
            .collect();
        Mat {
            field: field.clone(),
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<Scalar>>) -> Result<Mat, AlgebraError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(AlgebraError::ShapeMismatch("ragged rows".into()));
        }
        Mat::new(field, r, c, rows.into_iter().flatten().collect())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: &Field, n: usize, cols: &[Vec<Scalar>]) -> Mat {
        let mut m = Mat::zeros(field, n, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    /// Interpret rows of interchange text.
    pub fn parse(field: &Field, rows: &[Vec<ScalarText>]) -> Result<Mat, AlgebraError> {
        let parsed = rows
            .iter()
            .map(|row| row.iter().map(|t| field.parse(t)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Mat::from_rows(field, parsed)
    }

    pub fn to_text(&self) -> Vec<Vec<ScalarText>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| self.field.format(v)).collect())
            .collect()
    }

    pub fn field(&self) -> &Field {
        &self.field
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

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| self.field.is_zero(v))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j {
                        *v == self.field.one()
                    } else {
                        self.field.is_zero(v)
                    }
                })
            })
    }

    fn check_same_field(&self, other: &Mat) -> Result<(), AlgebraError> {
        if self.field != other.field {
            return Err(AlgebraError::FieldMismatch);
        }
        Ok(())
    }

    pub fn checked_mul(&self, other: &Mat) -> Result<Mat, AlgebraError> {
        self.check_same_field(other)?;
        if self.cols != other.rows {
            return Err(AlgebraError::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Mat) -> Mat {
        let f = &self.field;
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = f.zero();
                for k in 0..self.cols {
                    let a = &self.data[i * self.cols + k];
                    if f.is_zero(a) {
                        continue;
                    }
                    let b = &other.data[k * other.cols + j];
                    if f.is_zero(b) {
                        continue;
                    }
                    acc = f.add(&acc, &f.mul(a, b));
                }
                data.push(acc);
            }
        }
        Mat {
            field: f.clone(),
            rows: self.rows,
            cols: other.cols,
            data,
        }
    }

    pub fn checked_add(&self, other: &Mat) -> Result<Mat, AlgebraError> {
        self.check_same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(AlgebraError::ShapeMismatch(format!(
                "{}x{} plus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.field.add(a, b))
            .collect();
        Ok(Mat {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn checked_sub(&self, other: &Mat) -> Result<Mat, AlgebraError> {
        self.checked_add(&other.scale(&self.field.from_i64(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> Mat {
        Mat {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| self.field.mul(a, c)).collect(),
        }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols, "vector length");
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.rows, "vector length");
        let f = &self.field;
        (0..self.cols)
            .map(|j| {
                (0..self.rows).fold(f.zero(), |acc, i| f.add(&acc, &f.mul(&v[i], self.get(i, j))))
            })
            .collect()
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "submatrix out of range");
        let data = (r0..r0 + rows)
            .flat_map(|i| self.data[i * self.cols + c0..i * self.cols + c0 + cols].iter().cloned())
            .collect();
        Mat {
            field: self.field.clone(),
            rows,
            cols,
            data,
        }
    }

    /// Block-diagonal assembly of square blocks.
    pub fn block_diagonal(field: &Field, blocks: &[Mat]) -> Mat {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut m = Mat::zeros(field, n, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(off + i, off + j, b.get(i, j).clone());
                }
            }
            off += b.rows;
        }
        m
    }

    /// Row-major flattening, used when matrices are treated as vectors.
    pub fn flatten(&self) -> Vec<Scalar> {
        self.data.clone()
    }

    pub fn rref(&self) -> Rref {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| !f.is_zero(m.get(r, col))) else {
                continue;
            };
            if pr != row {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, row * m.cols + j);
                }
            }
            let inv = f.inv(m.get(row, col)).expect("pivot is nonzero");
            for j in 0..m.cols {
                let v = f.mul(m.get(row, j), &inv);
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row || f.is_zero(m.get(r, col)) {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for j in 0..m.cols {
                    let v = f.sub(m.get(r, j), &f.mul(&factor, m.get(row, j)));
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Rref { reduced: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    pub fn inverse(&self) -> Result<Mat, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::ShapeMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Mat::zeros(&self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, self.field.one());
        }
        let r = aug.rref();
        if r.pivots.len() < n || r.pivots[n - 1] != n - 1 {
            return Err(AlgebraError::SingularMatrix);
        }
        Ok(r.reduced.submatrix(0, n, n, n))
    }

    /// Basis of the right null space `{x : A x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let f = &self.field;
        let r = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !r.pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![f.zero(); self.cols];
                v[fc] = f.one();
                for (row, &pc) in r.pivots.iter().enumerate() {
                    v[pc] = f.neg(r.reduced.get(row, fc));
                }
                v
            })
            .collect()
    }

    pub fn trace(&self) -> Result<Scalar, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::ShapeMismatch("trace of a non-square matrix".into()));
        }
        Ok((0..self.rows).fold(self.field.zero(), |acc, i| self.field.add(&acc, self.get(i, i))))
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_form(&self, other: &Mat) -> Result<Scalar, AlgebraError> {
        self.check_same_field(other)?;
        if !self.is_square() || (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(AlgebraError::ShapeMismatch(
                "trace form needs equal square shapes".into(),
            ));
        }
        let f = &self.field;
        let n = self.rows;
        let mut acc = f.zero();
        for i in 0..n {
            for k in 0..n {
                acc = f.add(&acc, &f.mul(self.get(i, k), other.get(k, i)));
            }
        }
        Ok(acc)
    }

    pub fn pow(&self, mut e: u64) -> Mat {
        assert!(self.is_square());
        let mut result = Mat::identity(&self.field, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Smallest `(index, period)` with `s^index = s^(index+period)`, found by
    /// interning successive powers. Gives up after `cap` powers.
    pub fn power_period(&self, cap: u64) -> Result<PowerPeriod, Error> {
        if !self.is_square() {
            return Err(AlgebraError::ShapeMismatch("power of a non-square matrix".into()).into());
        }
        let mut seen: HashMap<Mat, u64> = HashMap::new();
        let mut current = self.clone();
        let mut j = 1u64;
        loop {
            if let Some(&i) = seen.get(&current) {
                return Ok(PowerPeriod {
                    index: i,
                    period: j - i,
                });
            }
            if j > cap {
                return Err(Error::ExceededCap(cap));
            }
            let next = &current * self;
            seen.insert(current, j);
            current = next;
            j += 1;
        }
    }

    /// Stable byte encoding: shape, then row-major reduced entries.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.data.len() * 4);
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for v in &self.data {
            self.field.encode(v, &mut out);
        }
        out
    }

    pub fn digest(&self) -> String {
        hex::encode(&Sha256::digest(self.canonical_bytes())[..8])
    }
}

impl Mul for &Mat {
    type Output = Mat;

    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        debug_assert!(self.field == rhs.field, "field mismatch in product");
        self.mul_unchecked(rhs)
    }
}

/// Rank, reduced form and (when it exists) inverse in one call.
pub fn rank_rref_inverse(a: &Mat) -> (usize, Mat, Option<Mat>) {
    let r = a.rref();
    let inv = if a.is_square() { a.inverse().ok() } else { None };
    (r.rank(), r.reduced, inv)
}
