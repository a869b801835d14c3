//! Row-major dense `f64` matrix.
//!
//! The multiply kernel is delegated to `matrixmultiply::dgemm`, which does
//! runtime SIMD detection; everything else is plain loops. Matrices are
//! immutable once returned from an operation and safe to share across
//! threads for reading.

use crate::error::{Error, Result};

/// Dense 2-D matrix of `f64` values in row-major order.
///
/// Invariants: `rows >= 1`, `cols >= 1`, `data.len() == rows * cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, validating the shape.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape {
                op: "from_vec",
                rows,
                cols,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::Config(format!(
                "matrix data length {} does not equal {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// All-zeros matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix shape must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Square identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from slices of equal-length rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidShape {
                op: "from_rows",
                rows: rows.len(),
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::dim("from_rows", (1, r.len()), (1, cols)));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Standard matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::dim("matmul", self.shape(), rhs.shape()));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        // Row-major strides: row stride = cols, column stride = 1.
        unsafe {
            matrixmultiply::dgemm(
                self.rows,
                self.cols,
                rhs.cols,
                1.0,
                self.data.as_ptr(),
                self.cols as isize,
                1,
                rhs.data.as_ptr(),
                rhs.cols as isize,
                1,
                0.0,
                out.data.as_mut_ptr(),
                rhs.cols as isize,
                1,
            );
        }
        Ok(out)
    }

    /// `self^T * rhs` without materializing the transpose.
    pub fn matmul_transpose_left(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != rhs.rows {
            return Err(Error::dim(
                "matmul_transpose_left",
                (self.cols, self.rows),
                rhs.shape(),
            ));
        }
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        self.gemm_transpose_left(rhs, &mut out, 0.0);
        Ok(out)
    }

    /// `into += self^T * rhs`, accumulating without temporaries.
    pub fn matmul_transpose_left_acc(&self, rhs: &Matrix, into: &mut Matrix) -> Result<()> {
        if self.rows != rhs.rows || into.shape() != (self.cols, rhs.cols) {
            return Err(Error::dim(
                "matmul_transpose_left_acc",
                (self.cols, self.rows),
                rhs.shape(),
            ));
        }
        self.gemm_transpose_left(rhs, into, 1.0);
        Ok(())
    }

    fn gemm_transpose_left(&self, rhs: &Matrix, out: &mut Matrix, beta: f64) {
        // The left operand is read with swapped strides.
        unsafe {
            matrixmultiply::dgemm(
                self.cols,
                self.rows,
                rhs.cols,
                1.0,
                self.data.as_ptr(),
                1,
                self.cols as isize,
                rhs.data.as_ptr(),
                rhs.cols as isize,
                1,
                beta,
                out.data.as_mut_ptr(),
                rhs.cols as isize,
                1,
            );
        }
    }

    /// `self * rhs^T` without materializing the transpose.
    pub fn matmul_transpose_right(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.cols {
            return Err(Error::dim(
                "matmul_transpose_right",
                self.shape(),
                (rhs.cols, rhs.rows),
            ));
        }
        let mut out = Matrix::zeros(self.rows, rhs.rows);
        unsafe {
            matrixmultiply::dgemm(
                self.rows,
                self.cols,
                rhs.rows,
                1.0,
                self.data.as_ptr(),
                self.cols as isize,
                1,
                rhs.data.as_ptr(),
                1,
                rhs.cols as isize,
                0.0,
                out.data.as_mut_ptr(),
                rhs.rows as isize,
                1,
            );
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with("add", rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with("sub", rhs, |a, b| a - b)
    }

    /// Elementwise product.
    pub fn hadamard(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with("hadamard", rhs, |a, b| a * b)
    }

    /// In-place elementwise accumulation: `self += other`.
    pub fn accumulate_from(&mut self, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::dim("accumulate_from", self.shape(), other.shape()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        self.map(|v| v * factor)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Adds a `1 x cols` row vector to every row.
    pub fn add_row_broadcast(&self, row: &Matrix) -> Result<Matrix> {
        if row.rows != 1 || row.cols != self.cols {
            return Err(Error::dim("add_row_broadcast", self.shape(), row.shape()));
        }
        let mut out = self.clone();
        for r in 0..self.rows {
            let base = r * self.cols;
            for c in 0..self.cols {
                out.data[base + c] += row.data[c];
            }
        }
        Ok(out)
    }

    /// Column sums as a `1 x cols` matrix.
    pub fn col_sums(&self) -> Matrix {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            let base = r * self.cols;
            for (c, sum) in sums.iter_mut().enumerate() {
                *sum += self.data[base + c];
            }
        }
        Matrix {
            rows: 1,
            cols: self.cols,
            data: sums,
        }
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Copies a contiguous block of columns `[start, end)` into a new matrix.
    pub fn slice_cols(&self, start: usize, end: usize) -> Matrix {
        assert!(start < end && end <= self.cols, "column slice out of range");
        let width = end - start;
        let mut data = Vec::with_capacity(self.rows * width);
        for r in 0..self.rows {
            let base = r * self.cols;
            data.extend_from_slice(&self.data[base + start..base + end]);
        }
        Matrix {
            rows: self.rows,
            cols: width,
            data,
        }
    }

    /// Horizontal concatenation `[self, rhs]`.
    pub fn hcat(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != rhs.rows {
            return Err(Error::dim("hcat", self.shape(), rhs.shape()));
        }
        let cols = self.cols + rhs.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(rhs.row(r));
        }
        Ok(Matrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Copies selected rows into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        assert!(!indices.is_empty(), "row selection must be non-empty");
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    fn zip_with(
        &self,
        op: &'static str,
        rhs: &Matrix,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Matrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::dim(op, self.shape(), rhs.shape()));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use proptest::prelude::*;

    /// Naive triple-loop product, kept as an independent oracle for the
    /// dgemm-backed implementation.
    fn matmul_naive(a: &Matrix, b: &Matrix) -> Matrix {
        assert_eq!(a.cols(), b.rows());
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for k in 0..a.cols() {
                    acc += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let i = Matrix::identity(2);
        assert_eq!(i.matmul(&a).unwrap(), a);
    }

    #[test]
    fn matmul_forced_dot_product() {
        let a = Matrix::from_rows(&[&[1.0, 2.0]]).unwrap();
        let b = Matrix::from_rows(&[&[3.0], &[4.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.shape(), (1, 1));
        assert_eq!(c.get(0, 0), 11.0);
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = Rng::new(7);
        let a = random_matrix(5, 4, &mut rng);
        let b = random_matrix(4, 3, &mut rng);
        let fast = a.matmul(&b).unwrap();
        let slow = matmul_naive(&a, &b);
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn matmul_shape_mismatch_names_both_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        let err = a.matmul(&b).unwrap_err().to_string();
        assert!(err.contains("2x3") && err.contains("matmul"), "{err}");
    }

    #[test]
    fn zero_sized_shapes_are_rejected() {
        assert!(Matrix::from_vec(0, 3, vec![]).is_err());
        assert!(Matrix::from_vec(3, 0, vec![]).is_err());
        assert!(Matrix::from_vec(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn transpose_round_trip() {
        let mut rng = Rng::new(3);
        let a = random_matrix(4, 7, &mut rng);
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn strided_transpose_products_match_explicit_transposes() {
        let mut rng = Rng::new(13);
        let a = random_matrix(5, 3, &mut rng);
        let b = random_matrix(5, 4, &mut rng);
        let fast = a.matmul_transpose_left(&b).unwrap();
        let slow = a.transpose().matmul(&b).unwrap();
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert!((x - y).abs() < 1e-12);
        }

        let c = random_matrix(6, 3, &mut rng);
        let d = random_matrix(4, 3, &mut rng);
        let fast = c.matmul_transpose_right(&d).unwrap();
        let slow = c.matmul(&d.transpose()).unwrap();
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert!((x - y).abs() < 1e-12);
        }

        let mut acc = matmul_naive(&a.transpose(), &b);
        let expected = acc.add(&a.transpose().matmul(&b).unwrap()).unwrap();
        a.matmul_transpose_left_acc(&b, &mut acc).unwrap();
        for (x, y) in acc.data().iter().zip(expected.data()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn slice_and_hcat_are_inverse() {
        let mut rng = Rng::new(5);
        let a = random_matrix(3, 6, &mut rng);
        let left = a.slice_cols(0, 2);
        let right = a.slice_cols(2, 6);
        assert_eq!(left.hcat(&right).unwrap(), a);
    }

    fn max_abs(m: &Matrix) -> f64 {
        m.data().iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    proptest! {
        #[test]
        fn matmul_associativity(seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let a = random_matrix(3, 4, &mut rng);
            let b = random_matrix(4, 5, &mut rng);
            let c = random_matrix(5, 2, &mut rng);
            let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
            let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
            let scale = max_abs(&left).max(1.0);
            let diff = left.sub(&right).unwrap();
            prop_assert!(max_abs(&diff) <= 1e-9 * scale);
        }

        #[test]
        fn matmul_distributes_over_addition(seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let a = random_matrix(3, 4, &mut rng);
            let b = random_matrix(4, 2, &mut rng);
            let c = random_matrix(4, 2, &mut rng);
            let left = a.matmul(&b.add(&c).unwrap()).unwrap();
            let right = a.matmul(&b).unwrap().add(&a.matmul(&c).unwrap()).unwrap();
            let scale = max_abs(&left).max(1.0);
            let diff = left.sub(&right).unwrap();
            prop_assert!(max_abs(&diff) <= 1e-9 * scale);
        }
    }
}
