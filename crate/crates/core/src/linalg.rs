//! Dense row-major matrices and the handful of kernels the reservoir and
//! readout need: strided GEMM, Gram products and a blocked Cholesky solve.

use std::fmt;

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({}x{})", self.rows, self.cols)
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Wraps row-major data. Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Copies a contiguous range of rows.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Matrix {
        assert!(range.end <= self.rows);
        Matrix {
            rows: range.len(),
            cols: self.cols,
            data: self.data[range.start * self.cols..range.end * self.cols].to_vec(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self * other` through the blocked GEMM kernel.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        gemm(
            self.rows,
            self.cols,
            other.cols,
            1.0,
            MatView::row_major(&self.data, self.cols),
            MatView::row_major(&other.data, other.cols),
            0.0,
            &mut out.data,
            other.cols,
        );
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A strided read-only view used to feed GEMM without copying.
#[derive(Clone, Copy)]
pub(crate) struct MatView<'a> {
    data: &'a [f64],
    offset: usize,
    rs: usize,
    cs: usize,
}

impl<'a> MatView<'a> {
    pub(crate) fn row_major(data: &'a [f64], row_stride: usize) -> Self {
        MatView { data, offset: 0, rs: row_stride, cs: 1 }
    }

    /// Transposed view of a row-major buffer.
    pub(crate) fn transposed(data: &'a [f64], row_stride: usize) -> Self {
        MatView { data, offset: 0, rs: 1, cs: row_stride }
    }

    pub(crate) fn at(mut self, offset: usize) -> Self {
        self.offset += offset;
        self
    }

    fn check(&self, rows: usize, cols: usize) {
        if rows == 0 || cols == 0 {
            return;
        }
        let last = self.offset + (rows - 1) * self.rs + (cols - 1) * self.cs;
        assert!(last < self.data.len(), "gemm view out of bounds");
    }
}

/// `C = alpha * A(m×k) * B(k×n) + beta * C`, with C row-major at `ldc`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: MatView<'_>,
    b: MatView<'_>,
    beta: f64,
    c: &mut [f64],
    ldc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    a.check(m, k);
    b.check(k, n);
    assert!((m - 1) * ldc + n <= c.len(), "gemm output out of bounds");
    // SAFETY: all three operands were bounds-checked above for the exact
    // index ranges the kernel touches, and `c` is uniquely borrowed.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr().add(a.offset),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr().add(b.offset),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.as_mut_ptr(),
            ldc as isize,
            1,
        );
    }
}

const GRAM_BLOCK: usize = 128;

/// `XᵀX` for a row-major `X`. Only block-lower products are computed; the
/// upper triangle is mirrored.
pub fn gram(x: &Matrix) -> Matrix {
    let p = x.cols;
    let t = x.rows;
    let mut g = Matrix::zeros(p, p);
    if t == 0 {
        return g;
    }
    let mut i0 = 0;
    while i0 < p {
        let bi = GRAM_BLOCK.min(p - i0);
        let mut j0 = 0;
        while j0 <= i0 {
            let bj = GRAM_BLOCK.min(p - j0);
            let out_off = i0 * p + j0;
            gemm(
                bi,
                t,
                bj,
                1.0,
                MatView::transposed(&x.data, p).at(i0),
                MatView::row_major(&x.data, p).at(j0),
                0.0,
                &mut g.data[out_off..],
                p,
            );
            j0 += GRAM_BLOCK;
        }
        i0 += GRAM_BLOCK;
    }
    for i in 0..p {
        for j in (i + 1)..p {
            let v = g.data[j * p + i];
            g.data[i * p + j] = v;
        }
    }
    g
}

/// `Xᵀy`.
pub fn xt_vec(x: &Matrix, y: &[f64]) -> Vec<f64> {
    assert_eq!(x.rows, y.len());
    let mut out = vec![0.0; x.cols];
    for (row, &yi) in (0..x.rows).map(|i| x.row(i)).zip(y) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += v * yi;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

const CHOL_BLOCK: usize = 64;

impl Cholesky {
    /// Factors `a` (only the lower triangle is read). A pivot at or below
    /// `p·ε·max(diag)` is treated as a rank deficiency.
    pub fn factor(mut a: Matrix) -> Result<Cholesky, NotPositiveDefinite> {
        assert_eq!(a.rows, a.cols, "cholesky needs a square matrix");
        let p = a.rows;
        let max_diag = (0..p).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
        let tol = (p.max(1) as f64) * f64::EPSILON * max_diag;
        let d = &mut a.data;

        let mut kb = 0;
        while kb < p {
            let b = CHOL_BLOCK.min(p - kb);
            let end = kb + b;
            // Diagonal block.
            for j in kb..end {
                let mut s = d[j * p + j];
                for l in kb..j {
                    s -= d[j * p + l] * d[j * p + l];
                }
                if !(s > tol) {
                    return Err(NotPositiveDefinite { pivot: j });
                }
                let ljj = s.sqrt();
                d[j * p + j] = ljj;
                for i in (j + 1)..end {
                    let mut v = d[i * p + j];
                    for l in kb..j {
                        v -= d[i * p + l] * d[j * p + l];
                    }
                    d[i * p + j] = v / ljj;
                }
            }
            // Panel below the diagonal block.
            for i in end..p {
                for j in kb..end {
                    let mut v = d[i * p + j];
                    for l in kb..j {
                        v -= d[i * p + l] * d[j * p + l];
                    }
                    d[i * p + j] = v / d[j * p + j];
                }
            }
            // Trailing lower update: A22 -= L21 L21ᵀ, block by block. The
            // panel shares a buffer with the target, so it is copied out.
            let panel: Vec<f64> =
                (end..p).flat_map(|r| d[r * p + kb..r * p + end].iter().copied()).collect();
            let mut i0 = end;
            while i0 < p {
                let bi = CHOL_BLOCK.min(p - i0);
                let mut j0 = end;
                while j0 <= i0 {
                    let bj = CHOL_BLOCK.min(p - j0);
                    gemm(
                        bi,
                        b,
                        bj,
                        -1.0,
                        MatView::row_major(&panel, b).at((i0 - end) * b),
                        MatView::transposed(&panel, b).at((j0 - end) * b),
                        1.0,
                        &mut d[i0 * p + j0..],
                        p,
                    );
                    j0 += CHOL_BLOCK;
                }
                i0 += CHOL_BLOCK;
            }
            kb = end;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                d[i * p + j] = 0.0;
            }
        }
        Ok(Cholesky { l: a })
    }

    pub fn factor_matrix(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.l.rows;
        assert_eq!(b.len(), p);
        let l = &self.l.data;
        let mut y = b.to_vec();
        for i in 0..p {
            let s = dot(&l[i * p..i * p + i], &y[..i]);
            y[i] = (y[i] - s) / l[i * p + i];
        }
        for i in (0..p).rev() {
            y[i] /= l[i * p + i];
            let xi = y[i];
            for j in 0..i {
                y[j] -= l[i * p + j] * xi;
            }
        }
        y
    }
}
