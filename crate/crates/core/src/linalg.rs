//! Small complex linear-algebra toolkit on top of `nalgebra` dynamic
//! matrices: Kronecker products, a matrix exponential, modified Gram-Schmidt,
//! Haar-random unitaries, and a column-sparse operator used when circuits are
//! expanded over spaces too large for dense storage.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = Complex64::new(0.0, 0.0);
pub const ONE: C64 = Complex64::new(1.0, 0.0);

/// Largest entry magnitude, used for residual reporting.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |(U* U - I)_{ij}|`.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.ncols();
    let mut g = u.adjoint() * u;
    for i in 0..n {
        g[(i, i)] -= ONE;
    }
    max_abs(&g)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Matrix exponential by scaling-and-squaring over a Taylor series.
///
/// The inputs here are generator matrices of modest norm, so plain Taylor
/// after scaling to `norm <= 0.5` converges well past machine precision.
pub fn expm(m: &CMat) -> CMat {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let norm = m.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let mut squarings = 0u32;
    while norm / f64::from(2u32.pow(squarings)) > 0.5 {
        squarings += 1;
    }
    let scaled = m / C64::new(f64::from(2u32.pow(squarings)), 0.0);

    let mut result = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=24 {
        term = (&term * &scaled) / C64::new(k as f64, 0.0);
        result += &term;
        if max_abs(&term) < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Modified Gram-Schmidt on the columns; returns a matrix with orthonormal
/// columns spanning the same space. Columns with norm below `tol` after
/// projection are dropped.
pub fn orthonormalize_columns(m: &CMat, tol: f64) -> CMat {
    let mut kept: Vec<CVec> = Vec::new();
    for j in 0..m.ncols() {
        let mut v: CVec = m.column(j).into_owned();
        for _ in 0..2 {
            for q in &kept {
                let overlap = q.dotc(&v);
                v -= q * overlap;
            }
        }
        let norm = v.norm();
        if norm > tol {
            kept.push(v / C64::new(norm, 0.0));
        }
    }
    let rows = m.nrows();
    CMat::from_fn(rows, kept.len(), |i, j| kept[j][i])
}

/// Standard complex Gaussian via Box-Muller from uniform draws.
pub fn standard_complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u1.ln()).sqrt();
    // Real and imaginary parts each N(0, 1).
    C64::new(r * u2.cos(), r * u2.sin()) / C64::new(std::f64::consts::SQRT_2, 0.0)
}

/// Haar-distributed unitary: orthonormalize a Ginibre (i.i.d. complex
/// Gaussian) matrix, then fix the phases so the factorization is unique.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> CMat {
    loop {
        let g = CMat::from_fn(n, n, |_, _| standard_complex_gaussian(rng));
        let q = orthonormalize_columns(&g, 1e-10);
        if q.ncols() < n {
            continue; // measure-zero degeneracy; redraw
        }
        // Multiply column j by the phase that makes R_jj real positive, which
        // turns QR of Ginibre into the Haar measure.
        let mut out = q.clone();
        for j in 0..n {
            let r_jj = q.column(j).dotc(&g.column(j));
            let phase = r_jj / C64::new(r_jj.norm().max(1e-300), 0.0);
            let col = out.column(j) * phase;
            out.set_column(j, &col);
        }
        return out;
    }
}

/// Random Hermitian matrix with i.i.d. Gaussian entries (GUE-like scaling is
/// irrelevant here; only Hermiticity matters).
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| standard_complex_gaussian(rng));
    (&g + g.adjoint()) / C64::new(2.0, 0.0)
}

/// Column-major sparse operator: `cols[j]` lists the nonzero `(row, value)`
/// entries of column `j`. Used for building circuit matrices over spaces
/// where a dense `dim x dim` array would not fit.
#[derive(Clone, Debug)]
pub struct SparseOp {
    pub dim: usize,
    pub cols: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn identity(dim: usize) -> Self {
        SparseOp {
            dim,
            cols: (0..dim).map(|j| vec![(j, ONE)]).collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &SparseOp) -> SparseOp {
        assert_eq!(self.dim, rhs.dim);
        let mut cols = Vec::with_capacity(self.dim);
        let mut acc: Vec<C64> = vec![ZERO; self.dim];
        let mut touched: Vec<usize> = Vec::new();
        for j in 0..self.dim {
            for &(k, v) in &rhs.cols[j] {
                for &(i, w) in &self.cols[k] {
                    if acc[i] == ZERO {
                        touched.push(i);
                    }
                    acc[i] += w * v;
                }
            }
            touched.sort_unstable();
            let mut col = Vec::with_capacity(touched.len());
            for &i in &touched {
                if acc[i].norm() > 1e-16 {
                    col.push((i, acc[i]));
                }
                acc[i] = ZERO;
            }
            touched.clear();
            cols.push(col);
        }
        SparseOp { dim: self.dim, cols }
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Extracts the dense submatrix on `rows x cols` index lists.
    pub fn dense_submatrix(&self, rows: &[usize], cols: &[usize]) -> CMat {
        let mut pos = vec![usize::MAX; self.dim];
        for (r, &i) in rows.iter().enumerate() {
            pos[i] = r;
        }
        let mut m = CMat::zeros(rows.len(), cols.len());
        for (jc, &j) in cols.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                if pos[i] != usize::MAX {
                    m[(pos[i], jc)] = v;
                }
            }
        }
        m
    }
}
