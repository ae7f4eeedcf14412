//! Dense complex linear algebra on top of `nalgebra`.
//!
//! Every routine works on small dense matrices (global dimension in the low
//! thousands at most). Multi-register spaces use a mixed-radix layout where
//! register 0 is the most significant digit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative rank threshold: a matrix is injective when `sigma_min > RANK_TOL * sigma_max`.
pub const RANK_TOL: f64 = 1e-8;
/// Eigenvalues below this are treated as zero energy.
pub const ZERO_TOL: f64 = 1e-9;
/// Allowed Hermiticity defect, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-10;

const SOLVER_EPS: f64 = 1e-15;
const SOLVER_MAX_ITER: usize = 0;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Singular value decomposition `m = u * diag(sigma) * v^dagger`, values descending.
#[derive(Debug, Clone)]
pub struct SingularDecomposition {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl SingularDecomposition {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let sigma = DMatrix::from_diagonal(&DVector::from_iterator(
            self.singular_values.len(),
            self.singular_values.iter().map(|&s| c64(s, 0.0)),
        ));
        &self.u * sigma * self.v.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| c64(l, 0.0)),
        ));
        &self.eigenvectors * lambda * self.eigenvectors.adjoint()
    }

    /// Orthogonal projector onto the eigenvectors with eigenvalue below `tol`.
    pub fn projector_below(&self, tol: f64) -> ComplexMatrix {
        let keep: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&i| self.eigenvalues[i] < tol)
            .collect();
        let n = self.eigenvectors.nrows();
        let basis = ComplexMatrix::from_fn(n, keep.len(), |r, c| self.eigenvectors[(r, keep[c])]);
        &basis * basis.adjoint()
    }
}

/// Polar factors `a = isometry * psd`.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub isometry: ComplexMatrix,
    pub psd: ComplexMatrix,
    pub singular_values: Vec<f64>,
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag(values: &[f64]) -> ComplexMatrix {
    DMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c64(v, 0.0)),
    ))
}

pub fn svd(m: &ComplexMatrix) -> Result<SingularDecomposition> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("svd of an empty matrix".into()));
    }
    let raw = m
        .clone()
        .try_svd(true, true, SOLVER_EPS, SOLVER_MAX_ITER)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = raw.u.expect("u requested");
    let v_t = raw.v_t.expect("v_t requested");
    let mut idx: Vec<usize> = (0..raw.singular_values.len()).collect();
    idx.sort_by(|&a, &b| raw.singular_values[b].total_cmp(&raw.singular_values[a]));
    let k = idx.len();
    Ok(SingularDecomposition {
        u: ComplexMatrix::from_fn(rows, k, |r, c| u[(r, idx[c])]),
        singular_values: idx.iter().map(|&i| raw.singular_values[i]).collect(),
        v: ComplexMatrix::from_fn(cols, k, |r, c| v_t[(idx[c], r)].conj()),
    })
}

/// Largest entrywise modulus of `h - h^dagger`.
pub fn hermiticity_defect(h: &ComplexMatrix) -> f64 {
    max_abs_diff(h, &h.adjoint())
}

pub fn hermitian_eig(h: &ComplexMatrix) -> Result<SpectralDecomposition> {
    ensure_finite(h)?;
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let scale = max_abs(h).max(1.0);
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let n = sym.nrows();
    let raw = SymmetricEigen::try_new(sym, SOLVER_EPS, SOLVER_MAX_ITER)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| raw.eigenvalues[a].total_cmp(&raw.eigenvalues[b]));
    Ok(SpectralDecomposition {
        eigenvalues: idx.iter().map(|&i| raw.eigenvalues[i]).collect(),
        eigenvectors: ComplexMatrix::from_fn(n, n, |r, c| raw.eigenvectors[(r, idx[c])]),
    })
}

fn check_full_column_rank(decomp: &SingularDecomposition) -> Result<()> {
    let (smax, smin) = (decomp.sigma_max(), decomp.sigma_min());
    if !(smin > RANK_TOL * smax) || smax == 0.0 {
        return Err(Error::Injectivity {
            sigma_min: smin,
            sigma_max: smax,
        });
    }
    Ok(())
}

/// Polar decomposition of a tall (`d >= n`) full-column-rank matrix.
///
/// Returns the `d x n` isometry `W V^dagger` and the positive definite factor
/// `V diag(sigma) V^dagger = sqrt(a^dagger a)`.
pub fn polar_decompose(a: &ComplexMatrix) -> Result<PolarDecomposition> {
    let (d, n) = a.shape();
    if d < n {
        return Err(Error::Injectivity {
            sigma_min: 0.0,
            sigma_max: f64::NAN,
        });
    }
    let decomp = svd(a)?;
    check_full_column_rank(&decomp)?;
    let isometry = &decomp.u * decomp.v.adjoint();
    let v_sigma = ComplexMatrix::from_fn(n, n, |r, c| decomp.v[(r, c)] * decomp.singular_values[c]);
    let psd = &v_sigma * decomp.v.adjoint();
    let psd = (&psd + psd.adjoint()).scale(0.5);
    Ok(PolarDecomposition {
        isometry,
        psd,
        singular_values: decomp.singular_values,
    })
}

/// `sigma_max / sigma_min` of a full-column-rank matrix.
pub fn condition_number(a: &ComplexMatrix) -> Result<f64> {
    if a.nrows() < a.ncols() {
        return Err(Error::Injectivity {
            sigma_min: 0.0,
            sigma_max: f64::NAN,
        });
    }
    let decomp = svd(a)?;
    check_full_column_rank(&decomp)?;
    Ok(decomp.sigma_max() / decomp.sigma_min())
}

/// Orthogonal projector onto the eigenspace of `h` with eigenvalues below `zero_tol`.
pub fn kernel_projector(h: &ComplexMatrix, zero_tol: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(h)?.projector_below(zero_tol))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Row-major nested `[re, im]` arrays, the on-disk matrix encoding.
pub fn to_nested(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn from_nested(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidInput("matrix rows are empty or ragged".into()));
    }
    let m = ComplexMatrix::from_fn(nrows, ncols, |r, c| c64(rows[r][c][0], rows[r][c][1]));
    ensure_finite(&m)?;
    Ok(m)
}

/// Mixed-radix digits of `index`, most significant first.
pub fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

pub fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Lift a term acting on the registers in `support` to the full product space.
///
/// The term's own row index is mixed-radix over `support` in the given order.
pub fn embed_term(term: &ComplexMatrix, support: &[usize], dims: &[usize]) -> Result<ComplexMatrix> {
    let local_dims: Vec<usize> = support
        .iter()
        .map(|&s| dims.get(s).copied())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::DimensionMismatch("support register out of range".into()))?;
    for (i, a) in support.iter().enumerate() {
        if support[..i].contains(a) {
            return Err(Error::DimensionMismatch(format!("register {a} repeated in support")));
        }
    }
    let local: usize = local_dims.iter().product();
    if term.shape() != (local, local) {
        return Err(Error::DimensionMismatch(format!(
            "term is {}x{}, support dimension is {local}",
            term.nrows(),
            term.ncols()
        )));
    }
    let total: usize = dims.iter().product();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut row_digits = vec![0; dims.len()];
    let mut col_digits = vec![0; dims.len()];
    let mut loc = vec![0; support.len()];
    for row in 0..total {
        digits(row, dims, &mut row_digits);
        let local_row = support
            .iter()
            .zip(&local_dims)
            .fold(0, |acc, (&s, &d)| acc * d + row_digits[s]);
        col_digits.copy_from_slice(&row_digits);
        for local_col in 0..local {
            let entry = term[(local_row, local_col)];
            if entry == C64::new(0.0, 0.0) {
                continue;
            }
            digits(local_col, &local_dims, &mut loc);
            for (&s, &x) in support.iter().zip(&loc) {
                col_digits[s] = x;
            }
            out[(row, compose(&col_digits, dims))] += entry;
        }
    }
    Ok(out)
}

/// Apply `op` (`new_dim x dims[site]`) to one register of a product-space vector.
///
/// Returns the new vector together with the updated register dimensions.
pub fn apply_on_register(
    amplitudes: &ComplexVector,
    dims: &[usize],
    site: usize,
    op: &ComplexMatrix,
) -> Result<(ComplexVector, Vec<usize>)> {
    let total: usize = dims.iter().product();
    if amplitudes.len() != total || site >= dims.len() || op.ncols() != dims[site] {
        return Err(Error::DimensionMismatch(format!(
            "cannot apply a {}x{} operator to register {site} of {dims:?}",
            op.nrows(),
            op.ncols()
        )));
    }
    let inner: usize = dims[site + 1..].iter().product();
    let outer: usize = dims[..site].iter().product();
    let (old, new) = (dims[site], op.nrows());
    let mut out = ComplexVector::zeros(outer * new * inner);
    for o in 0..outer {
        for i in 0..inner {
            for r in 0..new {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..old {
                    acc += op[(r, c)] * amplitudes[(o * old + c) * inner + i];
                }
                out[(o * new + r) * inner + i] = acc;
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims[site] = new;
    Ok((out, new_dims))
}
