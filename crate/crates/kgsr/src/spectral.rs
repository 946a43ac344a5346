//! Symmetric eigendecomposition of Laplacians, the graph Fourier transform,
//! and the smoothness quadratic form.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),

    #[error("matrix is not symmetric: |m[{i},{j}] - m[{j},{i}]| = {dev:e}")]
    NotSymmetric { i: usize, j: usize, dev: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {0:e}")]
    NotPsd(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Eigendecomposition of a symmetric PSD matrix with eigenvalues sorted
/// ascending and a deterministic sign convention on the eigenvectors
/// (largest-magnitude entry of each column is positive; first such entry
/// wins on ties). Column n of `eigenvectors` pairs with `eigenvalues[n]`.
///
/// When an eigenvalue has multiplicity > 1 the basis within its eigenspace
/// is not canonical; anything downstream must depend only on spectral
/// projectors, not on the individual columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

/// Decompose a symmetric PSD matrix. Symmetry is checked to 1e-10 (relative
/// to the largest entry), PSD-ness to -1e-8 * max |eigenvalue|; eigenvalues
/// that pass the PSD check but sit below zero are clamped to exactly 0 so
/// spectral maps see lambda_1 = 0.
pub fn eigendecompose(m: &DMatrix<f64>) -> Result<Spectrum, SpectralError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(SpectralError::NotSquare(rows, cols));
    }
    let scale = m.amax().max(1.0);
    for i in 0..rows {
        for j in (i + 1)..rows {
            let dev = (m[(i, j)] - m[(j, i)]).abs();
            if dev > 1e-10 * scale {
                return Err(SpectralError::NotSymmetric { i, j, dev });
            }
        }
    }

    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let max_abs = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let min = eig.eigenvalues[order[0]];
    if min < -1e-8 * max_abs.max(1.0) {
        return Err(SpectralError::NotPsd(min));
    }

    let mut eigenvalues = DVector::zeros(rows);
    let mut eigenvectors = DMatrix::zeros(rows, rows);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues[dst] = eig.eigenvalues[src].max(0.0);
        let col = eig.eigenvectors.column(src);
        // Sign convention: flip so the entry of largest magnitude is positive.
        let mut lead = 0;
        for i in 1..rows {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..rows {
            eigenvectors[(i, dst)] = sign * col[i];
        }
    }

    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Graph Fourier transform: projections of `f` onto the eigenvectors,
    /// i.e. U^T f. Norm-preserving since U is orthonormal.
    pub fn gft(&self, f: &DVector<f64>) -> Result<DVector<f64>, SpectralError> {
        self.check_len(f)?;
        Ok(self.eigenvectors.tr_mul(f))
    }

    /// Inverse graph Fourier transform: U f_tilde, the superposition of
    /// eigensignals weighted by their Fourier coefficients.
    pub fn igft(&self, f_tilde: &DVector<f64>) -> Result<DVector<f64>, SpectralError> {
        self.check_len(f_tilde)?;
        Ok(&self.eigenvectors * f_tilde)
    }

    /// U Lambda U^T, for reconstruction checks.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (c, &lam) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(c).scale_mut(lam);
        }
        let m = &scaled * self.eigenvectors.transpose();
        symmetrize(m)
    }

    /// Indices of one representative per distinct eigenvalue, grouping
    /// eigenvalues that differ by at most `tol` relative to the largest one.
    pub fn distinct_eigenvalue_indices(&self, tol: f64) -> Vec<usize> {
        let scale = self.eigenvalues[self.n() - 1].max(1.0);
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..self.n() {
            match reps.last() {
                Some(&r) if (self.eigenvalues[i] - self.eigenvalues[r]).abs() <= tol * scale => {}
                _ => reps.push(i),
            }
        }
        reps
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<(), SpectralError> {
        if v.len() != self.n() {
            return Err(SpectralError::DimensionMismatch {
                expected: self.n(),
                got: v.len(),
            });
        }
        Ok(())
    }
}

/// Force exact symmetry on a numerically symmetric product.
pub(crate) fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    m
}

/// Smoothness of a signal with respect to a graph: f^T L f, equivalently
/// half the weighted sum of squared differences across edges.
pub fn smoothness(g: &Graph, f: &DVector<f64>) -> Result<f64, SpectralError> {
    if f.len() != g.n_vertices() {
        return Err(SpectralError::DimensionMismatch {
            expected: g.n_vertices(),
            got: f.len(),
        });
    }
    let l = g
        .laplacian(crate::graph::LaplacianKind::Combinatorial)
        .expect("combinatorial Laplacian cannot fail");
    Ok((f.transpose() * (&l * f))[(0, 0)])
}
