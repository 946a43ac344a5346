//! Graph filters as polynomials in the Laplacian, their frequency
//! responses, and both directions of the smoother/filter correspondence.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::kernels::{r_dagger, KernelError, SpectralFunction};
use crate::spectral::Spectrum;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("filter taps must be finite")]
    NonFiniteTap,

    #[error("interpolation ill-conditioned: Vandermonde condition number {condition:e}")]
    IllConditioned { condition: f64 },

    #[error("filter frequency response is zero at every eigenvalue")]
    AllZeroResponse,

    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Polynomial filter taps c_0, ..., c_{N-1}; trailing zeros are implicit
/// when fewer taps are supplied.
#[derive(Debug, Clone)]
pub struct FilterCoefficients {
    taps: DVector<f64>,
}

impl FilterCoefficients {
    pub fn new(taps: DVector<f64>) -> Result<Self, FilterError> {
        if !taps.iter().all(|t| t.is_finite()) {
            return Err(FilterError::NonFiniteTap);
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &DVector<f64> {
        &self.taps
    }
}

/// Apply the filter by iterated multiplication with the Laplacian:
/// y_F = (c_0 I + sum_l c_l L^l) y, computed as successive products so the
/// recursion matches a decentralized implementation.
pub fn apply_filter(
    l: &DMatrix<f64>,
    c: &FilterCoefficients,
    y: &DVector<f64>,
) -> Result<DVector<f64>, FilterError> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(FilterError::DimensionMismatch {
            expected: n,
            got: l.ncols(),
        });
    }
    if y.len() != n {
        return Err(FilterError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let taps = c.taps();
    let last_nonzero = taps.iter().rposition(|&t| t != 0.0);
    let mut out = y.scale(if taps.is_empty() { 0.0 } else { taps[0] });
    if let Some(top) = last_nonzero {
        let mut power = y.clone();
        for k in 1..=top {
            power = l * power;
            if taps[k] != 0.0 {
                out += power.scale(taps[k]);
            }
        }
    }
    Ok(out)
}

/// Frequency response of the filter: the polynomial evaluated at each
/// eigenvalue, g_n = c_0 + sum_l c_l lambda_n^l.
pub fn frequency_response(c: &FilterCoefficients, eigenvalues: &DVector<f64>) -> DVector<f64> {
    let taps = c.taps();
    DVector::from_fn(eigenvalues.len(), |i, _| {
        // Horner evaluation.
        let lambda = eigenvalues[i];
        let mut acc = 0.0;
        for k in (0..taps.len()).rev() {
            acc = acc * lambda + taps[k];
        }
        acc
    })
}

/// Shrinkage profile of the ridge smoother with a Laplacian kernel:
/// g(lambda) = 1 / (1 + mu N r(lambda)) where r is nonzero, 0 where the
/// kernel annihilates the frequency.
pub fn smoother_response(
    r: &SpectralFunction,
    eigenvalues: &DVector<f64>,
    mu: f64,
) -> Result<DVector<f64>, FilterError> {
    let weights = r_dagger(r, eigenvalues)?;
    let n = eigenvalues.len() as f64;
    Ok(weights.map(|w| w / (w + mu * n)))
}

/// Find polynomial taps whose frequency response interpolates the ridge
/// smoother's shrinkage profile at every distinct eigenvalue (multiplicity
/// collapsed). Solved by Newton divided differences; the Vandermonde
/// condition number gates feasibility, which in practice limits the degree
/// to about a dozen distinct eigenvalues.
pub fn smoother_to_filter(
    spec: &Spectrum,
    r: &SpectralFunction,
    mu: f64,
) -> Result<FilterCoefficients, FilterError> {
    let gains = smoother_response(r, spec.eigenvalues(), mu)?;
    let reps = spec.distinct_eigenvalue_indices(1e-8);
    let nodes: Vec<f64> = reps.iter().map(|&i| spec.eigenvalues()[i]).collect();
    let values: Vec<f64> = reps.iter().map(|&i| gains[i]).collect();
    let d = nodes.len();

    let vandermonde = DMatrix::from_fn(d, d, |i, j| nodes[i].powi(j as i32));
    let svd = vandermonde.svd(false, false);
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        svd.singular_values.max() / smin
    } else {
        f64::INFINITY
    };
    if condition > 1e12 {
        return Err(FilterError::IllConditioned { condition });
    }

    // Newton divided differences, then expansion into monomial taps.
    let mut table = values.clone();
    for level in 1..d {
        for i in (level..d).rev() {
            table[i] = (table[i] - table[i - 1]) / (nodes[i] - nodes[i - level]);
        }
    }
    let mut taps = vec![0.0; spec.n()];
    let mut basis = vec![0.0; d]; // coefficients of prod (x - node_k)
    basis[0] = 1.0;
    let mut basis_len = 1;
    for (k, &coeff) in table.iter().enumerate() {
        for (dst, &b) in basis.iter().enumerate().take(basis_len) {
            taps[dst] += coeff * b;
        }
        if k + 1 < d {
            // basis *= (x - nodes[k])
            for i in (0..basis_len).rev() {
                basis[i + 1] += basis[i];
                basis[i] *= -nodes[k];
            }
            basis_len += 1;
        }
    }
    FilterCoefficients::new(DVector::from_vec(taps))
}

/// A spectral function recovered from filter taps, together with the factor
/// the response was divided by to bring it at or below one.
#[derive(Debug, Clone)]
pub struct FilterKernel {
    pub r: SpectralFunction,
    pub scale: f64,
}

/// Convert filter taps into the Laplacian-kernel spectral function whose
/// ridge smoother reproduces the (scaled) filter:
/// r(lambda_n) = (1 - g_n) / (mu N g_n) where the response g_n is positive,
/// and the annihilating value 0 where it is not. Responses above one are
/// first scaled down by max_n g_n; a response of exactly one therefore maps
/// to r = 0 and is annihilated rather than passed, a degeneracy inherited
/// from the pseudo-inverse convention.
pub fn filter_to_kernel(
    c: &FilterCoefficients,
    spec: &Spectrum,
    mu: f64,
) -> Result<FilterKernel, FilterError> {
    let n = spec.n() as f64;
    let raw = frequency_response(c, spec.eigenvalues());
    let max = raw.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
    if !raw.iter().any(|&g| g > 0.0) {
        return Err(FilterError::AllZeroResponse);
    }
    let scale = max.max(1.0);
    let r = raw.map(|g| {
        let g = g / scale;
        if g > 0.0 {
            (1.0 - g) / (mu * n * g)
        } else {
            0.0
        }
    });
    Ok(FilterKernel {
        r: SpectralFunction::Table(r),
        scale,
    })
}
