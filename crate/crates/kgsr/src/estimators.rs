//! Single-kernel reconstruction: kernel ridge regression in reduced and
//! full form, the primal inverse-kernel solver, least-squares bandlimited
//! estimation, ridge smoothing, LMMSE estimation, and the Markov local
//! LMMSE condition residuals.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::kernels::{InverseKernel, KernelMatrix};
use crate::spectral::Spectrum;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample indices must be strictly increasing and within [0, {n})")]
    InvalidSampleIndices { n: usize },

    #[error("sample set must contain at least one vertex")]
    EmptySampleSet,

    #[error("regularization parameter must be positive, got {0}")]
    NonPositiveMu(f64),

    #[error("noise variance must be nonnegative, got {0}")]
    NegativeNoiseVariance(f64),

    #[error("bandlimited system unidentifiable (normal-matrix condition number {condition:e})")]
    Unidentifiable { condition: f64 },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("precision matrix is singular")]
    SingularPrecision,

    #[error(transparent)]
    Kernel(#[from] crate::kernels::KernelError),
}

/// Sampled-vertex indices (strictly increasing, 0-based) together with the
/// noisy observations taken there.
#[derive(Debug, Clone)]
pub struct SampleSet {
    n: usize,
    indices: Vec<usize>,
    observations: DVector<f64>,
}

impl SampleSet {
    pub fn new(
        n_vertices: usize,
        indices: Vec<usize>,
        observations: DVector<f64>,
    ) -> Result<Self, EstimatorError> {
        if indices.is_empty() {
            return Err(EstimatorError::EmptySampleSet);
        }
        if observations.len() != indices.len() {
            return Err(EstimatorError::DimensionMismatch {
                expected: indices.len(),
                got: observations.len(),
            });
        }
        let increasing = indices.windows(2).all(|w| w[0] < w[1]);
        if !increasing || *indices.last().unwrap() >= n_vertices {
            return Err(EstimatorError::InvalidSampleIndices { n: n_vertices });
        }
        Ok(Self {
            n: n_vertices,
            indices,
            observations,
        })
    }

    /// Observe a full signal at the given indices: y = Psi f.
    pub fn from_signal(
        indices: Vec<usize>,
        signal: &DVector<f64>,
    ) -> Result<Self, EstimatorError> {
        let obs = DVector::from_fn(indices.len(), |s, _| signal[indices[s]]);
        Self::new(signal.len(), indices, obs)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn observations(&self) -> &DVector<f64> {
        &self.observations
    }

    /// Psi M Psi^T: the sampled principal submatrix.
    pub fn restrict_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        m.select_rows(self.indices.iter())
            .select_columns(self.indices.iter())
    }

    /// M Psi^T: the sampled columns.
    pub fn select_columns(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        m.select_columns(self.indices.iter())
    }

    /// Psi^T v: scatter an S-vector back to vertex space.
    pub fn expand(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (s, &idx) in self.indices.iter().enumerate() {
            out[idx] = v[s];
        }
        out
    }

    pub fn contains(&self, vertex: usize) -> bool {
        self.indices.binary_search(&vertex).is_ok()
    }

    /// Position of `vertex` within the sample list, if observed.
    pub fn sample_position(&self, vertex: usize) -> Option<usize> {
        self.indices.binary_search(&vertex).ok()
    }
}

/// A reconstructed signal plus the expansion coefficients produced by the
/// solver (length S for representer-form solvers, length N for the full
/// form) and a method tag.
#[derive(Debug, Clone)]
pub struct Estimate {
    values: DVector<f64>,
    coefficients: Option<DVector<f64>>,
    method: String,
}

impl Estimate {
    pub(crate) fn new(values: DVector<f64>, coefficients: Option<DVector<f64>>, method: String) -> Self {
        Self {
            values,
            coefficients,
            method,
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn coefficients(&self) -> Option<&DVector<f64>> {
        self.coefficients.as_ref()
    }

    pub fn method(&self) -> &str {
        &self.method
    }
}

fn check_kernel_samples(k_n: usize, samples: &SampleSet) -> Result<(), EstimatorError> {
    if k_n != samples.n_vertices() {
        return Err(EstimatorError::DimensionMismatch {
            expected: k_n,
            got: samples.n_vertices(),
        });
    }
    Ok(())
}

/// Kernel ridge regression: alpha = (Kbar + mu S I)^{-1} y with
/// Kbar = Psi K Psi^T, and f = K Psi^T alpha.
pub fn krr(
    k: &KernelMatrix,
    samples: &SampleSet,
    mu: f64,
) -> Result<Estimate, EstimatorError> {
    if !(mu > 0.0) {
        return Err(EstimatorError::NonPositiveMu(mu));
    }
    check_kernel_samples(k.n(), samples)?;
    let s = samples.len();
    let mut system = samples.restrict_matrix(k.matrix());
    for i in 0..s {
        system[(i, i)] += mu * s as f64;
    }
    let chol = system.cholesky().ok_or(EstimatorError::SingularSystem)?;
    let alpha = chol.solve(samples.observations());
    let values = samples.select_columns(k.matrix()) * &alpha;
    Ok(Estimate::new(
        values,
        Some(alpha),
        format!("krr({},mu={mu})", k.provenance()),
    ))
}

/// The N-variable form of kernel ridge regression, solving the normal
/// equations of the full problem over alpha in R^N. Exists as the oracle
/// for the representer-theorem checks; `krr` is the production path.
pub fn krr_full(
    k: &KernelMatrix,
    samples: &SampleSet,
    mu: f64,
) -> Result<Estimate, EstimatorError> {
    if !(mu > 0.0) {
        return Err(EstimatorError::NonPositiveMu(mu));
    }
    check_kernel_samples(k.n(), samples)?;
    let n = k.n();
    let s = samples.len() as f64;
    // Normal equations of (1/S)||y - Psi K a||^2 + mu a^T K a:
    //   (K Psi^T Psi K + mu S K) a = K Psi^T y.
    let k_cols = samples.select_columns(k.matrix()); // K Psi^T, N x S
    let system = &k_cols * k_cols.transpose() + k.matrix() * (mu * s);
    let rhs = &k_cols * samples.observations();
    let svd = system.svd(true, true);
    let alpha = svd
        .solve(&rhs, 1e-12)
        .map_err(|_| EstimatorError::SingularSystem)?;
    let alpha = DVector::from_column_slice(alpha.as_slice());
    let values = k.matrix() * &alpha;
    debug_assert_eq!(values.len(), n);
    Ok(Estimate::new(
        values,
        Some(alpha),
        format!("krr_full({},mu={mu})", k.provenance()),
    ))
}

/// Primal solver working with K^{-1} directly:
/// f = (Psi^T Psi + mu S K^{-1})^{-1} Psi^T y.
pub fn primal_estimate(
    k_inv: &InverseKernel,
    samples: &SampleSet,
    mu: f64,
) -> Result<Estimate, EstimatorError> {
    if !(mu > 0.0) {
        return Err(EstimatorError::NonPositiveMu(mu));
    }
    check_kernel_samples(k_inv.n(), samples)?;
    let s = samples.len() as f64;
    let mut system = k_inv.matrix() * (mu * s);
    for &idx in samples.indices() {
        system[(idx, idx)] += 1.0;
    }
    let chol = system.cholesky().ok_or(EstimatorError::SingularSystem)?;
    let values = chol.solve(&samples.expand(samples.observations()));
    Ok(Estimate::new(
        values,
        None,
        format!("primal(mu={mu})"),
    ))
}

/// Least-squares estimate for a bandlimited signal:
/// f = U_F [U_F^T Psi^T Psi U_F]^{-1} U_F^T Psi^T y. Requires the sampled
/// band eigenvectors to have full column rank (hence S >= |band|).
pub fn ls_bandlimited(
    spec: &Spectrum,
    band: &[usize],
    samples: &SampleSet,
) -> Result<Estimate, EstimatorError> {
    check_kernel_samples(spec.n(), samples)?;
    if band.is_empty() {
        return Err(EstimatorError::Kernel(crate::kernels::KernelError::EmptyBand));
    }
    for &idx in band {
        if idx >= spec.n() {
            return Err(EstimatorError::Kernel(
                crate::kernels::KernelError::BandIndexOutOfRange {
                    index: idx,
                    n: spec.n(),
                },
            ));
        }
    }
    let u_band = spec.eigenvectors().select_columns(band.iter());
    let sampled = u_band.select_rows(samples.indices().iter()); // Psi U_F, S x B
    let svd = sampled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = if samples.len() < band.len() {
        0.0
    } else {
        svd.singular_values.min()
    };
    if smin <= 1e-10 * smax {
        let condition = if smin > 0.0 {
            (smax / smin).powi(2)
        } else {
            f64::INFINITY
        };
        return Err(EstimatorError::Unidentifiable { condition });
    }
    let coeffs = svd
        .solve(samples.observations(), 0.0)
        .map_err(|_| EstimatorError::SingularSystem)?;
    let coeffs = DVector::from_column_slice(coeffs.as_slice());
    let values = &u_band * &coeffs;
    Ok(Estimate::new(
        values,
        None,
        format!("ls_bandlimited(B={})", band.len()),
    ))
}

/// Ridge regression smoother for fully observed signals:
/// f = K (K + mu N I)^{-1} y.
pub fn ridge_smoother(
    k: &KernelMatrix,
    y_full: &DVector<f64>,
    mu: f64,
) -> Result<Estimate, EstimatorError> {
    if !(mu > 0.0) {
        return Err(EstimatorError::NonPositiveMu(mu));
    }
    let n = k.n();
    if y_full.len() != n {
        return Err(EstimatorError::DimensionMismatch {
            expected: n,
            got: y_full.len(),
        });
    }
    let mut system = k.matrix().clone();
    for i in 0..n {
        system[(i, i)] += mu * n as f64;
    }
    let chol = system.cholesky().ok_or(EstimatorError::SingularSystem)?;
    let alpha = chol.solve(y_full);
    Ok(Estimate::new(
        k.matrix() * &alpha,
        Some(alpha),
        format!("ridge_smoother({},mu={mu})", k.provenance()),
    ))
}

/// LMMSE estimate f = C Psi^T [Psi C Psi^T + sigma_e^2 I]^{-1} y. Identical
/// to `krr` with the covariance as kernel and mu S = sigma_e^2.
pub fn lmmse(
    c: &DMatrix<f64>,
    noise_var: f64,
    samples: &SampleSet,
) -> Result<Estimate, EstimatorError> {
    if noise_var < 0.0 {
        return Err(EstimatorError::NegativeNoiseVariance(noise_var));
    }
    check_kernel_samples(c.nrows(), samples)?;
    let s = samples.len();
    let mut system = samples.restrict_matrix(c);
    for i in 0..s {
        system[(i, i)] += noise_var;
    }
    let chol = system.cholesky().ok_or(EstimatorError::SingularSystem)?;
    let alpha = chol.solve(samples.observations());
    let values = samples.select_columns(c) * &alpha;
    Ok(Estimate::new(values, Some(alpha), "lmmse".into()))
}

/// Residuals of the local LMMSE optimality conditions on a Markov random
/// field, evaluated at an estimate.
#[derive(Debug, Clone)]
pub struct MarkovResiduals {
    /// Per-vertex residual: at unobserved vertices the gap between the
    /// estimate and the LMMSE prediction from its neighbors; at observed
    /// vertices the gap in the noise-corrected observation identity.
    pub residuals: DVector<f64>,
    /// (vertex, estimated observation noise) for each observed vertex.
    pub noise_estimates: Vec<(usize, f64)>,
}

/// Check the per-vertex local LMMSE conditions for a covariance-kernel
/// ridge estimate. With P = C^{-1}, the LMMSE prediction of f(v_n) from the
/// remaining values is -(1/P_nn) sum_{m != n} P_nm f(v_m), with conditional
/// variance 1/P_nn; the noise estimate at an observed vertex is
/// sigma_e^2 P_nn (f_n - prediction).
pub fn markov_residuals(
    c: &DMatrix<f64>,
    noise_var: f64,
    samples: &SampleSet,
    est: &Estimate,
) -> Result<MarkovResiduals, EstimatorError> {
    if noise_var < 0.0 {
        return Err(EstimatorError::NegativeNoiseVariance(noise_var));
    }
    let n = c.nrows();
    check_kernel_samples(n, samples)?;
    if est.values().len() != n {
        return Err(EstimatorError::DimensionMismatch {
            expected: n,
            got: est.values().len(),
        });
    }
    let chol = c
        .clone()
        .cholesky()
        .ok_or(EstimatorError::SingularPrecision)?;
    let precision = chol.inverse();
    let weighted = &precision * est.values(); // P f
    let mut residuals = DVector::zeros(n);
    let mut noise_estimates = Vec::with_capacity(samples.len());
    for vertex in 0..n {
        match samples.sample_position(vertex) {
            None => {
                residuals[vertex] = weighted[vertex] / precision[(vertex, vertex)];
            }
            Some(pos) => {
                let noise_est = noise_var * weighted[vertex];
                residuals[vertex] =
                    est.values()[vertex] - samples.observations()[pos] + noise_est;
                noise_estimates.push((vertex, noise_est));
            }
        }
    }
    Ok(MarkovResiduals {
        residuals,
        noise_estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, LaplacianKind};
    use crate::kernels::{
        self, covariance_kernel, inverse_kernel_polynomial, laplacian_kernel, SpectralFunction,
    };
    use crate::spectral::eigendecompose;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn identity_kernel(n: usize) -> KernelMatrix {
        covariance_kernel(&DMatrix::identity(n, n)).unwrap()
    }

    fn random_vector(n: usize, seed: u64) -> DVector<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    /// Tridiagonal precision of a chain Gaussian Markov random field.
    pub(crate) fn chain_precision(n: usize, off: f64) -> DMatrix<f64> {
        let mut p = DMatrix::identity(n, n);
        for i in 0..n - 1 {
            p[(i, i + 1)] = off;
            p[(i + 1, i)] = off;
        }
        p
    }

    #[test]
    fn sample_set_validation() {
        assert!(SampleSet::new(5, vec![0, 2, 4], DVector::zeros(3)).is_ok());
        assert!(matches!(
            SampleSet::new(5, vec![], DVector::zeros(0)),
            Err(EstimatorError::EmptySampleSet)
        ));
        assert!(matches!(
            SampleSet::new(5, vec![2, 2], DVector::zeros(2)),
            Err(EstimatorError::InvalidSampleIndices { .. })
        ));
        assert!(matches!(
            SampleSet::new(5, vec![3, 5], DVector::zeros(2)),
            Err(EstimatorError::InvalidSampleIndices { .. })
        ));
    }

    #[test]
    fn krr_identity_kernel_closed_form() {
        // K = I: observed entries shrink by 1/(1 + mu S), others stay 0.
        let y = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        let samples = SampleSet::new(6, vec![0, 2, 5], y.clone()).unwrap();
        let est = krr(&identity_kernel(6), &samples, 0.5).unwrap();
        let shrink = 1.0 / (1.0 + 0.5 * 3.0);
        for (s, &idx) in [0usize, 2, 5].iter().enumerate() {
            assert_abs_diff_eq!(est.values()[idx], y[s] * shrink, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(est.values()[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(est.values()[3], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn krr_norm_decreases_with_mu() {
        let g = Graph::erdos_renyi(20, 0.3, 8).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let k = laplacian_kernel(&spec, &SpectralFunction::Diffusion { sigma2: 1.0 }).unwrap();
        let samples =
            SampleSet::new(20, (0..10).map(|i| 2 * i).collect(), random_vector(10, 3)).unwrap();
        let mut last = f64::INFINITY;
        for mu in [1.0, 10.0, 100.0, 1000.0] {
            let norm = krr(&k, &samples, mu).unwrap().values().norm();
            assert!(norm < last, "norm must decrease along the mu grid");
            last = norm;
        }
    }

    #[test]
    fn representer_theorem_krr_equals_krr_full() {
        let g = Graph::erdos_renyi(15, 0.35, 4).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let k = laplacian_kernel(&spec, &SpectralFunction::Diffusion { sigma2: 1.0 }).unwrap();
        let samples = SampleSet::new(15, vec![1, 4, 5, 9, 14], random_vector(5, 6)).unwrap();
        for mu in [1e-3, 1e-1] {
            let reduced = krr(&k, &samples, mu).unwrap();
            let full = krr_full(&k, &samples, mu).unwrap();
            assert!((reduced.values() - full.values()).amax() < 1e-8);
        }
    }

    #[test]
    fn krr_full_with_all_vertices_matches_smoother() {
        let g = Graph::erdos_renyi(12, 0.4, 10).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let k =
            laplacian_kernel(&spec, &SpectralFunction::LaplacianRegularization { sigma2: 2.0 })
                .unwrap();
        let y = random_vector(12, 12);
        let samples = SampleSet::new(12, (0..12).collect(), y.clone()).unwrap();
        let full = krr_full(&k, &samples, 0.05).unwrap();
        let smooth = ridge_smoother(&k, &y, 0.05).unwrap();
        assert!((full.values() - smooth.values()).amax() < 1e-8);
    }

    #[test]
    fn primal_identity_inverse_matches_krr() {
        let k_inv = kernels::InverseKernel::from_matrix(DMatrix::identity(8, 8)).unwrap();
        let samples = SampleSet::new(8, vec![0, 3, 7], random_vector(3, 2)).unwrap();
        let primal = primal_estimate(&k_inv, &samples, 0.2).unwrap();
        let ridge = krr(&identity_kernel(8), &samples, 0.2).unwrap();
        assert!((primal.values() - ridge.values()).amax() < 1e-10);
    }

    #[test]
    fn primal_matches_krr_through_polynomial_inverse() {
        let g = Graph::erdos_renyi(20, 0.3, 14).unwrap();
        let l = g.laplacian(LaplacianKind::Combinatorial).unwrap();
        let sigma2 = 1.3;
        let k_inv = inverse_kernel_polynomial(&l, &[1.0, sigma2]).unwrap();
        let spec = eigendecompose(&l).unwrap();
        let k =
            laplacian_kernel(&spec, &SpectralFunction::LaplacianRegularization { sigma2 }).unwrap();
        let samples = SampleSet::new(20, vec![0, 2, 3, 8, 11, 19], random_vector(6, 5)).unwrap();
        let primal = primal_estimate(&k_inv, &samples, 0.05).unwrap();
        let ridge = krr(&k, &samples, 0.05).unwrap();
        assert!((primal.values() - ridge.values()).amax() < 1e-7);
    }

    #[test]
    fn primal_interpolates_at_vanishing_mu() {
        let k_inv = kernels::InverseKernel::from_matrix(DMatrix::identity(5, 5)).unwrap();
        let y = random_vector(5, 20);
        let samples = SampleSet::new(5, (0..5).collect(), y.clone()).unwrap();
        let est = primal_estimate(&k_inv, &samples, 1e-12).unwrap();
        assert!((est.values() - &y).amax() < 1e-9);
    }

    #[test]
    fn ls_bandlimited_exact_noiseless_recovery() {
        let g = Graph::erdos_renyi(20, 0.3, 31).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let band = kernels::lowpass_band(4);
        let coeffs = random_vector(4, 7);
        let truth = spec.eigenvectors().select_columns(band.iter()) * &coeffs;
        let samples = SampleSet::from_signal(vec![0, 3, 5, 6, 10, 12, 17], &truth).unwrap();
        let est = ls_bandlimited(&spec, &band, &samples).unwrap();
        assert!((est.values() - &truth).amax() < 1e-9);
        // The estimate's transform is supported on the band.
        let coeffs_hat = spec.gft(est.values()).unwrap();
        for i in 4..20 {
            assert_abs_diff_eq!(coeffs_hat[i], 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn ls_bandlimited_underdetermined_is_unidentifiable() {
        let g = Graph::erdos_renyi(15, 0.4, 2).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let band = kernels::lowpass_band(6);
        let samples = SampleSet::new(15, vec![1, 5, 9], random_vector(3, 3)).unwrap();
        assert!(matches!(
            ls_bandlimited(&spec, &band, &samples),
            Err(EstimatorError::Unidentifiable { .. })
        ));
    }

    #[test]
    fn ridge_smoother_identity_kernel() {
        let y = random_vector(7, 40);
        let est = ridge_smoother(&identity_kernel(7), &y, 0.1).unwrap();
        assert!((est.values() - y.scale(1.0 / 1.7)).amax() < 1e-12);
    }

    #[test]
    fn ridge_smoother_spectral_shrinkage() {
        // y = u_n maps to g(lambda_n) u_n for a Laplacian kernel.
        let g = Graph::erdos_renyi(10, 0.5, 18).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let r = SpectralFunction::Diffusion { sigma2: 0.7 };
        let k = laplacian_kernel(&spec, &r).unwrap();
        let mu = 0.02;
        let n_idx = 4;
        let y = DVector::from(spec.eigenvectors().column(n_idx).clone_owned());
        let est = ridge_smoother(&k, &y, mu).unwrap();
        let r_val = r.eval_lambda(spec.eigenvalues()[n_idx]).unwrap();
        let gain = 1.0 / (1.0 + mu * 10.0 * r_val);
        assert!((est.values() - y.scale(gain)).amax() < 1e-9);
    }

    #[test]
    fn ridge_smoother_annihilates_zeroed_frequencies() {
        let g = Graph::circular(6).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let mut table = DVector::from_element(6, 1.0);
        table[5] = 0.0; // r = 0 at the top frequency: annihilated by r_dagger
        let k = laplacian_kernel(&spec, &SpectralFunction::Table(table)).unwrap();
        let y = random_vector(6, 50);
        let est = ridge_smoother(&k, &y, 0.05).unwrap();
        let coeffs = spec.gft(est.values()).unwrap();
        assert_abs_diff_eq!(coeffs[5], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn lmmse_direct_observation_limit() {
        let y = random_vector(4, 60);
        let samples = SampleSet::new(9, vec![0, 1, 5, 8], y.clone()).unwrap();
        let est = lmmse(&DMatrix::identity(9, 9), 0.0, &samples).unwrap();
        assert!((est.values() - samples.expand(&y)).amax() < 1e-12);
    }

    #[test]
    fn lmmse_equals_krr_with_covariance_kernel() {
        let p = chain_precision(12, -0.35);
        let c = p.clone().cholesky().unwrap().inverse();
        let noise_var = 0.2;
        let samples = SampleSet::new(12, vec![0, 2, 3, 7, 10], random_vector(5, 9)).unwrap();
        let direct = lmmse(&c, noise_var, &samples).unwrap();
        let kernel = covariance_kernel(&c).unwrap();
        let ridge = krr(&kernel, &samples, noise_var / 5.0).unwrap();
        assert!((direct.values() - ridge.values()).amax() < 1e-10);
    }

    #[test]
    fn lmmse_vanishes_in_pure_noise_limit() {
        let samples = SampleSet::new(6, vec![1, 4], DVector::from_vec(vec![3.0, -2.0])).unwrap();
        let est = lmmse(&DMatrix::identity(6, 6), 1e12, &samples).unwrap();
        assert!(est.values().norm() < 1e-10);
    }

    #[test]
    fn markov_residuals_vanish_at_the_krr_estimate() {
        let n = 16;
        let p = chain_precision(n, -0.4);
        let c = p.clone().cholesky().unwrap().inverse();
        let noise_var = 0.05;
        let indices = vec![0, 3, 4, 8, 13, 15];
        let s = indices.len() as f64;
        let samples = SampleSet::new(n, indices, random_vector(6, 77)).unwrap();
        let kernel = covariance_kernel(&c).unwrap();
        let est = krr(&kernel, &samples, noise_var / s).unwrap();
        let check = markov_residuals(&c, noise_var, &samples, &est).unwrap();
        assert!(
            check.residuals.amax() < 1e-8,
            "max residual {:e}",
            check.residuals.amax()
        );
    }

    #[test]
    fn markov_residuals_detect_perturbation() {
        let n = 16;
        let p = chain_precision(n, -0.4);
        let c = p.clone().cholesky().unwrap().inverse();
        let noise_var = 0.05;
        let samples = SampleSet::new(n, vec![0, 3, 8, 13], random_vector(4, 78)).unwrap();
        let kernel = covariance_kernel(&c).unwrap();
        let est = krr(&kernel, &samples, noise_var / 4.0).unwrap();
        let mut bumped = est.values().clone();
        bumped[5] += 0.1; // unobserved vertex
        let est = Estimate::new(bumped, None, "perturbed".into());
        let check = markov_residuals(&c, noise_var, &samples, &est).unwrap();
        assert!(check.residuals[5].abs() >= 1e-3);
    }

    #[test]
    fn markov_noise_estimates_vanish_without_noise() {
        let n = 10;
        let p = chain_precision(n, -0.3);
        let c = p.clone().cholesky().unwrap().inverse();
        let noise_var = 1e-12;
        let y = random_vector(n, 81);
        let samples = SampleSet::new(n, (0..n).collect(), y).unwrap();
        let kernel = covariance_kernel(&c).unwrap();
        let est = krr(&kernel, &samples, noise_var / n as f64).unwrap();
        let check = markov_residuals(&c, noise_var, &samples, &est).unwrap();
        for &(_, e_hat) in &check.noise_estimates {
            assert!(e_hat.abs() < 1e-9);
        }
    }
}
