//! Multi-kernel learning: group-lasso RKHS superposition solved by ADMM,
//! kernel superposition solved by the interpolated iterative algorithm,
//! sparsity-path tracing, and the naive bandwidth estimator.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

use crate::estimators::{Estimate, SampleSet};
use crate::kernels::{normalize_trace, KernelError, KernelMatrix};
use crate::spectral::{symmetrize, Spectrum};

#[derive(Debug, Error)]
pub enum MklError {
    #[error("dictionary must contain at least one kernel")]
    EmptyDictionary,

    #[error("dictionary kernels disagree on size: {0} vs {1}")]
    MixedKernelSizes(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all kernel coefficient norms are zero; mu is too large to select a kernel")]
    AllZero,

    #[error("spectral dictionary does not match the spectrum")]
    SpectrumMismatch,

    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Ordered collection of same-size kernels, optionally trace-normalized,
/// with a human-readable label per kernel.
#[derive(Debug, Clone)]
pub struct KernelDictionary {
    kernels: Vec<KernelMatrix>,
    labels: Vec<String>,
}

impl KernelDictionary {
    /// Build a dictionary; with `normalize` set, every kernel is scaled to
    /// unit trace to prevent imbalances in kernel selection.
    pub fn new(kernels: Vec<KernelMatrix>, normalize: bool) -> Result<Self, MklError> {
        let labels = kernels.iter().map(|k| k.provenance().to_string()).collect();
        Self::with_labels(kernels, labels, normalize)
    }

    pub fn with_labels(
        kernels: Vec<KernelMatrix>,
        labels: Vec<String>,
        normalize: bool,
    ) -> Result<Self, MklError> {
        Self::with_trace_target(kernels, labels, if normalize { Some(1.0) } else { None })
    }

    /// Build a dictionary with every kernel scaled to a common trace.
    /// `None` leaves the kernels untouched. Rescaling all kernels by a
    /// factor c is equivalent to dividing the group-lasso mu by sqrt(c),
    /// so the target fixes which mu range is meaningful; a target equal to
    /// the vertex count keeps dictionary kernels on the same scale as
    /// identity or covariance kernels.
    pub fn with_trace_target(
        kernels: Vec<KernelMatrix>,
        labels: Vec<String>,
        trace_target: Option<f64>,
    ) -> Result<Self, MklError> {
        if kernels.is_empty() {
            return Err(MklError::EmptyDictionary);
        }
        if labels.len() != kernels.len() {
            return Err(MklError::DimensionMismatch {
                expected: kernels.len(),
                got: labels.len(),
            });
        }
        let n = kernels[0].n();
        for k in &kernels {
            if k.n() != n {
                return Err(MklError::MixedKernelSizes(n, k.n()));
            }
        }
        let kernels = match trace_target {
            Some(target) => {
                if !(target > 0.0) {
                    return Err(MklError::InvalidParameter(format!(
                        "trace target must be positive, got {target}"
                    )));
                }
                kernels
                    .iter()
                    .map(|k| {
                        normalize_trace(k).map(|unit| {
                            KernelMatrix::new(unit.matrix() * target, unit.provenance().to_string())
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            None => kernels,
        };
        Ok(Self { kernels, labels })
    }

    pub fn m(&self) -> usize {
        self.kernels.len()
    }

    pub fn n(&self) -> usize {
        self.kernels[0].n()
    }

    pub fn kernels(&self) -> &[KernelMatrix] {
        &self.kernels
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// ADMM configuration for the RKHS-superposition solver.
#[derive(Debug, Clone, Copy)]
pub struct AdmmParams {
    /// Augmented Lagrangian parameter.
    pub rho: f64,
    /// Stop once the primal gap ||o - alpha_bar|| falls at or below this.
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for AdmmParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            eps: 1e-6,
            max_iter: 5000,
        }
    }
}

/// Group soft-thresholding: shrink the Euclidean norm of `a` by `zeta`,
/// returning zero once the norm falls at or below the threshold.
pub fn soft_threshold(a: &DVector<f64>, zeta: f64) -> DVector<f64> {
    let norm = a.norm();
    if norm <= zeta {
        DVector::zeros(a.len())
    } else {
        a.scale(1.0 - zeta / norm)
    }
}

/// Group-lasso solution: per-kernel transformed coefficients
/// alpha_bar_m = Kbar_m^{1/2} alpha_m, the recovered alpha_m, their norms,
/// and solver diagnostics.
#[derive(Debug, Clone)]
pub struct RsSolution {
    pub alpha_bar: Vec<DVector<f64>>,
    pub alpha: Vec<DVector<f64>>,
    pub norms: Vec<f64>,
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

struct RestrictedRoots {
    /// Symmetric PSD square roots of the sampled kernels.
    roots: Vec<DMatrix<f64>>,
    /// Pseudo-inverse square roots (relative tolerance 1e-10).
    pinv_roots: Vec<DMatrix<f64>>,
    /// Cholesky of rho I + sum_m Kbar_m, for the Woodbury o-update.
    gram_chol: Cholesky<f64, Dyn>,
}

fn restricted_roots(
    dict: &KernelDictionary,
    samples: &SampleSet,
    rho: f64,
) -> Result<RestrictedRoots, MklError> {
    let s = samples.len();
    let mut roots = Vec::with_capacity(dict.m());
    let mut pinv_roots = Vec::with_capacity(dict.m());
    let mut gram = DMatrix::<f64>::identity(s, s) * rho;
    for kernel in dict.kernels() {
        let restricted = samples.restrict_matrix(kernel.matrix());
        let eig = restricted.symmetric_eigen();
        let max_eig = eig.eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v));
        let mut root_scaled = eig.eigenvectors.clone();
        let mut pinv_scaled = eig.eigenvectors.clone();
        for (c, &lam) in eig.eigenvalues.iter().enumerate() {
            let lam = lam.max(0.0);
            let sqrt = lam.sqrt();
            root_scaled.column_mut(c).scale_mut(sqrt);
            let inv = if lam > 1e-10 * max_eig.max(f64::MIN_POSITIVE) {
                1.0 / sqrt
            } else {
                0.0
            };
            pinv_scaled.column_mut(c).scale_mut(inv);
        }
        let root = symmetrize(&root_scaled * eig.eigenvectors.transpose());
        let pinv = symmetrize(&pinv_scaled * eig.eigenvectors.transpose());
        gram += &root * &root;
        roots.push(root);
        pinv_roots.push(pinv);
    }
    let gram_chol = symmetrize(gram)
        .cholesky()
        .ok_or_else(|| MklError::InvalidParameter("rho must be positive".into()))?;
    Ok(RestrictedRoots {
        roots,
        pinv_roots,
        gram_chol,
    })
}

/// Solve the group-lasso multi-kernel problem
/// min (1/2)||y - Phi o||^2 + (S mu / 2) sum_m ||alpha_bar_m|| s.to
/// alpha_bar = o, with Phi = [Kbar_1^{1/2} ... Kbar_M^{1/2}], by ADMM:
/// per-group soft-thresholding with threshold mu S / (2 rho), a ridge
/// o-update, and gradient ascent on the multipliers. The o-update solves
/// (Phi^T Phi + rho I) through the matrix-inversion identity so each
/// iteration costs O(M S^2) after one S x S factorization.
pub fn rs_admm(
    dict: &KernelDictionary,
    samples: &SampleSet,
    mu: f64,
    params: &AdmmParams,
) -> Result<RsSolution, MklError> {
    rs_admm_warm(dict, samples, mu, params, None)
}

pub(crate) fn rs_admm_warm(
    dict: &KernelDictionary,
    samples: &SampleSet,
    mu: f64,
    params: &AdmmParams,
    warm: Option<(Vec<DVector<f64>>, Vec<DVector<f64>>)>,
) -> Result<RsSolution, MklError> {
    validate_dict_samples(dict, samples)?;
    if !(mu > 0.0) {
        return Err(MklError::InvalidParameter(format!(
            "mu must be positive, got {mu}"
        )));
    }
    if !(params.rho > 0.0) || !(params.eps > 0.0) {
        return Err(MklError::InvalidParameter(
            "rho and eps must be positive".into(),
        ));
    }
    let s = samples.len();
    let m = dict.m();
    let y = samples.observations();
    let setup = restricted_roots(dict, samples, params.rho)?;
    let phi_t_y: Vec<DVector<f64>> = setup.roots.iter().map(|r| r * y).collect();

    let threshold = mu * s as f64 / (2.0 * params.rho);
    let (mut alpha_bar, mut nu) = match warm {
        Some((a, nu)) => (a, nu),
        None => (
            vec![DVector::zeros(s); m],
            vec![DVector::zeros(s); m],
        ),
    };
    let mut o = alpha_bar.clone();
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;

    while iterations < params.max_iter {
        for j in 0..m {
            alpha_bar[j] = soft_threshold(&(&o[j] + &nu[j]), threshold);
        }
        // o-update via (Phi^T Phi + rho I)^{-1} z
        //   = (z - Phi^T (rho I + Phi Phi^T)^{-1} Phi z) / rho.
        let mut phi_z = DVector::zeros(s);
        let rhs: Vec<DVector<f64>> = (0..m)
            .map(|j| &phi_t_y[j] + (&alpha_bar[j] - &nu[j]).scale(params.rho))
            .collect();
        for j in 0..m {
            phi_z += &setup.roots[j] * &rhs[j];
        }
        let w = setup.gram_chol.solve(&phi_z);
        residual = 0.0;
        for j in 0..m {
            o[j] = (&rhs[j] - &setup.roots[j] * &w).scale(1.0 / params.rho);
            nu[j] += &o[j] - &alpha_bar[j];
            residual += (&o[j] - &alpha_bar[j]).norm_squared();
        }
        residual = residual.sqrt();
        iterations += 1;
        if residual <= params.eps {
            converged = true;
            break;
        }
    }

    let alpha: Vec<DVector<f64>> = (0..m)
        .map(|j| &setup.pinv_roots[j] * &alpha_bar[j])
        .collect();
    let norms = alpha_bar.iter().map(|a| a.norm()).collect();
    Ok(RsSolution {
        alpha_bar,
        alpha,
        norms,
        iterations,
        final_residual: residual,
        converged,
    })
}

/// The group-lasso objective (1/S)||y - sum_m Kbar_m^{1/2} a_m||^2
/// + mu sum_m ||a_m|| evaluated at a candidate point.
pub fn rs_objective(
    dict: &KernelDictionary,
    samples: &SampleSet,
    mu: f64,
    alpha_bar: &[DVector<f64>],
) -> Result<f64, MklError> {
    validate_dict_samples(dict, samples)?;
    if alpha_bar.len() != dict.m() {
        return Err(MklError::DimensionMismatch {
            expected: dict.m(),
            got: alpha_bar.len(),
        });
    }
    let setup = restricted_roots(dict, samples, 1.0)?;
    let mut fit = samples.observations().clone();
    let mut penalty = 0.0;
    for (j, a) in alpha_bar.iter().enumerate() {
        fit -= &setup.roots[j] * a;
        penalty += a.norm();
    }
    Ok(fit.norm_squared() / samples.len() as f64 + mu * penalty)
}

/// Recover the vertex-domain estimate from a group-lasso solution:
/// f = sum_m K_m Psi^T alpha_m with alpha_m = Kbar_m^{-1/2} alpha_bar_m.
pub fn rs_reconstruct(
    dict: &KernelDictionary,
    samples: &SampleSet,
    sol: &RsSolution,
) -> Result<Estimate, MklError> {
    validate_dict_samples(dict, samples)?;
    if sol.alpha.len() != dict.m() {
        return Err(MklError::DimensionMismatch {
            expected: dict.m(),
            got: sol.alpha.len(),
        });
    }
    let mut values = DVector::zeros(dict.n());
    for (j, kernel) in dict.kernels().iter().enumerate() {
        if sol.alpha[j].len() != samples.len() {
            return Err(MklError::DimensionMismatch {
                expected: samples.len(),
                got: sol.alpha[j].len(),
            });
        }
        values += samples.select_columns(kernel.matrix()) * &sol.alpha[j];
    }
    Ok(Estimate::new(values, None, "mkl-rs".into()))
}

/// Interpolated-iterative-algorithm configuration for kernel superposition.
#[derive(Debug, Clone, Copy)]
pub struct IiaParams {
    /// Ball radius around theta0.
    pub radius: f64,
    /// Interpolation step in (0, 1).
    pub eta: f64,
    /// Stop once consecutive alpha iterates differ by less than this.
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for IiaParams {
    fn default() -> Self {
        Self {
            radius: 1.0,
            eta: 0.5,
            eps: 1e-6,
            max_iter: 2000,
        }
    }
}

/// Kernel-superposition solution: nonnegative kernel weights on the sphere
/// of radius R around theta0, shared coefficients, and diagnostics.
#[derive(Debug, Clone)]
pub struct KsSolution {
    pub theta: Vec<f64>,
    pub alpha: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn validate_iia(theta0: &[f64], m: usize, params: &IiaParams) -> Result<(), MklError> {
    if theta0.len() != m {
        return Err(MklError::DimensionMismatch {
            expected: m,
            got: theta0.len(),
        });
    }
    if theta0.iter().any(|&t| t < 0.0) {
        return Err(MklError::InvalidParameter(
            "theta0 must be nonnegative".into(),
        ));
    }
    if !(params.radius > 0.0) {
        return Err(MklError::InvalidParameter("radius must be positive".into()));
    }
    if !(params.eta > 0.0 && params.eta < 1.0) {
        return Err(MklError::InvalidParameter(
            "eta must lie strictly inside (0, 1)".into(),
        ));
    }
    if !(params.eps > 0.0) {
        return Err(MklError::InvalidParameter("eps must be positive".into()));
    }
    Ok(())
}

/// Place theta on the sphere of radius R around theta0, along v. The
/// quadratic forms in v are nonnegative, so theta stays nonnegative
/// whenever theta0 is.
fn theta_update(theta0: &[f64], v: &[f64], radius: f64) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return theta0.to_vec();
    }
    theta0
        .iter()
        .zip(v)
        .map(|(&t0, &vi)| t0 + radius * vi / norm)
        .collect()
}

/// Kernel superposition by the interpolated iterative algorithm: fit
/// alpha for the current combined kernel sum_m theta_m Kbar_m + mu S I,
/// update theta along the per-kernel quadratic forms v_m = alpha^T Kbar_m
/// alpha onto the constraint sphere, and interpolate alpha with step eta
/// until consecutive iterates converge. Non-convergence is reported through
/// the `converged` flag, not retried.
pub fn ks_iia(
    dict: &KernelDictionary,
    samples: &SampleSet,
    mu: f64,
    theta0: &[f64],
    params: &IiaParams,
) -> Result<KsSolution, MklError> {
    validate_dict_samples(dict, samples)?;
    validate_iia(theta0, dict.m(), params)?;
    if !(mu > 0.0) {
        return Err(MklError::InvalidParameter(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let s = samples.len();
    let y = samples.observations();
    let restricted: Vec<DMatrix<f64>> = dict
        .kernels()
        .iter()
        .map(|k| samples.restrict_matrix(k.matrix()))
        .collect();

    let solve_for = |theta: &[f64]| -> DVector<f64> {
        let mut system = DMatrix::<f64>::identity(s, s) * (mu * s as f64);
        for (j, kbar) in restricted.iter().enumerate() {
            if theta[j] != 0.0 {
                system += kbar * theta[j];
            }
        }
        symmetrize(system)
            .cholesky()
            .expect("mu S I keeps the system positive definite")
            .solve(y)
    };

    let mut alpha = solve_for(theta0);
    let mut theta = theta0.to_vec();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        let v: Vec<f64> = restricted
            .iter()
            .map(|kbar| (alpha.transpose() * (kbar * &alpha))[(0, 0)].max(0.0))
            .collect();
        theta = theta_update(theta0, &v, params.radius);
        debug_assert!(theta.iter().all(|&t| t >= 0.0));
        let fresh = solve_for(&theta);
        let next = alpha.scale(params.eta) + fresh.scale(1.0 - params.eta);
        let step = (&next - &alpha).norm();
        alpha = next;
        iterations += 1;
        if step < params.eps {
            converged = true;
            break;
        }
    }
    Ok(KsSolution {
        theta,
        alpha,
        iterations,
        converged,
    })
}

/// Vertex-domain estimate from a kernel-superposition solution: the ridge
/// expansion f = K(theta) Psi^T alpha with the combined kernel.
pub fn ks_reconstruct(
    dict: &KernelDictionary,
    samples: &SampleSet,
    sol: &KsSolution,
) -> Result<Estimate, MklError> {
    validate_dict_samples(dict, samples)?;
    if sol.theta.len() != dict.m() {
        return Err(MklError::DimensionMismatch {
            expected: dict.m(),
            got: sol.theta.len(),
        });
    }
    if sol.alpha.len() != samples.len() {
        return Err(MklError::DimensionMismatch {
            expected: samples.len(),
            got: sol.alpha.len(),
        });
    }
    let mut values = DVector::zeros(dict.n());
    for (j, kernel) in dict.kernels().iter().enumerate() {
        if sol.theta[j] != 0.0 {
            values += (samples.select_columns(kernel.matrix()) * &sol.alpha).scale(sol.theta[j]);
        }
    }
    Ok(Estimate::new(values, Some(sol.alpha.clone()), "mkl-ks".into()))
}

/// Fourier-domain kernel superposition for smoothing (all vertices
/// observed, Laplacian kernels sharing one spectrum). `r_dagger_m` holds
/// the kernel eigenvalues of each dictionary entry on that spectrum. One
/// O(N M) pass per iteration replaces the dense solves of `ks_iia`; the
/// result matches it to solver tolerance.
pub fn ks_iia_smoothing(
    spec: &Spectrum,
    r_dagger_m: &[DVector<f64>],
    y_full: &DVector<f64>,
    mu: f64,
    theta0: &[f64],
    params: &IiaParams,
) -> Result<KsSolution, MklError> {
    let n = spec.n();
    if r_dagger_m.is_empty() {
        return Err(MklError::EmptyDictionary);
    }
    if r_dagger_m.iter().any(|r| r.len() != n) || y_full.len() != n {
        return Err(MklError::SpectrumMismatch);
    }
    validate_iia(theta0, r_dagger_m.len(), params)?;
    if !(mu > 0.0) {
        return Err(MklError::InvalidParameter(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let y_tilde = spec.gft(y_full).expect("length checked");
    let m = r_dagger_m.len();

    let solve_for = |theta: &[f64]| -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            let mut denom = mu * n as f64;
            for j in 0..m {
                denom += theta[j] * r_dagger_m[j][i];
            }
            y_tilde[i] / denom
        })
    };

    let mut alpha_tilde = solve_for(theta0);
    let mut theta = theta0.to_vec();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        let v: Vec<f64> = (0..m)
            .map(|j| {
                (0..n)
                    .map(|i| r_dagger_m[j][i] * alpha_tilde[i] * alpha_tilde[i])
                    .sum::<f64>()
            })
            .collect();
        theta = theta_update(theta0, &v, params.radius);
        let fresh = solve_for(&theta);
        let next = alpha_tilde.scale(params.eta) + fresh.scale(1.0 - params.eta);
        let step = (&next - &alpha_tilde).norm();
        alpha_tilde = next;
        iterations += 1;
        if step < params.eps {
            converged = true;
            break;
        }
    }
    Ok(KsSolution {
        theta,
        alpha: spec.igft(&alpha_tilde).expect("length checked"),
        iterations,
        converged,
    })
}

/// Trace ||alpha_bar_m||^2 along an ascending mu grid, warm-starting each
/// solve from the previous one. Row m, column j holds the squared norm at
/// mu_grid[j].
pub fn sparsity_path(
    dict: &KernelDictionary,
    samples: &SampleSet,
    mu_grid: &[f64],
    params: &AdmmParams,
) -> Result<DMatrix<f64>, MklError> {
    if mu_grid.is_empty() {
        return Err(MklError::InvalidParameter("mu grid is empty".into()));
    }
    if mu_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MklError::InvalidParameter(
            "mu grid must be strictly ascending".into(),
        ));
    }
    let mut norms = DMatrix::zeros(dict.m(), mu_grid.len());
    let mut warm: Option<(Vec<DVector<f64>>, Vec<DVector<f64>>)> = None;
    for (col, &mu) in mu_grid.iter().enumerate() {
        let sol = rs_admm_warm(dict, samples, mu, params, warm.take())?;
        for (row, norm) in sol.norms.iter().enumerate() {
            norms[(row, col)] = norm * norm;
        }
        warm = Some((sol.alpha_bar, {
            // Multipliers restart at zero with the new mu; reusing stale
            // ones slows the first iterations down measurably.
            vec![DVector::zeros(samples.len()); dict.m()]
        }));
    }
    Ok(norms)
}

/// Index of the last kernel to vanish along an ascending-mu sparsity path:
/// the row whose norm stays above `tol` up to the largest mu. Ties fall to
/// the row with the larger terminal norm.
pub fn last_to_vanish(path: &DMatrix<f64>, tol: f64) -> Option<usize> {
    let (m, g) = path.shape();
    let mut best: Option<(usize, usize, f64)> = None; // (last col alive, row, norm there)
    for row in 0..m {
        let mut last_alive = None;
        for col in (0..g).rev() {
            if path[(row, col)] > tol {
                last_alive = Some(col);
                break;
            }
        }
        if let Some(col) = last_alive {
            let norm = path[(row, col)];
            let better = match best {
                None => true,
                Some((bcol, _, bnorm)) => col > bcol || (col == bcol && norm > bnorm),
            };
            if better {
                best = Some((col, row, norm));
            }
        }
    }
    best.map(|(_, row, _)| row)
}

/// Naive bandwidth estimate: the bandwidth whose kernel carries the largest
/// squared coefficient norm at a prespecified mu; ties break toward the
/// smaller bandwidth.
pub fn naive_bandwidth(norms_sq: &[f64], bandwidths: &[f64]) -> Result<f64, MklError> {
    if norms_sq.is_empty() {
        return Err(MklError::EmptyDictionary);
    }
    if norms_sq.len() != bandwidths.len() {
        return Err(MklError::DimensionMismatch {
            expected: norms_sq.len(),
            got: bandwidths.len(),
        });
    }
    if norms_sq.iter().all(|&n| n == 0.0) {
        return Err(MklError::AllZero);
    }
    let mut best = 0;
    for m in 1..norms_sq.len() {
        let better = norms_sq[m] > norms_sq[best]
            || (norms_sq[m] == norms_sq[best] && bandwidths[m] < bandwidths[best]);
        if better {
            best = m;
        }
    }
    Ok(bandwidths[best])
}

fn validate_dict_samples(dict: &KernelDictionary, samples: &SampleSet) -> Result<(), MklError> {
    if samples.n_vertices() != dict.n() {
        return Err(MklError::DimensionMismatch {
            expected: dict.n(),
            got: samples.n_vertices(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, LaplacianKind};
    use crate::kernels::{bandlimited_kernel, laplacian_kernel, lowpass_band, r_dagger, SpectralFunction};
    use crate::spectral::eigendecompose;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_vector(n: usize, seed: u64) -> DVector<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    fn diffusion_dictionary(
        n: usize,
        seed: u64,
        sigma2s: &[f64],
        normalize: bool,
    ) -> (Graph, Spectrum, KernelDictionary) {
        let g = Graph::erdos_renyi(n, 0.35, seed).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let kernels = sigma2s
            .iter()
            .map(|&sigma2| laplacian_kernel(&spec, &SpectralFunction::Diffusion { sigma2 }).unwrap())
            .collect();
        let dict = KernelDictionary::new(kernels, normalize).unwrap();
        (g, spec, dict)
    }

    #[test]
    fn soft_threshold_closed_forms() {
        let a = DVector::from_vec(vec![3.0, 4.0]);
        let out = soft_threshold(&a, 1.0);
        assert_abs_diff_eq!(out[0], 2.4, epsilon = 1e-14);
        assert_abs_diff_eq!(out[1], 3.2, epsilon = 1e-14);

        let out = soft_threshold(&a, 5.0);
        assert_eq!(out.norm(), 0.0);
        let out = soft_threshold(&a, 7.0);
        assert_eq!(out.norm(), 0.0);

        let out = soft_threshold(&a, 0.0);
        assert_abs_diff_eq!(out, a, epsilon = 1e-15);

        let zero = soft_threshold(&DVector::zeros(3), 0.5);
        assert_eq!(zero.norm(), 0.0);
    }

    #[test]
    fn admm_large_mu_zeroes_everything() {
        let (_, _, dict) = diffusion_dictionary(15, 1, &[0.5, 1.0, 2.0], true);
        let samples = SampleSet::new(15, vec![0, 2, 5, 9, 11], random_vector(5, 2)).unwrap();
        let sol = rs_admm(&dict, &samples, 1e6, &AdmmParams::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.norms.iter().all(|&n| n == 0.0));
        let est = rs_reconstruct(&dict, &samples, &sol).unwrap();
        assert_eq!(est.values().norm(), 0.0);
    }

    #[test]
    fn admm_single_kernel_small_mu_fits_data() {
        let (_, _, dict) = diffusion_dictionary(20, 3, &[1.0], false);
        let samples =
            SampleSet::new(20, (0..8).map(|i| 2 * i).collect(), random_vector(8, 4)).unwrap();
        let params = AdmmParams {
            eps: 1e-9,
            max_iter: 20000,
            ..Default::default()
        };
        let sol = rs_admm(&dict, &samples, 1e-7, &params).unwrap();
        assert!(sol.converged);
        // Phi o ~ y at vanishing regularization.
        let obj = rs_objective(&dict, &samples, 1e-7, &sol.alpha_bar).unwrap();
        let data_term = obj - 1e-7 * sol.norms.iter().sum::<f64>();
        assert!(
            data_term * (samples.len() as f64) < 1e-4,
            "residual {data_term:e}"
        );
    }

    #[test]
    fn admm_feasibility_and_objective_on_convergence() {
        let (_, _, dict) = diffusion_dictionary(18, 5, &[0.5, 2.0], true);
        let y = random_vector(6, 6);
        let samples = SampleSet::new(18, vec![1, 3, 7, 10, 13, 16], y.clone()).unwrap();
        let params = AdmmParams::default();
        let sol = rs_admm(&dict, &samples, 1e-3, &params).unwrap();
        assert!(sol.converged);
        assert!(sol.final_residual <= params.eps);
        let at_solution = rs_objective(&dict, &samples, 1e-3, &sol.alpha_bar).unwrap();
        let zeros = vec![DVector::zeros(6); 2];
        let at_zero = rs_objective(&dict, &samples, 1e-3, &zeros).unwrap();
        assert!(at_solution <= at_zero + 1e-12);
    }

    #[test]
    fn reconstruct_matches_direct_expansion() {
        let (_, _, dict) = diffusion_dictionary(16, 7, &[1.0], false);
        let samples = SampleSet::new(16, vec![0, 4, 8, 12], random_vector(4, 8)).unwrap();
        let sol = rs_admm(&dict, &samples, 1e-4, &AdmmParams::default()).unwrap();
        let est = rs_reconstruct(&dict, &samples, &sol).unwrap();
        // Same expansion computed through an independent pseudo-inverse root.
        let kbar = samples.restrict_matrix(dict.kernels()[0].matrix());
        let svd = kbar.svd(true, true);
        let mut alt = DVector::zeros(4);
        let u = svd.u.as_ref().unwrap();
        for (i, &sv) in svd.singular_values.iter().enumerate() {
            if sv > 1e-10 * svd.singular_values.max() {
                let ui = DVector::from(u.column(i).clone_owned());
                alt += ui.scale(ui.dot(&sol.alpha_bar[0]) / sv.sqrt());
            }
        }
        let direct = samples.select_columns(dict.kernels()[0].matrix()) * alt;
        assert!((est.values() - direct).amax() < 1e-8);
    }

    #[test]
    fn iia_single_kernel_fixed_point() {
        let (_, _, dict) = diffusion_dictionary(14, 9, &[1.0], true);
        let samples = SampleSet::new(14, vec![0, 3, 6, 9, 12], random_vector(5, 10)).unwrap();
        let params = IiaParams {
            eps: 1e-12,
            max_iter: 10000,
            ..Default::default()
        };
        let sol = ks_iia(&dict, &samples, 0.01, &[0.0], &params).unwrap();
        assert!(sol.converged);
        // theta lands on the sphere immediately: |theta - 0| = R.
        assert_abs_diff_eq!(sol.theta[0], params.radius, epsilon = 1e-9);
        // alpha converges to the ridge coefficients of R * Kbar.
        let mut kbar = samples.restrict_matrix(dict.kernels()[0].matrix()) * params.radius;
        for i in 0..5 {
            kbar[(i, i)] += 0.01 * 5.0;
        }
        let expect = kbar.cholesky().unwrap().solve(samples.observations());
        assert!((&sol.alpha - expect).amax() < 1e-8);
    }

    #[test]
    fn iia_identical_kernels_share_weight() {
        let g = Graph::erdos_renyi(12, 0.4, 11).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let k = laplacian_kernel(&spec, &SpectralFunction::Diffusion { sigma2: 1.0 }).unwrap();
        let dict = KernelDictionary::new(vec![k.clone(), k], true).unwrap();
        let samples = SampleSet::new(12, vec![1, 5, 8, 10], random_vector(4, 12)).unwrap();
        let sol = ks_iia(&dict, &samples, 0.05, &[0.0, 0.0], &IiaParams::default()).unwrap();
        assert_abs_diff_eq!(sol.theta[0], sol.theta[1], epsilon = 1e-12);
        let dist: f64 = sol.theta.iter().map(|t| t * t).sum::<f64>();
        assert_abs_diff_eq!(dist.sqrt(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn iia_smoothing_matches_dense_path() {
        let n = 30;
        let g = Graph::erdos_renyi(n, 0.2, 13).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let functions = [
            SpectralFunction::Diffusion { sigma2: 0.8 },
            SpectralFunction::LaplacianRegularization { sigma2: 2.0 },
            SpectralFunction::Diffusion { sigma2: 2.5 },
        ];
        let kernels: Vec<KernelMatrix> = functions
            .iter()
            .map(|r| laplacian_kernel(&spec, r).unwrap())
            .collect();
        let dict = KernelDictionary::new(kernels, false).unwrap();
        let y = random_vector(n, 14);
        let samples = SampleSet::new(n, (0..n).collect(), y.clone()).unwrap();
        let theta0 = [0.0, 0.0, 0.0];
        let params = IiaParams::default();
        let dense = ks_iia(&dict, &samples, 0.02, &theta0, &params).unwrap();
        let weights: Vec<DVector<f64>> = functions
            .iter()
            .map(|r| r_dagger(r, spec.eigenvalues()).unwrap())
            .collect();
        let scalar = ks_iia_smoothing(&spec, &weights, &y, 0.02, &theta0, &params).unwrap();
        assert_eq!(dense.iterations, scalar.iterations);
        for j in 0..3 {
            assert_abs_diff_eq!(dense.theta[j], scalar.theta[j], epsilon = 1e-8);
        }
        assert!((&dense.alpha - &scalar.alpha).amax() < 1e-8);
    }

    #[test]
    fn iia_constant_dictionary_converges_fast_for_small_eta() {
        // All kernels identical: the theta direction is fixed, so for
        // eta -> 0 the alpha update reaches its fixed point immediately.
        let g = Graph::circular(10).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let k = laplacian_kernel(&spec, &SpectralFunction::Diffusion { sigma2: 1.0 }).unwrap();
        let dict = KernelDictionary::new(vec![k.clone(), k.clone(), k], true).unwrap();
        let samples = SampleSet::new(10, vec![0, 2, 4, 6, 8], random_vector(5, 15)).unwrap();
        let params = IiaParams {
            eta: 1e-9,
            ..Default::default()
        };
        let sol = ks_iia(&dict, &samples, 0.05, &[0.0; 3], &params).unwrap();
        assert!(sol.converged);
        assert!(sol.iterations <= 3, "took {} iterations", sol.iterations);
    }

    #[test]
    fn sparsity_path_support_shrinks() {
        let n = 40;
        let g = Graph::erdos_renyi(n, 0.3, 17).unwrap();
        let spec = eigendecompose(&g.laplacian(LaplacianKind::Combinatorial).unwrap()).unwrap();
        let kernels: Vec<KernelMatrix> = [4usize, 8, 12]
            .iter()
            .map(|&b| bandlimited_kernel(&spec, &lowpass_band(b), 1e3).unwrap())
            .collect();
        let dict = KernelDictionary::new(kernels, false).unwrap();
        let truth = crate::synth::bandlimited_signal(&spec, &lowpass_band(8), 18).unwrap();
        let samples = SampleSet::from_signal((0..n).step_by(2).collect(), &truth).unwrap();
        let grid = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0];
        let path = sparsity_path(&dict, &samples, &grid, &AdmmParams::default()).unwrap();
        // Support size never grows along the ascending grid.
        let mut last = usize::MAX;
        for col in 0..grid.len() {
            let support = (0..3).filter(|&m| path[(m, col)] > 1e-8).count();
            assert!(support <= last);
            last = support;
        }
        // At the largest mu everything has vanished.
        assert!((0..3).all(|m| path[(m, grid.len() - 1)] == 0.0));
    }

    #[test]
    fn naive_bandwidth_selection() {
        assert_eq!(
            naive_bandwidth(&[0.0, 5.0, 1.0], &[10.0, 20.0, 30.0]).unwrap(),
            20.0
        );
        // Ties break toward the smaller bandwidth.
        assert_eq!(
            naive_bandwidth(&[2.0, 2.0, 2.0], &[30.0, 10.0, 20.0]).unwrap(),
            10.0
        );
        assert!(matches!(
            naive_bandwidth(&[0.0, 0.0], &[10.0, 20.0]),
            Err(MklError::AllZero)
        ));
    }

    #[test]
    fn last_to_vanish_reads_the_path() {
        let mut path = DMatrix::zeros(3, 4);
        path[(0, 0)] = 1.0;
        path[(1, 0)] = 2.0;
        path[(1, 1)] = 0.5;
        path[(2, 0)] = 3.0;
        path[(2, 1)] = 1.0;
        path[(2, 2)] = 0.2;
        assert_eq!(last_to_vanish(&path, 1e-8), Some(2));
        assert_eq!(last_to_vanish(&DMatrix::zeros(2, 2), 1e-8), None);
    }
}
