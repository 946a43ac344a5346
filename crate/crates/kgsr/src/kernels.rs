//! Kernel families on graphs: Laplacian spectral kernels, bandlimited
//! kernels, covariance kernels, closed-form inverse-Gram kernels, the
//! circulant closed form for rings, trace normalization, and inverse-kernel
//! representations for the primal solver.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::graph::Graph;
use crate::spectral::{symmetrize, Spectrum};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("spectral function is negative at eigenvalue index {index}: r = {value}")]
    NegativeSpectralValue { index: usize, value: f64 },

    #[error("spectral function is not finite at eigenvalue index {index}")]
    NonFiniteSpectralValue { index: usize },

    #[error("invalid spectral-function parameter: {0}")]
    InvalidParameter(String),

    #[error("band is empty")]
    EmptyBand,

    #[error("band index {index} out of range for {n} vertices")]
    BandIndexOutOfRange { index: usize, n: usize },

    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("matrix is singular; is the adjacency properly scaled?")]
    SingularMatrix,

    #[error("spectral function vanishes on the ring spectrum at DFT index {0}")]
    ZeroSpectralValue(usize),

    #[error("spectral function variant is index-based; the circulant closed form needs r(lambda)")]
    IndexBasedSpectralFunction,

    #[error("kernel trace {0} is not positive")]
    ZeroTrace(f64),

    #[error("inverse-kernel constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("polynomial inverse kernel is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Nonnegative spectral map r acting on Laplacian eigenvalues. The inverse
/// values r_dagger(lambda) become the kernel eigenvalues.
///
/// Diffusion, p-step random walk, and Laplacian regularization are functions
/// of the eigenvalue itself; `Bandlimited` and `Table` are indexed by the
/// position of the eigenvalue in ascending order.
#[derive(Debug, Clone)]
pub enum SpectralFunction {
    /// r(lambda) = exp(sigma^2 lambda / 2).
    Diffusion { sigma2: f64 },
    /// r(lambda) = (a - lambda)^{-p}, a >= 2.
    PStepRandomWalk { a: f64, p: u32 },
    /// r(lambda) = 1 + sigma^2 lambda.
    LaplacianRegularization { sigma2: f64 },
    /// r = 1/beta on the band, beta off it (0-based eigenvalue indices).
    Bandlimited { band: Vec<usize>, beta: f64 },
    /// Explicit nonnegative values, one per eigenvalue index.
    Table(DVector<f64>),
}

impl SpectralFunction {
    /// Evaluate at an eigenvalue for the variants that are genuine functions
    /// of lambda; `None` for the index-based variants.
    pub fn eval_lambda(&self, lambda: f64) -> Option<f64> {
        match self {
            Self::Diffusion { sigma2 } => Some((sigma2 * lambda / 2.0).exp()),
            Self::PStepRandomWalk { a, p } => Some((a - lambda).powi(-(*p as i32))),
            Self::LaplacianRegularization { sigma2 } => Some(1.0 + sigma2 * lambda),
            Self::Bandlimited { .. } | Self::Table(_) => None,
        }
    }

    /// r evaluated on every eigenvalue, with parameter validation.
    pub fn values_on(&self, eigenvalues: &DVector<f64>) -> Result<DVector<f64>, KernelError> {
        let n = eigenvalues.len();
        self.validate(n)?;
        let values = match self {
            Self::Bandlimited { band, beta } => {
                let mut v = DVector::from_element(n, *beta);
                for &idx in band {
                    v[idx] = 1.0 / beta;
                }
                v
            }
            Self::Table(values) => values.clone(),
            _ => DVector::from_fn(n, |i, _| self.eval_lambda(eigenvalues[i]).unwrap()),
        };
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(KernelError::NonFiniteSpectralValue { index });
            }
            if value < 0.0 {
                return Err(KernelError::NegativeSpectralValue { index, value });
            }
        }
        Ok(values)
    }

    fn validate(&self, n: usize) -> Result<(), KernelError> {
        match self {
            Self::Diffusion { sigma2 } | Self::LaplacianRegularization { sigma2 } => {
                if !(*sigma2 > 0.0) {
                    return Err(KernelError::InvalidParameter(format!(
                        "sigma2 must be positive, got {sigma2}"
                    )));
                }
            }
            Self::PStepRandomWalk { a, p } => {
                if !(*a >= 2.0) {
                    return Err(KernelError::InvalidParameter(format!(
                        "random-walk parameter a must be >= 2, got {a}"
                    )));
                }
                if *p == 0 {
                    return Err(KernelError::InvalidParameter("p must be >= 1".into()));
                }
            }
            Self::Bandlimited { band, beta } => {
                validate_band(band, n)?;
                if !(*beta > 0.0) {
                    return Err(KernelError::InvalidParameter(format!(
                        "beta must be positive, got {beta}"
                    )));
                }
            }
            Self::Table(values) => {
                if values.len() != n {
                    return Err(KernelError::DimensionMismatch {
                        expected: n,
                        got: values.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Diffusion { sigma2 } => format!("diffusion(sigma2={sigma2})"),
            Self::PStepRandomWalk { a, p } => format!("random-walk(a={a},p={p})"),
            Self::LaplacianRegularization { sigma2 } => format!("regularized(sigma2={sigma2})"),
            Self::Bandlimited { band, beta } => {
                format!("bandlimited(|band|={},beta={beta})", band.len())
            }
            Self::Table(_) => "table".into(),
        }
    }
}

fn validate_band(band: &[usize], n: usize) -> Result<(), KernelError> {
    if band.is_empty() {
        return Err(KernelError::EmptyBand);
    }
    for &idx in band {
        if idx >= n {
            return Err(KernelError::BandIndexOutOfRange { index: idx, n });
        }
    }
    Ok(())
}

/// Lowest-`b` frequency indices {0, .., b-1}, the low-pass band.
pub fn lowpass_band(b: usize) -> Vec<usize> {
    (0..b).collect()
}

/// Kernel eigenvalues r_dagger for a spectral function: the reciprocal of r
/// where r is nonzero, with values below 1e-12 of the spectral maximum
/// treated as zero. The bandlimited variant bypasses the threshold and maps
/// exactly to beta in-band and 1/beta out-of-band, keeping the kernel
/// nonsingular for any finite beta.
pub fn r_dagger(
    r: &SpectralFunction,
    eigenvalues: &DVector<f64>,
) -> Result<DVector<f64>, KernelError> {
    if let SpectralFunction::Bandlimited { band, beta } = r {
        let n = eigenvalues.len();
        r.validate(n)?;
        let mut v = DVector::from_element(n, 1.0 / beta);
        for &idx in band {
            v[idx] = *beta;
        }
        return Ok(v);
    }
    let values = r.values_on(eigenvalues)?;
    let max = values.iter().fold(0.0f64, |acc, &v| acc.max(v));
    let threshold = 1e-12 * max;
    Ok(values.map(|v| if v > threshold { 1.0 / v } else { 0.0 }))
}

/// Symmetric positive-semidefinite similarity matrix over vertex pairs,
/// tagged with its construction.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    matrix: DMatrix<f64>,
    provenance: String,
}

impl KernelMatrix {
    pub(crate) fn new(matrix: DMatrix<f64>, provenance: String) -> Self {
        Self {
            matrix: symmetrize(matrix),
            provenance,
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Check the kernel invariants: symmetry to 1e-10 (relative) and
    /// eigenvalues no smaller than -1e-8 times the spectral radius.
    pub fn validate(&self) -> Result<(), KernelError> {
        let scale = self.matrix.amax().max(1.0);
        let dev = (&self.matrix - self.matrix.transpose()).amax();
        if dev > 1e-10 * scale {
            return Err(KernelError::NotSymmetric(dev));
        }
        let eigenvalues = self.matrix.clone().symmetric_eigenvalues();
        let max_abs = eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let min = eigenvalues.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
        if min < -1e-8 * max_abs.max(1.0) {
            return Err(KernelError::NotPsd(min));
        }
        Ok(())
    }
}

/// Laplacian kernel K = U r_dagger(Lambda) U^T for a nonnegative spectral
/// function r evaluated on the eigenvalues of `spec`.
pub fn laplacian_kernel(
    spec: &Spectrum,
    r: &SpectralFunction,
) -> Result<KernelMatrix, KernelError> {
    if let SpectralFunction::Bandlimited { band, beta } = r {
        return bandlimited_kernel(spec, band, *beta);
    }
    let weights = r_dagger(r, spec.eigenvalues())?;
    let mut scaled = spec.eigenvectors().clone();
    for (c, &w) in weights.iter().enumerate() {
        scaled.column_mut(c).scale_mut(w);
    }
    let matrix = &scaled * spec.eigenvectors().transpose();
    Ok(KernelMatrix::new(matrix, r.describe()))
}

/// Bandlimited kernel: eigenvalue beta on the band, 1/beta off it, built as
/// a rank-|band| update of the scaled identity so large beta stays exact.
pub fn bandlimited_kernel(
    spec: &Spectrum,
    band: &[usize],
    beta: f64,
) -> Result<KernelMatrix, KernelError> {
    let n = spec.n();
    validate_band(band, n)?;
    if !(beta > 0.0) {
        return Err(KernelError::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let u_band = spec.eigenvectors().select_columns(band.iter());
    let projector = &u_band * u_band.transpose();
    let mut matrix = projector * (beta - 1.0 / beta);
    for i in 0..n {
        matrix[(i, i)] += 1.0 / beta;
    }
    Ok(KernelMatrix::new(
        matrix,
        format!("bandlimited(|band|={},beta={beta})", band.len()),
    ))
}

/// Covariance kernel: the covariance matrix used verbatim as the kernel,
/// after validating symmetry and positive semidefiniteness.
pub fn covariance_kernel(c: &DMatrix<f64>) -> Result<KernelMatrix, KernelError> {
    let scale = c.amax().max(1.0);
    let dev = (c - c.transpose()).amax();
    if dev > 1e-10 * scale {
        return Err(KernelError::NotSymmetric(dev));
    }
    let eigenvalues = c.clone().symmetric_eigenvalues();
    let max_abs = eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let min = eigenvalues.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
    if min < -1e-8 * max_abs.max(1.0) {
        return Err(KernelError::NotPsd(min));
    }
    Ok(KernelMatrix::new(c.clone(), "covariance".into()))
}

/// Inverse-Gram kernel K = [(I - W)^T (I - W)]^{-1} from the (pre-scaled)
/// adjacency matrix. The caller is responsible for scaling W so the inverse
/// exists; only invertibility is validated here.
pub fn adjacency_kernel(g: &Graph) -> Result<KernelMatrix, KernelError> {
    let n = g.n_vertices();
    let m = DMatrix::identity(n, n) - g.weights();
    let gram = symmetrize(m.transpose() * &m);
    let chol = gram.clone().cholesky().ok_or(KernelError::SingularMatrix)?;
    let inv = chol.inverse();
    // Cholesky can succeed on nearly singular matrices; verify the inverse.
    let residual = &inv * &gram - DMatrix::identity(n, n);
    if !inv.iter().all(|v| v.is_finite()) || residual.amax() > 1e-6 {
        return Err(KernelError::SingularMatrix);
    }
    Ok(KernelMatrix::new(inv, "adjacency-inverse-gram".into()))
}

/// High-pass filter kernel K = [H^T H + eps I]^{-1}.
pub fn highpass_kernel(h: &DMatrix<f64>, epsilon: f64) -> Result<KernelMatrix, KernelError> {
    if !(epsilon > 0.0) {
        return Err(KernelError::NonPositiveEpsilon(epsilon));
    }
    let n = h.ncols();
    if h.nrows() != n {
        return Err(KernelError::DimensionMismatch {
            expected: n,
            got: h.nrows(),
        });
    }
    let mut gram = symmetrize(h.transpose() * h);
    for i in 0..n {
        gram[(i, i)] += epsilon;
    }
    let chol = gram.cholesky().ok_or(KernelError::SingularMatrix)?;
    Ok(KernelMatrix::new(
        chol.inverse(),
        format!("highpass(eps={epsilon})"),
    ))
}

/// Closed-form Laplacian kernel of the unweighted N-ring: a circulant matrix
/// whose first column is the inverse DFT of 1 / r(2[1 - cos(2 pi n / N)]).
/// Matches `laplacian_kernel` on `Graph::circular(n)` without any
/// eigendecomposition.
pub fn circulant_kernel(
    n_vertices: usize,
    r: &SpectralFunction,
) -> Result<KernelMatrix, KernelError> {
    if n_vertices < 3 {
        return Err(KernelError::InvalidParameter(format!(
            "ring needs at least 3 vertices, got {n_vertices}"
        )));
    }
    let n = n_vertices;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut inv_spectrum = vec![0.0; n];
    for (k, slot) in inv_spectrum.iter_mut().enumerate() {
        let lambda = 2.0 * (1.0 - (two_pi * k as f64 / n as f64).cos());
        let value = r
            .eval_lambda(lambda)
            .ok_or(KernelError::IndexBasedSpectralFunction)?;
        if !value.is_finite() {
            return Err(KernelError::NonFiniteSpectralValue { index: k });
        }
        if value <= 0.0 {
            return Err(KernelError::ZeroSpectralValue(k));
        }
        *slot = 1.0 / value;
    }
    // Inverse DFT of a real even sequence: the sines cancel, so only the
    // cosine sum is accumulated.
    let mut taps = vec![0.0; n];
    for (m, tap) in taps.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, inv) in inv_spectrum.iter().enumerate() {
            acc += inv * (two_pi * (m * k) as f64 / n as f64).cos();
        }
        *tap = acc / n as f64;
    }
    // Exact evenness: average m and N - m.
    for m in 1..=(n / 2) {
        let avg = 0.5 * (taps[m] + taps[n - m]);
        taps[m] = avg;
        taps[n - m] = avg;
    }
    let matrix = DMatrix::from_fn(n, n, |i, j| taps[(i + n - j) % n]);
    Ok(KernelMatrix::new(
        matrix,
        format!("circulant({})", r.describe()),
    ))
}

/// Scale a kernel so its trace is exactly 1.
pub fn normalize_trace(k: &KernelMatrix) -> Result<KernelMatrix, KernelError> {
    let trace = k.trace();
    if !(trace > 0.0) {
        return Err(KernelError::ZeroTrace(trace));
    }
    Ok(KernelMatrix::new(
        k.matrix() / trace,
        format!("{}/tr", k.provenance()),
    ))
}

/// Inverse kernel K^{-1}, symmetric positive definite, for the primal
/// (function-domain) solver.
#[derive(Debug, Clone)]
pub struct InverseKernel {
    inv_matrix: DMatrix<f64>,
}

impl InverseKernel {
    pub fn n(&self) -> usize {
        self.inv_matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.inv_matrix
    }

    /// Wrap an explicit symmetric positive definite matrix as K^{-1}.
    pub fn from_matrix(inv_matrix: DMatrix<f64>) -> Result<Self, KernelError> {
        let scale = inv_matrix.amax().max(1.0);
        let dev = (&inv_matrix - inv_matrix.transpose()).amax();
        if dev > 1e-10 * scale {
            return Err(KernelError::NotSymmetric(dev));
        }
        if inv_matrix.clone().cholesky().is_none() {
            return Err(KernelError::NotPositiveDefinite(f64::NAN));
        }
        Ok(Self {
            inv_matrix: symmetrize(inv_matrix),
        })
    }
}

/// Piecewise inverse kernel K^{-1} = d L + U_tail (Delta - d Lambda_tail)
/// U_tail^T + d1 11^T + eps I, where U_tail holds the N - B principal
/// (largest-eigenvalue) eigenvectors. Its eigenvalue on eigenvector n is
/// d lambda_n + eps for 1 < n <= B and d_tail + eps above B, with the
/// all-ones direction shifted by d1 N.
pub fn inverse_kernel_piecewise(
    spec: &Spectrum,
    band_size: usize,
    d: f64,
    d_tail: &[f64],
    d1: f64,
    epsilon: f64,
) -> Result<InverseKernel, KernelError> {
    let n = spec.n();
    if band_size > n {
        return Err(KernelError::ConstraintViolation(format!(
            "band size {band_size} exceeds {n} vertices"
        )));
    }
    if d_tail.len() != n - band_size {
        return Err(KernelError::DimensionMismatch {
            expected: n - band_size,
            got: d_tail.len(),
        });
    }
    if !(d > 0.0) {
        return Err(KernelError::ConstraintViolation(format!(
            "d must be positive, got {d}"
        )));
    }
    if !(d1 > 0.0) {
        return Err(KernelError::ConstraintViolation(format!(
            "d1 must be positive, got {d1}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(KernelError::NonPositiveEpsilon(epsilon));
    }
    for (k, &dn) in d_tail.iter().enumerate() {
        let lambda = spec.eigenvalues()[band_size + k];
        if !(dn > -lambda) {
            return Err(KernelError::ConstraintViolation(format!(
                "d_tail[{k}] = {dn} must exceed -lambda = {}",
                -lambda
            )));
        }
    }

    let mut inv = spec.reconstruct() * d;
    if band_size < n {
        let tail: Vec<usize> = (band_size..n).collect();
        let u_tail = spec.eigenvectors().select_columns(tail.iter());
        let mut scaled = u_tail.clone();
        for (c, &dn) in d_tail.iter().enumerate() {
            let shift = dn - d * spec.eigenvalues()[band_size + c];
            scaled.column_mut(c).scale_mut(shift);
        }
        inv += scaled * u_tail.transpose();
    }
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] += d1;
        }
        inv[(i, i)] += epsilon;
    }
    let inv = symmetrize(inv);
    if inv.clone().cholesky().is_none() {
        return Err(KernelError::ConstraintViolation(
            "resulting inverse kernel is not positive definite".into(),
        ));
    }
    Ok(InverseKernel { inv_matrix: inv })
}

/// Polynomial inverse kernel K^{-1} = a_0 I + sum_p a_p L^p, built by
/// repeated multiplication. Positive definiteness is checked post-hoc via
/// the smallest eigenvalue.
pub fn inverse_kernel_polynomial(
    l: &DMatrix<f64>,
    coeffs: &[f64],
) -> Result<InverseKernel, KernelError> {
    if coeffs.is_empty() {
        return Err(KernelError::InvalidParameter(
            "polynomial needs at least the constant coefficient".into(),
        ));
    }
    let n = l.nrows();
    if l.ncols() != n {
        return Err(KernelError::DimensionMismatch {
            expected: n,
            got: l.ncols(),
        });
    }
    let mut inv = DMatrix::identity(n, n) * coeffs[0];
    let mut power = DMatrix::identity(n, n);
    for &a in &coeffs[1..] {
        power = &power * l;
        if a != 0.0 {
            inv += &power * a;
        }
    }
    let inv = symmetrize(inv);
    let min = inv
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v));
    if min <= 0.0 {
        return Err(KernelError::NotPositiveDefinite(min));
    }
    Ok(InverseKernel { inv_matrix: inv })
}
