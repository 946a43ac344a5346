//! Kernel-based reconstruction of graph signals.
//!
//! Recovers a real-valued signal on the vertices of an undirected weighted
//! graph from noisy samples on a vertex subset, using reproducing-kernel
//! methods: Laplacian spectral kernels, kernel ridge regression, bandlimited
//! least squares, LMMSE with covariance kernels, graph-filter smoothers, and
//! two multi-kernel learners (group-lasso RKHS superposition solved by ADMM,
//! and kernel superposition solved by an interpolated iterative algorithm).
//! A seeded Monte Carlo harness drives the synthetic experiments from the
//! command line and writes CSV reports.

pub mod estimators;
pub mod filters;
pub mod graph;
pub mod kernels;
pub mod mkl;
pub mod spectral;
pub mod synth;

pub mod experiments;

pub use estimators::{Estimate, SampleSet};
pub use graph::{Graph, LaplacianKind};
pub use kernels::{KernelMatrix, SpectralFunction};
pub use spectral::{eigendecompose, Spectrum};
