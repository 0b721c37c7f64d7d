//! Deterministic-equivalent spectral distributions for random graphs obtained
//! by non-uniform Bernoulli link percolation of D-dimensional lattices, with
//! Monte Carlo empirical spectra to check them against.
//!
//! The pieces, bottom up:
//!
//! - [`lattice`]: supergraph indexing, adjacency, and the exact spectrum of
//!   the expected scaled adjacency `B`.
//! - [`percolation`]: reproducible sampling of percolated graphs and their
//!   scaled / row-normalized adjacency matrices.
//! - [`espectrum`]: eigenvalues, empirical CDFs and Stieltjes transforms.
//! - [`canonical`]: the scalar fixed point for `α_{1…1}(z)` and a full
//!   matrix iteration used as an oracle.
//! - [`inversion`]: density and CDF curves by Stieltjes inversion.
//! - [`metrics`]: Kolmogorov and Lévy distances.
//! - [`experiment`]: end-to-end deterministic vs. empirical comparisons.
//!
//! The `parallel` feature (on by default) runs Monte Carlo trials and grid
//! sweeps on rayon; outputs are identical with or without it.

pub mod canonical;
pub mod error;
pub mod espectrum;
pub mod experiment;
pub mod inversion;
pub mod lattice;
pub mod metrics;
pub mod par;
pub mod percolation;

pub use canonical::{
    deterministic_stieltjes, matrix_k1_oracle, recover_all_alphas, solve_alpha, AlphaVector,
    CanonicalProblem, CanonicalSolution,
};
pub use error::{Error, Result};
pub use espectrum::{average_esd, EmpiricalSpectrum, MatrixKind};
pub use inversion::{auto_grid, cdf_curve, density_curve, SpectralCurve};
pub use lattice::{ExpectedSpectrum, LatticeSpec, MixedRadixIndex};
pub use metrics::{kolmogorov_distance, levy_distance, DistanceReport};
pub use par::Strategy;
pub use percolation::{girko_conditions, sample, GirkoConditionReport, PercolationSample};
pub use num_complex::Complex64;
