//! Empirical spectral distributions of sampled matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inversion::{check_grid, density_curve_with, SpectralCurve};
use crate::lattice::LatticeSpec;
use crate::par::Strategy;
use crate::percolation::{sample, trial_seed, PercolationSample};

/// Largest matrix order handed to the dense eigensolver.
pub const EIGEN_LIMIT: usize = 4000;

/// Absolute asymmetry tolerated by [`eigenvalues`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Ascending real eigenvalues of a symmetric matrix.
pub fn eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, expected square",
            n,
            matrix.ncols()
        )));
    }
    if n > EIGEN_LIMIT {
        return Err(Error::SizeLimit {
            what: "dense eigensolves",
            order: n,
            limit: EIGEN_LIMIT,
        });
    }
    for j in 0..n {
        for i in 0..j {
            let deviation = (matrix[(i, j)] - matrix[(j, i)]).abs();
            if deviation > SYMMETRY_TOLERANCE {
                return Err(Error::NotSymmetric { row: i, col: j, deviation });
            }
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| matrix[(i, j)]);
    let mut values = m.selfadjoint_eigenvalues(faer::Side::Lower);
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `max_i |A v_i − λ_i v_i|` over an independent eigendecomposition; a
/// debugging aid for the eigensolver path.
pub fn reconstruction_residual(matrix: &DMatrix<f64>) -> f64 {
    let eig = matrix.clone().symmetric_eigen();
    let av = matrix * &eig.eigenvectors;
    let vl = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues);
    (av - vl).amax()
}

/// Which matrix of a percolated graph to diagonalize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// `W = A/γ`.
    Scaled,
    /// `√γ·W`.
    RootScaled,
    /// `√γ·Δ⁻¹A`, diagonalized through the similar `Δ^{-1/2}AΔ^{-1/2}`.
    RootNormalized,
}

/// Eigenvalues of `Δ⁻¹A` computed via `Δ^{-1/2}AΔ^{-1/2}`; isolated nodes
/// contribute exact zeros.
pub fn row_normalized_eigenvalues(graph: &PercolationSample) -> Result<Vec<f64>> {
    eigenvalues(&graph.symmetric_normalized_adjacency()?)
}

pub fn sample_eigenvalues(graph: &PercolationSample, kind: MatrixKind) -> Result<Vec<f64>> {
    let gamma = graph.spec().expected_degree();
    match kind {
        MatrixKind::Scaled => eigenvalues(&graph.scaled_adjacency()?),
        MatrixKind::RootScaled => {
            Ok(eigenvalues(&graph.scaled_adjacency()?)?.into_iter().map(|x| x * gamma.sqrt()).collect())
        }
        MatrixKind::RootNormalized => Ok(row_normalized_eigenvalues(graph)?
            .into_iter()
            .map(|x| x * gamma.sqrt())
            .collect()),
    }
}

/// Sorted eigenvalues, possibly pooled over several samples of equal order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum {
    eigenvalues: Vec<f64>,
    source_count: usize,
}

impl EmpiricalSpectrum {
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Empty("spectrum has no eigenvalues"));
        }
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite eigenvalue".into()));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self {
            eigenvalues,
            source_count: 1,
        })
    }

    pub fn from_matrix(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(eigenvalues(matrix)?)
    }

    /// Merges spectra of equal order into one with `source_count` summed.
    pub fn pool(spectra: &[EmpiricalSpectrum]) -> Result<Self> {
        let first = spectra.first().ok_or(Error::Empty("no spectra to pool"))?;
        let order = first.order();
        if let Some(bad) = spectra.iter().find(|s| s.order() != order) {
            return Err(Error::InvalidArgument(format!(
                "cannot pool spectra of orders {order} and {}",
                bad.order()
            )));
        }
        let mut eigenvalues: Vec<f64> = spectra.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self {
            eigenvalues,
            source_count: spectra.iter().map(|s| s.source_count).sum(),
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn source_count(&self) -> usize {
        self.source_count
    }

    /// Matrix order `N` of each pooled sample.
    pub fn order(&self) -> usize {
        self.eigenvalues.len() / self.source_count
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Fraction of eigenvalues `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.eigenvalues.partition_point(|&v| v <= x) as f64 / self.eigenvalues.len() as f64
    }

    /// `(1/n) Σ_i 1/(λ_i − z)`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 || !z.im.is_finite() {
            return Err(Error::RealArgument(z));
        }
        let s: Complex64 = self.eigenvalues.iter().map(|&l| 1.0 / (l - z)).sum();
        Ok(s / self.eigenvalues.len() as f64)
    }

    /// Step CDF on a grid.
    pub fn cdf_curve(&self, grid: &[f64]) -> Result<SpectralCurve> {
        check_grid(grid)?;
        Ok(SpectralCurve {
            grid: grid.to_vec(),
            cdf: Some(grid.iter().map(|&x| self.cdf(x)).collect()),
            density: None,
            epsilon: 0.0,
            label: "empirical".into(),
        })
    }

    /// `(1/π) Im S(x + iε)` on the grid.
    pub fn smoothed_density(&self, grid: &[f64], epsilon: f64) -> Result<SpectralCurve> {
        self.smoothed_density_with(grid, epsilon, Strategy::default())
    }

    pub fn smoothed_density_with(
        &self,
        grid: &[f64],
        epsilon: f64,
        strategy: Strategy,
    ) -> Result<SpectralCurve> {
        let mut curve = density_curve_with(|z| self.stieltjes(z), grid, epsilon, strategy)?;
        curve.label = "empirical".into();
        Ok(curve)
    }
}

/// Pointwise mean of the step CDFs of `spectra` on `grid`.
pub fn average_esd(spectra: &[EmpiricalSpectrum], grid: &[f64]) -> Result<SpectralCurve> {
    let first = spectra.first().ok_or(Error::Empty("no spectra to average"))?;
    check_grid(grid)?;
    if spectra.iter().any(|s| s.order() != first.order()) {
        return Err(Error::InvalidArgument("spectra have different orders".into()));
    }
    let total: usize = spectra.iter().map(|s| s.source_count).sum();
    // Weight by source count so pooled inputs average like their members.
    let cdf = grid
        .iter()
        .map(|&x| {
            spectra
                .iter()
                .map(|s| s.cdf(x) * s.source_count as f64)
                .sum::<f64>()
                / total as f64
        })
        .collect();
    Ok(SpectralCurve {
        grid: grid.to_vec(),
        cdf: Some(cdf),
        density: None,
        epsilon: 0.0,
        label: "empirical".into(),
    })
}

fn check_trials(spec: &LatticeSpec, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if spec.node_count() > EIGEN_LIMIT {
        return Err(Error::SizeLimit {
            what: "dense eigensolves",
            order: spec.node_count(),
            limit: EIGEN_LIMIT,
        });
    }
    Ok(())
}

/// Spectra of `trials` independent samples; trial `t` uses
/// [`trial_seed`]`(seed, t)`.
pub fn monte_carlo_spectra(
    spec: &LatticeSpec,
    seed: u64,
    trials: usize,
    kind: MatrixKind,
) -> Result<Vec<EmpiricalSpectrum>> {
    monte_carlo_spectra_with(spec, seed, trials, kind, Strategy::default())
}

pub fn monte_carlo_spectra_with(
    spec: &LatticeSpec,
    seed: u64,
    trials: usize,
    kind: MatrixKind,
    strategy: Strategy,
) -> Result<Vec<EmpiricalSpectrum>> {
    check_trials(spec, trials)?;
    let trial_ids: Vec<u64> = (0..trials as u64).collect();
    strategy.try_map_slice(&trial_ids, |&t| {
        let graph = sample(spec, trial_seed(seed, t));
        EmpiricalSpectrum::new(sample_eigenvalues(&graph, kind)?)
    })
}

/// Several matrix kinds from the same sampled graphs.
pub fn monte_carlo_spectra_multi(
    spec: &LatticeSpec,
    seed: u64,
    trials: usize,
    kinds: &[MatrixKind],
    strategy: Strategy,
) -> Result<Vec<Vec<EmpiricalSpectrum>>> {
    check_trials(spec, trials)?;
    let trial_ids: Vec<u64> = (0..trials as u64).collect();
    let per_trial = strategy.try_map_slice(&trial_ids, |&t| {
        let graph = sample(spec, trial_seed(seed, t));
        kinds
            .iter()
            .map(|&k| EmpiricalSpectrum::new(sample_eigenvalues(&graph, k)?))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok((0..kinds.len())
        .map(|k| per_trial.iter().map(|row| row[k].clone()).collect())
        .collect())
}
