//! End-to-end comparisons of deterministic and Monte Carlo spectra on a
//! shared grid and smoothing width.

use crate::canonical::{deterministic_stieltjes, CanonicalProblem};
use crate::error::{Error, Result};
use crate::espectrum::{average_esd, monte_carlo_spectra_multi, EmpiricalSpectrum, MatrixKind};
use crate::inversion::{auto_grid, cdf_curve_with, default_epsilon, uniform_grid, SpectralCurve};
use crate::lattice::LatticeSpec;
use crate::metrics::{distance_report, kolmogorov_distance_within, DistanceReport};
use crate::par::Strategy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveOptions {
    pub grid_points: usize,
    pub margin: f64,
    /// Smoothing width; `None` means twice the grid spacing.
    pub epsilon: Option<f64>,
    pub strategy: Strategy,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            grid_points: 2000,
            margin: 0.1,
            epsilon: None,
            strategy: Strategy::default(),
        }
    }
}

impl CurveOptions {
    fn epsilon_for(&self, grid: &[f64]) -> Result<f64> {
        let eps = self.epsilon.unwrap_or_else(|| default_epsilon(grid));
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
        }
        Ok(eps)
    }
}

/// Deterministic density and CDF on `grid`.
pub fn deterministic_curve(
    problem: &CanonicalProblem,
    grid: &[f64],
    epsilon: f64,
    strategy: Strategy,
) -> Result<SpectralCurve> {
    let mut curve = cdf_curve_with(|z| deterministic_stieltjes(problem, z), grid, epsilon, strategy)?;
    curve.label = "deterministic".into();
    Ok(curve)
}

/// Averaged step CDF plus the Stieltjes-smoothed density of the pooled
/// eigenvalues.
pub fn empirical_curve(
    spectra: &[EmpiricalSpectrum],
    grid: &[f64],
    epsilon: f64,
    strategy: Strategy,
) -> Result<SpectralCurve> {
    let pooled = EmpiricalSpectrum::pool(spectra)?;
    let mut curve = pooled.smoothed_density_with(grid, epsilon, strategy)?;
    curve.cdf = average_esd(spectra, grid)?.cdf;
    curve.label = "empirical".into();
    Ok(curve)
}

/// Auto grid and smoothing width for a lattice.
pub fn deterministic_grid(spec: &LatticeSpec, options: &CurveOptions) -> Result<(Vec<f64>, f64)> {
    let problem = CanonicalProblem::new(spec);
    let grid = auto_grid(&problem, options.grid_points, options.margin)?;
    let eps = options.epsilon_for(&grid)?;
    Ok((grid, eps))
}

/// Both curves of one lattice on one grid, plus their distances.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub epsilon: f64,
    pub first: SpectralCurve,
    pub second: SpectralCurve,
    pub report: DistanceReport,
}

impl Comparison {
    pub fn grid(&self) -> &[f64] {
        &self.first.grid
    }
}

/// Deterministic (first) against averaged empirical scaled-adjacency (second)
/// curves over `trials` samples.
pub fn compare_scaled(
    spec: &LatticeSpec,
    seed: u64,
    trials: usize,
    options: &CurveOptions,
) -> Result<Comparison> {
    let problem = CanonicalProblem::new(spec);
    let (grid, eps) = deterministic_grid(spec, options)?;
    let deterministic = deterministic_curve(&problem, &grid, eps, options.strategy)?;
    let spectra = monte_carlo_spectra_multi(spec, seed, trials, &[MatrixKind::Scaled], options.strategy)?
        .pop()
        .expect("one kind requested");
    let empirical = empirical_curve(&spectra, &grid, eps, options.strategy)?;
    finish(deterministic, empirical, eps)
}

/// Empirical `√γ·Δ⁻¹A` (first) against empirical `√γ·W` (second), both from
/// the same sampled graphs. The grid spans the pooled eigenvalues of both
/// plus `margin`.
pub fn compare_normalized(
    spec: &LatticeSpec,
    seed: u64,
    trials: usize,
    options: &CurveOptions,
) -> Result<Comparison> {
    let mut kinds = monte_carlo_spectra_multi(
        spec,
        seed,
        trials,
        &[MatrixKind::RootNormalized, MatrixKind::RootScaled],
        options.strategy,
    )?;
    let scaled = kinds.pop().expect("two kinds");
    let normalized = kinds.pop().expect("two kinds");
    let pooled_n = EmpiricalSpectrum::pool(&normalized)?;
    let pooled_s = EmpiricalSpectrum::pool(&scaled)?;
    let lo = pooled_n.min().min(pooled_s.min()) - options.margin;
    let hi = pooled_n.max().max(pooled_s.max()) + options.margin;
    let grid = uniform_grid(lo, hi, options.grid_points)?;
    let eps = options.epsilon_for(&grid)?;
    let mut first = empirical_curve(&normalized, &grid, eps, options.strategy)?;
    first.label = "normalized".into();
    let mut second = empirical_curve(&scaled, &grid, eps, options.strategy)?;
    second.label = "scaled".into();
    finish(first, second, eps)
}

fn finish(first: SpectralCurve, second: SpectralCurve, epsilon: f64) -> Result<Comparison> {
    assert_eq!(first.grid, second.grid, "compared curves must share a grid");
    let report = distance_report(&first, &second)?;
    Ok(Comparison {
        epsilon,
        first,
        second,
        report,
    })
}

/// Window around one atom of the expected spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lobe {
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    /// Fraction of eigenvalues in the corresponding eigenspace of `B`.
    pub mass: f64,
    pub main: bool,
}

/// One window per distinct eigenvalue of `B`. An atom of mass `w` spreads
/// into a lobe of radius about `2σ√w`; windows add `pad` on both sides. The
/// main lobe belongs to the heaviest atom.
pub fn lobes(problem: &CanonicalProblem, pad: f64) -> Vec<Lobe> {
    let spectrum = problem.spec().expected_spectrum();
    let n = problem.node_count() as f64;
    let sigma = problem.variance_sum().sqrt();
    let heaviest = spectrum
        .entries
        .iter()
        .map(|e| e.multiplicity)
        .max()
        .unwrap_or(0);
    let mut main_taken = false;
    spectrum
        .entries
        .iter()
        .map(|e| {
            let mass = e.multiplicity as f64 / n;
            let radius = 2.0 * sigma * mass.sqrt() + pad;
            let main = !main_taken && e.multiplicity == heaviest;
            main_taken |= main;
            Lobe {
                center: e.value,
                lo: e.value - radius,
                hi: e.value + radius,
                mass,
                main,
            }
        })
        .collect()
}

/// Kolmogorov distance split by region: main-lobe window, and the largest
/// over the minor-lobe windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeDistances {
    pub main: f64,
    pub minor: f64,
}

pub fn lobe_distances(
    problem: &CanonicalProblem,
    a: &SpectralCurve,
    b: &SpectralCurve,
    pad: f64,
) -> Result<LobeDistances> {
    let mut out = LobeDistances { main: 0.0, minor: 0.0 };
    for lobe in lobes(problem, pad) {
        let d = kolmogorov_distance_within(a, b, lobe.lo, lobe.hi)?;
        if lobe.main {
            out.main = d;
        } else {
            out.minor = out.minor.max(d);
        }
    }
    Ok(out)
}
