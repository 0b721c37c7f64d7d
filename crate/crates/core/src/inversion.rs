//! Density and distribution curves from a Stieltjes transform.
//!
//! The density is `(1/π) Im S(x + iε)` at fixed `ε > 0`; the CDF is its
//! trapezoid integral from the left grid edge, clipped to `[0, 1]`.

use num_complex::Complex64;

use crate::canonical::CanonicalProblem;
use crate::error::{Error, Result};
use crate::par::Strategy;

/// Right-edge CDF mass below which [`cdf_curve`] refuses the grid.
pub const MIN_EDGE_MASS: f64 = 0.97;

/// Curve values on an ascending real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCurve {
    pub grid: Vec<f64>,
    pub cdf: Option<Vec<f64>>,
    pub density: Option<Vec<f64>>,
    pub epsilon: f64,
    pub label: String,
}

impl SpectralCurve {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Step interpolation of the CDF: value at the largest grid point `≤ x`,
    /// `0` left of the grid. `None` when the curve carries no CDF.
    pub fn cdf_at(&self, x: f64) -> Option<f64> {
        let cdf = self.cdf.as_ref()?;
        let k = self.grid.partition_point(|&g| g <= x);
        Some(if k == 0 { 0.0 } else { cdf[k - 1] })
    }

    /// Smallest gap between neighbouring grid points.
    pub fn min_spacing(&self) -> f64 {
        self.grid
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// `points` equally spaced abscissae from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 points on a finite interval, got {points} on [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| if k + 1 == points { hi } else { lo + step * k as f64 })
        .collect())
}

/// Twice the mean grid spacing.
pub fn default_epsilon(grid: &[f64]) -> f64 {
    match grid {
        [first, .., last] => 2.0 * (last - first) / (grid.len() - 1) as f64,
        _ => f64::NAN,
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid("grid has non-finite points".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly ascending".into()));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    Ok(())
}

pub fn density_curve<F>(stieltjes: F, grid: &[f64], epsilon: f64) -> Result<SpectralCurve>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    density_curve_with(stieltjes, grid, epsilon, Strategy::default())
}

pub fn density_curve_with<F>(
    stieltjes: F,
    grid: &[f64],
    epsilon: f64,
    strategy: Strategy,
) -> Result<SpectralCurve>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    check_grid(grid)?;
    check_epsilon(epsilon)?;
    let density = strategy.try_map_slice(grid, |&x| {
        let s = stieltjes(Complex64::new(x, epsilon)).map_err(|e| Error::Evaluation {
            x,
            source: Box::new(e),
        })?;
        let f = s.im / std::f64::consts::PI;
        // Im S > 0 above the axis for any Herglotz function.
        debug_assert!(f >= 0.0, "negative density {f} at x = {x}; wrong branch upstream");
        Ok(f.max(0.0))
    })?;
    Ok(SpectralCurve {
        grid: grid.to_vec(),
        cdf: None,
        density: Some(density),
        epsilon,
        label: String::new(),
    })
}

/// Density and CDF together. Fails with [`Error::InsufficientMass`] when the
/// CDF at the right edge is below [`MIN_EDGE_MASS`].
pub fn cdf_curve<F>(stieltjes: F, grid: &[f64], epsilon: f64) -> Result<SpectralCurve>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    cdf_curve_with(stieltjes, grid, epsilon, Strategy::default())
}

pub fn cdf_curve_with<F>(
    stieltjes: F,
    grid: &[f64],
    epsilon: f64,
    strategy: Strategy,
) -> Result<SpectralCurve>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    let mut curve = density_curve_with(stieltjes, grid, epsilon, strategy)?;
    let cdf = integrate_density(&curve.grid, curve.density.as_deref().unwrap_or_default());
    let mass = *cdf.last().unwrap_or(&0.0);
    if mass < MIN_EDGE_MASS {
        return Err(Error::InsufficientMass {
            mass,
            min: MIN_EDGE_MASS,
        });
    }
    curve.cdf = Some(cdf);
    Ok(curve)
}

/// Running trapezoid integral from the first grid point, clipped to `[0, 1]`.
pub fn integrate_density(grid: &[f64], density: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        if k > 0 {
            acc += 0.5 * (density[k] + density[k - 1]) * (grid[k] - grid[k - 1]);
        }
        out.push(acc.clamp(0.0, 1.0));
    }
    out
}

/// Uniform grid over `[min b_j − w, max b_j + w]` with `w = margin + 4σ`.
pub fn auto_grid(problem: &CanonicalProblem, points: usize, margin: f64) -> Result<Vec<f64>> {
    if points < 16 {
        return Err(Error::InvalidGrid(format!("need at least 16 points, got {points}")));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidArgument(format!("margin must be nonnegative, got {margin}")));
    }
    let (lo, hi) = problem
        .branches()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
            (lo.min(b.value), hi.max(b.value))
        });
    let w = margin + 4.0 * problem.variance_sum().sqrt();
    uniform_grid(lo - w, hi + w, points)
}
