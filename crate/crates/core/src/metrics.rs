//! Kolmogorov and Lévy distances between sampled CDF curves.
//!
//! Curves are compared on a shared grid; when the grids differ, both are
//! step-interpolated onto the union of their points inside the overlapping
//! span. Results carry a resolution of about one grid spacing.

use crate::error::{Error, Result};
use crate::inversion::SpectralCurve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub kolmogorov: f64,
    pub levy: f64,
    pub grid_points: usize,
}

fn cdf_of(curve: &SpectralCurve) -> Result<&[f64]> {
    curve
        .cdf
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("curve '{}' carries no CDF", curve.label)))
}

/// Evaluation abscissae for a pair of curves.
fn common_grid(a: &SpectralCurve, b: &SpectralCurve) -> Result<Vec<f64>> {
    cdf_of(a)?;
    cdf_of(b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("curve has no grid points"));
    }
    if a.grid == b.grid {
        return Ok(a.grid.clone());
    }
    let lo = a.grid[0].max(b.grid[0]);
    let hi = a.grid[a.len() - 1].min(b.grid[b.len() - 1]);
    if lo > hi {
        return Err(Error::InvalidGrid(format!(
            "curve grids are disjoint: [{}, {}] and [{}, {}]",
            a.grid[0],
            a.grid[a.len() - 1],
            b.grid[0],
            b.grid[b.len() - 1]
        )));
    }
    let mut grid: Vec<f64> = a
        .grid
        .iter()
        .chain(&b.grid)
        .copied()
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

fn cdf_at(curve: &SpectralCurve, x: f64) -> f64 {
    curve.cdf_at(x).expect("checked by common_grid")
}

/// `max_x |F_a(x) − F_b(x)|` over the comparison grid.
pub fn kolmogorov_distance(a: &SpectralCurve, b: &SpectralCurve) -> Result<f64> {
    let grid = common_grid(a, b)?;
    Ok(sup_gap(a, b, &grid))
}

/// Kolmogorov distance restricted to grid points in `[lo, hi]`; `0` when the
/// window holds no grid point.
pub fn kolmogorov_distance_within(
    a: &SpectralCurve,
    b: &SpectralCurve,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let grid: Vec<f64> = common_grid(a, b)?
        .into_iter()
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    Ok(sup_gap(a, b, &grid))
}

fn sup_gap(a: &SpectralCurve, b: &SpectralCurve, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&x| (cdf_at(a, x) - cdf_at(b, x)).abs())
        .fold(0.0, f64::max)
}

/// Rounding allowance in the band test, so `ε = sup|F_a − F_b|` stays feasible.
const BAND_SLACK: f64 = 1e-12;

/// Whether `F_a(x − ε) − ε ≤ F_b(x) ≤ F_a(x + ε) + ε` on every grid point.
fn within_levy_band(a: &SpectralCurve, b: &SpectralCurve, grid: &[f64], eps: f64) -> bool {
    grid.iter().all(|&x| {
        let fb = cdf_at(b, x);
        cdf_at(a, x - eps) - eps <= fb + BAND_SLACK && fb <= cdf_at(a, x + eps) + eps + BAND_SLACK
    })
}

/// Smallest `ε` (to a quarter grid spacing) placing each curve inside the
/// other's Lévy band. Never exceeds the Kolmogorov distance.
pub fn levy_distance(a: &SpectralCurve, b: &SpectralCurve) -> Result<f64> {
    let grid = common_grid(a, b)?;
    Ok(levy_on(a, b, &grid, sup_gap(a, b, &grid)))
}

fn levy_on(a: &SpectralCurve, b: &SpectralCurve, grid: &[f64], kolmogorov: f64) -> f64 {
    let feasible = |eps: f64| within_levy_band(a, b, grid, eps) && within_levy_band(b, a, grid, eps);
    if kolmogorov == 0.0 || feasible(0.0) {
        return 0.0;
    }
    let spacing = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let tolerance = if spacing.is_finite() { spacing / 4.0 } else { 1e-12 };
    let (mut lo, mut hi) = (0.0, kolmogorov);
    // ε = sup|F_a − F_b| always satisfies the band for monotone curves.
    debug_assert!(feasible(hi));
    for _ in 0..200 {
        if hi - lo <= tolerance {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn distance_report(a: &SpectralCurve, b: &SpectralCurve) -> Result<DistanceReport> {
    let grid = common_grid(a, b)?;
    let kolmogorov = sup_gap(a, b, &grid);
    let levy = levy_on(a, b, &grid, kolmogorov);
    assert!(levy <= kolmogorov, "Lévy {levy} exceeds Kolmogorov {kolmogorov}");
    Ok(DistanceReport {
        kolmogorov,
        levy,
        grid_points: grid.len(),
    })
}
