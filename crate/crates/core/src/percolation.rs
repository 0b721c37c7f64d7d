//! Bernoulli link percolation of a lattice supergraph.

use std::io::{self, Write};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Link, DENSE_LIMIT};

/// One percolated graph. Edges are the retained supergraph links in lattice
/// order (ascending lower node, then upper node), 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct PercolationSample {
    spec: LatticeSpec,
    seed: u64,
    edges: Vec<Link>,
}

/// Draws a percolated lattice. The trial for link `(lo, hi)` reads the ChaCha8
/// stream `lo` of `seed` at the position of `hi` among the upper neighbours
/// of `lo`, so the outcome depends only on `(spec, seed, link)`.
pub fn sample(spec: &LatticeSpec, seed: u64) -> PercolationSample {
    let probs = spec.probs();
    let mut edges = Vec::new();
    for node in 0..spec.node_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(node as u64);
        for link in spec.links_from(node) {
            let u: f64 = rng.gen();
            if u < probs[link.dim] {
                edges.push(link);
            }
        }
    }
    PercolationSample {
        spec: spec.clone(),
        seed,
        edges,
    }
}

/// Seed of Monte Carlo trial `trial` under the master seed (SplitMix64 finalizer).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::SizeLimit {
            what: "dense sample matrices",
            order: n,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

impl PercolationSample {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edges(&self) -> &[Link] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.spec.node_count()];
        for e in &self.edges {
            deg[e.lo] += 1;
            deg[e.hi] += 1;
        }
        deg
    }

    /// Retained links per lattice dimension.
    pub fn edges_per_dimension(&self) -> Vec<usize> {
        let mut counts = vec![0; self.spec.rank()];
        for e in &self.edges {
            counts[e.dim] += 1;
        }
        counts
    }

    pub fn adjacency(&self) -> Result<DMatrix<f64>> {
        let n = self.spec.node_count();
        check_dense(n)?;
        let mut a = DMatrix::zeros(n, n);
        for e in &self.edges {
            a[(e.lo, e.hi)] = 1.0;
            a[(e.hi, e.lo)] = 1.0;
        }
        Ok(a)
    }

    /// `W = A / γ`.
    pub fn scaled_adjacency(&self) -> Result<DMatrix<f64>> {
        let gamma = self.spec.expected_degree();
        Ok(self.adjacency()? / gamma)
    }

    /// `Δ⁻¹A`. Rows of isolated nodes are zero.
    pub fn row_normalized_adjacency(&self) -> Result<DMatrix<f64>> {
        let mut a = self.adjacency()?;
        for (i, &d) in self.degrees().iter().enumerate() {
            if d > 0 {
                a.row_mut(i).scale_mut(1.0 / d as f64);
            }
        }
        Ok(a)
    }

    /// `Δ^{-1/2} A Δ^{-1/2}`, similar to `Δ⁻¹A` on non-isolated nodes; isolated
    /// rows and columns are zero.
    pub fn symmetric_normalized_adjacency(&self) -> Result<DMatrix<f64>> {
        let n = self.spec.node_count();
        check_dense(n)?;
        let inv_sqrt: Vec<f64> = self
            .degrees()
            .iter()
            .map(|&d| if d > 0 { 1.0 / (d as f64).sqrt() } else { 0.0 })
            .collect();
        let mut a = DMatrix::zeros(n, n);
        for e in &self.edges {
            let v = inv_sqrt[e.lo] * inv_sqrt[e.hi];
            a[(e.lo, e.hi)] = v;
            a[(e.hi, e.lo)] = v;
        }
        Ok(a)
    }

    /// Plain-text edge list: one `i j` pair per line, 1-based, `i < j`,
    /// sorted lexicographically.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {}", e.lo + 1, e.hi + 1)?;
        }
        out.flush()
    }
}

/// Quantities behind the applicability conditions of the canonical-equation
/// limit theorem, evaluated for the scaled adjacency `W = A/γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GirkoConditionReport {
    /// `max_i Σ_j |B_ij|`.
    pub mean_row_sum: f64,
    /// `max_i Σ_j E[H_ij²]`.
    pub variance_row_sum: f64,
    /// Uniform bound on `|H_ij|`.
    pub max_entry_bound: f64,
    /// `min N·E[H_ij²]` over supergraph link positions.
    pub min_scaled_variance: f64,
}

pub fn girko_conditions(spec: &LatticeSpec) -> GirkoConditionReport {
    let gamma = spec.expected_degree();
    // B has nonnegative entries p_d/γ at link positions, so every row sums to
    // the same expression that defines γ.
    let mean_row_sum = spec.expected_degree() / gamma;
    let min_var = spec
        .probs()
        .iter()
        .map(|&p| p * (1.0 - p))
        .fold(f64::INFINITY, f64::min);
    GirkoConditionReport {
        mean_row_sum,
        variance_row_sum: spec.variance_sum(),
        max_entry_bound: 1.0 / gamma,
        min_scaled_variance: spec.node_count() as f64 * min_var / (gamma * gamma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dims: &[usize], probs: &[f64]) -> LatticeSpec {
        LatticeSpec::new(dims.to_vec(), probs.to_vec()).unwrap()
    }

    #[test]
    fn full_probability_keeps_everything() {
        let s = spec(&[3, 4, 2], &[1.0, 1.0, 1.0]);
        let g = sample(&s, 9);
        assert_eq!(g.edges(), s.links().collect::<Vec<_>>().as_slice());
        assert_eq!(g.adjacency().unwrap(), s.lattice_adjacency().unwrap());
    }

    #[test]
    fn vanishing_probability_keeps_nothing() {
        let s = spec(&[10, 10], &[1e-12, 1e-12]);
        let g = sample(&s, 3);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.scaled_adjacency().unwrap(), DMatrix::zeros(100, 100));
        let r = g.row_normalized_adjacency().unwrap();
        assert_eq!(r, DMatrix::zeros(100, 100));
    }

    #[test]
    fn same_seed_same_sample() {
        let s = spec(&[6, 7], &[0.4, 0.6]);
        assert_eq!(sample(&s, 11), sample(&s, 11));
        assert_ne!(sample(&s, 11).edges(), sample(&s, 12).edges());
    }

    #[test]
    fn k2_matrices() {
        let g = sample(&spec(&[2], &[1.0]), 0);
        let k2 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(g.scaled_adjacency().unwrap(), k2);
        assert_eq!(g.row_normalized_adjacency().unwrap(), k2);
    }

    #[test]
    fn row_normalization_and_scaling() {
        let s = spec(&[5, 6], &[0.3, 0.2]);
        let g = sample(&s, 5);
        let deg = g.degrees();
        let r = g.row_normalized_adjacency().unwrap();
        let w = g.scaled_adjacency().unwrap();
        let gamma = s.expected_degree();
        let max_deg = *deg.iter().max().unwrap() as f64;
        for (i, &d) in deg.iter().enumerate() {
            let rs = r.row(i).sum();
            if d == 0 {
                assert_eq!(rs, 0.0);
            } else {
                assert!((rs - 1.0).abs() < 1e-12);
            }
            assert!(w.row(i).sum() <= max_deg / gamma + 1e-12);
        }
        let sym = g.symmetric_normalized_adjacency().unwrap();
        assert_eq!(sym, sym.transpose());
    }

    #[test]
    fn edge_list_format() {
        let g = sample(&spec(&[2, 2], &[1.0, 1.0]), 0);
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1 2\n1 3\n2 4\n3 4\n");
    }

    #[test]
    fn conditions_fig1a() {
        let r = girko_conditions(&spec(&[30, 50], &[0.7, 0.5]));
        assert_eq!(r.mean_row_sum, 1.0);
        let want = (29.0 * 0.21 + 49.0 * 0.25) / (44.8 * 44.8);
        assert!((r.variance_row_sum - want).abs() < 1e-15);
        assert!((r.variance_row_sum - 0.0091378).abs() < 1e-7);
        assert!((r.max_entry_bound - 1.0 / 44.8).abs() < 1e-15);
        assert!((r.min_scaled_variance - 1500.0 * 0.21 / (44.8 * 44.8)).abs() < 1e-12);
    }

    #[test]
    fn conditions_without_randomness() {
        let r = girko_conditions(&spec(&[4, 5], &[1.0, 1.0]));
        assert_eq!(r.variance_row_sum, 0.0);
        assert_eq!(r.min_scaled_variance, 0.0);
        let r = girko_conditions(&spec(&[10, 10, 20], &[0.8, 0.7, 0.6]));
        assert!((r.max_entry_bound - 1.0 / 24.9).abs() < 1e-15);
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|t| trial_seed(42, t)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
