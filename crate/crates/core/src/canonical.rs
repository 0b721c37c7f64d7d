//! Deterministic-equivalent Stieltjes transform of the scaled adjacency.
//!
//! The resolvent-like solution `C(z)` of the canonical system lies in the span
//! of `⊗_d Y_{d,i_d}` (`Y_0 = K_M`, `Y_1 = I`), which is diagonalized by the
//! eigenspaces of `B`. Its diagonal is the constant `α = α_{1…1}`, so the
//! variance correction is the scalar `σ²α` and the whole system collapses to
//!
//! ```text
//! α = (1/N) Σ_j m_j / (b_j − z − σ² α),   Im z · Im α > 0.
//! ```
//!
//! [`matrix_k1_oracle`] iterates the full matrix equation on small lattices
//! and is the independent check of that reduction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Branch, LatticeSpec};

/// Precomputed scalars of the reduced system for one lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalProblem {
    spec: LatticeSpec,
    gamma: f64,
    variance_sum: f64,
    branches: Vec<Branch>,
    weights: Vec<f64>,
    node_count: usize,
}

impl CanonicalProblem {
    pub fn new(spec: &LatticeSpec) -> Self {
        let branches = spec.branches();
        let n = spec.node_count();
        let weights = branches
            .iter()
            .map(|b| b.multiplicity as f64 / n as f64)
            .collect();
        Self {
            spec: spec.clone(),
            gamma: spec.expected_degree(),
            variance_sum: spec.variance_sum(),
            branches,
            weights,
            node_count: n,
        }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `σ² = (1/γ²) Σ_d p_d(1 − p_d)(M_d − 1)`.
    pub fn variance_sum(&self) -> f64 {
        self.variance_sum
    }

    /// `(b_j, m_j)` for every `j ∈ {0,1}^D`, unmerged, in bitmask order.
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Right-hand side `(1/N) Σ_j m_j / (b_j − z − σ²α)` of the fixed point.
    pub fn map(&self, z: Complex64, alpha: Complex64) -> Complex64 {
        let shift = z + self.variance_sum * alpha;
        self.branches
            .iter()
            .zip(&self.weights)
            .map(|(b, &w)| w / (b.value - shift))
            .sum()
    }

    /// Derivative of [`Self::map`] with respect to `alpha`.
    fn map_derivative(&self, z: Complex64, alpha: Complex64) -> Complex64 {
        let shift = z + self.variance_sum * alpha;
        let s: Complex64 = self
            .branches
            .iter()
            .zip(&self.weights)
            .map(|(b, &w)| {
                let r = 1.0 / (b.value - shift);
                w * r * r
            })
            .sum();
        s * self.variance_sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when `|α − G(α)|` falls to this value.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalSolution {
    pub z: Complex64,
    /// `α_{1…1}(z)`, the deterministic Stieltjes transform at `z`.
    pub alpha_principal: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

fn check_off_axis(z: Complex64) -> Result<f64> {
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::RealArgument(z));
    }
    Ok(z.im.signum())
}

pub fn solve_alpha(problem: &CanonicalProblem, z: Complex64) -> Result<CanonicalSolution> {
    let side = check_off_axis(z)?;
    solve_alpha_from(problem, z, Complex64::new(0.0, side), SolverOptions::default())
}

const MIN_DAMPING: f64 = 1e-3;

/// Damped fixed-point iteration from `start`, with a safeguarded Newton step
/// whenever the fixed point makes less than 10% progress per step. `start`
/// must satisfy `Im z · Im start > 0`.
pub fn solve_alpha_from(
    problem: &CanonicalProblem,
    z: Complex64,
    start: Complex64,
    options: SolverOptions,
) -> Result<CanonicalSolution> {
    let side = check_off_axis(z)?;
    let in_class = |a: Complex64| side * a.im > 0.0 && a.re.is_finite() && a.im.is_finite();
    if !in_class(start) {
        return Err(Error::InvalidArgument(format!(
            "starting point {start} is not in the Herglotz class for z = {z}"
        )));
    }

    let mut alpha = start;
    let mut image = problem.map(z, alpha);
    let mut residual = (image - alpha).norm();
    let mut damping = 1.0f64;

    for iteration in 0..options.max_iterations {
        if residual <= options.tolerance {
            return Ok(CanonicalSolution {
                z,
                alpha_principal: alpha,
                residual,
                iterations: iteration,
            });
        }

        // Any convex step toward G(α) is a holomorphic self-map of the half
        // plane with the same unique fixed point, so steps that raise the
        // Euclidean residual are still taken; they only shrink the damping.
        let mut next = alpha + damping * (image - alpha);
        if !in_class(next) {
            damping = (damping * 0.5).max(MIN_DAMPING);
            next = alpha;
        }
        let mut next_image = problem.map(z, next);
        let mut next_residual = (next_image - next).norm();
        if next_residual > residual || next_residual.is_nan() {
            damping = (damping * 0.5).max(MIN_DAMPING);
        } else if damping < 1.0 {
            damping = (damping * 2.0).min(1.0);
        }

        if next_residual > 0.9 * residual {
            let derivative = 1.0 - problem.map_derivative(z, next);
            if derivative.norm() > 0.0 {
                let newton = next - (next - next_image) / derivative;
                if in_class(newton) {
                    let newton_image = problem.map(z, newton);
                    let newton_residual = (newton_image - newton).norm();
                    if newton_residual < next_residual {
                        next = newton;
                        next_image = newton_image;
                        next_residual = newton_residual;
                    }
                }
            }
        }

        alpha = next;
        image = next_image;
        residual = next_residual;
    }

    if residual <= options.tolerance {
        return Ok(CanonicalSolution {
            z,
            alpha_principal: alpha,
            residual,
            iterations: options.max_iterations,
        });
    }
    Err(Error::NoConvergence {
        z,
        iterations: options.max_iterations,
        residual,
    })
}

/// `S_{F_N}(z) = α_{1…1}(z)`.
pub fn deterministic_stieltjes(problem: &CanonicalProblem, z: Complex64) -> Result<Complex64> {
    solve_alpha(problem, z).map(|s| s.alpha_principal)
}

/// Coefficients `α_i` of `C(z) = Σ_i α_i ⊗_d Y_{d,i_d}`, indexed by bitmask
/// (bit `d` set means `i_d = 1`, the identity factor).
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    pub coefficients: Vec<Complex64>,
}

impl AlphaVector {
    pub fn principal(&self) -> Complex64 {
        *self.coefficients.last().expect("at least one coefficient")
    }

    /// Dense `Σ_i α_i ⊗_d Y_{d,i_d}` (dimension 1 fastest-varying).
    pub fn to_matrix(&self, spec: &LatticeSpec) -> DMatrix<Complex64> {
        let n = spec.node_count();
        DMatrix::from_fn(n, n, |k, l| self.coefficients[entry_class(spec, k, l)])
    }
}

/// Basis matrix containing entry `(k, l)`: bit `d` is set iff the nodes share
/// digit `d`. The matrices `⊗ Y_{d,i_d}` are 0/1 with disjoint supports, so
/// every entry belongs to exactly one of them.
fn entry_class(spec: &LatticeSpec, k: usize, l: usize) -> usize {
    let (mut k, mut l) = (k, l);
    let mut mask = 0;
    for (d, &m) in spec.dims().iter().enumerate() {
        if k % m == l % m {
            mask |= 1 << d;
        }
        k /= m;
        l /= m;
    }
    mask
}

/// Solves `Σ_i α_i ∏_d λ_{d,i_d}(j_d) = 1/(b_j − z − σ²α_{1…1})` for all `j`.
///
/// The coefficient matrix is the Kronecker product of the per-dimension blocks
/// `[[M_d − 1, 1], [−1, 1]]` (rows `j_d`, columns `i_d`), so it is inverted
/// one dimension at a time.
pub fn recover_all_alphas(
    problem: &CanonicalProblem,
    solution: &CanonicalSolution,
) -> Result<AlphaVector> {
    let z = solution.z;
    let shift = z + problem.variance_sum() * solution.alpha_principal;
    let mut coefficients: Vec<Complex64> = problem
        .branches()
        .iter()
        .map(|b| 1.0 / (b.value - shift))
        .collect();

    for (d, &m) in problem.spec().dims().iter().enumerate() {
        let (a, b, c, e) = ((m - 1) as f64, 1.0, -1.0, 1.0);
        let det = a * e - b * c;
        if det.abs() < f64::EPSILON {
            return Err(Error::Singular(format!(
                "block for dimension {} (size {m}) has zero determinant",
                d + 1
            )));
        }
        let bit = 1usize << d;
        for lo in (0..coefficients.len()).filter(|k| k & bit == 0) {
            let hi = lo | bit;
            let (r0, r1) = (coefficients[lo], coefficients[hi]);
            coefficients[lo] = (e * r0 - b * r1) / det;
            coefficients[hi] = (a * r1 - c * r0) / det;
        }
    }
    Ok(AlphaVector { coefficients })
}

/// The 25 test points `x + iy`, `x ∈ {−1, −½, 0, ½, 1}`,
/// `y ∈ {0.05, 0.2, 0.5, 1, 2}`, used to sweep the oracle.
pub fn oracle_z_grid() -> Vec<Complex64> {
    let ys = [0.05, 0.2, 0.5, 1.0, 2.0];
    ys.iter()
        .flat_map(|&y| (0..5).map(move |k| Complex64::new(-1.0 + 0.5 * k as f64, y)))
        .collect()
}

/// Largest lattice accepted by [`matrix_k1_oracle`].
pub const ORACLE_LIMIT: usize = 600;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// `(1/N) tr C(z)`.
    pub stieltjes: Complex64,
    pub iterations: usize,
    /// `‖C − P(C)‖_F / ‖C‖_F` with `P` the projection onto the Kronecker
    /// solution form.
    pub form_residual: f64,
    /// Coefficients of `P(C)`.
    pub alphas: AlphaVector,
}

/// Iterates the full matrix canonical equation
/// `C ← (B − zI − diag_k(Σ_s C_ss E[H_ks²]))⁻¹` from `C = i·sign(Im z)·I`
/// until successive normalized traces differ by less than `tol`.
pub fn matrix_k1_oracle(spec: &LatticeSpec, z: Complex64, tol: f64) -> Result<OracleSolution> {
    let side = check_off_axis(z)?;
    let n = spec.node_count();
    if n > ORACLE_LIMIT {
        return Err(Error::SizeLimit {
            what: "the matrix oracle",
            order: n,
            limit: ORACLE_LIMIT,
        });
    }
    const MAX_ITERATIONS: usize = 100_000;

    let b = spec.expected_matrix()?.map(|x| Complex64::new(x, 0.0));
    let gamma = spec.expected_degree();
    let link_variance: Vec<f64> = spec
        .probs()
        .iter()
        .map(|&p| p * (1.0 - p) / (gamma * gamma))
        .collect();
    // Sparse variance profile: row k lists (s, E[H_ks²]) over its supergraph links.
    let mut profile: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for link in spec.links() {
        let v = link_variance[link.dim];
        profile[link.lo].push((link.hi, v));
        profile[link.hi].push((link.lo, v));
    }

    let mut diag = vec![Complex64::new(0.0, side); n];
    let mut trace = diag.iter().sum::<Complex64>() / n as f64;
    for iteration in 1..=MAX_ITERATIONS {
        let mut m = b.clone();
        for k in 0..n {
            let correction: Complex64 = profile[k].iter().map(|&(s, v)| diag[s] * v).sum();
            m[(k, k)] -= z + correction;
        }
        let c = m
            .try_inverse()
            .ok_or_else(|| Error::Singular(format!("oracle matrix singular at z = {z}")))?;
        diag = (0..n).map(|k| c[(k, k)]).collect();
        let next = diag.iter().sum::<Complex64>() / n as f64;
        let step = (next - trace).norm();
        trace = next;
        if step < tol {
            let (form_residual, alphas) = project_solution_form(spec, &c);
            let limit = 10.0 * tol;
            if form_residual > limit {
                return Err(Error::SolutionForm {
                    residual: form_residual,
                    limit,
                });
            }
            return Ok(OracleSolution {
                stieltjes: trace,
                iterations: iteration,
                form_residual,
                alphas,
            });
        }
    }
    Err(Error::NoConvergence {
        z,
        iterations: MAX_ITERATIONS,
        residual: f64::NAN,
    })
}

/// Orthogonal projection of `c` onto the span of the Kronecker basis. The
/// basis matrices have disjoint 0/1 supports, so each coefficient is the mean
/// of `c` over its support.
pub fn project_solution_form(spec: &LatticeSpec, c: &DMatrix<Complex64>) -> (f64, AlphaVector) {
    let n = spec.node_count();
    let classes = 1usize << spec.rank();
    let mut sums = vec![Complex64::new(0.0, 0.0); classes];
    let mut counts = vec![0usize; classes];
    for l in 0..n {
        for k in 0..n {
            let cls = entry_class(spec, k, l);
            sums[cls] += c[(k, l)];
            counts[cls] += 1;
        }
    }
    let coefficients: Vec<Complex64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &cnt)| s / cnt as f64)
        .collect();
    let mut off = 0.0;
    let mut total = 0.0;
    for l in 0..n {
        for k in 0..n {
            let v = c[(k, l)];
            off += (v - coefficients[entry_class(spec, k, l)]).norm_sqr();
            total += v.norm_sqr();
        }
    }
    let residual = if total > 0.0 { (off / total).sqrt() } else { 0.0 };
    (residual, AlphaVector { coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dims: &[usize], probs: &[f64]) -> LatticeSpec {
        LatticeSpec::new(dims.to_vec(), probs.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn problem_fig1a() {
        let p = CanonicalProblem::new(&spec(&[30, 50], &[0.7, 0.5]));
        assert!((p.variance_sum() - 0.0091378).abs() < 1e-7);
        let want = [
            (1.0, 1),
            (0.53125, 29),
            (0.44196428571428575, 49),
            (-0.026785714285714284, 1421),
        ];
        for (b, (v, m)) in p.branches().iter().zip(want) {
            assert!((b.value - v).abs() < 1e-12);
            assert_eq!(b.multiplicity, m);
        }
    }

    #[test]
    fn problem_k2_half() {
        let p = CanonicalProblem::new(&spec(&[2], &[0.5]));
        assert_eq!(p.gamma(), 0.5);
        assert!((p.variance_sum() - 1.0).abs() < 1e-15);
        assert_eq!(p.branches()[0].value, 1.0);
        assert_eq!(p.branches()[1].value, -1.0);
        assert_eq!(CanonicalProblem::new(&spec(&[3, 4], &[1.0, 1.0])).variance_sum(), 0.0);
    }

    #[test]
    fn branches_not_merged() {
        let p = CanonicalProblem::new(&spec(&[4, 4], &[0.5, 0.5]));
        assert_eq!(p.branches().len(), 4);
    }

    #[test]
    fn real_argument_rejected() {
        let p = CanonicalProblem::new(&spec(&[3], &[0.5]));
        assert!(matches!(solve_alpha(&p, c(0.3, 0.0)), Err(Error::RealArgument(_))));
        assert!(matrix_k1_oracle(p.spec(), c(0.3, 0.0), 1e-12).is_err());
    }

    #[test]
    fn deterministic_case_is_explicit() {
        let p = CanonicalProblem::new(&spec(&[4, 5], &[1.0, 1.0]));
        let z = c(0.1, 0.3);
        let sol = solve_alpha(&p, z).unwrap();
        let exact: Complex64 = p
            .branches()
            .iter()
            .map(|b| b.multiplicity as f64 / 20.0 / (b.value - z))
            .sum();
        assert_eq!(sol.residual, 0.0);
        assert!((sol.alpha_principal - exact).norm() < 1e-15);
    }

    #[test]
    fn k2_half_matches_oracle() {
        let s = spec(&[2], &[0.5]);
        let p = CanonicalProblem::new(&s);
        let z = c(0.1, 1.0);
        let a = solve_alpha(&p, z).unwrap().alpha_principal;
        let g = 0.5 / (1.0 - z - a) + 0.5 / (-1.0 - z - a);
        assert!((a - g).norm() < 1e-11);
        let o = matrix_k1_oracle(&s, z, 1e-13).unwrap();
        assert!((a - o.stieltjes).norm() < 1e-8);
    }

    #[test]
    fn lower_half_plane() {
        let p = CanonicalProblem::new(&spec(&[4, 5], &[0.7, 0.5]));
        let z = c(0.2, -0.7);
        let a = solve_alpha(&p, z).unwrap().alpha_principal;
        assert!(a.im < 0.0);
        let up = solve_alpha(&p, z.conj()).unwrap().alpha_principal;
        assert!((a - up.conj()).norm() < 1e-12);
    }

    #[test]
    fn bad_start_rejected() {
        let p = CanonicalProblem::new(&spec(&[4, 5], &[0.7, 0.5]));
        let r = solve_alpha_from(&p, c(0.0, 0.5), c(0.0, -1.0), SolverOptions::default());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let p = CanonicalProblem::new(&spec(&[4, 5], &[0.7, 0.5]));
        let opts = SolverOptions { tolerance: 1e-14, max_iterations: 1 };
        match solve_alpha_from(&p, c(0.0, 0.5), c(0.0, 1.0), opts) {
            Err(Error::NoConvergence { residual, iterations, .. }) => {
                assert_eq!(iterations, 1);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn two_by_two_recovery() {
        let s = spec(&[2], &[0.5]);
        let p = CanonicalProblem::new(&s);
        let sol = solve_alpha(&p, c(0.3, 0.4)).unwrap();
        let alphas = recover_all_alphas(&p, &sol).unwrap();
        assert!((alphas.principal() - sol.alpha_principal).norm() < 1e-10);
        // [[1,1],[-1,1]] · (α0, α1) = rhs
        let shift = sol.z + p.variance_sum() * sol.alpha_principal;
        let rhs0 = 1.0 / (1.0 - shift);
        let rhs1 = 1.0 / (-1.0 - shift);
        let (a0, a1) = (alphas.coefficients[0], alphas.coefficients[1]);
        assert!((a0 + a1 - rhs0).norm() < 1e-12);
        assert!((-a0 + a1 - rhs1).norm() < 1e-12);
    }

    #[test]
    fn deterministic_recovery_matches_explicit_inverse() {
        let s = spec(&[3, 3], &[1.0, 1.0]);
        let p = CanonicalProblem::new(&s);
        let z = c(0.25, 0.5);
        let sol = solve_alpha(&p, z).unwrap();
        let alphas = recover_all_alphas(&p, &sol).unwrap();
        let b = s.expected_matrix().unwrap().map(|x| Complex64::new(x, 0.0));
        let resolvent = (b - DMatrix::<Complex64>::identity(9, 9) * z).try_inverse().unwrap();
        let rebuilt = alphas.to_matrix(&s);
        for (x, y) in rebuilt.iter().zip(resolvent.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn oracle_deterministic_case_one_step() {
        let s = spec(&[3, 4], &[1.0, 1.0]);
        let z = c(-0.2, 0.3);
        let o = matrix_k1_oracle(&s, z, 1e-14).unwrap();
        let b = s.expected_matrix().unwrap().map(|x| Complex64::new(x, 0.0));
        let exact = (b - DMatrix::<Complex64>::identity(12, 12) * z)
            .try_inverse()
            .unwrap()
            .trace()
            / 12.0;
        assert!((o.stieltjes - exact).norm() < 1e-14);
        assert!(o.iterations <= 2);
    }

    #[test]
    fn oracle_size_limit() {
        let s = spec(&[25, 25], &[0.5, 0.5]);
        assert!(matches!(
            matrix_k1_oracle(&s, c(0.0, 1.0), 1e-12),
            Err(Error::SizeLimit { .. })
        ));
    }
}
