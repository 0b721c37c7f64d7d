//! Workflows behind the `percspec` binary: deterministic curves (`solve`),
//! Monte Carlo curves (`simulate`), both with distances (`compare`), the
//! matrix-oracle sweep (`oracle`), condition values (`conditions`) and
//! edge-list export (`edges`).
//!
//! Exit codes: 0 success, 1 config error, 2 size limit, 3 solver failure,
//! 4 oracle failure.

mod config;

use std::fmt::{self, Write as _};

use percspec::canonical::{matrix_k1_oracle, oracle_z_grid, solve_alpha, CanonicalProblem};
use percspec::espectrum::{monte_carlo_spectra, EmpiricalSpectrum, MatrixKind};
use percspec::experiment::{
    compare_normalized, compare_scaled, deterministic_curve, deterministic_grid, empirical_curve,
    CurveOptions,
};
use percspec::inversion::{default_epsilon, uniform_grid, SpectralCurve};
use percspec::{girko_conditions, sample, Complex64, Error};

pub use config::{EpsilonArg, RunArgs, RunConfig};

/// Agreement required between the scalar solver and the matrix oracle.
pub const ORACLE_AGREEMENT: f64 = 1e-8;
/// Stopping tolerance handed to the matrix oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn io(err: std::io::Error) -> Self {
        Self { code: 1, message: format!("i/o error: {err}") }
    }

    fn oracle(err: Error) -> Self {
        match err {
            Error::SizeLimit { .. } => err.into(),
            other => Self { code: 4, message: other.to_string() },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::SizeLimit { .. } => 2,
            Error::NoConvergence { .. }
            | Error::Evaluation { .. }
            | Error::InsufficientMass { .. }
            | Error::Singular(_) => 3,
            Error::SolutionForm { .. } => 4,
            _ => 1,
        };
        Self { code, message: err.to_string() }
    }
}

/// What a command produced: optional CSV text and report lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutput {
    pub csv: Option<String>,
    pub report: Vec<String>,
    /// Nonzero when the command ran but its check failed.
    pub exit_code: u8,
}

fn curve_options(cfg: &RunConfig) -> CurveOptions {
    CurveOptions {
        grid_points: cfg.grid_points,
        margin: cfg.margin,
        epsilon: cfg.epsilon,
        ..Default::default()
    }
}

/// CSV with a header row; values use the shortest exact decimal form.
pub fn csv_table(columns: &[(&str, &[f64])]) -> String {
    let mut out = String::new();
    let header: Vec<&str> = columns.iter().map(|c| c.0).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let rows = columns.first().map_or(0, |c| c.1.len());
    for r in 0..rows {
        for (k, (_, values)) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{}", values[r]).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

fn density(curve: &SpectralCurve) -> &[f64] {
    curve.density.as_deref().expect("curve has a density")
}

fn cdf(curve: &SpectralCurve) -> &[f64] {
    curve.cdf.as_deref().expect("curve has a CDF")
}

/// Deterministic density and CDF over the auto grid: `x,f_det,F_det`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = cfg.spec()?;
    let opts = curve_options(cfg);
    let (grid, eps) = deterministic_grid(&spec, &opts)?;
    let problem = CanonicalProblem::new(&spec);
    let det = deterministic_curve(&problem, &grid, eps, opts.strategy)?;
    Ok(CommandOutput {
        csv: Some(csv_table(&[("x", &det.grid), ("f_det", density(&det)), ("F_det", cdf(&det))])),
        report: vec![format!("epsilon = {eps}")],
        exit_code: 0,
    })
}

/// Pooled Monte Carlo curves: `x,f_emp,F_emp`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = cfg.spec()?;
    let opts = curve_options(cfg);
    let kind = if cfg.normalized { MatrixKind::RootNormalized } else { MatrixKind::Scaled };
    let spectra = monte_carlo_spectra(&spec, cfg.seed, cfg.trials, kind)?;
    let grid = if cfg.normalized {
        let pooled = EmpiricalSpectrum::pool(&spectra)?;
        uniform_grid(pooled.min() - cfg.margin, pooled.max() + cfg.margin, cfg.grid_points)?
    } else {
        deterministic_grid(&spec, &opts)?.0
    };
    let eps = cfg.epsilon.unwrap_or_else(|| default_epsilon(&grid));
    let emp = empirical_curve(&spectra, &grid, eps, opts.strategy)?;
    Ok(CommandOutput {
        csv: Some(csv_table(&[("x", &emp.grid), ("f_emp", density(&emp)), ("F_emp", cdf(&emp))])),
        report: vec![format!("epsilon = {eps}, trials = {}", cfg.trials)],
        exit_code: 0,
    })
}

/// Both pipelines on one grid. Scaled mode writes `x,f_det,F_det,f_emp,F_emp`;
/// normalized mode compares empirical `√γ·Δ⁻¹A` against `√γ·W` and writes
/// `x,f_norm,F_norm,f_scaled,F_scaled`.
pub fn cmd_compare(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = cfg.spec()?;
    let opts = curve_options(cfg);
    let (cmp, names) = if cfg.normalized {
        (
            compare_normalized(&spec, cfg.seed, cfg.trials, &opts)?,
            ["f_norm", "F_norm", "f_scaled", "F_scaled"],
        )
    } else {
        (
            compare_scaled(&spec, cfg.seed, cfg.trials, &opts)?,
            ["f_det", "F_det", "f_emp", "F_emp"],
        )
    };
    let csv = csv_table(&[
        ("x", cmp.grid()),
        (names[0], density(&cmp.first)),
        (names[1], cdf(&cmp.first)),
        (names[2], density(&cmp.second)),
        (names[3], cdf(&cmp.second)),
    ]);
    Ok(CommandOutput {
        csv: Some(csv),
        report: vec![format!(
            "kolmogorov = {}, levy = {}, grid_points = {}, epsilon = {}",
            cmp.report.kolmogorov, cmp.report.levy, cmp.report.grid_points, cmp.epsilon
        )],
        exit_code: 0,
    })
}

/// `|solve_alpha − matrix oracle|` per `z`; exit code 4 unless every
/// difference is within [`ORACLE_AGREEMENT`].
pub fn cmd_oracle(cfg: &RunConfig, z_list: &[Complex64]) -> Result<CommandOutput, CliError> {
    let spec = cfg.spec()?;
    let problem = CanonicalProblem::new(&spec);
    let zs = if z_list.is_empty() { oracle_z_grid() } else { z_list.to_vec() };
    let mut report = Vec::with_capacity(zs.len() + 1);
    let mut worst = 0.0f64;
    for z in zs {
        let scalar = solve_alpha(&problem, z)?.alpha_principal;
        let oracle = matrix_k1_oracle(&spec, z, ORACLE_TOLERANCE).map_err(CliError::oracle)?;
        let diff = (scalar - oracle.stieltjes).norm();
        worst = worst.max(diff);
        report.push(format!(
            "z = {} | solve = {} | oracle = {} | diff = {:e} | form_residual = {:e}",
            fmt_complex(z),
            fmt_complex(scalar),
            fmt_complex(oracle.stieltjes),
            diff,
            oracle.form_residual
        ));
    }
    let pass = worst <= ORACLE_AGREEMENT;
    report.push(format!(
        "max diff = {worst:e} ({} {ORACLE_AGREEMENT:e})",
        if pass { "within" } else { "EXCEEDS" }
    ));
    Ok(CommandOutput { csv: None, report, exit_code: if pass { 0 } else { 4 } })
}

pub fn cmd_conditions(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let r = girko_conditions(&cfg.spec()?);
    Ok(CommandOutput {
        csv: None,
        report: vec![
            format!("mean_row_sum = {}", r.mean_row_sum),
            format!("variance_row_sum = {}", r.variance_row_sum),
            format!("max_entry_bound = {}", r.max_entry_bound),
            format!("min_scaled_variance = {}", r.min_scaled_variance),
        ],
        exit_code: 0,
    })
}

/// Edge list of the graph sampled with `seed` itself.
pub fn cmd_edges(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let graph = sample(&cfg.spec()?, cfg.seed);
    let mut buf = Vec::new();
    graph.write_edge_list(&mut buf).map_err(CliError::io)?;
    Ok(CommandOutput {
        csv: Some(String::from_utf8(buf).expect("edge list is ASCII")),
        report: vec![format!("edges = {}", graph.edge_count())],
        exit_code: 0,
    })
}

pub fn fmt_complex(z: Complex64) -> String {
    if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `a+bi`, `a-bi`, `bi` or `a`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number `{s}`");
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dims: &[usize], probs: &[f64]) -> RunConfig {
        RunConfig { dims: dims.to_vec(), probs: probs.to_vec(), ..Default::default() }
    }

    #[test]
    fn complex_parsing() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("0.2+0.7i").unwrap(), c(0.2, 0.7));
        assert_eq!(parse_complex("-1-0.05i").unwrap(), c(-1.0, -0.05));
        assert_eq!(parse_complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+1e-2i").unwrap(), c(1e-3, 1e-2));
        assert_eq!(parse_complex("0.5").unwrap(), c(0.5, 0.0));
        assert!(parse_complex("abc").is_err());
        assert_eq!(parse_complex(&fmt_complex(c(0.25, -3.0))).unwrap(), c(0.25, -3.0));
    }

    #[test]
    fn csv_layout() {
        let t = csv_table(&[("x", &[0.5, 1.0]), ("F_det", &[0.1, 1.0 / 3.0])]);
        assert_eq!(t, "x,F_det\n0.5,0.1\n1,0.3333333333333333\n");
    }

    #[test]
    fn conditions_report() {
        let out = cmd_conditions(&cfg(&[30, 50], &[0.7, 0.5])).unwrap();
        assert_eq!(out.report[0], "mean_row_sum = 1");
        assert!(out.report[1].starts_with("variance_row_sum = 0.00913"));
        let out = cmd_conditions(&cfg(&[4, 5], &[1.0, 1.0])).unwrap();
        assert_eq!(out.report[1], "variance_row_sum = 0");
    }

    #[test]
    fn oracle_examples() {
        let out = cmd_oracle(&cfg(&[4, 5], &[0.7, 0.5]), &[Complex64::new(0.2, 0.7)]).unwrap();
        assert_eq!(out.exit_code, 0);
        let out = cmd_oracle(&cfg(&[4, 5], &[1.0, 1.0]), &[]).unwrap();
        assert_eq!(out.exit_code, 0);
        assert_eq!(out.report.len(), 26);
        let err = cmd_oracle(&cfg(&[30, 50], &[0.7, 0.5]), &[]).unwrap_err();
        assert_eq!(err.code, 2);
    }

    #[test]
    fn simulate_four_cycle() {
        let mut c = cfg(&[2, 2], &[1.0, 1.0]);
        c.trials = 1;
        let out = cmd_simulate(&c).unwrap();
        let csv = out.csv.unwrap();
        let rows: Vec<Vec<f64>> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        let f_at = |x: f64| rows.iter().rev().find(|r| r[0] <= x).map_or(0.0, |r| r[2]);
        assert_eq!(f_at(-1.01), 0.0);
        assert_eq!(f_at(-0.5), 0.25);
        assert_eq!(f_at(0.5), 0.75);
        assert_eq!(f_at(1.05), 1.0);
    }

    #[test]
    fn simulate_size_limit() {
        let mut c = cfg(&[70, 70], &[0.5, 0.5]);
        c.trials = 1;
        assert_eq!(cmd_simulate(&c).unwrap_err().code, 2);
    }

    #[test]
    fn error_codes() {
        let e: CliError = Error::NoConvergence {
            z: Complex64::new(0.1, 0.2),
            iterations: 3,
            residual: 1.0,
        }
        .into();
        assert_eq!(e.code, 3);
        assert!(e.message.contains("0.1"));
        let e: CliError = Error::InvalidSpec("x".into()).into();
        assert_eq!(e.code, 1);
    }
}
