//! Deterministic against Monte Carlo spectrum for one lattice.
//!
//! ```text
//! cargo run --release --example figure1 -- 30,50 0.7,0.5 50
//! ```

use percspec::canonical::CanonicalProblem;
use percspec::experiment::{compare_scaled, lobe_distances, CurveOptions};
use percspec::LatticeSpec;

fn list<T: std::str::FromStr>(arg: Option<String>, default: &str) -> Vec<T> {
    arg.as_deref()
        .unwrap_or(default)
        .split(',')
        .map(|s| s.parse().ok().expect("comma-separated numbers"))
        .collect()
}

fn main() -> Result<(), percspec::Error> {
    let mut args = std::env::args().skip(1);
    let dims = list(args.next(), "30,50");
    let probs = list(args.next(), "0.7,0.5");
    let trials = args.next().map_or(50, |t| t.parse().expect("trial count"));

    let spec = LatticeSpec::new(dims, probs)?;
    let cmp = compare_scaled(&spec, 42, trials, &CurveOptions::default())?;
    let lobes = lobe_distances(&CanonicalProblem::new(&spec), &cmp.first, &cmp.second, 5.0 * cmp.epsilon)?;
    println!("dims {:?}, probs {:?}, {trials} trials", spec.dims(), spec.probs());
    println!("  kolmogorov {:.4}  levy {:.4}", cmp.report.kolmogorov, cmp.report.levy);
    println!("  main lobe {:.4}  minor lobes {:.4}", lobes.main, lobes.minor);
    Ok(())
}
