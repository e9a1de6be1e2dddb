//! Convergence rate of the 1D estimator on a piecewise Hölder signal.
//!
//! `cargo run --release --example rate_1d -- [alpha] [sigma] [c]`

use potts::bench::{run_rate_experiment, GammaRule, RateExperiment, SolverConfig, TruthClass};
use potts::noise::NoiseSpec;
use potts::rng::master_seed;

fn main() -> potts::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let alpha = args.first().copied().unwrap_or(1.5);
    let sigma = args.get(1).copied().unwrap_or(0.1);
    let mut exp = RateExperiment::new(
        TruthClass::Sobolev1d { alpha, jumps: 2 },
        vec![256, 512, 1024, 2048, 4096],
        10,
        NoiseSpec::gaussian(sigma),
        SolverConfig::Potts1d { degree: 1 },
        master_seed(7),
    )?;
    if let Some(&c) = args.get(2) {
        exp.schedule.rule = GammaRule::CLog { c };
    }
    println!("threshold {:.4}  rule {:?}", exp.schedule.threshold(), exp.schedule.rule);
    let report = run_rate_experiment(&exp)?;
    println!("{:>6} {:>12} {:>12} {:>9} {:>10}", "n", "gamma", "error", "segments", "ms");
    for r in &report.rows {
        println!(
            "{:>6} {:>12.3e} {:>12.3e} {:>9.1} {:>10.1}",
            r.n, r.gamma, r.mean_error, r.mean_segments, r.mean_wall_ms
        );
    }
    println!(
        "slope {:.3} (predicted {:.3}), decreasing: {}",
        report.slope, report.theoretical_exponent, report.errors_decreasing
    );
    Ok(())
}
