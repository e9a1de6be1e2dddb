//! Convergence rate of wedgelet/platelet estimation on a horizon image.
//!
//! `cargo run --release --example rate_2d -- [alpha] [sigma] [angle_budget] [trials]`

use potts::bench::{run_rate_experiment, RateExperiment, SolverConfig, TruthClass};
use potts::noise::NoiseSpec;
use potts::rng::master_seed;

fn main() -> potts::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let alpha = args.first().copied().unwrap_or(1.5);
    let sigma = args.get(1).copied().unwrap_or(0.1);
    let budget = args.get(2).map_or(16, |&b| b as usize);
    let trials = args.get(3).map_or(10, |&t| t as usize);
    let exp = RateExperiment::new(
        TruthClass::Horizon { alpha },
        vec![32, 64, 128, 256],
        trials,
        NoiseSpec::gaussian(sigma),
        SolverConfig::Wedgelet { degree: 1, angle_budget: budget },
        master_seed(11),
    )?;
    let report = run_rate_experiment(&exp)?;
    println!("{:>5} {:>12} {:>12} {:>9} {:>10}", "n", "gamma", "error", "segments", "ms");
    for r in &report.rows {
        println!(
            "{:>5} {:>12.3e} {:>12.3e} {:>9.1} {:>10.1}",
            r.n, r.gamma, r.mean_error, r.mean_segments, r.mean_wall_ms
        );
    }
    println!(
        "slope {:.3}, bracket [{:.3}, {:.3}], decreasing: {}",
        report.slope, report.exponent_bracket.0, report.exponent_bracket.1, report.errors_decreasing
    );
    Ok(())
}
