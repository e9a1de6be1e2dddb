//! Sub-Gaussian standard of three noise families and Monte Carlo checks of
//! the tail estimate `P(|<mu, xi>| >= c) <= 2 exp(-c^2 / (beta ||mu||^2))`.
//!
//! `cargo run --release --example noise_tail -- [trials]`

use potts::noise::{check_square_mgf_bound, estimate_tau, run_noise_check, sample_values, NoiseFamily, NoiseSpec};
use potts::rng::master_seed;

fn main() -> potts::Result<()> {
    let trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200_000);
    let seed = master_seed(3);
    for fam in [
        NoiseFamily::Gaussian { sigma: 0.5 },
        NoiseFamily::UniformBounded { a: 1.0 },
        NoiseFamily::Rademacher { scale: 2.0 },
    ] {
        let spec = NoiseSpec::new(fam);
        let rep = run_noise_check(&spec, trials, seed)?;
        let worst = rep
            .tail
            .iter()
            .map(|t| t.empirical / t.bound)
            .fold(0.0, f64::max);
        let t = 0.5 / rep.beta;
        let (mgf, bound) = check_square_mgf_bound(&spec.with_tau(rep.tau_hat), t, trials, seed)?;
        println!(
            "{:<10} tau {:.4} (estimated {:.4}), {} tail checks, {} violations, max empirical/bound {:.3}; E exp(t xi^2) = {:.4} <= {:.4}",
            fam.name(),
            rep.tau_exact,
            rep.tau_hat,
            rep.tail.len(),
            rep.violations,
            worst,
            mgf,
            bound
        );
    }
    // heavy tails are rejected
    let cauchy: Vec<f64> = sample_values(&NoiseSpec::gaussian(1.0), 40_000, seed)
        .chunks(2)
        .map(|p| p[0] / p[1])
        .collect();
    println!("Cauchy-like ratios: {:?}", estimate_tau(&cauchy).map_err(|e| e.to_string()));
    Ok(())
}
