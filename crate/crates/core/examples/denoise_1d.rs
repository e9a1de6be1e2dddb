//! Denoise a noisy piecewise smooth signal with the exact 1D Potts DP and
//! compare piecewise constant and piecewise affine fits.
//!
//! `cargo run --release --example denoise_1d`

use potts::bench::{run_estimation, GammaSchedule, SolverConfig, TruthClass};
use potts::grid::discretization_error;
use potts::noise::NoiseSpec;
use potts::rng::master_seed;

fn main() -> potts::Result<()> {
    let seed = master_seed(21);
    let n = 1024;
    let truth = TruthClass::Sobolev1d { alpha: 1.5, jumps: 3 }.build(seed)?;
    let noise = NoiseSpec::gaussian(0.1);
    println!("n = {n}, discretization floor ||f - iota delta f||^2 = {:.2e}", discretization_error(truth.as_ref(), n, 8)?);
    for degree in [0, 1, 2] {
        let solver = SolverConfig::Potts1d { degree };
        let schedule = GammaSchedule::default_for(&solver, &noise)?;
        let gamma = schedule.gamma(n, potts::count_fragments_1d(n as u64), n)?;
        let run = run_estimation(truth.as_ref(), n, &noise, gamma, &solver, seed, 8)?;
        let noisy = potts::grid::l2_error_vs_truth(truth.as_ref(), &run.data, 8)?;
        println!(
            "degree {degree}: gamma_n {gamma:.2e}, {:>3} segments, error {:.2e} (raw data {:.2e}), {:.1} ms",
            run.segmentation.len(),
            run.error,
            noisy,
            run.wall_ms
        );
        let breaks: Vec<usize> = run
            .segmentation
            .fragments()
            .filter_map(|f| match f {
                potts::Fragment::Interval(iv) if iv.hi < n => Some(iv.hi),
                _ => None,
            })
            .collect();
        println!("          breakpoints {breaks:?}");
    }
    Ok(())
}
