//! Platelets (affine pieces on wedges) on a generalized horizon image: smooth
//! regions on both sides of a Hölder boundary. Shows how the angle budget
//! trades runtime for accuracy.
//!
//! `cargo run --release --example platelets_genhorizon`

use potts::bench::{run_estimation, GammaSchedule, SolverConfig, TruthClass};
use potts::noise::NoiseSpec;
use potts::rng::master_seed;
use potts::wedgelet::FULL_BUDGET;

fn main() -> potts::Result<()> {
    let seed = master_seed(9);
    let n = 64;
    let truth = TruthClass::GenHorizon { alpha: 1.5 }.build(seed)?;
    let noise = NoiseSpec::gaussian(0.1);
    for budget in [0, 2, 8, FULL_BUDGET] {
        let solver = SolverConfig::Wedgelet { degree: 1, angle_budget: budget };
        let schedule = GammaSchedule::default_for(&solver, &noise)?;
        let class = solver.partition_class(n);
        let gamma = schedule.gamma(n, class.fragment_count()?, n * n)?;
        let run = run_estimation(truth.as_ref(), n, &noise, gamma, &solver, seed, 8)?;
        let label = if budget == FULL_BUDGET { "full".to_string() } else { budget.to_string() };
        println!(
            "budget {label:>4}: |R| = {:>9}, {:>3} fragments, error {:.3e}, {:.0} ms",
            class.fragment_count()?,
            run.segmentation.len(),
            run.error,
            run.wall_ms
        );
    }
    Ok(())
}
