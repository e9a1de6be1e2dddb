//! Wedgelet and platelet estimates of a noisy horizon image, written as PGM
//! files together with a JSON dump of the fragments.
//!
//! `cargo run --release --example wedgelet_horizon -- [out_dir]`

use std::path::PathBuf;

use potts::bench::{run_estimation, GammaSchedule, SolverConfig, TruthClass};
use potts::io::{write_pgm, write_segmentation};
use potts::noise::NoiseSpec;
use potts::rng::master_seed;
use potts::wedgelet::FULL_BUDGET;
use potts::Fragment;

fn main() -> potts::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/wedgelet_horizon".into()));
    std::fs::create_dir_all(&out)?;
    let seed = master_seed(5);
    let n = 64;
    let truth = TruthClass::Horizon { alpha: 1.8 }.build(seed)?;
    let noise = NoiseSpec::gaussian(0.2);
    for degree in [0, 1] {
        let solver = SolverConfig::Wedgelet { degree, angle_budget: FULL_BUDGET };
        let schedule = GammaSchedule::default_for(&solver, &noise)?;
        let gamma = schedule.gamma(n, solver.partition_class(n).fragment_count()?, n * n)?;
        let run = run_estimation(truth.as_ref(), n, &noise, gamma, &solver, seed, 8)?;
        if degree == 0 {
            write_pgm(&out.join("truth.pgm"), &run.signal)?;
            write_pgm(&out.join("noisy.pgm"), &run.data)?;
        }
        let seg = &run.segmentation;
        let wedges = seg.fragments().filter(|f| matches!(f, Fragment::Wedge(_))).count();
        write_pgm(&out.join(format!("estimate_p{degree}.pgm")), &seg.render())?;
        write_segmentation(&out.join(format!("fragments_p{degree}.json")), seg)?;
        println!(
            "degree {degree}: {} fragments ({wedges} wedge halves), error {:.3e}, {:.0} ms",
            seg.len(),
            run.error,
            run.wall_ms
        );
    }
    println!("images in {}", out.display());
    Ok(())
}
