//! Both sides of the oracle inequality for the 1D estimator against simple
//! competitors: one segment, regular blocks, and the noiseless minimizer.
//!
//! `cargo run --release --example fundamental_inequality`

use potts::bench::{check_fundamental_inequality, run_estimation, GammaSchedule, SolverConfig, TruthClass};
use potts::noise::NoiseSpec;
use potts::rng::{derive_seed, master_seed};
use potts::{count_fragments_1d, Dim, Fragment, Interval, PolySpace, Segmentation};

fn main() -> potts::Result<()> {
    let seed = master_seed(17);
    let n = 512;
    let noise = NoiseSpec::gaussian(0.3);
    let solver = SolverConfig::Potts1d { degree: 1 };
    let space = PolySpace::new(Dim::One, 1)?;
    let gamma = GammaSchedule::default_for(&solver, &noise)?.gamma(n, count_fragments_1d(n as u64), n)?;
    println!("{:>4} {:>12} {:>10} {:>12} {:>12}", "run", "competitor", "|Q|", "lhs", "rhs");
    for r in 0..5u64 {
        let truth = TruthClass::Sobolev1d { alpha: 1.0, jumps: 2 }.build(derive_seed(seed, &[r]))?;
        let run = run_estimation(truth.as_ref(), n, &noise, gamma, &solver, derive_seed(seed, &[r, 1]), 8)?;
        let whole = Segmentation::from_fragments(&run.data, vec![Fragment::Interval(Interval::new(1, n)?)], gamma, space)?;
        let blocks = (0..16)
            .map(|b| Interval::new(32 * b + 1, 32 * b + 32).map(Fragment::Interval))
            .collect::<potts::Result<Vec<_>>>()?;
        let blocks = Segmentation::from_fragments(&run.signal, blocks, gamma, space)?;
        let clean = solver.solve(&run.signal, gamma * n as f64)?;
        for (name, comp) in [("whole", &whole), ("blocks", &blocks), ("noiseless", &clean)] {
            let c = check_fundamental_inequality(&run, truth.as_ref(), comp, 8)?;
            println!("{r:>4} {name:>12} {:>10} {:>12.4e} {:>12.4e}{}", c.competitor_pieces, c.lhs, c.rhs, if c.holds { "" } else { "  VIOLATED" });
        }
    }
    Ok(())
}
