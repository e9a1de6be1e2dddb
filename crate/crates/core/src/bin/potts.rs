use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use potts::bench::{run_rate_experiment, GammaRule, RateExperiment, SolverConfig, TruthClass};
use potts::io::{read_pgm, read_signal_csv, write_json, write_pgm, write_rate_report, write_segmentation, write_signal_csv};
use potts::noise::{run_noise_check, NoiseFamily, NoiseSpec};
use potts::rng::master_seed;
use potts::wedgelet::FULL_BUDGET;
use potts::{solve_potts_1d, solve_wedgelet};

#[derive(Parser)]
#[command(name = "potts", version, about = "Exact Potts / wedgelet estimators and rate experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    Sobolev1d,
    Horizon,
    Genhorizon,
}

#[derive(Subcommand)]
enum Cmd {
    /// Piecewise polynomial denoising of a single-column CSV signal.
    Denoise1d {
        #[arg(long)]
        input: PathBuf,
        /// Jump penalty, on the scale of the raw residual sum of squares.
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long)]
        output: PathBuf,
        /// Optional JSON dump of the segments.
        #[arg(long)]
        segments_out: Option<PathBuf>,
    },
    /// Wedgelet (degree 0) or platelet (degree 1) estimate of a square PGM.
    Wedgelet {
        #[arg(long)]
        input: PathBuf,
        /// Penalty per fragment, pixel values scaled to [0, 1].
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        /// Maximal direction parameter; omit for all directions.
        #[arg(long)]
        angle_budget: Option<usize>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        leaves_out: Option<PathBuf>,
    },
    /// Convergence-rate experiment; writes a JSON report and a CSV mirror.
    Rates {
        #[arg(long, value_enum)]
        class: Class,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Constant c in gamma_n = c ln|R_n| / |S_n|; default twice the threshold.
        #[arg(long)]
        gamma_c: Option<f64>,
        /// Master seed; POTTS_SEED takes precedence.
        #[arg(long, default_value_t = potts::rng::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        /// Polynomial degree; defaults to 1.
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long)]
        angle_budget: Option<usize>,
        /// Jumps of the 1D truth.
        #[arg(long, default_value_t = 2)]
        jumps: usize,
        #[arg(long, default_value_t = potts::grid::DEFAULT_QUAD_PTS)]
        quad_pts: usize,
    },
    /// Estimate the sub-Gaussian standard and check the tail estimate.
    NoiseCheck {
        /// gaussian, uniform or rademacher.
        #[arg(long)]
        family: String,
        /// Scale: standard deviation, half-width or amplitude.
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = potts::rng::DEFAULT_SEED)]
        seed: u64,
    },
}

fn run(cmd: Cmd) -> potts::Result<()> {
    match cmd {
        Cmd::Denoise1d {
            input,
            gamma,
            degree,
            output,
            segments_out,
        } => {
            let y = read_signal_csv(&input)?;
            let seg = solve_potts_1d(&y, gamma, degree)?;
            write_signal_csv(&output, &seg.render())?;
            if let Some(p) = segments_out {
                write_segmentation(&p, &seg)?;
            }
            println!("{} segments, energy {:.6}", seg.len(), seg.energy);
        }
        Cmd::Wedgelet {
            input,
            gamma,
            degree,
            angle_budget,
            output,
            leaves_out,
        } => {
            let y = read_pgm(&input)?;
            let seg = solve_wedgelet(&y, gamma, degree, angle_budget.unwrap_or(FULL_BUDGET))?;
            write_pgm(&output, &seg.render())?;
            if let Some(p) = leaves_out {
                write_segmentation(&p, &seg)?;
            }
            println!("{} fragments, energy {:.6}", seg.len(), seg.energy);
        }
        Cmd::Rates {
            class,
            alpha,
            n,
            trials,
            gamma_c,
            seed,
            report,
            sigma,
            degree,
            angle_budget,
            jumps,
            quad_pts,
        } => {
            let (truth, solver) = match class {
                Class::Sobolev1d => (TruthClass::Sobolev1d { alpha, jumps }, SolverConfig::Potts1d { degree }),
                Class::Horizon | Class::Genhorizon => {
                    let truth = match class {
                        Class::Horizon => TruthClass::Horizon { alpha },
                        _ => TruthClass::GenHorizon { alpha },
                    };
                    let angle_budget = angle_budget.unwrap_or(FULL_BUDGET);
                    (truth, SolverConfig::Wedgelet { degree, angle_budget })
                }
            };
            let mut exp = RateExperiment::new(truth, n, trials, NoiseSpec::gaussian(sigma), solver, master_seed(seed))?;
            exp.quad_pts = quad_pts;
            if let Some(c) = gamma_c {
                exp.schedule.rule = GammaRule::CLog { c };
            }
            if !exp.schedule.conforming() {
                eprintln!(
                    "warning: gamma constant is at or below the threshold {:.4}; consistency is not guaranteed",
                    exp.schedule.threshold()
                );
            }
            let rep = run_rate_experiment(&exp)?;
            let csv = write_rate_report(&report, &rep)?;
            for r in &rep.rows {
                println!("n={:<6} gamma={:.3e} error={:.4e} segments={:.1}", r.n, r.gamma, r.mean_error, r.mean_segments);
            }
            println!("slope {:.3} (theory {:.3}); csv mirror {}", rep.slope, rep.theoretical_exponent, csv.display());
        }
        Cmd::NoiseCheck {
            family,
            sigma,
            trials,
            report,
            seed,
        } => {
            let spec = NoiseSpec::new(NoiseFamily::from_name(&family, sigma)?);
            let rep = run_noise_check(&spec, trials, master_seed(seed))?;
            write_json(&report, &rep)?;
            println!(
                "{family}: tau exact {:.4}, estimated {:.4}; {} of {} tail checks violated",
                rep.tau_exact,
                rep.tau_hat,
                rep.violations,
                rep.tail.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
