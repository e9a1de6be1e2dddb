//! Experiment harness: penalty schedules, single estimation runs, the
//! fundamental inequality, and convergence-rate experiments.
//!
//! The penalties here are for the normalized functional
//! `gamma |P| + ||f_P - y||^2 / |S^n|`; solvers receive `gamma |S^n|`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{discretize, l2_error_vs_truth, ContinuousField, Dim, FnField, GridSignal, DEFAULT_QUAD_PTS};
use crate::noise::{sample_noise, NoiseSpec, PartitionClass};
use crate::potts1d::solve_potts_1d;
use crate::rng::derive_seed;
use crate::segmentation::Segmentation;
use crate::signals::{make_generalized_horizon, make_horizon, make_piecewise_sobolev, PiecewiseSobolevSignal};
use crate::wedgelet::solve_wedgelet;

/// Which exact solver to run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverConfig {
    Potts1d { degree: usize },
    Wedgelet { degree: usize, angle_budget: usize },
}

impl SolverConfig {
    pub fn dim(&self) -> Dim {
        match self {
            SolverConfig::Potts1d { .. } => Dim::One,
            SolverConfig::Wedgelet { .. } => Dim::Two,
        }
    }

    pub fn partition_class(&self, n: usize) -> PartitionClass {
        match *self {
            SolverConfig::Potts1d { degree } => PartitionClass {
                dim: Dim::One,
                n,
                degree,
                angle_budget: 0,
            },
            SolverConfig::Wedgelet { degree, angle_budget } => PartitionClass {
                dim: Dim::Two,
                n,
                degree,
                angle_budget,
            },
        }
    }

    /// Solve with the un-normalized penalty `gamma_raw`.
    pub fn solve(&self, y: &GridSignal, gamma_raw: f64) -> Result<Segmentation> {
        match *self {
            SolverConfig::Potts1d { degree } => solve_potts_1d(y, gamma_raw, degree),
            SolverConfig::Wedgelet { degree, angle_budget } => solve_wedgelet(y, gamma_raw, degree, angle_budget),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GammaRule {
    /// `(n, gamma_n)` pairs.
    Explicit { values: Vec<(usize, f64)> },
    /// `gamma_n = c ln |R^n| / |S^n|`.
    CLog { c: f64 },
}

/// Penalty sequence with the constants of the consistency threshold
/// `C = beta D (kappa + 1) / kappa`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSchedule {
    pub rule: GammaRule,
    pub kappa: f64,
    pub d: usize,
    pub beta: f64,
}

impl GammaSchedule {
    pub fn c_log(c: f64, solver: &SolverConfig, noise: &NoiseSpec) -> Result<Self> {
        let class = solver.partition_class(1);
        Ok(Self {
            rule: GammaRule::CLog { c },
            kappa: class.kappa(),
            d: class.space()?.dimension(),
            beta: noise.beta(),
        })
    }

    /// `c = 2 C`, twice the threshold.
    pub fn default_for(solver: &SolverConfig, noise: &NoiseSpec) -> Result<Self> {
        let mut s = Self::c_log(0.0, solver, noise)?;
        s.rule = GammaRule::CLog { c: 2.0 * s.threshold() };
        Ok(s)
    }

    pub fn threshold(&self) -> f64 {
        self.beta * self.d as f64 * (self.kappa + 1.0) / self.kappa
    }

    /// False when a `c`-rule does not exceed the threshold.
    pub fn conforming(&self) -> bool {
        match &self.rule {
            GammaRule::CLog { c } => *c > self.threshold(),
            GammaRule::Explicit { .. } => true,
        }
    }

    /// Normalized `gamma_n` for a grid with `volume = |S^n|` and
    /// `fragment_count = |R^n|`.
    pub fn gamma(&self, n: usize, fragment_count: u64, volume: usize) -> Result<f64> {
        match &self.rule {
            GammaRule::CLog { c } => Ok(c * (fragment_count as f64).ln() / volume as f64),
            GammaRule::Explicit { values } => values
                .iter()
                .find(|v| v.0 == n)
                .map(|v| v.1)
                .ok_or_else(|| Error::Domain(format!("no gamma given for n = {n}"))),
        }
    }
}

/// One draw of the regression model and its estimate.
#[derive(Clone, Debug)]
pub struct EstimationRun {
    /// `delta^n f`
    pub signal: GridSignal,
    /// `xi^n`
    pub noise: GridSignal,
    /// `Y^n = delta^n f + xi^n`
    pub data: GridSignal,
    pub segmentation: Segmentation,
    /// Normalized penalty.
    pub gamma: f64,
    /// `||iota f_hat - f||^2`
    pub error: f64,
    pub seed: u64,
    pub wall_ms: f64,
}

/// `y = delta^n f + xi`, exact minimizer at normalized `gamma`, and its
/// squared `L^2` error against `f`.
pub fn run_estimation(
    truth: &dyn ContinuousField,
    n: usize,
    noise: &NoiseSpec,
    gamma: f64,
    solver: &SolverConfig,
    seed: u64,
    quad_pts: usize,
) -> Result<EstimationRun> {
    if truth.dim() != solver.dim() {
        return Err(Error::Dimension("truth and solver dimensions differ".into()));
    }
    let signal = discretize(truth, n, quad_pts)?;
    let xi = sample_noise(noise, truth.dim(), n, seed)?;
    let data = signal.add(&xi)?;
    let start = Instant::now();
    let segmentation = solver.solve(&data, gamma * truth.dim().volume(n) as f64)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let error = l2_error_vs_truth(truth, &segmentation.render(), quad_pts)?;
    Ok(EstimationRun {
        signal,
        noise: xi,
        data,
        segmentation,
        gamma,
        error,
        seed,
        wall_ms,
    })
}

/// Both sides of the fundamental inequality
/// `||iota f_hat - f||^2 <= 2 gamma (|Q| - |P_hat|) + 3 ||iota h - f||^2
///  + 16 / n^d (||pi_P_hat xi||^2 + ||pi_Q xi||^2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub competitor_pieces: usize,
    pub competitor_error: f64,
    pub holds: bool,
}

pub const FUNDAMENTAL_TOL: f64 = 1e-8;

pub fn check_fundamental_inequality(
    run: &EstimationRun,
    truth: &dyn ContinuousField,
    competitor: &Segmentation,
    quad_pts: usize,
) -> Result<FundamentalCheck> {
    let hat = &run.segmentation;
    if competitor.dim != hat.dim || competitor.side != hat.side {
        return Err(Error::Dimension("competitor lives on a different grid".into()));
    }
    let vol = hat.dim.volume(hat.side) as f64;
    let h_err = l2_error_vs_truth(truth, &competitor.render(), quad_pts)?;
    let noise_terms = hat.projection_norm_sq(&run.noise)? + competitor.projection_norm_sq(&run.noise)?;
    let rhs = 2.0 * run.gamma * (competitor.len() as f64 - hat.len() as f64) + 3.0 * h_err + 16.0 / vol * noise_terms;
    Ok(FundamentalCheck {
        lhs: run.error,
        rhs,
        competitor_pieces: competitor.len(),
        competitor_error: h_err,
        holds: run.error <= rhs + FUNDAMENTAL_TOL,
    })
}

/// Least-squares slope of `ln error` against `ln n`.
pub fn fit_loglog_slope(rows: &[(f64, f64)]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(Error::Domain("slope fit needs at least two rows".into()));
    }
    if let Some(r) = rows.iter().find(|r| !(r.1 > 0.0) || !(r.0 > 0.0)) {
        return Err(Error::Domain(format!("nonpositive value in row {r:?}")));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.0.ln(), r.1.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all n are equal".into()));
    }
    Ok(sxy / sxx)
}

/// Ground-truth class of a rate experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum TruthClass {
    /// Piecewise Hölder/Sobolev signal with `jumps` discontinuities.
    Sobolev1d { alpha: f64, jumps: usize },
    /// Piecewise constant with `jumps` jumps (smoothness effectively infinite).
    PiecewiseConstant1d { jumps: usize },
    /// Two-valued horizon image (0 below, 1 above).
    Horizon { alpha: f64 },
    GenHorizon { alpha: f64 },
}

impl TruthClass {
    pub fn build(&self, seed: u64) -> Result<Box<dyn ContinuousField>> {
        Ok(match *self {
            TruthClass::Sobolev1d { alpha, jumps } => Box::new(make_piecewise_sobolev(alpha, jumps, seed)?),
            TruthClass::PiecewiseConstant1d { jumps } => {
                let s = make_piecewise_sobolev(1.0, jumps, seed)?;
                let breaks: Vec<f64> = s.jumps.iter().map(|j| j.0).collect();
                let mut values = vec![0.0];
                for j in &s.jumps {
                    values.push(values.last().unwrap() + j.1);
                }
                Box::new(PiecewiseSobolevSignal::piecewise_constant(&breaks, &values)?)
            }
            TruthClass::Horizon { alpha } => Box::new(make_horizon(alpha, 0.0, 1.0, seed)?),
            TruthClass::GenHorizon { alpha } => Box::new(make_generalized_horizon(alpha, seed)?),
        })
    }

    pub fn dim(&self) -> Dim {
        match self {
            TruthClass::Sobolev1d { .. } | TruthClass::PiecewiseConstant1d { .. } => Dim::One,
            _ => Dim::Two,
        }
    }

    /// Predicted slope of the error against `n` (log factors ignored) and a
    /// bracket of acceptable slopes.
    pub fn theoretical_exponent(&self) -> (f64, (f64, f64)) {
        match *self {
            TruthClass::Sobolev1d { alpha, .. } => {
                let e = -2.0 * alpha / (2.0 * alpha + 1.0);
                (e, (e - 0.3, e + 0.3))
            }
            TruthClass::PiecewiseConstant1d { .. } => (-1.0, (-1.3, -0.8)),
            TruthClass::Horizon { alpha } | TruthClass::GenHorizon { alpha } => {
                (-alpha / (alpha + 1.0), (-2.0 * alpha / (alpha + 1.0), -alpha / (alpha + 1.0)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    /// Seed of this trial's ground truth (shared by all `n`).
    pub truth_seed: u64,
    /// Normalized penalty.
    pub gamma: f64,
    pub error: f64,
    pub segments: usize,
    pub seed: u64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub gamma: f64,
    pub fragment_count: u64,
    pub trials: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_segments: f64,
    pub mean_wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub truth: TruthClass,
    pub noise: NoiseSpec,
    pub solver: SolverConfig,
    pub schedule: GammaSchedule,
    /// Set when the schedule's constant is at or below the threshold.
    pub below_threshold: bool,
    pub quad_pts: usize,
    pub rows: Vec<RateRow>,
    pub records: Vec<TrialRecord>,
    pub slope: f64,
    pub theoretical_exponent: f64,
    pub exponent_bracket: (f64, f64),
    /// Mean errors strictly decreasing in `n`.
    pub errors_decreasing: bool,
}

/// Settings of [`run_rate_experiment`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateExperiment {
    pub truth: TruthClass,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub noise: NoiseSpec,
    pub solver: SolverConfig,
    pub schedule: GammaSchedule,
    pub seed: u64,
    pub quad_pts: usize,
}

impl RateExperiment {
    pub fn new(truth: TruthClass, ns: Vec<usize>, trials: usize, noise: NoiseSpec, solver: SolverConfig, seed: u64) -> Result<Self> {
        Ok(Self {
            truth,
            ns,
            trials,
            noise,
            solver,
            schedule: GammaSchedule::default_for(&solver, &noise)?,
            seed,
            quad_pts: DEFAULT_QUAD_PTS,
        })
    }
}

pub const MIN_RATE_NS: usize = 4;

/// Mean error per `n` over `trials` replications and the fitted log-log
/// slope. Each replication draws its own truth from the class and its own
/// noise at every `n`.
pub fn run_rate_experiment(exp: &RateExperiment) -> Result<RateReport> {
    if exp.ns.len() < MIN_RATE_NS {
        return Err(Error::Refused(format!(
            "rate experiments need at least {MIN_RATE_NS} values of n, got {}",
            exp.ns.len()
        )));
    }
    if exp.trials == 0 {
        return Err(Error::Domain("trials must be positive".into()));
    }
    if exp.truth.dim() != exp.solver.dim() {
        return Err(Error::Dimension("truth class and solver dimensions differ".into()));
    }
    // Trial t uses the same truth at every n, so the errors are paired.
    let truths = (0..exp.trials)
        .map(|t| {
            let s = derive_seed(exp.seed, &[0x7257, t as u64]);
            Ok((s, exp.truth.build(s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &n in &exp.ns {
        let class = exp.solver.partition_class(n);
        let count = class.fragment_count()?;
        let volume = class.dim.volume(n);
        let gamma = exp.schedule.gamma(n, count, volume)?;
        let recs: Vec<TrialRecord> = (0..exp.trials)
            .into_par_iter()
            .map(|t| {
                let seed = derive_seed(exp.seed, &[n as u64, t as u64]);
                let (truth_seed, truth) = &truths[t];
                let run = run_estimation(truth.as_ref(), n, &exp.noise, gamma, &exp.solver, seed, exp.quad_pts)?;
                Ok(TrialRecord {
                    n,
                    truth_seed: *truth_seed,
                    gamma,
                    error: run.error,
                    segments: run.segmentation.len(),
                    seed,
                    wall_ms: run.wall_ms,
                })
            })
            .collect::<Result<_>>()?;
        let m = recs.len() as f64;
        let mean_error = recs.iter().map(|r| r.error).sum::<f64>() / m;
        let var = recs.iter().map(|r| (r.error - mean_error).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
        rows.push(RateRow {
            n,
            gamma,
            fragment_count: count,
            trials: recs.len(),
            mean_error,
            std_error: (var / m).sqrt(),
            mean_segments: recs.iter().map(|r| r.segments as f64).sum::<f64>() / m,
            mean_wall_ms: recs.iter().map(|r| r.wall_ms).sum::<f64>() / m,
        });
        records.extend(recs);
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.mean_error)).collect();
    let slope = fit_loglog_slope(&pts)?;
    let (theoretical_exponent, exponent_bracket) = exp.truth.theoretical_exponent();
    Ok(RateReport {
        truth: exp.truth,
        noise: exp.noise,
        solver: exp.solver,
        schedule: exp.schedule.clone(),
        below_threshold: !exp.schedule.conforming(),
        quad_pts: exp.quad_pts,
        errors_decreasing: rows.windows(2).all(|w| w[1].mean_error < w[0].mean_error),
        rows,
        records,
        slope,
        theoretical_exponent,
        exponent_bracket,
    })
}

/// Number of segments the estimator returns on pure noise (`f = 0`).
pub fn segments_on_noise(n: usize, noise: &NoiseSpec, gamma: f64, solver: &SolverConfig, seed: u64) -> Result<usize> {
    let zero = FnField::new(solver.dim(), |_| 0.0);
    Ok(run_estimation(&zero, n, noise, gamma, solver, seed, 1)?.segmentation.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragment::{Fragment, Interval};
    use crate::polyfit::PolySpace;

    #[test]
    fn slope_examples() {
        let ns = [64.0, 128.0, 256.0, 512.0];
        let inv: Vec<_> = ns.iter().map(|&n| (n, 1.0 / n)).collect();
        assert!((fit_loglog_slope(&inv).unwrap() + 1.0).abs() < 1e-12);
        let flat: Vec<_> = ns.iter().map(|&n| (n, 3.0)).collect();
        assert!(fit_loglog_slope(&flat).unwrap().abs() < 1e-12);
        let wiggle = [1.01, 0.99, 1.005, 0.995];
        let p: Vec<_> = ns.iter().zip(wiggle).map(|(&n, w)| (n, n.powf(-0.6) * w)).collect();
        assert!((fit_loglog_slope(&p).unwrap() + 0.6).abs() < 0.05);
        assert!(fit_loglog_slope(&[(2.0, 0.0), (4.0, 1.0)]).is_err());
        assert!(fit_loglog_slope(&[(2.0, 1.0)]).is_err());
    }

    #[test]
    fn schedule_threshold() {
        let solver = SolverConfig::Potts1d { degree: 1 };
        let noise = NoiseSpec::gaussian(0.5);
        let s = GammaSchedule::default_for(&solver, &noise).unwrap();
        // beta = 0.5, D = 2, kappa = 2
        assert!((s.threshold() - 0.5 * 2.0 * 1.5).abs() < 1e-12);
        assert!(s.conforming());
        assert!(!GammaSchedule::c_log(1.0, &solver, &noise).unwrap().conforming());
        let g = s.gamma(64, 2080, 64).unwrap();
        assert!((g - 3.0 * 2080f64.ln() / 64.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_piecewise_constant_run() {
        let truth = PiecewiseSobolevSignal::piecewise_constant(&[0.25, 0.5], &[0.0, 1.0, -1.0]).unwrap();
        let solver = SolverConfig::Potts1d { degree: 0 };
        let run = run_estimation(&truth, 64, &NoiseSpec::gaussian(0.0), 1e-3, &solver, 1, 8).unwrap();
        assert_eq!(run.segmentation.len(), 3);
        assert!(run.error < 1e-20);
    }

    #[test]
    fn fundamental_inequality_against_simple_competitors() {
        let truth = TruthClass::Sobolev1d { alpha: 1.5, jumps: 2 }.build(4).unwrap();
        let solver = SolverConfig::Potts1d { degree: 0 };
        let noise = NoiseSpec::gaussian(0.2);
        for seed in 0..10 {
            let run = run_estimation(truth.as_ref(), 128, &noise, 0.01, &solver, seed, 8).unwrap();
            let me = check_fundamental_inequality(&run, truth.as_ref(), &run.segmentation, 8).unwrap();
            assert!(me.holds && me.rhs >= me.lhs);
            let whole = Segmentation::from_fragments(
                &run.data,
                vec![Fragment::Interval(Interval { lo: 1, hi: 128 })],
                run.gamma,
                PolySpace::new(Dim::One, 0).unwrap(),
            )
            .unwrap();
            assert!(check_fundamental_inequality(&run, truth.as_ref(), &whole, 8).unwrap().holds);
        }
    }

    #[test]
    fn refuses_short_n_lists() {
        let exp = RateExperiment::new(
            TruthClass::PiecewiseConstant1d { jumps: 2 },
            vec![64, 128, 256],
            10,
            NoiseSpec::gaussian(0.1),
            SolverConfig::Potts1d { degree: 0 },
            1,
        )
        .unwrap();
        assert!(matches!(run_rate_experiment(&exp), Err(Error::Refused(_))));
    }
}
