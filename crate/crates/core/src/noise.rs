//! Sub-Gaussian noise: sampling, the sub-Gaussian standard, and Monte Carlo
//! checks of the tail estimate and of the projection bound.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragment::{Fragment, Interval};
use crate::grid::{Dim, GridSignal};
use crate::polyfit::PolySpace;
use crate::potts1d::{count_fragments_1d, solve_potts_1d};
use crate::rng::{derive_seed, rng_from_seed};
use crate::segmentation::partition_projection_norm_sq;
use crate::wedgelet::{count_fragments_2d, random_wedgelet_partition, solve_wedgelet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian { sigma: f64 },
    /// Uniform on `[-a, a]`.
    UniformBounded { a: f64 },
    /// `±scale` with probability 1/2 each.
    Rademacher { scale: f64 },
}

impl NoiseFamily {
    /// Sub-Gaussian standard: `sigma`, `a / sqrt(3)` and `scale` respectively.
    pub fn tau(&self) -> f64 {
        match *self {
            NoiseFamily::Gaussian { sigma } => sigma,
            NoiseFamily::UniformBounded { a } => a / 3f64.sqrt(),
            NoiseFamily::Rademacher { scale } => scale,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::Gaussian { .. } => "gaussian",
            NoiseFamily::UniformBounded { .. } => "uniform",
            NoiseFamily::Rademacher { .. } => "rademacher",
        }
    }

    /// Parse a family name with one scale parameter (`sigma`, `a` or `scale`).
    pub fn from_name(name: &str, param: f64) -> Result<Self> {
        if !(param >= 0.0 && param.is_finite()) {
            return Err(Error::Domain(format!("noise parameter must be >= 0, got {param}")));
        }
        match name {
            "gaussian" => Ok(NoiseFamily::Gaussian { sigma: param }),
            "uniform" => Ok(NoiseFamily::UniformBounded { a: param }),
            "rademacher" => Ok(NoiseFamily::Rademacher { scale: param }),
            other => Err(Error::Parse(format!("unknown noise family '{other}'"))),
        }
    }
}

/// Noise family plus the sub-Gaussian standard used in bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    /// Replaces the family's exact `tau` in bounds (e.g. an estimate).
    pub tau_override: Option<f64>,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily) -> Self {
        Self {
            family,
            tau_override: None,
        }
    }

    pub fn gaussian(sigma: f64) -> Self {
        Self::new(NoiseFamily::Gaussian { sigma })
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self {
            tau_override: Some(tau),
            ..self
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau_override.unwrap_or_else(|| self.family.tau())
    }

    /// `beta = 2 tau^2`.
    pub fn beta(&self) -> f64 {
        2.0 * self.tau() * self.tau()
    }

    fn sampler(&self) -> Sampler {
        match self.family {
            NoiseFamily::Gaussian { sigma } => Sampler::Gaussian(Normal::new(0.0, sigma.max(0.0)).expect("sigma >= 0")),
            NoiseFamily::UniformBounded { a } => Sampler::Uniform(a),
            NoiseFamily::Rademacher { scale } => Sampler::Rademacher(scale),
        }
    }
}

enum Sampler {
    Gaussian(Normal<f64>),
    Uniform(f64),
    Rademacher(f64),
}

impl Sampler {
    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian(d) => d.sample(rng),
            Sampler::Uniform(a) => {
                if *a > 0.0 {
                    rng.random_range(-a..=*a)
                } else {
                    0.0
                }
            }
            Sampler::Rademacher(s) => {
                if rng.random::<bool>() {
                    *s
                } else {
                    -*s
                }
            }
        }
    }
}

/// `len` i.i.d. draws.
pub fn sample_values(spec: &NoiseSpec, len: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let s = spec.sampler();
    (0..len).map(|_| s.draw(&mut rng)).collect()
}

/// An i.i.d. noise field on the grid of side `side`.
pub fn sample_noise(spec: &NoiseSpec, dim: Dim, side: usize, seed: u64) -> Result<GridSignal> {
    GridSignal::new(dim, side, sample_values(spec, dim.volume(side), seed))
}

pub const TAU_GRID_POINTS: usize = 60;
pub const TAU_T_MIN: f64 = 0.1;
pub const TAU_T_MAX: f64 = 5.0;
pub const TAU_MIN_SAMPLES: usize = 10_000;

/// Smallest `a` with `M(t) <= exp(a^2 t^2 / 2)` on a log-spaced grid
/// `t in [0.1, 5]`, where `M` is the symmetrized empirical mgf
/// `(M(t) + M(-t)) / 2`, with `t` in units of the median absolute sample. The data are
/// assumed centred.
///
/// Fails with [`Error::NotSubGaussian`] when the empirical mgf overflows or
/// the feasible `a(t)` more than doubles across the grid.
pub fn estimate_tau(samples: &[f64]) -> Result<f64> {
    if samples.len() < TAU_MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "estimate_tau needs at least {TAU_MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let m = samples.len() as f64;
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::NotSubGaussian("non-finite samples".into()));
    }
    // Robust scale for the t-grid: outliers must not shrink it.
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    let mid = abs.len() / 2;
    let mut scale = *abs.select_nth_unstable_by(mid, f64::total_cmp).1;
    if scale == 0.0 {
        scale = abs.iter().cloned().fold(0.0, f64::max);
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut a_first = None;
    let mut a_last = 0.0;
    let mut best: f64 = 0.0;
    for i in 0..TAU_GRID_POINTS {
        let frac = i as f64 / (TAU_GRID_POINTS - 1) as f64;
        let t = TAU_T_MIN * (TAU_T_MAX / TAU_T_MIN).powf(frac);
        let mgf = samples.iter().map(|&x| (t * x / scale).cosh()).sum::<f64>() / m;
        if !mgf.is_finite() {
            return Err(Error::NotSubGaussian(format!("empirical mgf diverges at t = {t:.3}")));
        }
        let a = (2.0 * mgf.ln().max(0.0)).sqrt() / t;
        a_first.get_or_insert(a);
        a_last = a;
        best = best.max(a);
    }
    let a0 = a_first.unwrap_or(0.0);
    if a_last > 2.0 * a0 && a_last > 0.0 {
        return Err(Error::NotSubGaussian(format!(
            "feasible constant grows from {a0:.3} to {a_last:.3} along the t-grid"
        )));
    }
    Ok(best * scale)
}

/// Monte Carlo estimate of `P(|sum mu_s xi_s| >= c)` against
/// `2 exp(-c^2 / (beta sum mu_s^2))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheckReport {
    pub family: String,
    pub weights: Vec<f64>,
    pub c: f64,
    pub beta: f64,
    pub trials: usize,
    pub empirical: f64,
    pub bound: f64,
    /// Binomial standard error at the bound, `sqrt(p (1 - p) / trials)`.
    pub std_err: f64,
    pub pass: bool,
}

pub const MIN_TAIL_TRIALS: usize = 100_000;
const CHUNK: usize = 1 << 14;

/// Tail check for one threshold.
pub fn check_tail_bound(spec: &NoiseSpec, mu: &[f64], c: f64, trials: usize, seed: u64) -> Result<TailCheckReport> {
    Ok(check_tail_bounds(spec, mu, &[c], trials, seed)?.remove(0))
}

/// Tail checks for several thresholds evaluated on the same draws.
pub fn check_tail_bounds(
    spec: &NoiseSpec,
    mu: &[f64],
    cs: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<TailCheckReport>> {
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::Domain(format!("tail checks need at least {MIN_TAIL_TRIALS} trials")));
    }
    if mu.is_empty() || cs.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::Domain("need nonempty weights and positive thresholds".into()));
    }
    let sampler = spec.sampler();
    let chunks = trials.div_ceil(CHUNK);
    let hits: Vec<u64> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = rng_from_seed(derive_seed(seed, &[ci as u64]));
            let len = CHUNK.min(trials - ci * CHUNK);
            let mut h = vec![0u64; cs.len()];
            for _ in 0..len {
                let s: f64 = mu.iter().map(|m| m * sampler.draw(&mut rng)).sum::<f64>().abs();
                for (slot, &c) in h.iter_mut().zip(cs) {
                    *slot += (s >= c) as u64;
                }
            }
            h
        })
        .reduce(
            || vec![0u64; cs.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mu2: f64 = mu.iter().map(|m| m * m).sum();
    let beta = spec.beta();
    Ok(cs
        .iter()
        .zip(hits)
        .map(|(&c, h)| {
            let empirical = h as f64 / trials as f64;
            let bound = 2.0 * (-c * c / (beta * mu2)).exp();
            let p = bound.min(1.0);
            let std_err = (p * (1.0 - p) / trials as f64).sqrt();
            TailCheckReport {
                family: spec.family.name().into(),
                weights: mu.to_vec(),
                c,
                beta,
                trials,
                empirical,
                bound,
                std_err,
                pass: empirical <= bound + 3.0 * std_err,
            }
        })
        .collect())
}

/// `E exp(t xi^2)` by Monte Carlo against `1 + C t / (1/beta - t)` where `C`
/// is the tail constant (2 for the tail estimate).
pub fn check_square_mgf_bound(spec: &NoiseSpec, t: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let b = 1.0 / spec.beta();
    if !(t.abs() < b) {
        return Err(Error::Domain(format!("need |t| < 1/beta = {b}")));
    }
    let xs = sample_values(spec, samples, seed);
    let emp = xs.iter().map(|x| (t * x * x).exp()).sum::<f64>() / samples as f64;
    Ok((emp, 1.0 + 2.0 * t / (b - t)))
}

/// Number of random weight vectors in [`run_noise_check`].
pub const NOISE_CHECK_WEIGHTS: usize = 20;
/// Thresholds `c = k tau_hat ||mu||` for these `k`.
pub const NOISE_CHECK_MULTIPLES: [f64; 3] = [1.0, 2.0, 3.0];

/// Estimated standard and tail checks for one noise family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseCheckReport {
    pub spec: NoiseSpec,
    pub tau_exact: f64,
    pub tau_hat: f64,
    /// `2 tau_hat^2`
    pub beta: f64,
    pub tail: Vec<TailCheckReport>,
    pub violations: usize,
    pub seed: u64,
    pub wall_ms: f64,
}

/// Estimate `tau_hat` from `trials` draws, then run tail checks with
/// `beta = 2 tau_hat^2` on [`NOISE_CHECK_WEIGHTS`] random weight vectors
/// (length 1..=16, entries uniform in `[-1, 1]`) at the thresholds
/// [`NOISE_CHECK_MULTIPLES`].
pub fn run_noise_check(spec: &NoiseSpec, trials: usize, seed: u64) -> Result<NoiseCheckReport> {
    let start = std::time::Instant::now();
    let tau_hat = estimate_tau(&sample_values(spec, trials.max(TAU_MIN_SAMPLES), derive_seed(seed, &[0x7A0])))?;
    let est = spec.with_tau(tau_hat);
    let mut rng = rng_from_seed(derive_seed(seed, &[0x3E1]));
    let mut tail = Vec::new();
    for w in 0..NOISE_CHECK_WEIGHTS {
        let len = rng.random_range(1..=16);
        let mu: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let norm = mu.iter().map(|m| m * m).sum::<f64>().sqrt();
        if norm == 0.0 || tau_hat == 0.0 {
            continue;
        }
        let cs: Vec<f64> = NOISE_CHECK_MULTIPLES.iter().map(|k| k * tau_hat * norm).collect();
        tail.extend(check_tail_bounds(&est, &mu, &cs, trials, derive_seed(seed, &[w as u64]))?);
    }
    Ok(NoiseCheckReport {
        spec: *spec,
        tau_exact: spec.family.tau(),
        tau_hat,
        beta: est.beta(),
        violations: tail.iter().filter(|r| !r.pass).count(),
        tail,
        seed,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Family of partitions used by [`check_projection_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionSampler {
    /// The single fragment covering the grid.
    Whole,
    /// Random partitions: 1D breakpoints with probability `p`; 2D quadtree
    /// splits with probability `p` and random wedges.
    Random { p: f64 },
    /// The partition maximizing `||pi_P xi||^2 - C |P| ln |R|`, found exactly
    /// with a Potts solve at `gamma = C ln |R|`.
    WorstCase,
}

/// Admissible partition class: intervals (1D) or wedgelets (2D).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionClass {
    pub dim: Dim,
    pub n: usize,
    pub degree: usize,
    /// Wedgelet angle budget; ignored in 1D.
    pub angle_budget: usize,
}

impl PartitionClass {
    /// `kappa` with `|R^n| <= C n^kappa`: 2 for intervals, 4 for wedgelets.
    pub fn kappa(&self) -> f64 {
        match self.dim {
            Dim::One => 2.0,
            Dim::Two => 4.0,
        }
    }

    pub fn space(&self) -> Result<PolySpace> {
        PolySpace::new(self.dim, self.degree)
    }

    /// `|R^n|`.
    pub fn fragment_count(&self) -> Result<u64> {
        match self.dim {
            Dim::One => Ok(count_fragments_1d(self.n as u64)),
            Dim::Two => count_fragments_2d(self.n, self.angle_budget),
        }
    }

    /// `(1 / kappa + 1) beta D`.
    pub fn threshold(&self, beta: f64) -> Result<f64> {
        Ok((1.0 / self.kappa() + 1.0) * beta * self.space()?.dimension() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCheckReport {
    pub n: usize,
    pub dim: usize,
    pub constant: f64,
    pub threshold: f64,
    /// Set when `constant <= threshold`: the bound is then not guaranteed.
    pub below_threshold: bool,
    pub fragment_count: u64,
    pub trials: usize,
    pub violations: usize,
    pub frequency: f64,
    /// Largest `||pi_P xi||^2 / (C |P| ln |R|)` seen.
    pub max_ratio: f64,
}

/// Frequency of `||pi_P xi||^2 > C |P| ln |R^n|` over noise draws and
/// sampled partitions.
pub fn check_projection_bound(
    spec: &NoiseSpec,
    class: &PartitionClass,
    sampler: PartitionSampler,
    constant: f64,
    trials: usize,
    seed: u64,
) -> Result<ProjectionCheckReport> {
    let space = class.space()?;
    let count = class.fragment_count()?;
    let log_r = (count as f64).ln().max(f64::MIN_POSITIVE);
    let threshold = class.threshold(spec.beta())?;
    let outcomes: Vec<(bool, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, f64)> {
            let xi = sample_noise(spec, class.dim, class.n, derive_seed(seed, &[t as u64, 0]))?;
            let mut rng = rng_from_seed(derive_seed(seed, &[t as u64, 1]));
            let (proj, pieces) = match sampler {
                PartitionSampler::WorstCase => {
                    let gamma = (constant * log_r).max(f64::MIN_POSITIVE);
                    let seg = match class.dim {
                        Dim::One => solve_potts_1d(&xi, gamma, class.degree)?,
                        Dim::Two => solve_wedgelet(&xi, gamma, class.degree, class.angle_budget)?,
                    };
                    // ||pi_P xi||^2 = ||xi||^2 - rss_P(xi) at the maximizer
                    let rss = seg.energy - gamma * seg.len() as f64;
                    ((xi.norm_sq() - rss).max(0.0), seg.len())
                }
                _ => {
                    let frags = sample_partition(class, sampler, &mut rng)?;
                    let p = partition_projection_norm_sq(&xi, frags.iter(), Some(space))?;
                    (p, frags.len())
                }
            };
            let bound = constant * pieces as f64 * log_r;
            Ok((proj > bound, if bound > 0.0 { proj / bound } else { f64::INFINITY }))
        })
        .collect::<Result<_>>()?;
    let violations = outcomes.iter().filter(|o| o.0).count();
    Ok(ProjectionCheckReport {
        n: class.n,
        dim: class.dim.as_usize(),
        constant,
        threshold,
        below_threshold: constant <= threshold,
        fragment_count: count,
        trials,
        violations,
        frequency: violations as f64 / trials.max(1) as f64,
        max_ratio: outcomes.iter().map(|o| o.1).fold(0.0, f64::max),
    })
}

fn sample_partition<R: Rng>(class: &PartitionClass, sampler: PartitionSampler, rng: &mut R) -> Result<Vec<Fragment>> {
    let n = class.n;
    match (sampler, class.dim) {
        (PartitionSampler::Whole, Dim::One) => Ok(vec![Fragment::Interval(Interval { lo: 1, hi: n })]),
        (PartitionSampler::Whole, Dim::Two) => Ok(vec![Fragment::Square(crate::wedgelet::DyadicSquare::root(n)?)]),
        (PartitionSampler::Random { p }, Dim::One) => {
            let mut out = Vec::new();
            let mut lo = 1;
            for s in 1..n {
                if rng.random::<f64>() < p {
                    out.push(Fragment::Interval(Interval { lo, hi: s }));
                    lo = s + 1;
                }
            }
            out.push(Fragment::Interval(Interval { lo, hi: n }));
            Ok(out)
        }
        (PartitionSampler::Random { p }, Dim::Two) => random_wedgelet_partition(n, class.angle_budget, p, rng),
        (PartitionSampler::WorstCase, _) => unreachable!("handled by the caller"),
    }
}
