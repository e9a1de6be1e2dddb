//! Ground-truth generators: Hölder and piecewise smooth 1D signals, horizon
//! images and generalized horizon images.
//!
//! All randomness is drawn from ChaCha8 streams seeded explicitly, so a
//! generator is a pure function of its parameters and seed.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, CellMoments, ContinuousField, Dim};
use crate::rng::{derive_seed, rng_from_seed};

/// Number of terms of the lacunary series.
pub const LACUNARY_TERMS: usize = 16;

/// `offset + gain * sum_{k=1}^{K} 2^{-alpha k} cos(2^k pi x + phi_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoelderFunction1D {
    pub alpha: f64,
    pub phases: Vec<f64>,
    pub offset: f64,
    pub gain: f64,
}

/// Random-phase lacunary series of regularity `alpha`.
pub fn make_hoelder(alpha: f64, seed: u64) -> Result<HoelderFunction1D> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    let mut rng = rng_from_seed(derive_seed(seed, &[0x401D]));
    let phases = (0..LACUNARY_TERMS).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    Ok(HoelderFunction1D::from_phases(alpha, phases))
}

impl HoelderFunction1D {
    pub fn from_phases(alpha: f64, phases: Vec<f64>) -> Self {
        Self {
            alpha,
            phases,
            offset: 0.0,
            gain: 1.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            alpha: 2.0,
            phases: Vec::new(),
            offset: c,
            gain: 0.0,
        }
    }

    fn amplitude(&self, k: usize) -> f64 {
        2f64.powf(-self.alpha * k as f64)
    }

    /// `sum_k 2^{-alpha k}`, a bound on the unscaled series.
    pub fn amplitude_sum(&self) -> f64 {
        (1..=self.phases.len()).map(|k| self.amplitude(k)).sum()
    }

    /// Same shape, rescaled into `[0.2, 0.8]` for use as a horizon boundary.
    pub fn as_boundary(&self) -> Self {
        let s = self.amplitude_sum();
        Self {
            offset: 0.5,
            gain: if s > 0.0 { 0.3 / s } else { 0.0 },
            ..self.clone()
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.gain * self.series(x, 0)
    }

    /// Derivative of order `order` (0, 1 or 2).
    pub fn derivative(&self, order: u32, x: f64) -> f64 {
        if order == 0 {
            self.eval(x)
        } else {
            self.gain * self.series(x, order)
        }
    }

    fn series(&self, x: f64, order: u32) -> f64 {
        self.phases
            .iter()
            .enumerate()
            .map(|(i, &phi)| {
                let k = i + 1;
                let w = 2f64.powi(k as i32) * PI;
                let arg = w * x + phi;
                let d = match order % 4 {
                    0 => arg.cos(),
                    1 => -arg.sin(),
                    2 => -arg.cos(),
                    _ => arg.sin(),
                };
                self.amplitude(k) * w.powi(order as i32) * d
            })
            .sum()
    }

    /// Lipschitz constant bound `gain * sum 2^{-alpha k} 2^k pi`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.gain.abs()
            * (1..=self.phases.len())
                .map(|k| self.amplitude(k) * 2f64.powi(k as i32) * PI)
                .sum::<f64>()
    }

    /// Largest sampled `|f^(p)(x) - f^(p)(y)| / |x - y|^(alpha - p)` with
    /// `p = ceil(alpha) - 1`, over `pairs` random pairs whose distances are
    /// log-uniform in `[1e-6, 1]`.
    pub fn empirical_hoelder_quotient(&self, pairs: usize, seed: u64) -> f64 {
        self.empirical_quotient_at(self.alpha, pairs, seed)
    }

    /// As [`Self::empirical_hoelder_quotient`] for a test exponent `beta`
    /// instead of the function's own `alpha`.
    pub fn empirical_quotient_at(&self, beta: f64, pairs: usize, seed: u64) -> f64 {
        let p = (beta.ceil() as u32).saturating_sub(1);
        let e = beta - p as f64;
        let mut rng = rng_from_seed(derive_seed(seed, &[0x9017]));
        let mut best: f64 = 0.0;
        for _ in 0..pairs {
            let h = 10f64.powf(rng.random_range(-6.0..0.0));
            let x = rng.random_range(0.0..(1.0 - h));
            let q = (self.derivative(p, x + h) - self.derivative(p, x)).abs() / h.powf(e);
            best = best.max(q);
        }
        best
    }
}

impl ContinuousField for HoelderFunction1D {
    fn dim(&self) -> Dim {
        Dim::One
    }

    fn eval(&self, point: [f64; 2]) -> f64 {
        HoelderFunction1D::eval(self, point[0])
    }
}

/// Smooth part plus jumps: `g(x) + sum_i s_i 1[x >= x_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSobolevSignal {
    pub smooth: HoelderFunction1D,
    /// `(location, size)`, sorted by location.
    pub jumps: Vec<(f64, f64)>,
}

/// Jump locations are at least `1 / (4 (J + 1))` apart and from the ends;
/// sizes are `±U[0.5, 1]`.
pub fn make_piecewise_sobolev(alpha: f64, jumps: usize, seed: u64) -> Result<PiecewiseSobolevSignal> {
    if alpha <= 0.5 {
        return Err(Error::Domain(format!("alpha must exceed 1/2, got {alpha}")));
    }
    let smooth = make_hoelder(alpha.min(2.0), seed)?;
    let mut rng = rng_from_seed(derive_seed(seed, &[0x7A3F]));
    let gap = 1.0 / (4.0 * (jumps as f64 + 1.0));
    let locs = loop {
        let mut v: Vec<f64> = (0..jumps).map(|_| rng.random_range(gap..1.0 - gap)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] >= gap) {
            break v;
        }
    };
    let jumps = locs
        .into_iter()
        .map(|x| {
            let size = rng.random_range(0.5..1.0);
            (x, if rng.random::<bool>() { size } else { -size })
        })
        .collect();
    Ok(PiecewiseSobolevSignal { smooth, jumps })
}

impl PiecewiseSobolevSignal {
    /// Piecewise constant signal with the given breakpoints and values
    /// (`values.len() == breaks.len() + 1`).
    pub fn piecewise_constant(breaks: &[f64], values: &[f64]) -> Result<Self> {
        if values.len() != breaks.len() + 1 || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("need increasing breaks and one more value than breaks".into()));
        }
        Ok(Self {
            smooth: HoelderFunction1D::constant(values[0]),
            jumps: breaks
                .iter()
                .zip(values.windows(2))
                .map(|(&x, w)| (x, w[1] - w[0]))
                .collect(),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.smooth.eval(x) + self.jumps.iter().filter(|j| x >= j.0).map(|j| j.1).sum::<f64>()
    }
}

impl ContinuousField for PiecewiseSobolevSignal {
    fn dim(&self) -> Dim {
        Dim::One
    }

    fn eval(&self, point: [f64; 2]) -> f64 {
        PiecewiseSobolevSignal::eval(self, point[0])
    }

    /// Split the cell at the jumps and apply a 16-point midpoint rule on
    /// each smooth piece.
    fn cell_moments(&self, cell: &Cell) -> Option<CellMoments> {
        let (a, b) = (cell.lo[0], cell.hi[0]);
        let mut cuts = vec![a];
        cuts.extend(self.jumps.iter().map(|j| j.0).filter(|&x| x > a && x < b));
        cuts.push(b);
        let (mut s1, mut s2) = (0.0, 0.0);
        const Q: usize = 16;
        for w in cuts.windows(2) {
            let h = (w[1] - w[0]) / Q as f64;
            for i in 0..Q {
                let v = PiecewiseSobolevSignal::eval(self, w[0] + (i as f64 + 0.5) * h);
                s1 += v * h;
                s2 += v * v * h;
            }
        }
        let len = b - a;
        Some(CellMoments {
            mean: s1 / len,
            mean_sq: s2 / len,
        })
    }
}

/// `c1` on and below the graph of `h`, `c2` above it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonFunction {
    pub c1: f64,
    pub c2: f64,
    pub boundary: HoelderFunction1D,
}

/// Horizon function whose boundary is a seeded lacunary series in `[0.2, 0.8]`.
pub fn make_horizon(alpha: f64, c1: f64, c2: f64, seed: u64) -> Result<HorizonFunction> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("horizon alpha must lie in (1, 2], got {alpha}")));
    }
    Ok(HorizonFunction {
        c1,
        c2,
        boundary: make_hoelder(alpha, seed)?.as_boundary(),
    })
}

impl HorizonFunction {
    pub fn flat(c1: f64, c2: f64, level: f64) -> Self {
        Self {
            c1,
            c2,
            boundary: HoelderFunction1D::constant(level),
        }
    }

    /// Area of `{(x, y) in cell : y <= h(x)}`.
    pub fn area_below(&self, cell: &Cell) -> f64 {
        let (x0, x1, y0, y1) = (cell.lo[0], cell.hi[0], cell.lo[1], cell.hi[1]);
        let h = &self.boundary;
        let mid = h.eval(0.5 * (x0 + x1));
        let slack = 0.5 * (x1 - x0) * h.lipschitz_bound();
        if mid - slack >= y1 {
            return (x1 - x0) * (y1 - y0);
        }
        if mid + slack <= y0 {
            return 0.0;
        }
        let g = |x: f64| (h.eval(x) - y0).clamp(0.0, y1 - y0);
        adaptive_simpson(&g, x0, x1, 1e-12 * (x1 - x0) * (y1 - y0), 40)
    }
}

impl ContinuousField for HorizonFunction {
    fn dim(&self) -> Dim {
        Dim::Two
    }

    fn eval(&self, p: [f64; 2]) -> f64 {
        if p[1] <= self.boundary.eval(p[0]) {
            self.c1
        } else {
            self.c2
        }
    }

    fn cell_moments(&self, cell: &Cell) -> Option<CellMoments> {
        let vol = cell.volume();
        let w = (self.area_below(cell) / vol).clamp(0.0, 1.0);
        Some(CellMoments {
            mean: w * self.c1 + (1.0 - w) * self.c2,
            mean_sq: w * self.c1 * self.c1 + (1.0 - w) * self.c2 * self.c2,
        })
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    // start from a 4-panel split so kinks near the midpoint are not missed
    let q = (b - a) / 4.0;
    (0..4)
        .map(|i| {
            let (l, r) = (a + i as f64 * q, a + (i + 1) as f64 * q);
            let (fl, fmid, fr) = (f(l), f(0.5 * (l + r)), f(r));
            rec(f, l, r, fl, fmid, fr, simpson(fl, fmid, fr, l, r), 0.25 * tol, depth)
        })
        .sum()
}

/// `offset + gain * sum_k 2^{-alpha k} cos(2^k pi <u_k, (x, y)> + phi_k)`
/// with random unit directions `u_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lacunary2D {
    pub alpha: f64,
    pub terms: Vec<([f64; 2], f64)>,
    pub offset: f64,
    pub gain: f64,
}

impl Lacunary2D {
    pub fn random(alpha: f64, offset: f64, gain: f64, seed: u64) -> Self {
        let mut rng = rng_from_seed(derive_seed(seed, &[0x2D2D]));
        let terms = (0..LACUNARY_TERMS)
            .map(|_| {
                let a: f64 = rng.random_range(0.0..2.0 * PI);
                ([a.cos(), a.sin()], rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        Self {
            alpha,
            terms,
            offset,
            gain,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            alpha: 2.0,
            terms: Vec::new(),
            offset: c,
            gain: 0.0,
        }
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.offset
            + self.gain
                * self
                    .terms
                    .iter()
                    .enumerate()
                    .map(|(i, (u, phi))| {
                        let k = (i + 1) as f64;
                        2f64.powf(-self.alpha * k) * (2f64.powf(k) * PI * (u[0] * p[0] + u[1] * p[1]) + phi).cos()
                    })
                    .sum::<f64>()
    }
}

/// `g_minus` on and below the graph of `h`, `g_plus` above it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedHorizon {
    pub boundary: HoelderFunction1D,
    pub g_minus: Lacunary2D,
    pub g_plus: Lacunary2D,
}

/// Boundary as in [`make_horizon`]; `g_minus` oscillates around 0 and
/// `g_plus` around 1, each with amplitude at most 0.25.
pub fn make_generalized_horizon(alpha: f64, seed: u64) -> Result<GeneralizedHorizon> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (1, 2), got {alpha}")));
    }
    let boundary = make_hoelder(alpha, seed)?.as_boundary();
    let norm: f64 = (1..=LACUNARY_TERMS).map(|k| 2f64.powf(-alpha * k as f64)).sum();
    Ok(GeneralizedHorizon {
        boundary,
        g_minus: Lacunary2D::random(alpha, 0.0, 0.25 / norm, derive_seed(seed, &[1])),
        g_plus: Lacunary2D::random(alpha, 1.0, 0.25 / norm, derive_seed(seed, &[2])),
    })
}

impl GeneralizedHorizon {
    /// `int_0^1 |g_plus - g_minus|(x, h(x)) dx` by the midpoint rule.
    pub fn boundary_jump_integral(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| {
                let x = (i as f64 + 0.5) / samples as f64;
                let p = [x, self.boundary.eval(x)];
                (self.g_plus.eval(p) - self.g_minus.eval(p)).abs()
            })
            .sum::<f64>()
            / samples as f64
    }
}

impl ContinuousField for GeneralizedHorizon {
    fn dim(&self) -> Dim {
        Dim::Two
    }

    fn eval(&self, p: [f64; 2]) -> f64 {
        if p[1] <= self.boundary.eval(p[0]) {
            self.g_minus.eval(p)
        } else {
            self.g_plus.eval(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{cell_of, discretize, DEFAULT_QUAD_PTS};

    #[test]
    fn single_term_example() {
        let f = HoelderFunction1D::from_phases(2.0, vec![0.0]);
        for x in [0.0, 0.1, 0.37, 0.9] {
            assert!((f.eval(x) - 0.25 * (2.0 * PI * x).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = make_hoelder(1.5, 9).unwrap();
        let b = make_hoelder(1.5, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, make_hoelder(1.5, 10).unwrap());
        assert_eq!(make_piecewise_sobolev(1.5, 3, 4).unwrap(), make_piecewise_sobolev(1.5, 3, 4).unwrap());
        assert!(make_hoelder(0.0, 1).is_err());
        assert!(make_hoelder(2.5, 1).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = make_hoelder(1.7, 3).unwrap();
        let h = 1e-7;
        for x in [0.2, 0.5, 0.81] {
            let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
            assert!((fd - f.derivative(1, x)).abs() < 1e-4 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn boundary_range() {
        for seed in 0..10 {
            let h = make_hoelder(1.3, seed).unwrap().as_boundary();
            for i in 0..=1000 {
                let v = h.eval(i as f64 / 1000.0);
                assert!((0.2..=0.8).contains(&v));
            }
        }
    }

    #[test]
    fn flat_horizon_discretizes_to_halves() {
        let f = HorizonFunction::flat(0.0, 1.0, 0.5);
        let d = discretize(&f, 2, DEFAULT_QUAD_PTS).unwrap();
        assert_eq!(d.values(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn horizon_cell_area_matches_fine_quadrature() {
        let f = make_horizon(1.5, 0.0, 1.0, 7).unwrap();
        let n = 16;
        for k in 0..n * n {
            let cell = cell_of(Dim::Two, n, k);
            let exact = f.area_below(&cell) / cell.volume();
            let m = 400;
            let mut hits = 0usize;
            for i in 0..m {
                let x = cell.lo[0] + (i as f64 + 0.5) / m as f64 * (cell.hi[0] - cell.lo[0]);
                let h = f.boundary.eval(x);
                for j in 0..m {
                    let y = cell.lo[1] + (j as f64 + 0.5) / m as f64 * (cell.hi[1] - cell.lo[1]);
                    hits += (y <= h) as usize;
                }
            }
            assert!((exact - hits as f64 / (m * m) as f64).abs() < 5e-3, "cell {k}");
        }
    }

    #[test]
    fn horizon_is_two_valued() {
        let f = make_horizon(1.5, 0.2, 0.9, 1).unwrap();
        let d = discretize(&FnFieldAdapter(&f), 32, 1).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.2 || v == 0.9));
    }

    struct FnFieldAdapter<'a>(&'a HorizonFunction);

    impl ContinuousField for FnFieldAdapter<'_> {
        fn dim(&self) -> Dim {
            Dim::Two
        }
        fn eval(&self, p: [f64; 2]) -> f64 {
            self.0.eval(p)
        }
    }

    #[test]
    fn generalized_horizon_reduces_to_horizon() {
        let h = make_hoelder(1.5, 2).unwrap().as_boundary();
        let g = GeneralizedHorizon {
            boundary: h.clone(),
            g_minus: Lacunary2D::constant(0.0),
            g_plus: Lacunary2D::constant(1.0),
        };
        let f = HorizonFunction {
            c1: 0.0,
            c2: 1.0,
            boundary: h,
        };
        for i in 0..50 {
            for j in 0..50 {
                let p = [i as f64 / 50.0, j as f64 / 50.0];
                assert_eq!(ContinuousField::eval(&g, p), ContinuousField::eval(&f, p));
            }
        }
        let gh = make_generalized_horizon(1.5, 3).unwrap();
        assert!(gh.boundary_jump_integral(1000) > 0.3);
        assert_eq!(gh, make_generalized_horizon(1.5, 3).unwrap());
    }

    #[test]
    fn jumps_visible_in_local_means() {
        let f = make_piecewise_sobolev(1.5, 3, 21).unwrap();
        let d = discretize(&f, 1024, DEFAULT_QUAD_PTS).unwrap();
        let big = d.values().windows(2).filter(|w| (w[1] - w[0]).abs() > 0.2).count();
        assert!((3..=6).contains(&big), "{big}");
        assert_eq!(f.jumps.len(), 3);
    }

    #[test]
    fn hoelder_quotients() {
        for seed in 0..5 {
            let q15 = make_hoelder(1.5, seed).unwrap().empirical_hoelder_quotient(10_000, seed);
            let q2 = make_hoelder(2.0, seed).unwrap().empirical_hoelder_quotient(10_000, seed);
            assert!(q15.is_finite() && q15 <= 3.0 * q2, "{q15} vs {q2}");
            // at a common test exponent, smoother generators have smaller quotients
            let at: Vec<f64> = [1.1, 1.3, 1.5, 1.7, 2.0]
                .iter()
                .map(|&a| make_hoelder(a, seed).unwrap().empirical_quotient_at(1.1, 10_000, seed))
                .collect();
            assert!(at.windows(2).all(|w| w[1] <= w[0]), "{at:?}");
        }
    }
}
