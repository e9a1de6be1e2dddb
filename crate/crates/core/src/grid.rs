//! Grid signals on `{1,..,n}^d`, local-mean discretization of continuous
//! fields and the embedding of grid values as cell-constant functions on the
//! unit cube.
//!
//! Storage is row-major: pixel `(x, y)` (both 0-based, `x` horizontal) lives
//! at `y * n + x`. Cell `(x, y)` covers `[x/n, (x+1)/n) x [y/n, (y+1)/n)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of midpoint quadrature nodes per axis and cell.
pub const DEFAULT_QUAD_PTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    pub fn from_usize(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            _ => Err(Error::Dimension(format!("unsupported dimension {d}"))),
        }
    }

    /// Number of grid points `n^d`.
    pub fn volume(self, side: usize) -> usize {
        match self {
            Dim::One => side,
            Dim::Two => side * side,
        }
    }
}

/// Real-valued data on `S^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSignal {
    dim: Dim,
    side: usize,
    values: Vec<f64>,
}

impl GridSignal {
    pub fn new(dim: Dim, side: usize, values: Vec<f64>) -> Result<Self> {
        if side == 0 {
            return Err(Error::Domain("grid side must be positive".into()));
        }
        if values.len() != dim.volume(side) {
            return Err(Error::Dimension(format!(
                "expected {} values for side {side} in {}D, got {}",
                dim.volume(side),
                dim.as_usize(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("value at index {k} is not finite")));
        }
        Ok(Self { dim, side, values })
    }

    pub fn from_vec_1d(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(Dim::One, n, values)
    }

    pub fn zeros(dim: Dim, side: usize) -> Self {
        Self {
            dim,
            side,
            values: vec![0.0; dim.volume(side)],
        }
    }

    /// Build a 2D signal from `f(x, y)` on 0-based pixel coordinates.
    pub fn from_fn_2d(side: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..side * side).map(|k| f(k % side, k / side)).collect();
        Self::new(Dim::Two, side, values)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at 0-based pixel `(x, y)` of a 2D signal.
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.side + x]
    }

    pub fn same_shape(&self, other: &GridSignal) -> Result<()> {
        if self.dim != other.dim || self.side != other.side {
            return Err(Error::Dimension(format!(
                "shape ({}D, n={}) vs ({}D, n={})",
                self.dim.as_usize(),
                self.side,
                other.dim.as_usize(),
                other.side
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &GridSignal) -> Result<GridSignal> {
        self.same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        GridSignal::new(self.dim, self.side, values)
    }

    pub fn sub(&self, other: &GridSignal) -> Result<GridSignal> {
        self.same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        GridSignal::new(self.dim, self.side, values)
    }

    /// Euclidean inner product on `R^{S^n}`.
    pub fn dot(&self, other: &GridSignal) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Cell of the unit cube represented by the pixel at linear index `k`.
    pub fn cell(&self, k: usize) -> Cell {
        cell_of(self.dim, self.side, k)
    }

    /// Average over `2^d` blocks: maps a signal at side `2n` to side `n`.
    pub fn block_average(&self) -> Result<GridSignal> {
        if !self.side.is_multiple_of(2) {
            return Err(Error::Domain("block average needs an even side".into()));
        }
        let m = self.side / 2;
        let values = match self.dim {
            Dim::One => (0..m)
                .map(|i| 0.5 * (self.values[2 * i] + self.values[2 * i + 1]))
                .collect(),
            Dim::Two => (0..m * m)
                .map(|k| {
                    let (x, y) = (2 * (k % m), 2 * (k / m));
                    0.25 * (self.at(x, y) + self.at(x + 1, y) + self.at(x, y + 1) + self.at(x + 1, y + 1))
                })
                .collect(),
        };
        GridSignal::new(self.dim, m, values)
    }
}

/// An axis-aligned box of the unit cube. For 1D cells only axis 0 is used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub dim: Dim,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Cell {
    pub fn volume(&self) -> f64 {
        match self.dim {
            Dim::One => self.hi[0] - self.lo[0],
            Dim::Two => (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1]),
        }
    }
}

pub fn cell_of(dim: Dim, side: usize, k: usize) -> Cell {
    let h = 1.0 / side as f64;
    match dim {
        Dim::One => Cell {
            dim,
            lo: [k as f64 * h, 0.0],
            hi: [(k + 1) as f64 * h, 1.0],
        },
        Dim::Two => {
            let (x, y) = ((k % side) as f64, (k / side) as f64);
            Cell {
                dim,
                lo: [x * h, y * h],
                hi: [(x + 1.0) * h, (y + 1.0) * h],
            }
        }
    }
}

/// Cell averages of `f` and `f^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellMoments {
    pub mean: f64,
    pub mean_sq: f64,
}

/// A point-evaluable function on `[0,1)^d`.
///
/// Fields whose cell integrals are known in closed form (or by a dedicated
/// quadrature) override [`ContinuousField::cell_moments`]; everything else
/// is integrated by the midpoint rule.
pub trait ContinuousField: Send + Sync {
    fn dim(&self) -> Dim;

    /// Evaluate at a point; for 1D fields only `point[0]` is read.
    fn eval(&self, point: [f64; 2]) -> f64;

    fn cell_moments(&self, _cell: &Cell) -> Option<CellMoments> {
        None
    }
}

/// Closure-backed field.
pub struct FnField<F> {
    dim: Dim,
    f: F,
}

impl<F: Fn([f64; 2]) -> f64 + Send + Sync> FnField<F> {
    pub fn new(dim: Dim, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn([f64; 2]) -> f64 + Send + Sync> ContinuousField for FnField<F> {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn eval(&self, point: [f64; 2]) -> f64 {
        (self.f)(point)
    }
}

/// `iota x`: the grid signal as a piecewise constant field, with exact cell
/// moments on arbitrary boxes.
pub struct Embedded<'a>(pub &'a GridSignal);

impl Embedded<'_> {
    /// Pixel indices meeting `[lo, hi)` along one axis, with overlap lengths.
    fn overlaps(&self, lo: f64, hi: f64) -> impl Iterator<Item = (usize, f64)> {
        let n = self.0.side();
        let h = 1.0 / n as f64;
        let first = ((lo * n as f64).floor().max(0.0) as usize).min(n - 1);
        let last = (((hi * n as f64).ceil() as usize).max(first + 1)).min(n);
        (first..last).filter_map(move |i| {
            let w = (hi.min((i + 1) as f64 * h) - lo.max(i as f64 * h)).max(0.0);
            (w > 0.0).then_some((i, w))
        })
    }
}

impl ContinuousField for Embedded<'_> {
    fn dim(&self) -> Dim {
        self.0.dim()
    }

    fn eval(&self, p: [f64; 2]) -> f64 {
        let n = self.0.side();
        let idx = |t: f64| ((t * n as f64).floor().max(0.0) as usize).min(n - 1);
        match self.0.dim() {
            Dim::One => self.0.values()[idx(p[0])],
            Dim::Two => self.0.at(idx(p[0]), idx(p[1])),
        }
    }

    fn cell_moments(&self, cell: &Cell) -> Option<CellMoments> {
        let vol = cell.volume();
        if vol <= 0.0 {
            return None;
        }
        let (mut s1, mut s2) = (0.0, 0.0);
        match cell.dim {
            Dim::One => {
                for (i, w) in self.overlaps(cell.lo[0], cell.hi[0]) {
                    let v = self.0.values()[i];
                    s1 += w * v;
                    s2 += w * v * v;
                }
            }
            Dim::Two => {
                for (j, wy) in self.overlaps(cell.lo[1], cell.hi[1]) {
                    for (i, wx) in self.overlaps(cell.lo[0], cell.hi[0]) {
                        let v = self.0.at(i, j);
                        s1 += wx * wy * v;
                        s2 += wx * wy * v * v;
                    }
                }
            }
        }
        Some(CellMoments {
            mean: s1 / vol,
            mean_sq: s2 / vol,
        })
    }
}

fn midpoint_moments(f: &dyn ContinuousField, cell: &Cell, quad_pts: usize) -> Option<CellMoments> {
    let q = quad_pts as f64;
    let (mut s1, mut s2) = (0.0, 0.0);
    let node = |axis: usize, i: usize| cell.lo[axis] + (i as f64 + 0.5) / q * (cell.hi[axis] - cell.lo[axis]);
    match cell.dim {
        Dim::One => {
            for i in 0..quad_pts {
                let v = f.eval([node(0, i), 0.0]);
                if !v.is_finite() {
                    return None;
                }
                s1 += v;
                s2 += v * v;
            }
            Some(CellMoments {
                mean: s1 / q,
                mean_sq: s2 / q,
            })
        }
        Dim::Two => {
            for j in 0..quad_pts {
                let y = node(1, j);
                for i in 0..quad_pts {
                    let v = f.eval([node(0, i), y]);
                    if !v.is_finite() {
                        return None;
                    }
                    s1 += v;
                    s2 += v * v;
                }
            }
            Some(CellMoments {
                mean: s1 / (q * q),
                mean_sq: s2 / (q * q),
            })
        }
    }
}

fn cell_index_vec(dim: Dim, side: usize, k: usize) -> Vec<usize> {
    match dim {
        Dim::One => vec![k + 1],
        Dim::Two => vec![k % side + 1, k / side + 1],
    }
}

/// Cell moments of `f`, using the field's own hook when available.
pub fn cell_moments(f: &dyn ContinuousField, side: usize, k: usize, quad_pts: usize) -> Result<CellMoments> {
    let cell = cell_of(f.dim(), side, k);
    let m = match f.cell_moments(&cell) {
        Some(m) => Some(m),
        None => midpoint_moments(f, &cell, quad_pts),
    };
    match m {
        Some(m) if m.mean.is_finite() && m.mean_sq.is_finite() => Ok(m),
        _ => Err(Error::Evaluation {
            cell: cell_index_vec(f.dim(), side, k),
        }),
    }
}

fn all_moments(f: &dyn ContinuousField, n: usize, quad_pts: usize) -> Result<Vec<CellMoments>> {
    if n == 0 || quad_pts == 0 {
        return Err(Error::Domain("n and quad_pts must be positive".into()));
    }
    (0..f.dim().volume(n))
        .into_par_iter()
        .map(|k| cell_moments(f, n, k, quad_pts))
        .collect()
}

/// Local means `n^d * int_{I_s} f`.
pub fn discretize(f: &dyn ContinuousField, n: usize, quad_pts: usize) -> Result<GridSignal> {
    let values = all_moments(f, n, quad_pts)?.into_iter().map(|m| m.mean).collect();
    GridSignal::new(f.dim(), n, values)
}

/// `<iota x, iota y>_{L^2} = <x, y> / n^d`.
pub fn embed_inner(x: &GridSignal, y: &GridSignal) -> Result<f64> {
    Ok(x.dot(y)? / x.dim().volume(x.side()) as f64)
}

/// `||f - iota z||^2` in `L^2([0,1)^d)`.
pub fn l2_error_vs_truth(f: &dyn ContinuousField, z: &GridSignal, quad_pts: usize) -> Result<f64> {
    if f.dim() != z.dim() {
        return Err(Error::Dimension("field and grid dimensions differ".into()));
    }
    let n = z.side();
    let moments = all_moments(f, n, quad_pts)?;
    let vol = 1.0 / z.dim().volume(n) as f64;
    let total: f64 = moments
        .iter()
        .zip(z.values())
        .map(|(m, &v)| m.mean_sq - 2.0 * v * m.mean + v * v)
        .sum();
    Ok((total * vol).max(0.0))
}

/// `||f - iota delta f||^2`, the part of the error no grid estimate can remove.
pub fn discretization_error(f: &dyn ContinuousField, n: usize, quad_pts: usize) -> Result<f64> {
    let moments = all_moments(f, n, quad_pts)?;
    let vol = 1.0 / f.dim().volume(n) as f64;
    Ok((moments.iter().map(|m| m.mean_sq - m.mean * m.mean).sum::<f64>() * vol).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_local_means() {
        let f = FnField::new(Dim::One, |p| p[0]);
        let z = discretize(&f, 2, 64).unwrap();
        assert!((z.values()[0] - 0.25).abs() < 1e-12);
        assert!((z.values()[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn constant_field_is_reproduced() {
        let f = FnField::new(Dim::Two, |_| 3.5);
        let z = discretize(&f, 5, 3).unwrap();
        assert!(z.values().iter().all(|&v| (v - 3.5).abs() < 1e-14));
    }

    #[test]
    fn step_at_half_two_by_two() {
        let f = FnField::new(Dim::Two, |p| if p[1] <= 0.5 { 0.0 } else { 1.0 });
        let z = discretize(&f, 2, 4).unwrap();
        assert_eq!(z.values(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn embed_inner_examples() {
        let ones = GridSignal::new(Dim::Two, 4, vec![1.0; 16]).unwrap();
        assert!((embed_inner(&ones, &ones).unwrap() - 1.0).abs() < 1e-15);
        let mut e = vec![0.0; 4];
        e[2] = 1.0;
        let e = GridSignal::from_vec_1d(e).unwrap();
        assert!((embed_inner(&e, &e).unwrap() - 0.25).abs() < 1e-15);
        let x = GridSignal::from_vec_1d(vec![1.0, 2.0]).unwrap();
        let y = GridSignal::from_vec_1d(vec![3.0, 4.0]).unwrap();
        assert!((embed_inner(&x, &y).unwrap() - 5.5).abs() < 1e-15);
    }

    #[test]
    fn embed_inner_rejects_mismatch() {
        let x = GridSignal::from_vec_1d(vec![1.0, 2.0]).unwrap();
        let y = GridSignal::from_vec_1d(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(embed_inner(&x, &y), Err(Error::Dimension(_))));
    }

    #[test]
    fn l2_error_examples() {
        let one = FnField::new(Dim::One, |_| 1.0);
        let zero = GridSignal::zeros(Dim::One, 7);
        assert!((l2_error_vs_truth(&one, &zero, 4).unwrap() - 1.0).abs() < 1e-14);

        // cell-constant truth is represented exactly
        let step = FnField::new(Dim::One, |p| if p[0] < 0.5 { 2.0 } else { -1.0 });
        let z = discretize(&step, 4, 1).unwrap();
        assert!(l2_error_vs_truth(&step, &z, 1).unwrap() < 1e-15);

        let lin = FnField::new(Dim::One, |p| p[0]);
        let z = GridSignal::from_vec_1d(vec![0.25, 0.75]).unwrap();
        let err = l2_error_vs_truth(&lin, &z, 2000).unwrap();
        assert!((err - 1.0 / 48.0).abs() < 1e-8, "{err}");
    }

    #[test]
    fn non_finite_field_names_cell() {
        let f = FnField::new(Dim::Two, |p| if p[0] > 0.5 && p[1] < 0.5 { f64::NAN } else { 0.0 });
        match discretize(&f, 2, 1) {
            Err(Error::Evaluation { cell }) => assert_eq!(cell, vec![2, 1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridSignal::new(Dim::Two, 3, vec![0.0; 8]).is_err());
        assert!(GridSignal::new(Dim::One, 2, vec![0.0, f64::INFINITY]).is_err());
        assert!(GridSignal::new(Dim::One, 0, vec![]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn upsample(x: &GridSignal) -> GridSignal {
            let m = 2 * x.side();
            match x.dim() {
                Dim::One => GridSignal::from_vec_1d((0..m).map(|i| x.values()[i / 2]).collect()).unwrap(),
                Dim::Two => GridSignal::from_fn_2d(m, |i, j| x.at(i / 2, j / 2)).unwrap(),
            }
        }

        fn signal() -> impl Strategy<Value = GridSignal> {
            (any::<bool>(), 1u32..=4).prop_flat_map(|(two, lvl)| {
                let side = 1usize << lvl;
                let dim = if two { Dim::Two } else { Dim::One };
                prop::collection::vec(-5.0..5.0f64, dim.volume(side))
                    .prop_map(move |v| GridSignal::new(dim, side, v).unwrap())
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn embedding_is_an_isometry(x in signal(), seed in any::<u64>()) {
                let mut rng = crate::rng::rng_from_seed(seed);
                let y = GridSignal::new(
                    x.dim(),
                    x.side(),
                    (0..x.len()).map(|_| rand::Rng::random_range(&mut rng, -5.0..5.0)).collect(),
                )
                .unwrap();
                let vol = x.dim().volume(x.side()) as f64;
                let d = l2_error_vs_truth(&Embedded(&x), &y, 1).unwrap();
                prop_assert!((d - x.sub(&y).unwrap().norm_sq() / vol).abs() <= 1e-9);
                prop_assert!((embed_inner(&x, &y).unwrap() * vol - x.dot(&y).unwrap()).abs() <= 1e-9);
            }

            #[test]
            fn refinement_and_pythagoras(x in signal()) {
                // iota x = iota(upsample x) exactly
                let up = upsample(&x);
                prop_assert!(l2_error_vs_truth(&Embedded(&x), &up, 1).unwrap() <= 1e-12);
                prop_assume!(x.side() >= 2);
                // delta at the coarser level is the block average
                let coarse = discretize(&Embedded(&x), x.side() / 2, 1).unwrap();
                let avg = x.block_average().unwrap();
                prop_assert!(coarse.sub(&avg).unwrap().norm_sq() <= 1e-18 * (1.0 + x.norm_sq()));
                // ||iota x||^2 = ||iota delta iota x||^2 + ||iota x - iota delta iota x||^2
                let vol = x.dim().volume(x.side()) as f64;
                let total = x.norm_sq() / vol;
                let kept = avg.norm_sq() / x.dim().volume(avg.side()) as f64;
                let lost = discretization_error(&Embedded(&x), avg.side(), 1).unwrap();
                prop_assert!((total - kept - lost).abs() <= 1e-9);
            }
        }
    }
}
