//! Bottom-up quadtree dynamic program over wedgelet partitions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{Direction, DyadicSquare, Wedge, WedgeSide};
use super::square_directions;
use crate::error::{Error, Result};
use crate::fragment::Fragment;
use crate::grid::{Dim, GridSignal};
use crate::polyfit::{fit_pixels, MomentTable2D, Moments2D, PolySpace, DEFAULT_PINV_CUTOFF};
use crate::segmentation::{Piece, Segmentation};

/// Solver settings. An angle budget of 0 disables wedges (plain quadtree).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WedgeletConfig {
    pub degree: usize,
    pub angle_budget: usize,
    pub pinv_cutoff: f64,
}

impl WedgeletConfig {
    pub fn new(degree: usize, angle_budget: usize) -> Self {
        Self {
            degree,
            angle_budget,
            pinv_cutoff: DEFAULT_PINV_CUTOFF,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Choice {
    Leaf,
    Wedge(Direction, i64),
    Split,
}

/// Squares per level above which the level is parallelized over squares
/// rather than over directions.
const PAR_SQUARES: usize = 64;

/// Exact minimizer of `gamma * #leaves + sum rss` over dyadic wedgelet
/// partitions of a `2^k x 2^k` image.
///
/// At equal cost a leaf beats a wedge split, which beats a quad split.
pub fn solve_wedgelet(y: &GridSignal, gamma: f64, degree: usize, angle_budget: usize) -> Result<Segmentation> {
    solve_wedgelet_with(y, gamma, &WedgeletConfig::new(degree, angle_budget))
}

pub fn solve_wedgelet_with(y: &GridSignal, gamma: f64, cfg: &WedgeletConfig) -> Result<Segmentation> {
    if y.dim() != Dim::Two {
        return Err(Error::Dimension("wedgelet solver needs a 2D image".into()));
    }
    let root = DyadicSquare::root(y.side())?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    let space = PolySpace::new(Dim::Two, cfg.degree)?;
    let n = y.side();
    let table = MomentTable2D::build(y, space)?;
    let z: Vec<f64> = y.values().iter().map(|v| v - table.shift()).collect();

    let mut costs: Vec<Vec<f64>> = Vec::new();
    let mut choices: Vec<Vec<Choice>> = Vec::new();
    for level in 0..=root.level {
        let side = 1usize << level;
        let per_axis = n / side;
        let count = per_axis * per_axis;
        let dirs = square_directions(side, cfg.angle_budget);
        let par_squares = count >= PAR_SQUARES;
        let below = costs.last();
        let solve_square = |k: usize| -> (f64, Choice) {
            let sq = DyadicSquare {
                level,
                i: k % per_axis + 1,
                j: k / per_axis + 1,
            };
            if level == 0 {
                return (gamma, Choice::Leaf);
            }
            let mut best = (gamma + table.rss_rect(sq.x0(), sq.y0(), side, side), Choice::Leaf);
            if !dirs.is_empty() {
                let ctx = ScanCtx {
                    z: &z,
                    n,
                    degree: cfg.degree,
                    cutoff: cfg.pinv_cutoff,
                };
                if let Some((c, d, r)) = ctx.best_wedge(&sq, &dirs, !par_squares) {
                    if 2.0 * gamma + c < best.0 {
                        best = (2.0 * gamma + c, Choice::Wedge(d, r));
                    }
                }
            }
            let below = below.expect("levels above 0 have children");
            let kids = sq.children().expect("level > 0");
            let split: f64 = kids
                .iter()
                .map(|c| below[(c.j - 1) * (per_axis * 2) + c.i - 1])
                .sum();
            if split < best.0 {
                best = (split, Choice::Split);
            }
            best
        };
        let solved: Vec<(f64, Choice)> = if par_squares {
            (0..count).into_par_iter().map(solve_square).collect()
        } else {
            (0..count).map(solve_square).collect()
        };
        costs.push(solved.iter().map(|s| s.0).collect());
        choices.push(solved.into_iter().map(|s| s.1).collect());
    }

    let mut fragments = Vec::new();
    let mut stack = vec![root];
    while let Some(sq) = stack.pop() {
        let per_axis = n >> sq.level;
        match choices[sq.level as usize][(sq.j - 1) * per_axis + sq.i - 1] {
            Choice::Leaf => fragments.push(Fragment::Square(sq)),
            Choice::Wedge(direction, r) => {
                for side in [WedgeSide::Lower, WedgeSide::Upper] {
                    fragments.push(Fragment::Wedge(Wedge {
                        square: sq,
                        direction,
                        r,
                        side,
                    }));
                }
            }
            Choice::Split => {
                let kids = sq.children().expect("split squares have children");
                stack.extend(kids.iter().rev());
            }
        }
    }
    let pieces = fragments
        .into_par_iter()
        .map(|fragment| {
            let fit = fit_pixels(y, &fragment.pixels(n), space)?;
            Ok(Piece { fragment, fit })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Segmentation {
        dim: Dim::Two,
        side: n,
        gamma,
        energy: costs[root.level as usize][0],
        pieces,
    })
}

struct ScanCtx<'a> {
    z: &'a [f64],
    n: usize,
    degree: usize,
    cutoff: f64,
}

impl ScanCtx<'_> {
    /// Cheapest wedge split of `sq`: `(rss_lower + rss_upper, direction, r)`.
    fn best_wedge(&self, sq: &DyadicSquare, dirs: &[Direction], parallel: bool) -> Option<(f64, Direction, i64)> {
        let per_dir: Vec<Option<(f64, i64)>> = if parallel {
            dirs.par_iter()
                .map_init(Vec::new, |buf, d| self.scan_direction(sq, d, buf))
                .collect()
        } else {
            let mut buf = Vec::new();
            dirs.iter().map(|d| self.scan_direction(sq, d, &mut buf)).collect()
        };
        let mut best: Option<(f64, Direction, i64)> = None;
        for (d, res) in dirs.iter().zip(per_dir) {
            if let Some((c, r)) = res {
                if best.is_none_or(|b| c < b.0) {
                    best = Some((c, *d, r));
                }
            }
        }
        best
    }

    /// Bucket the square's pixels by line number, then sweep the offset.
    ///
    /// Lower moments are prefix sums and upper moments suffix sums of the
    /// buckets, so neither side is obtained by cancellation.
    fn scan_direction(&self, sq: &DyadicSquare, dir: &Direction, buckets: &mut Vec<Moments2D>) -> Option<(f64, i64)> {
        let (lo, hi) = sq.line_range(dir);
        let len = (hi - lo + 1) as usize;
        buckets.clear();
        buckets.resize(2 * len, Moments2D::default());
        let (lines, suffix) = buckets.split_at_mut(len);
        let s = sq.side();
        let (x0, y0) = (sq.x0(), sq.y0());
        let c = 0.5 * (s as f64 - 1.0);
        for dy in 0..s {
            let yg = y0 + dy;
            let row = &self.z[yg * self.n + x0..yg * self.n + x0 + s];
            let ly = dy as f64 - c;
            for (dx, &zv) in row.iter().enumerate() {
                let k = (dir.line_number((x0 + dx) as i64, yg as i64) - lo) as usize;
                lines[k].push(dx as f64 - c, ly, zv);
            }
        }
        // suffix[k]: moments of the lines >= k
        suffix[len - 1] = lines[len - 1];
        for k in (0..len - 1).rev() {
            suffix[k] = suffix[k + 1].add(&lines[k]);
        }
        let mut best: Option<(f64, i64)> = None;
        let mut lower = Moments2D::default();
        for k in 0..len - 1 {
            if lines[k].n < 0.5 {
                continue;
            }
            lower = lower.add(&lines[k]);
            let cost = lower.rss(self.degree, self.cutoff) + suffix[k + 1].rss(self.degree, self.cutoff);
            if best.is_none_or(|b| cost < b.0) {
                best = Some((cost, lo + k as i64));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::wedgelet::{brute_force_wedgelet, random_wedgelet_partition, FULL_BUDGET};
    use rand::Rng;

    #[test]
    fn constant_image_is_one_leaf() {
        let y = GridSignal::from_fn_2d(16, |_, _| 0.25).unwrap();
        let s = solve_wedgelet(&y, 0.01, 1, 8).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.energy - 0.01).abs() < 1e-12);
    }

    #[test]
    fn half_planes_split_into_two() {
        let y = GridSignal::from_fn_2d(4, |x, _| if x < 2 { 0.0 } else { 1.0 }).unwrap();
        let s = solve_wedgelet(&y, 0.1, 0, FULL_BUDGET).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.energy - 0.2).abs() < 1e-12);
        assert!(matches!(s.pieces[0].fragment, Fragment::Wedge(_)));
    }

    #[test]
    fn rejects_bad_sizes() {
        let y = GridSignal::zeros(Dim::Two, 6);
        assert!(matches!(solve_wedgelet(&y, 1.0, 0, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn matches_brute_force_on_small_images() {
        let mut rng = rng_from_seed(11);
        for trial in 0..20 {
            let n = if trial % 4 == 0 { 2 } else { 4 };
            let v: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = GridSignal::new(Dim::Two, n, v).unwrap();
            let gamma = rng.random_range(0.01..2.0);
            for degree in 0..=1 {
                for budget in [1, 2, FULL_BUDGET] {
                    let dp = solve_wedgelet(&y, gamma, degree, budget).unwrap();
                    let bf = brute_force_wedgelet(&y, gamma, degree, budget).unwrap();
                    assert!((dp.energy - bf.energy).abs() < 1e-9, "{} vs {}", dp.energy, bf.energy);
                    assert!((dp.recompute_energy(&y).unwrap() - dp.energy).abs() < 1e-9);
                    dp.validate_partition().unwrap();
                }
            }
        }
    }

    #[test]
    fn beats_random_partitions() {
        let mut rng = rng_from_seed(5);
        let y = GridSignal::from_fn_2d(16, |x, yy| {
            let edge = if 2 * yy + x > 20 { 1.0 } else { 0.0 };
            edge + 0.2 * ((x * 7 + yy * 13) % 5) as f64
        })
        .unwrap();
        let space = PolySpace::new(Dim::Two, 1).unwrap();
        let s = solve_wedgelet(&y, 0.05, 1, 16).unwrap();
        for _ in 0..200 {
            let frags = random_wedgelet_partition(16, 16, 0.5, &mut rng).unwrap();
            let other = Segmentation::from_fragments(&y, frags, 0.05, space).unwrap();
            assert!(s.energy <= other.energy + 1e-9);
        }
    }
}
