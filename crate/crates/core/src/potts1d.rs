//! Exact minimization of the 1D Potts functional over interval partitions.

use crate::error::{Error, Result};
use crate::fragment::{Fragment, Interval};
use crate::grid::{Dim, GridSignal};
use crate::polyfit::{fit_pixels, MomentTable1D, PolySpace};
use crate::segmentation::{Piece, Segmentation};

/// Largest `n` accepted by [`brute_force_potts_1d`].
pub const BRUTE_FORCE_MAX_N: usize = 16;

fn check_input(y: &GridSignal, gamma: f64) -> Result<()> {
    if y.dim() != Dim::One {
        return Err(Error::Dimension("1D Potts needs a 1D signal".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// Minimizer of `gamma * #segments + sum rss` by dynamic programming.
///
/// `B[j] = min_i B[i-1] + gamma + rss(i, j)`; at equal cost the larger `i`
/// (shorter last segment) wins.
pub fn solve_potts_1d(y: &GridSignal, gamma: f64, degree: usize) -> Result<Segmentation> {
    check_input(y, gamma)?;
    let space = PolySpace::new(Dim::One, degree)?;
    let table = MomentTable1D::build(y, space)?;
    let n = y.side();
    let mut best = vec![0.0; n + 1];
    let mut arg = vec![0usize; n + 1];
    for j in 1..=n {
        let mut b = f64::INFINITY;
        let mut a = j;
        for i in (1..=j).rev() {
            let base = best[i - 1] + gamma;
            // rss >= 0, so this start cannot beat the incumbent
            if base >= b {
                continue;
            }
            let c = base + table.rss(i, j);
            if c < b {
                b = c;
                a = i;
            }
        }
        best[j] = b;
        arg[j] = a;
    }
    let mut intervals = Vec::new();
    let mut j = n;
    while j > 0 {
        intervals.push(Interval { lo: arg[j], hi: j });
        j = arg[j] - 1;
    }
    intervals.reverse();
    let pieces = intervals
        .into_iter()
        .map(|iv| {
            Ok(Piece {
                fragment: Fragment::Interval(iv),
                fit: table.fit(iv)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Segmentation {
        dim: Dim::One,
        side: n,
        gamma,
        energy: best[n],
        pieces,
    })
}

/// Exhaustive minimization over all `2^(n-1)` interval partitions with
/// per-segment least squares from scratch.
///
/// Ties go to fewer segments, then to the lexicographically earliest
/// breakpoints.
pub fn brute_force_potts_1d(y: &GridSignal, gamma: f64, degree: usize) -> Result<Segmentation> {
    check_input(y, gamma)?;
    let n = y.side();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Refused(format!(
            "brute force enumerates 2^(n-1) partitions; n = {n} exceeds {BRUTE_FORCE_MAX_N}"
        )));
    }
    let space = PolySpace::new(Dim::One, degree)?;
    let mut rss = vec![vec![0.0; n + 1]; n + 1];
    for lo in 1..=n {
        for hi in lo..=n {
            rss[lo][hi] = fit_pixels(y, &(lo - 1..hi).collect::<Vec<_>>(), space)?.rss;
        }
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1u32 << (n - 1)) {
        // bit b set: a segment ends at b + 1
        let mut ends: Vec<usize> = (0..n - 1).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        ends.push(n);
        let mut lo = 1;
        let mut e = 0.0;
        for &hi in &ends {
            e += gamma + rss[lo][hi];
            lo = hi + 1;
        }
        let better = match &best {
            None => true,
            Some((be, bends)) => {
                let tol = 1e-12 * (1.0 + be.abs());
                if e < be - tol {
                    true
                } else if e <= be + tol {
                    (ends.len(), &ends) < (bends.len(), bends)
                } else {
                    false
                }
            }
        };
        if better {
            best = Some((e, ends));
        }
    }
    let (_, ends) = best.expect("at least one partition");
    let mut lo = 1;
    let mut frags = Vec::new();
    for hi in ends {
        frags.push(Fragment::Interval(Interval { lo, hi }));
        lo = hi + 1;
    }
    Segmentation::from_fragments(y, frags, gamma, space)
}

/// `|R^n| = n (n + 1) / 2`, the number of discrete intervals.
pub fn count_fragments_1d(n: u64) -> u64 {
    n * (n + 1) / 2
}
