//! Exhaustive minimization over wedgelet partitions of tiny images.

use std::collections::{BTreeSet, HashMap};

use super::geometry::{digital_line_pixels, DigitalLineSpec, DyadicSquare, LineAngle, Wedge, WedgeSide};
use super::square_directions;
use crate::error::{Error, Result};
use crate::fragment::Fragment;
use crate::grid::{Dim, GridSignal};
use crate::polyfit::{fit_pixels, PolySpace};
use crate::segmentation::Segmentation;

pub const BRUTE_FORCE_MAX_SIDE: usize = 4;

/// A fragment together with its pixel set as found by the line parametrization.
type Piece = (Fragment, Vec<usize>);

/// Distinct wedge splits of `sq` built by stacking parametrized lines.
fn param_splits(sq: &DyadicSquare, n: usize, budget: usize) -> Vec<(Piece, Piece)> {
    let all: BTreeSet<(i64, i64)> = sq.coords().collect();
    let first = *all.iter().next().expect("nonempty square");
    let span = 4 * (n as i64 + 1);
    let to_idx = |s: &BTreeSet<(i64, i64)>| -> Vec<usize> {
        let mut v: Vec<usize> = s.iter().map(|&(x, y)| y as usize * n + x as usize).collect();
        v.sort();
        v
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for dir in square_directions(sq.side(), budget) {
        let mut lower = BTreeSet::new();
        for r in -span..=span {
            let spec = DigitalLineSpec::new(LineAngle::Rational(dir), r).expect("valid direction");
            lower.extend(digital_line_pixels(&spec, sq));
            if lower.is_empty() || lower.len() == all.len() {
                continue;
            }
            let upper: BTreeSet<_> = all.difference(&lower).copied().collect();
            let key = if lower.contains(&first) { to_idx(&lower) } else { to_idx(&upper) };
            if !seen.insert(key) {
                continue;
            }
            let wedge = |side| {
                Fragment::Wedge(Wedge {
                    square: *sq,
                    direction: dir,
                    r,
                    side,
                })
            };
            out.push(((wedge(WedgeSide::Lower), to_idx(&lower)), (wedge(WedgeSide::Upper), to_idx(&upper))));
        }
    }
    out
}

/// All admissible partitions of `sq` as lists of pieces.
fn partitions(sq: &DyadicSquare, n: usize, budget: usize) -> Vec<Vec<Piece>> {
    let mut out = vec![vec![(Fragment::Square(*sq), sq.pixels(n))]];
    for (lo, up) in param_splits(sq, n, budget) {
        out.push(vec![lo, up]);
    }
    if let Some(kids) = sq.children() {
        let mut acc: Vec<Vec<Piece>> = vec![Vec::new()];
        for kid in &kids {
            let sub = partitions(kid, n, budget);
            acc = acc
                .iter()
                .flat_map(|a| {
                    sub.iter().map(move |b| {
                        let mut v = a.clone();
                        v.extend(b.iter().cloned());
                        v
                    })
                })
                .collect();
        }
        out.extend(acc);
    }
    out
}

/// Enumerate every dyadic wedgelet partition (leaf, each distinct wedge
/// split, or the product of the children's partitions) and keep the cheapest;
/// ties go to fewer pieces. Fits are computed pixel by pixel.
pub fn brute_force_wedgelet(y: &GridSignal, gamma: f64, degree: usize, angle_budget: usize) -> Result<Segmentation> {
    if y.dim() != Dim::Two {
        return Err(Error::Dimension("wedgelet brute force needs a 2D image".into()));
    }
    let n = y.side();
    if n > BRUTE_FORCE_MAX_SIDE {
        return Err(Error::Refused(format!(
            "exhaustive wedgelet search supports n <= {BRUTE_FORCE_MAX_SIDE}, got {n}"
        )));
    }
    let root = DyadicSquare::root(n)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    let space = PolySpace::new(Dim::Two, degree)?;
    let mut rss_cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut best: Option<(f64, Vec<Fragment>)> = None;
    for part in partitions(&root, n, angle_budget) {
        let mut e = gamma * part.len() as f64;
        for (_, px) in &part {
            let r = match rss_cache.get(px) {
                Some(r) => *r,
                None => {
                    let r = fit_pixels(y, px, space)?.rss;
                    rss_cache.insert(px.clone(), r);
                    r
                }
            };
            e += r;
        }
        let better = match &best {
            None => true,
            Some((be, bf)) => {
                let tol = 1e-12 * (1.0 + be.abs());
                e < be - tol || (e <= be + tol && part.len() < bf.len())
            }
        };
        if better {
            best = Some((e, part.into_iter().map(|p| p.0).collect()));
        }
    }
    let (_, frags) = best.expect("the root leaf is always admissible");
    Segmentation::from_fragments(y, frags, gamma, space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wedgelet::FULL_BUDGET;

    #[test]
    fn constant_two_by_two() {
        let y = GridSignal::from_fn_2d(2, |_, _| 0.7).unwrap();
        let s = brute_force_wedgelet(&y, 0.3, 0, FULL_BUDGET).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.energy - 0.3).abs() < 1e-12);
    }

    #[test]
    fn refuses_large_images() {
        let y = GridSignal::zeros(Dim::Two, 8);
        assert!(matches!(brute_force_wedgelet(&y, 1.0, 0, 2), Err(Error::Refused(_))));
    }

    #[test]
    fn large_gamma_gives_root_leaf() {
        let y = GridSignal::from_fn_2d(4, |x, yy| ((x * 3 + yy * 5) % 7) as f64).unwrap();
        let s = brute_force_wedgelet(&y, 1e6, 0, FULL_BUDGET).unwrap();
        assert_eq!(s.len(), 1);
        assert!(matches!(s.pieces[0].fragment, Fragment::Square(_)));
    }
}
