//! Enumeration and counting of wedge splits.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use rayon::prelude::*;

use super::geometry::{Direction, DyadicSquare};
use super::square_directions;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A bipartition of a dyadic square by the digital line `L^r` of `direction`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeSplit {
    pub direction: Direction,
    pub r: i64,
    /// `union_{k <= r} L^k ∩ Q`, sorted row-major.
    pub lower: Vec<(i64, i64)>,
    /// `union_{k > r} L^k ∩ Q`, sorted row-major.
    pub upper: Vec<(i64, i64)>,
}

/// Distinct wedge splits of `square`.
///
/// Two `(theta, r)` pairs producing the same unordered bipartition are
/// reported once (the first in angle, then offset order).
pub fn enumerate_wedge_splits(square: &DyadicSquare, angle_budget: usize) -> Vec<WedgeSplit> {
    let side = square.side();
    if side < 2 {
        return Vec::new();
    }
    let coords: Vec<(i64, i64)> = square.coords().collect();
    let first = coords[0];
    let mut seen: BTreeSet<Vec<(i64, i64)>> = BTreeSet::new();
    let mut out = Vec::new();
    for dir in square_directions(side, angle_budget) {
        let (lo, hi) = square.line_range(&dir);
        for r in lo..hi {
            let (lower, upper): (Vec<_>, Vec<_>) = coords.iter().partition(|&&(x, y)| dir.line_number(x, y) <= r);
            if lower.is_empty() || upper.is_empty() {
                continue;
            }
            let key = if lower.contains(&first) { lower.clone() } else { upper.clone() };
            if seen.insert(key) {
                out.push(WedgeSplit {
                    direction: dir,
                    r,
                    lower,
                    upper,
                });
            }
        }
    }
    out
}

/// Number of distinct bipartitions of `square` by 128-bit Zobrist hashing of
/// the lower wedge.
fn distinct_split_count(square: &DyadicSquare, angle_budget: usize, keys: &[u128]) -> usize {
    let side = square.side();
    if side < 2 {
        return 0;
    }
    let (x0, y0) = (square.x0() as i64, square.y0() as i64);
    let s = side as i64;
    let whole = keys.iter().fold(0u128, |h, k| h ^ k);
    let mut seen: HashSet<u128> = HashSet::new();
    let mut buckets: Vec<u128> = Vec::new();
    let mut filled: Vec<bool> = Vec::new();
    for dir in square_directions(side, angle_budget) {
        let (lo, hi) = square.line_range(&dir);
        let len = (hi - lo + 1) as usize;
        buckets.clear();
        buckets.resize(len, 0);
        filled.clear();
        filled.resize(len, false);
        for dy in 0..s {
            for dx in 0..s {
                let k = (dir.line_number(x0 + dx, y0 + dy) - lo) as usize;
                buckets[k] ^= keys[(dy * s + dx) as usize];
                filled[k] = true;
            }
        }
        let mut h = 0u128;
        for k in 0..len - 1 {
            h ^= buckets[k];
            if filled[k] {
                seen.insert(h.min(h ^ whole));
            }
        }
    }
    seen.len()
}

/// Number of distinct fragments: every dyadic square plus both wedges of every
/// distinct split, with splits identified per square.
pub fn count_fragments_2d(n: usize, angle_budget: usize) -> Result<u64> {
    if !n.is_power_of_two() {
        return Err(Error::Domain(format!("n = {n} is not a power of two")));
    }
    let top = n.trailing_zeros();
    let mut total = 0u64;
    for level in 0..=top {
        let side = 1usize << level;
        let per_axis = n / side;
        let mut rng = rng_from_seed(0x2B1D ^ level as u64);
        let keys: Vec<u128> = (0..side * side).map(|_| rng.random()).collect();
        let level_total: u64 = (0..per_axis * per_axis)
            .into_par_iter()
            .map(|k| {
                let sq = DyadicSquare {
                    level,
                    i: k % per_axis + 1,
                    j: k / per_axis + 1,
                };
                1 + 2 * distinct_split_count(&sq, angle_budget, &keys) as u64
            })
            .sum();
        total += level_total;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wedgelet::geometry::{digital_line_pixels, DigitalLineSpec, LineAngle};
    use crate::wedgelet::FULL_BUDGET;

    /// Bipartitions from the explicit line parametrization, no line numbers.
    fn param_bipartitions(sq: &DyadicSquare, budget: usize) -> BTreeSet<Vec<(i64, i64)>> {
        let all: BTreeSet<(i64, i64)> = sq.coords().collect();
        let first = *all.iter().next().unwrap();
        let mut out = BTreeSet::new();
        let span = 4 * sq.side() as i64 + 4 * (sq.x0() + sq.y0()) as i64;
        for dir in crate::wedgelet::square_directions(sq.side(), budget) {
            let mut lower = BTreeSet::new();
            for r in -span..=span {
                let spec = DigitalLineSpec::new(LineAngle::Rational(dir), r).unwrap();
                lower.extend(digital_line_pixels(&spec, sq));
                if lower.is_empty() || lower.len() == all.len() {
                    continue;
                }
                let part: BTreeSet<_> = if lower.contains(&first) {
                    lower.clone()
                } else {
                    all.difference(&lower).copied().collect()
                };
                out.insert(part.into_iter().collect());
            }
        }
        out
    }

    #[test]
    fn unit_square_has_no_split() {
        assert!(enumerate_wedge_splits(&DyadicSquare::new(0, 3, 2).unwrap(), FULL_BUDGET).is_empty());
    }

    #[test]
    fn splits_match_parametrization_oracle() {
        for sq in [
            DyadicSquare::new(1, 1, 1).unwrap(),
            DyadicSquare::new(1, 2, 1).unwrap(),
            DyadicSquare::new(2, 2, 2).unwrap(),
            DyadicSquare::new(3, 1, 2).unwrap(),
        ] {
            for budget in [1, 2, 3, FULL_BUDGET] {
                let splits = enumerate_wedge_splits(&sq, budget);
                let ours: BTreeSet<_> = splits
                    .iter()
                    .map(|s| {
                        let mut part = if s.lower.contains(&(sq.x0() as i64, sq.y0() as i64)) {
                            s.lower.clone()
                        } else {
                            s.upper.clone()
                        };
                        part.sort();
                        part
                    })
                    .collect();
                assert_eq!(ours.len(), splits.len());
                assert_eq!(ours, param_bipartitions(&sq, budget), "{sq:?} budget {budget}");
                let mut rng = rng_from_seed(1);
                let keys: Vec<u128> = (0..sq.side() * sq.side()).map(|_| rng.random()).collect();
                assert_eq!(distinct_split_count(&sq, budget, &keys), splits.len());
            }
        }
    }

    #[test]
    fn splits_are_complementary() {
        let sq = DyadicSquare::new(2, 1, 1).unwrap();
        for s in enumerate_wedge_splits(&sq, FULL_BUDGET) {
            assert!(!s.lower.is_empty() && !s.upper.is_empty());
            assert_eq!(s.lower.len() + s.upper.len(), 16);
            assert!(s.lower.iter().all(|p| !s.upper.contains(p)));
        }
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_fragments_2d(1, FULL_BUDGET).unwrap(), 1);
        let two = enumerate_wedge_splits(&DyadicSquare::root(2).unwrap(), FULL_BUDGET).len() as u64;
        assert_eq!(count_fragments_2d(2, FULL_BUDGET).unwrap(), 5 + 2 * two);
        assert!(count_fragments_2d(6, 4).is_err());
    }
}
