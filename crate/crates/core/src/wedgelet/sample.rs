//! Random admissible wedgelet partitions.

use rand::Rng;

use super::geometry::{DyadicSquare, Wedge, WedgeSide};
use super::square_directions;
use crate::error::Result;
use crate::fragment::Fragment;

/// Draw a dyadic wedgelet partition of an `n x n` grid: every square is
/// kept as a leaf, cut by a random admissible line, or split into four.
///
/// `split_prob` is the probability of a quad split on squares of side >= 2;
/// the remainder is shared equally between leaf and wedge.
pub fn random_wedgelet_partition<R: Rng + ?Sized>(
    n: usize,
    angle_budget: usize,
    split_prob: f64,
    rng: &mut R,
) -> Result<Vec<Fragment>> {
    let root = DyadicSquare::root(n)?;
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(sq) = stack.pop() {
        let dirs = square_directions(sq.side(), angle_budget);
        let u: f64 = rng.random();
        if sq.level > 0 && u < split_prob {
            stack.extend(sq.children().expect("level > 0"));
        } else if sq.level > 0 && !dirs.is_empty() && u < split_prob + 0.5 * (1.0 - split_prob) {
            let dir = dirs[rng.random_range(0..dirs.len())];
            let (lo, hi) = sq.line_range(&dir);
            let r = rng.random_range(lo..hi);
            for side in [WedgeSide::Lower, WedgeSide::Upper] {
                out.push(Fragment::Wedge(Wedge {
                    square: sq,
                    direction: dir,
                    r,
                    side,
                }));
            }
        } else {
            out.push(Fragment::Square(sq));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn samples_are_partitions() {
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let frags = random_wedgelet_partition(16, 8, 0.5, &mut rng).unwrap();
            let mut seen = vec![0u8; 256];
            for f in &frags {
                let px = f.pixels(16);
                assert!(!px.is_empty());
                for k in px {
                    seen[k] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
