//! Segmentations: a partition into fragments with one polynomial per fragment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragment::Fragment;
use crate::grid::{Dim, GridSignal};
use crate::polyfit::{fit_pixels, pixel_coord, FitResult, PolySpace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub fragment: Fragment,
    pub fit: FitResult,
}

/// The pair `(partition, piecewise polynomial)` together with the Potts energy
/// `gamma * #pieces + sum rss` it attains on the data it was fitted to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub dim: Dim,
    pub side: usize,
    pub gamma: f64,
    pub energy: f64,
    pub pieces: Vec<Piece>,
}

pub type Segmentation1D = Segmentation;
pub type WedgeletSegmentation = Segmentation;

impl Segmentation {
    /// Fit every fragment of `fragments` to `y` and total the energy.
    pub fn from_fragments(y: &GridSignal, fragments: Vec<Fragment>, gamma: f64, space: PolySpace) -> Result<Self> {
        let mut pieces = Vec::with_capacity(fragments.len());
        for fragment in fragments {
            fragment.check_within(y.side())?;
            let fit = fit_pixels(y, &fragment.pixels(y.side()), space)?;
            pieces.push(Piece { fragment, fit });
        }
        let energy = gamma * pieces.len() as f64 + pieces.iter().map(|p| p.fit.rss).sum::<f64>();
        let seg = Self {
            dim: y.dim(),
            side: y.side(),
            gamma,
            energy,
            pieces,
        };
        seg.validate_partition()?;
        Ok(seg)
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn fragments(&self) -> impl Iterator<Item = &Fragment> {
        self.pieces.iter().map(|p| &p.fragment)
    }

    /// Every pixel covered exactly once.
    pub fn validate_partition(&self) -> Result<()> {
        let mut seen = vec![false; self.dim.volume(self.side)];
        for piece in &self.pieces {
            let px = piece.fragment.pixels(self.side);
            if px.is_empty() {
                return Err(Error::Domain(format!("empty fragment {:?}", piece.fragment)));
            }
            for k in px {
                if std::mem::replace(&mut seen[k], true) {
                    return Err(Error::Domain(format!("pixel {k} covered twice")));
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(k) => Err(Error::Domain(format!("pixel {k} not covered"))),
            None => Ok(()),
        }
    }

    /// The piecewise polynomial `f_P` on the grid.
    pub fn render(&self) -> GridSignal {
        let mut values = vec![0.0; self.dim.volume(self.side)];
        for piece in &self.pieces {
            for k in piece.fragment.pixels(self.side) {
                values[k] = piece.fit.eval(pixel_coord(self.dim, self.side, k));
            }
        }
        GridSignal::new(self.dim, self.side, values).expect("rendered fits are finite")
    }

    /// `gamma * #pieces + ||f_P - y||^2`, evaluated from the stored coefficients.
    pub fn recompute_energy(&self, y: &GridSignal) -> Result<f64> {
        let r = self.render().sub(y)?;
        Ok(self.gamma * self.len() as f64 + r.norm_sq())
    }

    /// `||pi_P xi||^2 = sum_P (||xi_P||^2 - rss_P(xi))`: squared norm of the
    /// projection of `xi` onto the piecewise polynomials over this partition.
    pub fn projection_norm_sq(&self, xi: &GridSignal) -> Result<f64> {
        partition_projection_norm_sq(xi, self.fragments(), self.pieces.first().map(|p| p.fit.space))
    }
}

/// `||pi_P xi||^2` for a partition given as a fragment list.
pub fn partition_projection_norm_sq<'a>(
    xi: &GridSignal,
    fragments: impl Iterator<Item = &'a Fragment>,
    space: Option<PolySpace>,
) -> Result<f64> {
    let Some(space) = space else { return Ok(0.0) };
    let mut total = 0.0;
    for f in fragments {
        let px = f.pixels(xi.side());
        let sq: f64 = px.iter().map(|&k| xi.values()[k].powi(2)).sum();
        total += sq - fit_pixels(xi, &px, space)?.rss;
    }
    Ok(total.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragment::Interval;

    #[test]
    fn from_fragments_and_render() {
        let y = GridSignal::from_vec_1d(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let space = PolySpace::new(Dim::One, 0).unwrap();
        let frags = vec![
            Fragment::Interval(Interval::new(1, 2).unwrap()),
            Fragment::Interval(Interval::new(3, 4).unwrap()),
        ];
        let seg = Segmentation::from_fragments(&y, frags, 0.1, space).unwrap();
        assert!((seg.energy - 0.2).abs() < 1e-12);
        assert_eq!(seg.render().values(), y.values());
        assert!((seg.recompute_energy(&y).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn overlapping_fragments_rejected() {
        let y = GridSignal::from_vec_1d(vec![0.0; 4]).unwrap();
        let space = PolySpace::new(Dim::One, 0).unwrap();
        let frags = vec![
            Fragment::Interval(Interval::new(1, 3).unwrap()),
            Fragment::Interval(Interval::new(3, 4).unwrap()),
        ];
        assert!(Segmentation::from_fragments(&y, frags, 1.0, space).is_err());
    }

    #[test]
    fn single_segment_projection_is_mean_energy() {
        let xi = GridSignal::from_vec_1d(vec![1.0, -2.0, 4.0, 0.5]).unwrap();
        let space = PolySpace::new(Dim::One, 0).unwrap();
        let frag = [Fragment::Interval(Interval::new(1, 4).unwrap())];
        let p = partition_projection_norm_sq(&xi, frag.iter(), Some(space)).unwrap();
        assert!((p - 3.5f64.powi(2) / 4.0).abs() < 1e-12);
    }
}
