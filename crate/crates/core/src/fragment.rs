//! Admissible fragments: discrete intervals, dyadic squares and wedges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Dim;
use crate::wedgelet::geometry::{DyadicSquare, Wedge};

/// Discrete interval `[lo, hi]` of `{1, .., n}` (1-based, inclusive).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Fragment {
    Interval(Interval),
    Square(DyadicSquare),
    Wedge(Wedge),
}

impl Fragment {
    pub fn dim(&self) -> Dim {
        match self {
            Fragment::Interval(_) => Dim::One,
            _ => Dim::Two,
        }
    }

    /// Linear (row-major, 0-based) indices of the pixels of the fragment on a
    /// grid of side `n`, in ascending order.
    pub fn pixels(&self, n: usize) -> Vec<usize> {
        match self {
            Fragment::Interval(iv) => (iv.lo - 1..iv.hi).collect(),
            Fragment::Square(sq) => sq.pixels(n),
            Fragment::Wedge(w) => w.pixels(n),
        }
    }

    pub fn check_within(&self, n: usize) -> Result<()> {
        let ok = match self {
            Fragment::Interval(iv) => iv.hi <= n,
            Fragment::Square(sq) => sq.fits_in(n),
            Fragment::Wedge(w) => w.square.fits_in(n),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("{self:?} does not fit a grid of side {n}")))
        }
    }
}
