//! Wedgelet and platelet partitions of dyadic images.
//!
//! A dyadic wedgelet partition is obtained from a quadtree by replacing
//! some leaves with the two wedges cut out by a digital line. The solver
//! finds the exact minimizer of the Potts energy over all such partitions
//! for a fixed set of line directions.

pub mod brute;
pub mod geometry;
pub mod sample;
pub mod solve;
pub mod splits;

pub use brute::{brute_force_wedgelet, BRUTE_FORCE_MAX_SIDE};
pub use geometry::{
    digital_line_pixels, directions, round_half_up, DigitalLineSpec, Direction, DyadicSquare, LineAngle, Wedge,
    WedgeSide,
};
pub use sample::random_wedgelet_partition;
pub use solve::{solve_wedgelet, WedgeletConfig};
pub use splits::{count_fragments_2d, enumerate_wedge_splits, WedgeSplit};

/// Angle budget large enough to include every direction on any square.
pub const FULL_BUDGET: usize = usize::MAX >> 1;

/// Directions admissible on a square of side `j`: `max(|p|, |q|) <= min(budget, j)`.
pub fn square_directions(side: usize, angle_budget: usize) -> Vec<Direction> {
    directions(side.min(angle_budget))
}
