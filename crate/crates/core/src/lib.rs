//! Exact complexity-penalized least squares on interval and wedgelet
//! partitions.
//!
//! The estimator minimizes the Potts energy `gamma * #pieces + ||f_P - y||^2`
//! over all admissible segmentations: interval partitions of a 1D signal
//! ([`potts1d`]) or dyadic wedgelet/platelet partitions of an image
//! ([`wedgelet`]). Around the solvers sit ground-truth generators
//! ([`signals`]), sub-Gaussian noise tools ([`noise`]) and an experiment
//! harness for convergence rates ([`bench`]).

pub mod bench;
pub mod error;
pub mod fragment;
pub mod grid;
pub mod io;
pub mod noise;
pub mod polyfit;
pub mod potts1d;
pub mod rng;
pub mod segmentation;
pub mod signals;
pub mod wedgelet;

pub use error::{Error, Result};
pub use fragment::{Fragment, Interval};
pub use grid::{ContinuousField, Dim, GridSignal};
pub use polyfit::{FitResult, MomentTable, PolySpace};
pub use potts1d::{brute_force_potts_1d, count_fragments_1d, solve_potts_1d};
pub use segmentation::Segmentation;
pub use wedgelet::{brute_force_wedgelet, count_fragments_2d, solve_wedgelet};
