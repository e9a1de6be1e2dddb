//! Digital lines, dyadic squares and wedges.
//!
//! A digital line `L^r_theta` is the set of integer points `s` with
//! `(r - 1/2) d < <s, v> <= (r + 1/2) d`, where `d = max(|cos|, |sin|)` and
//! `v` is the unit normal of the direction. For a fixed angle the lines
//! partition `Z^2`, so every pixel carries exactly one line number.
//!
//! Angles in `(-pi/4, pi/4]` are flat with `v = (-sin, cos)`; angles in
//! `(pi/4, 3pi/4]` are steep with `v = (sin, -cos)`. Pixel coordinates are the
//! 0-based grid coordinates, so dyadic squares are
//! `[(i-1) 2^q, i 2^q) x [(j-1) 2^q, j 2^q)`.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `round(x) = max{i in Z : i <= x + 1/2}`.
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Ceiling division for a positive divisor.
fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// Floor division for a positive divisor.
fn floor_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Rational line direction `(p, q)` with `gcd(p, q) = 1` and
/// `atan2(q, p)` in `(-pi/4, 3pi/4]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction {
    pub p: i64,
    pub q: i64,
}

impl Direction {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if gcd(p, q) != 1 {
            return Err(Error::Domain(format!("direction ({p}, {q}) is not a coprime pair")));
        }
        let in_range = (p > 0 && -p < q && q <= p) || (q > 0 && -q <= p && p < q);
        if !in_range {
            return Err(Error::Domain(format!(
                "direction ({p}, {q}) is outside (-pi/4, 3pi/4]"
            )));
        }
        Ok(Self { p, q })
    }

    pub fn theta(&self) -> f64 {
        (self.q as f64).atan2(self.p as f64)
    }

    pub fn is_flat(&self) -> bool {
        self.p > 0 && -self.p < self.q && self.q <= self.p
    }

    /// Line number of the integer point `(x, y)`, computed exactly.
    #[inline]
    pub fn line_number(&self, x: i64, y: i64) -> i64 {
        let (a, m) = if self.is_flat() {
            (self.p * y - self.q * x, self.p)
        } else {
            (self.q * x - self.p * y, self.q)
        };
        ceil_div(2 * a - m, 2 * m)
    }
}

/// All directions with `max(|p|, |q|) <= cap`, sorted by angle.
pub fn directions(cap: usize) -> Vec<Direction> {
    let cap = cap as i64;
    let mut out = Vec::new();
    for p in -cap..=cap {
        for q in -cap..=cap {
            if let Ok(d) = Direction::new(p, q) {
                out.push(d);
            }
        }
    }
    out.sort_by(|a, b| a.theta().total_cmp(&b.theta()));
    out
}

/// Angle of a digital line: an exact rational direction or an arbitrary real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LineAngle {
    Rational(Direction),
    Real(f64),
}

impl LineAngle {
    pub fn theta(&self) -> f64 {
        match self {
            LineAngle::Rational(d) => d.theta(),
            LineAngle::Real(t) => *t,
        }
    }

    pub fn is_flat(&self) -> bool {
        match self {
            LineAngle::Rational(d) => d.is_flat(),
            LineAngle::Real(t) => *t <= FRAC_PI_4,
        }
    }

    /// `d(theta) = max(|cos|, |sin|)`.
    pub fn d(&self) -> f64 {
        let t = self.theta();
        t.cos().abs().max(t.sin().abs())
    }

    /// Unit normal `v(theta)`.
    pub fn v(&self) -> [f64; 2] {
        let t = self.theta();
        if self.is_flat() {
            [-t.sin(), t.cos()]
        } else {
            [t.sin(), -t.cos()]
        }
    }

    /// Line number of `(x, y)` from the strip definition.
    pub fn line_number(&self, x: i64, y: i64) -> i64 {
        match self {
            LineAngle::Rational(d) => d.line_number(x, y),
            LineAngle::Real(_) => {
                let v = self.v();
                let proj = (x as f64 * v[0] + y as f64 * v[1]) / self.d();
                (proj - 0.5).ceil() as i64
            }
        }
    }

    fn check(&self) -> Result<()> {
        let t = self.theta();
        if t > -FRAC_PI_4 && t <= 3.0 * FRAC_PI_4 {
            Ok(())
        } else {
            Err(Error::Domain(format!("angle {t} outside (-pi/4, 3pi/4]")))
        }
    }
}

/// The digital line `L^r_theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DigitalLineSpec {
    pub angle: LineAngle,
    pub r: i64,
}

impl DigitalLineSpec {
    pub fn new(angle: LineAngle, r: i64) -> Result<Self> {
        angle.check()?;
        Ok(Self { angle, r })
    }

    /// Strip membership test.
    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.angle.line_number(x, y) == self.r
    }
}

/// Pixels of `L^r_theta` inside `square`, from the explicit parametrization
/// `(x, r + round(x tan theta))` (flat) or `(r + round(y cot theta), y)` (steep).
pub fn digital_line_pixels(spec: &DigitalLineSpec, square: &DyadicSquare) -> Vec<(i64, i64)> {
    let (x0, y0) = (square.x0() as i64, square.y0() as i64);
    let side = square.side() as i64;
    let inside = |x: i64, y: i64| x >= x0 && x < x0 + side && y >= y0 && y < y0 + side;
    let mut out = Vec::new();
    if spec.angle.is_flat() {
        for x in x0..x0 + side {
            let y = spec.r
                + match spec.angle {
                    // round(x q / p) = floor((2 x q + p) / (2 p)), p > 0
                    LineAngle::Rational(d) => floor_div(2 * x * d.q + d.p, 2 * d.p),
                    LineAngle::Real(t) => round_half_up(x as f64 * t.tan()),
                };
            if inside(x, y) {
                out.push((x, y));
            }
        }
    } else {
        for y in y0..y0 + side {
            let x = spec.r
                + match spec.angle {
                    LineAngle::Rational(d) => floor_div(2 * y * d.p + d.q, 2 * d.q),
                    LineAngle::Real(t) => round_half_up(y as f64 / t.tan()),
                };
            if inside(x, y) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Dyadic square of level `q` with 1-based indices `(i, j)`: pixel extent
/// `[(i-1) 2^q, i 2^q) x [(j-1) 2^q, j 2^q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub level: u32,
    pub i: usize,
    pub j: usize,
}

impl DyadicSquare {
    pub fn new(level: u32, i: usize, j: usize) -> Result<Self> {
        if i == 0 || j == 0 {
            return Err(Error::Domain("dyadic square indices are 1-based".into()));
        }
        Ok(Self { level, i, j })
    }

    pub fn root(n: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::Domain(format!("n = {n} is not a power of two")));
        }
        Ok(Self {
            level: n.trailing_zeros(),
            i: 1,
            j: 1,
        })
    }

    pub fn side(&self) -> usize {
        1 << self.level
    }

    pub fn x0(&self) -> usize {
        (self.i - 1) * self.side()
    }

    pub fn y0(&self) -> usize {
        (self.j - 1) * self.side()
    }

    pub fn fits_in(&self, n: usize) -> bool {
        self.i >= 1 && self.j >= 1 && self.x0() + self.side() <= n && self.y0() + self.side() <= n
    }

    /// The four sub-squares, ordered by `(j, i)`.
    pub fn children(&self) -> Option<[DyadicSquare; 4]> {
        if self.level == 0 {
            return None;
        }
        let l = self.level - 1;
        let (i, j) = (2 * self.i - 1, 2 * self.j - 1);
        Some([
            DyadicSquare { level: l, i, j },
            DyadicSquare { level: l, i: i + 1, j },
            DyadicSquare { level: l, i, j: j + 1 },
            DyadicSquare { level: l, i: i + 1, j: j + 1 },
        ])
    }

    /// Row-major pixel indices on a grid of side `n`.
    pub fn pixels(&self, n: usize) -> Vec<usize> {
        let (x0, y0, s) = (self.x0(), self.y0(), self.side());
        (y0..y0 + s)
            .flat_map(|y| (x0..x0 + s).map(move |x| y * n + x))
            .collect()
    }

    /// Pixel coordinates in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = (i64, i64)> {
        let (x0, y0, s) = (self.x0() as i64, self.y0() as i64, self.side() as i64);
        (y0..y0 + s).flat_map(move |y| (x0..x0 + s).map(move |x| (x, y)))
    }

    /// Smallest and largest line number met by the square.
    pub fn line_range(&self, dir: &Direction) -> (i64, i64) {
        let (x0, y0) = (self.x0() as i64, self.y0() as i64);
        let s = self.side() as i64 - 1;
        let corners = [(x0, y0), (x0 + s, y0), (x0, y0 + s), (x0 + s, y0 + s)];
        let nums = corners.map(|(x, y)| dir.line_number(x, y));
        (*nums.iter().min().unwrap(), *nums.iter().max().unwrap())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WedgeSide {
    /// `union_{k <= r} L^k ∩ Q`
    Lower,
    /// `union_{k > r} L^k ∩ Q`
    Upper,
}

/// One half of a wedge split of a dyadic square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Wedge {
    pub square: DyadicSquare,
    pub direction: Direction,
    pub r: i64,
    pub side: WedgeSide,
}

impl Wedge {
    pub fn contains(&self, x: i64, y: i64) -> bool {
        let k = self.direction.line_number(x, y);
        match self.side {
            WedgeSide::Lower => k <= self.r,
            WedgeSide::Upper => k > self.r,
        }
    }

    pub fn pixels(&self, n: usize) -> Vec<usize> {
        self.square
            .coords()
            .filter(|&(x, y)| self.contains(x, y))
            .map(|(x, y)| y as usize * n + x as usize)
            .collect()
    }

    pub fn complement(&self) -> Wedge {
        Wedge {
            side: match self.side {
                WedgeSide::Lower => WedgeSide::Upper,
                WedgeSide::Upper => WedgeSide::Lower,
            },
            ..*self
        }
    }
}
