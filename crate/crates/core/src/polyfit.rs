//! Polynomial regression spaces on fragments.
//!
//! Two routes compute a least-squares fit: [`fit_pixels`] solves the normal
//! equations from an explicit pixel list, and [`MomentTable`] answers interval
//! and rectangle queries in O(1) from prefix sums. The wedgelet solver feeds
//! [`Moments2D`] accumulated along digital lines into the same algebra.
//!
//! Pixel coordinates: 1D pixel `k` (0-based storage) has coordinate `k + 1`;
//! 2D pixel `(x, y)` has coordinate `(x, y)` (0-based).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragment::{Fragment, Interval};
use crate::grid::{Dim, GridSignal};

/// Relative eigenvalue cutoff of the pseudo-inverse used for rank-deficient
/// normal equations.
pub const DEFAULT_PINV_CUTOFF: f64 = 1e-10;

pub const MAX_DEGREE_1D: usize = 4;
pub const MAX_DEGREE_2D: usize = 1;

/// Polynomials of degree `<= degree`: `1, x, .., x^p` in 1D, `1, x, y` in 2D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolySpace {
    dim: Dim,
    degree: usize,
}

impl PolySpace {
    pub fn new(dim: Dim, degree: usize) -> Result<Self> {
        let cap = match dim {
            Dim::One => MAX_DEGREE_1D,
            Dim::Two => MAX_DEGREE_2D,
        };
        if degree > cap {
            return Err(Error::Domain(format!(
                "degree {degree} exceeds the {}D cap of {cap}",
                dim.as_usize()
            )));
        }
        Ok(Self { dim, degree })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dimension `D` of the space.
    pub fn dimension(&self) -> usize {
        match self.dim {
            Dim::One => self.degree + 1,
            Dim::Two => 1 + 2 * self.degree,
        }
    }

    fn basis(&self, t: [f64; 2], out: &mut [f64]) {
        match self.dim {
            Dim::One => {
                let mut acc = 1.0;
                for slot in out.iter_mut() {
                    *slot = acc;
                    acc *= t[0];
                }
            }
            Dim::Two => {
                out[0] = 1.0;
                if self.degree == 1 {
                    out[1] = t[0];
                    out[2] = t[1];
                }
            }
        }
    }
}

/// Affine coordinate frame: local `t = (coord - center) / scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub center: [f64; 2],
    pub scale: [f64; 2],
}

impl LocalFrame {
    pub const IDENTITY: LocalFrame = LocalFrame {
        center: [0.0, 0.0],
        scale: [1.0, 1.0],
    };

    fn local(&self, c: [f64; 2]) -> [f64; 2] {
        [
            (c[0] - self.center[0]) / self.scale[0],
            (c[1] - self.center[1]) / self.scale[1],
        ]
    }
}

/// Least-squares polynomial fit on one fragment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub space: PolySpace,
    /// Coefficients in the basis evaluated at local coordinates of `frame`.
    pub coefficients: Vec<f64>,
    pub frame: LocalFrame,
    pub rss: f64,
    pub pixel_count: usize,
}

impl FitResult {
    /// Evaluate the fitted polynomial at pixel coordinates.
    pub fn eval(&self, coord: [f64; 2]) -> f64 {
        let mut b = vec![0.0; self.coefficients.len()];
        self.space.basis(self.frame.local(coord), &mut b);
        b.iter().zip(&self.coefficients).map(|(x, c)| x * c).sum()
    }
}

pub fn pixel_coord(dim: Dim, n: usize, k: usize) -> [f64; 2] {
    match dim {
        Dim::One => [(k + 1) as f64, 0.0],
        Dim::Two => [(k % n) as f64, (k / n) as f64],
    }
}

/// Solve `G beta = b` with a relative-cutoff eigen pseudo-inverse.
pub fn pinv_solve(g: &DMatrix<f64>, b: &DVector<f64>, cutoff: f64) -> DVector<f64> {
    pseudo_inverse(g, cutoff) * b
}

pub fn pseudo_inverse(g: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(g.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
    let inv = eig.eigenvalues.map(|l| if lmax > 0.0 && l > cutoff * lmax { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

fn centered_frame(dim: Dim, coords: &[[f64; 2]]) -> LocalFrame {
    let mut frame = LocalFrame::IDENTITY;
    let axes = dim.as_usize();
    for a in 0..axes {
        let lo = coords.iter().map(|c| c[a]).fold(f64::INFINITY, f64::min);
        let hi = coords.iter().map(|c| c[a]).fold(f64::NEG_INFINITY, f64::max);
        frame.center[a] = 0.5 * (lo + hi);
        frame.scale[a] = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    }
    frame
}

/// Least squares on an explicit pixel list with coordinates rescaled to
/// `[-1, 1]` over the fragment's bounding box.
pub fn fit_pixels(y: &GridSignal, pixels: &[usize], space: PolySpace) -> Result<FitResult> {
    fit_pixels_with(y, pixels, space, DEFAULT_PINV_CUTOFF, true)
}

pub(crate) fn fit_pixels_with(
    y: &GridSignal,
    pixels: &[usize],
    space: PolySpace,
    cutoff: f64,
    center: bool,
) -> Result<FitResult> {
    if pixels.is_empty() {
        return Err(Error::Domain("cannot fit an empty fragment".into()));
    }
    if y.dim() != space.dim() {
        return Err(Error::Dimension("signal and polynomial space dimensions differ".into()));
    }
    let n = y.side();
    let coords: Vec<[f64; 2]> = pixels.iter().map(|&k| pixel_coord(y.dim(), n, k)).collect();
    let frame = if center {
        centered_frame(y.dim(), &coords)
    } else {
        LocalFrame::IDENTITY
    };
    let d = space.dimension();
    let mut g = DMatrix::<f64>::zeros(d, d);
    let mut b = DVector::<f64>::zeros(d);
    let mut row = vec![0.0; d];
    for (c, &k) in coords.iter().zip(pixels) {
        space.basis(frame.local(*c), &mut row);
        let z = y.values()[k];
        for i in 0..d {
            b[i] += row[i] * z;
            for j in 0..d {
                g[(i, j)] += row[i] * row[j];
            }
        }
    }
    let beta = pinv_solve(&g, &b, cutoff);
    let mut rss = 0.0;
    for (c, &k) in coords.iter().zip(pixels) {
        space.basis(frame.local(*c), &mut row);
        let fit: f64 = row.iter().zip(beta.iter()).map(|(r, c)| r * c).sum();
        rss += (y.values()[k] - fit).powi(2);
    }
    Ok(FitResult {
        space,
        coefficients: beta.iter().copied().collect(),
        frame,
        rss,
        pixel_count: pixels.len(),
    })
}

/// Fit on a fragment by scanning its pixels.
pub fn fit_fragment(y: &GridSignal, fragment: &Fragment, space: PolySpace) -> Result<FitResult> {
    fragment.check_within(y.side())?;
    fit_pixels(y, &fragment.pixels(y.side()), space)
}

/// Prefix/summed-area tables of monomial-weighted data.
#[derive(Clone, Debug)]
pub enum MomentTable {
    OneD(MomentTable1D),
    TwoD(MomentTable2D),
}

impl MomentTable {
    pub fn build(y: &GridSignal, space: PolySpace) -> Result<Self> {
        match y.dim() {
            Dim::One => Ok(Self::OneD(MomentTable1D::build(y, space)?)),
            Dim::Two => Ok(Self::TwoD(MomentTable2D::build(y, space)?)),
        }
    }

    /// Fit from the table; available for intervals (1D) and dyadic squares (2D).
    pub fn fit(&self, fragment: &Fragment) -> Result<FitResult> {
        match (self, fragment) {
            (Self::OneD(t), Fragment::Interval(iv)) => t.fit(*iv),
            (Self::TwoD(t), Fragment::Square(sq)) => {
                if !sq.fits_in(t.side) {
                    return Err(Error::Domain(format!("{sq:?} outside grid")));
                }
                Ok(t.fit_rect(sq.x0(), sq.y0(), sq.side(), sq.side()))
            }
            _ => Err(Error::Domain("moment tables answer interval and square queries only".into())),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// 1D prefix sums of `z * s^a` (`a <= p`), `z^2` and `s^a` (`a <= 2p`), where
/// `z` is the data minus its global mean.
#[derive(Clone, Debug)]
pub struct MomentTable1D {
    space: PolySpace,
    n: usize,
    shift: f64,
    zpow: Vec<Vec<f64>>,
    zz: Vec<f64>,
    spow: Vec<Vec<f64>>,
    /// Pseudo-inverse Gram matrix of the local basis per interval length,
    /// row-major `D x D`.
    gram_pinv: Vec<Vec<f64>>,
}

impl MomentTable1D {
    pub fn build(y: &GridSignal, space: PolySpace) -> Result<Self> {
        Self::build_with_cutoff(y, space, DEFAULT_PINV_CUTOFF)
    }

    pub fn build_with_cutoff(y: &GridSignal, space: PolySpace, cutoff: f64) -> Result<Self> {
        if y.dim() != Dim::One || space.dim() != Dim::One {
            return Err(Error::Dimension("1D moment table needs 1D data and space".into()));
        }
        let n = y.side();
        let p = space.degree();
        let shift = y.values().iter().sum::<f64>() / n as f64;
        let mut zpow = vec![vec![0.0; n + 1]; p + 1];
        let mut spow = vec![vec![0.0; n + 1]; 2 * p + 1];
        let mut zz = vec![0.0; n + 1];
        for k in 0..n {
            let s = (k + 1) as f64;
            let z = y.values()[k] - shift;
            zz[k + 1] = zz[k] + z * z;
            let mut sp = 1.0;
            for a in 0..=2 * p {
                if a <= p {
                    zpow[a][k + 1] = zpow[a][k] + z * sp;
                }
                spow[a][k + 1] = spow[a][k] + sp;
                sp *= s;
            }
        }
        let gram_pinv = Self::local_grams(n, space.dimension())
            .iter()
            .map(|g| {
                let pi = pseudo_inverse(g, cutoff);
                let d = pi.nrows();
                (0..d * d).map(|k| pi[(k / d, k % d)]).collect()
            })
            .collect();
        Ok(Self {
            space,
            n,
            shift,
            zpow,
            zz,
            spow,
            gram_pinv,
        })
    }

    /// Gram matrices of `t^a` on `t_k = (2k - (L-1)) / max(L-1, 2)`,
    /// `k = 0..L-1`, for `L = 1..=n`.
    fn local_grams(n: usize, d: usize) -> Vec<DMatrix<f64>> {
        // u-moments sum_k (2k - (L-1))^a obey U(L+2) = U(L) + 2 (L+1)^a for even a
        let na = 2 * d - 1;
        let mut prev: [Vec<f64>; 2] = [vec![0.0; na], vec![0.0; na]];
        prev[1][0] = 1.0; // L = 1: single point u = 0
        let mut out = Vec::with_capacity(n);
        for len in 1..=n {
            let u = if len <= 2 {
                let mut u = vec![0.0; na];
                if len == 1 {
                    u[0] = 1.0;
                } else {
                    for (a, slot) in u.iter_mut().enumerate() {
                        *slot = if a % 2 == 0 { 2.0 } else { 0.0 };
                    }
                }
                u
            } else {
                let base = &prev[len % 2];
                let m = (len - 1) as f64;
                base.iter()
                    .enumerate()
                    .map(|(a, &v)| if a % 2 == 0 { v + 2.0 * m.powi(a as i32) } else { 0.0 })
                    .collect()
            };
            let scale = if len >= 2 { (len - 1) as f64 } else { 2.0 };
            let mut g = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    g[(i, j)] = u[i + j] / scale.powi((i + j) as i32);
                }
            }
            out.push(g);
            prev[len % 2] = u;
        }
        out
    }

    pub fn side(&self) -> usize {
        self.n
    }

    /// `sum_{s=lo}^{hi} y_s s^a` for `a <= p`.
    pub fn weighted_sum(&self, lo: usize, hi: usize, a: usize) -> f64 {
        (self.zpow[a][hi] - self.zpow[a][lo - 1]) + self.shift * (self.spow[a][hi] - self.spow[a][lo - 1])
    }

    /// `sum_{s=lo}^{hi} y_s^2`.
    pub fn sum_sq(&self, lo: usize, hi: usize) -> f64 {
        let l = (hi - lo + 1) as f64;
        let s0 = self.zpow[0][hi] - self.zpow[0][lo - 1];
        (self.zz[hi] - self.zz[lo - 1]) + 2.0 * self.shift * s0 + self.shift * self.shift * l
    }

    fn local_frame(lo: usize, hi: usize) -> LocalFrame {
        let len = hi - lo + 1;
        let h = if len >= 2 { 0.5 * (len - 1) as f64 } else { 1.0 };
        LocalFrame {
            center: [0.5 * (lo + hi) as f64, 0.0],
            scale: [h, 1.0],
        }
    }

    /// Local right-hand side `b_a = sum z t^a` (first `D` entries) and `sum z^2`.
    #[inline]
    fn local_rhs(&self, lo: usize, hi: usize) -> ([f64; MAX_DEGREE_1D + 1], f64) {
        let d = self.space.dimension();
        let len = hi - lo + 1;
        let c = 0.5 * (lo + hi) as f64;
        let h = if len >= 2 { 0.5 * (len - 1) as f64 } else { 1.0 };
        let mut raw = [0.0; MAX_DEGREE_1D + 1];
        for (a, slot) in raw.iter_mut().enumerate().take(d) {
            *slot = self.zpow[a][hi] - self.zpow[a][lo - 1];
        }
        let mut b = [0.0; MAX_DEGREE_1D + 1];
        let mut hpow = 1.0;
        for a in 0..d {
            let mut acc = 0.0;
            let mut cpow = 1.0; // (-c)^(a - bb), built from bb = a downwards
            for bb in (0..=a).rev() {
                acc += binomial(a, bb) * raw[bb] * cpow;
                cpow *= -c;
            }
            b[a] = acc / hpow;
            hpow *= h;
        }
        (b, self.zz[hi] - self.zz[lo - 1])
    }

    /// Residual sum of squares of the best degree-`p` fit on `[lo, hi]`.
    #[inline]
    pub fn rss(&self, lo: usize, hi: usize) -> f64 {
        let d = self.space.dimension();
        let (b, zz) = self.local_rhs(lo, hi);
        let g = &self.gram_pinv[hi - lo];
        let mut quad = 0.0;
        for i in 0..d {
            let mut row = 0.0;
            for j in 0..d {
                row += g[i * d + j] * b[j];
            }
            quad += b[i] * row;
        }
        (zz - quad).max(0.0)
    }

    pub fn fit(&self, iv: Interval) -> Result<FitResult> {
        if iv.lo == 0 || iv.hi > self.n || iv.lo > iv.hi {
            return Err(Error::Domain(format!("interval {iv:?} outside 1..={}", self.n)));
        }
        let d = self.space.dimension();
        let (b, _) = self.local_rhs(iv.lo, iv.hi);
        let g = &self.gram_pinv[iv.hi - iv.lo];
        let mut beta: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| g[i * d + j] * b[j]).sum())
            .collect();
        beta[0] += self.shift;
        Ok(FitResult {
            space: self.space,
            coefficients: beta,
            frame: Self::local_frame(iv.lo, iv.hi),
            rss: self.rss(iv.lo, iv.hi),
            pixel_count: iv.len(),
        })
    }
}

/// Raw moments of a 2D pixel set: counts, coordinate and data sums.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments2D {
    pub n: f64,
    pub sx: f64,
    pub sy: f64,
    pub sxx: f64,
    pub sxy: f64,
    pub syy: f64,
    pub sz: f64,
    pub sxz: f64,
    pub syz: f64,
    pub szz: f64,
}

impl Moments2D {
    #[inline]
    pub fn push(&mut self, x: f64, y: f64, z: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
        self.syy += y * y;
        self.sz += z;
        self.sxz += x * z;
        self.syz += y * z;
        self.szz += z * z;
    }

    #[inline]
    pub fn add(&self, o: &Moments2D) -> Moments2D {
        Moments2D {
            n: self.n + o.n,
            sx: self.sx + o.sx,
            sy: self.sy + o.sy,
            sxx: self.sxx + o.sxx,
            sxy: self.sxy + o.sxy,
            syy: self.syy + o.syy,
            sz: self.sz + o.sz,
            sxz: self.sxz + o.sxz,
            syz: self.syz + o.syz,
            szz: self.szz + o.szz,
        }
    }

    #[inline]
    pub fn sub(&self, o: &Moments2D) -> Moments2D {
        Moments2D {
            n: self.n - o.n,
            sx: self.sx - o.sx,
            sy: self.sy - o.sy,
            sxx: self.sxx - o.sxx,
            sxy: self.sxy - o.sxy,
            syy: self.syy - o.syy,
            sz: self.sz - o.sz,
            sxz: self.sxz - o.sxz,
            syz: self.syz - o.syz,
            szz: self.szz - o.szz,
        }
    }

    /// Centered second moments `(Sxx, Sxy, Syy, Sxz, Syz, Szz)`.
    fn centered(&self) -> [f64; 6] {
        let inv = 1.0 / self.n;
        [
            self.sxx - self.sx * self.sx * inv,
            self.sxy - self.sx * self.sy * inv,
            self.syy - self.sy * self.sy * inv,
            self.sxz - self.sx * self.sz * inv,
            self.syz - self.sy * self.sz * inv,
            self.szz - self.sz * self.sz * inv,
        ]
    }

    /// Slopes `(bx, by)` minimizing the centered residual, via the 2x2
    /// pseudo-inverse.
    fn slopes(c: &[f64; 6], cutoff: f64) -> [f64; 2] {
        let [a, b, d, u, v, _] = *c;
        // eigen-decomposition of [[a, b], [b, d]]
        let tr = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let (l1, l2) = (tr + disc, tr - disc);
        if l1 <= 0.0 {
            return [0.0, 0.0];
        }
        // eigenvector of l1
        let (ex, ey) = if b.abs() > 0.0 {
            let (x, y) = (l1 - d, b);
            let nrm = (x * x + y * y).sqrt();
            (x / nrm, y / nrm)
        } else if a >= d {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        let p1 = ex * u + ey * v;
        let mut bx = ex * p1 / l1;
        let mut by = ey * p1 / l1;
        if l2 > cutoff * l1 {
            let p2 = -ey * u + ex * v;
            bx += -ey * p2 / l2;
            by += ex * p2 / l2;
        }
        [bx, by]
    }

    /// Residual sum of squares of the best polynomial of `degree` (0 or 1).
    #[inline]
    pub fn rss(&self, degree: usize, cutoff: f64) -> f64 {
        if self.n < 0.5 {
            return 0.0;
        }
        let c = self.centered();
        let r = if degree == 0 {
            c[5]
        } else {
            let [bx, by] = Self::slopes(&c, cutoff);
            c[5] - bx * c[3] - by * c[4]
        };
        r.max(0.0)
    }

    /// Fit with frame centered at the pixel mean; `offset` is added to the
    /// constant coefficient and `origin` to the frame center.
    pub fn fit(&self, space: PolySpace, cutoff: f64, offset: f64, origin: [f64; 2]) -> FitResult {
        let c = self.centered();
        let mean = [self.sx / self.n, self.sy / self.n];
        let mut coefficients = vec![self.sz / self.n + offset];
        if space.degree() == 1 {
            coefficients.extend(Self::slopes(&c, cutoff));
        }
        FitResult {
            space,
            coefficients,
            frame: LocalFrame {
                center: [mean[0] + origin[0], mean[1] + origin[1]],
                scale: [1.0, 1.0],
            },
            rss: self.rss(space.degree(), cutoff),
            pixel_count: self.n as usize,
        }
    }
}

/// Summed-area tables of [`Moments2D`] over axis-aligned rectangles.
///
/// Coordinates are taken relative to the grid center and data relative to
/// its global mean.
#[derive(Clone, Debug)]
pub struct MomentTable2D {
    space: PolySpace,
    side: usize,
    shift: f64,
    sat: Vec<Moments2D>,
}

impl MomentTable2D {
    pub fn build(y: &GridSignal, space: PolySpace) -> Result<Self> {
        if y.dim() != Dim::Two || space.dim() != Dim::Two {
            return Err(Error::Dimension("2D moment table needs 2D data and space".into()));
        }
        let n = y.side();
        let shift = y.values().iter().sum::<f64>() / (n * n) as f64;
        let c = 0.5 * (n as f64 - 1.0);
        let w = n + 1;
        let mut sat = vec![Moments2D::default(); w * w];
        for yy in 0..n {
            let mut row = Moments2D::default();
            for xx in 0..n {
                row.push(xx as f64 - c, yy as f64 - c, y.at(xx, yy) - shift);
                sat[(yy + 1) * w + xx + 1] = sat[yy * w + xx + 1].add(&row);
            }
        }
        Ok(Self { space, side: n, shift, sat })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Moments over `[x0, x0+w) x [y0, y0+h)` (centered coordinates, shifted data).
    pub fn rect(&self, x0: usize, y0: usize, w: usize, h: usize) -> Moments2D {
        let st = self.side + 1;
        let at = |x: usize, y: usize| &self.sat[y * st + x];
        at(x0 + w, y0 + h)
            .sub(at(x0, y0 + h))
            .sub(at(x0 + w, y0))
            .add(at(x0, y0))
    }

    /// Plain sum of the data over a rectangle.
    pub fn data_sum(&self, x0: usize, y0: usize, w: usize, h: usize) -> f64 {
        let m = self.rect(x0, y0, w, h);
        m.sz + self.shift * m.n
    }

    /// Plain sum of squared data over a rectangle.
    pub fn data_sum_sq(&self, x0: usize, y0: usize, w: usize, h: usize) -> f64 {
        let m = self.rect(x0, y0, w, h);
        m.szz + 2.0 * self.shift * m.sz + self.shift * self.shift * m.n
    }

    pub fn rss_rect(&self, x0: usize, y0: usize, w: usize, h: usize) -> f64 {
        self.rect(x0, y0, w, h).rss(self.space.degree(), DEFAULT_PINV_CUTOFF)
    }

    pub fn fit_rect(&self, x0: usize, y0: usize, w: usize, h: usize) -> FitResult {
        let c = 0.5 * (self.side as f64 - 1.0);
        self.rect(x0, y0, w, h)
            .fit(self.space, DEFAULT_PINV_CUTOFF, self.shift, [c, c])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wedgelet::geometry::DyadicSquare;

    fn sig(v: &[f64]) -> GridSignal {
        GridSignal::from_vec_1d(v.to_vec()).unwrap()
    }

    #[test]
    fn space_dimensions_and_caps() {
        assert_eq!(PolySpace::new(Dim::One, 3).unwrap().dimension(), 4);
        assert_eq!(PolySpace::new(Dim::Two, 0).unwrap().dimension(), 1);
        assert_eq!(PolySpace::new(Dim::Two, 1).unwrap().dimension(), 3);
        assert!(PolySpace::new(Dim::Two, 2).is_err());
        assert!(PolySpace::new(Dim::One, 5).is_err());
    }

    #[test]
    fn table_examples() {
        let p0 = PolySpace::new(Dim::One, 0).unwrap();
        let t = MomentTable1D::build(&sig(&[1.0, 2.0, 3.0]), p0).unwrap();
        assert!((t.weighted_sum(1, 3, 0) - 6.0).abs() < 1e-12);
        assert!((t.sum_sq(1, 3) - 14.0).abs() < 1e-12);

        let t = MomentTable1D::build(&sig(&[0.0; 5]), p0).unwrap();
        assert_eq!(t.weighted_sum(2, 4, 0), 0.0);
        assert_eq!(t.rss(1, 5), 0.0);

        let p1 = PolySpace::new(Dim::One, 1).unwrap();
        let t = MomentTable1D::build(&sig(&[1.0, 1.0]), p1).unwrap();
        assert!((t.weighted_sum(1, 2, 1) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fit_examples() {
        let p0 = PolySpace::new(Dim::One, 0).unwrap();
        let y = sig(&[0.0, 0.0, 1.0, 1.0]);
        let iv = Fragment::Interval(Interval::new(1, 4).unwrap());
        let f = fit_fragment(&y, &iv, p0).unwrap();
        assert!((f.coefficients[0] - 0.5).abs() < 1e-12);
        assert!((f.rss - 1.0).abs() < 1e-12);
        let t = MomentTable1D::build(&y, p0).unwrap();
        assert!((t.rss(1, 4) - 1.0).abs() < 1e-12);

        let c = sig(&[2.5; 6]);
        let f = fit_fragment(&c, &Fragment::Interval(Interval::new(2, 5).unwrap()), p0).unwrap();
        assert!((f.coefficients[0] - 2.5).abs() < 1e-12 && f.rss < 1e-20);

        let p1 = PolySpace::new(Dim::One, 1).unwrap();
        let lin = sig(&(1..=9).map(|s| 2.0 * s as f64 + 1.0).collect::<Vec<_>>());
        let t = MomentTable1D::build(&lin, p1).unwrap();
        assert!(t.rss(2, 8) < 1e-9);
        let f = t.fit(Interval::new(2, 8).unwrap()).unwrap();
        assert!((f.eval([5.0, 0.0]) - 11.0).abs() < 1e-9);
    }

    #[test]
    fn empty_fragment_is_an_error() {
        let y = sig(&[1.0]);
        let p0 = PolySpace::new(Dim::One, 0).unwrap();
        assert!(matches!(fit_pixels(&y, &[], p0), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_deficient_fits_are_exact() {
        let p3 = PolySpace::new(Dim::One, 3).unwrap();
        let y = sig(&[3.0, -1.0, 4.0, 1.0, 5.0]);
        let t = MomentTable1D::build(&y, p3).unwrap();
        for (lo, hi) in [(1, 1), (2, 3), (1, 3), (2, 5)] {
            let naive = fit_pixels(&y, &(lo - 1..hi).collect::<Vec<_>>(), p3).unwrap();
            assert!((naive.rss - t.rss(lo, hi)).abs() < 1e-9);
            if hi - lo < 4 {
                assert!(naive.rss < 1e-12);
            }
        }
    }

    #[test]
    fn square_table_matches_scan() {
        let y = GridSignal::from_fn_2d(8, |x, yy| ((x * 7 + yy * 3) % 5) as f64 + 0.1 * x as f64).unwrap();
        for deg in 0..=1 {
            let space = PolySpace::new(Dim::Two, deg).unwrap();
            let table = MomentTable::build(&y, space).unwrap();
            for sq in [DyadicSquare::new(3, 1, 1).unwrap(), DyadicSquare::new(1, 3, 2).unwrap()] {
                let frag = Fragment::Square(sq);
                let a = table.fit(&frag).unwrap();
                let b = fit_fragment(&y, &frag, space).unwrap();
                assert!((a.rss - b.rss).abs() < 1e-9, "{} vs {}", a.rss, b.rss);
                for k in sq.pixels(8) {
                    let c = pixel_coord(Dim::Two, 8, k);
                    assert!((a.eval(c) - b.eval(c)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn collinear_pixels_have_zero_platelet_residual() {
        // a single column of pixels: the affine fit interpolates any line data
        let y = GridSignal::from_fn_2d(4, |x, yy| (x + 2 * yy) as f64).unwrap();
        let space = PolySpace::new(Dim::Two, 1).unwrap();
        let f = fit_pixels(&y, &[1, 5, 9, 13], space).unwrap();
        assert!(f.rss < 1e-12);
        let mut m = Moments2D::default();
        for k in [1usize, 5, 9, 13] {
            m.push((k % 4) as f64, (k / 4) as f64, y.values()[k]);
        }
        assert!(m.rss(1, DEFAULT_PINV_CUTOFF) < 1e-12);
    }

    mod props {
        use super::*;
        use crate::wedgelet::geometry::{directions, Wedge, WedgeSide};
        use proptest::prelude::*;

        fn signal_1d() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-10.0..10.0f64, 1..64)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn interval_table_matches_naive(v in signal_1d(), deg in 0usize..=2, a in 0usize..64, b in 0usize..64) {
                let n = v.len();
                let (lo, hi) = (a % n + 1, b % n + 1);
                let (lo, hi) = (lo.min(hi), lo.max(hi));
                let y = sig(&v);
                let space = PolySpace::new(Dim::One, deg).unwrap();
                let t = MomentTable1D::build(&y, space).unwrap();
                let naive = fit_pixels(&y, &(lo - 1..hi).collect::<Vec<_>>(), space).unwrap();
                prop_assert!((t.rss(lo, hi) - naive.rss).abs() <= 1e-8 * (1.0 + naive.rss));
                let f = t.fit(Interval::new(lo, hi).unwrap()).unwrap();
                for s in lo..=hi {
                    let c = [s as f64, 0.0];
                    prop_assert!((f.eval(c) - naive.eval(c)).abs() <= 1e-7);
                }
            }

            #[test]
            fn wedge_moments_match_naive(
                v in prop::collection::vec(-5.0..5.0f64, 64),
                deg in 0usize..=1,
                level in 1u32..=3,
                pick in 0usize..1000,
                rpick in 0usize..1000,
            ) {
                let y = GridSignal::new(Dim::Two, 8, v).unwrap();
                let sq = DyadicSquare::new(level, 1, 1).unwrap();
                let dirs = directions(sq.side());
                let direction = dirs[pick % dirs.len()];
                let (lo, hi) = sq.line_range(&direction);
                let r = lo + (rpick as i64) % (hi - lo);
                let w = Wedge { square: sq, direction, r, side: WedgeSide::Lower };
                let px = w.pixels(8);
                prop_assume!(!px.is_empty());
                let space = PolySpace::new(Dim::Two, deg).unwrap();
                let naive = fit_pixels(&y, &px, space).unwrap();
                let mut m = Moments2D::default();
                for &k in &px {
                    m.push((k % 8) as f64, (k / 8) as f64, y.values()[k]);
                }
                let rss = m.rss(deg, DEFAULT_PINV_CUTOFF);
                prop_assert!((rss - naive.rss).abs() <= 1e-8 * (1.0 + naive.rss), "{} vs {}", rss, naive.rss);
            }

            #[test]
            fn rss_superadditive_under_splitting(v in signal_1d(), deg in 0usize..=3, cut in 0usize..64) {
                let n = v.len();
                prop_assume!(n >= 2);
                let c = cut % (n - 1) + 1;
                let y = sig(&v);
                let space = PolySpace::new(Dim::One, deg).unwrap();
                let whole = fit_pixels(&y, &(0..n).collect::<Vec<_>>(), space).unwrap().rss;
                let left = fit_pixels(&y, &(0..c).collect::<Vec<_>>(), space).unwrap().rss;
                let right = fit_pixels(&y, &(c..n).collect::<Vec<_>>(), space).unwrap().rss;
                prop_assert!(left + right <= whole + 1e-8 * (1.0 + whole));
            }

            #[test]
            fn centering_does_not_change_the_fit(v in prop::collection::vec(-3.0..3.0f64, 16), deg in 0usize..=1, mask in 1u16..) {
                let y = GridSignal::new(Dim::Two, 4, v).unwrap();
                let px: Vec<usize> = (0..16).filter(|k| mask >> k & 1 == 1).collect();
                let space = PolySpace::new(Dim::Two, deg).unwrap();
                let a = fit_pixels_with(&y, &px, space, DEFAULT_PINV_CUTOFF, true).unwrap();
                let b = fit_pixels_with(&y, &px, space, DEFAULT_PINV_CUTOFF, false).unwrap();
                prop_assert!((a.rss - b.rss).abs() <= 1e-8);
                for &k in &px {
                    let c = pixel_coord(Dim::Two, 4, k);
                    prop_assert!((a.eval(c) - b.eval(c)).abs() <= 1e-8);
                }
            }
        }
    }
}
