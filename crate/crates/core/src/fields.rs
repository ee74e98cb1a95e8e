//! Uniformly sampled complex fields on the transverse plane.
//!
//! A [`Grid2D`] places `nx * ny` nodes on a rectangle of half-widths
//! `extent_x`, `extent_y` around `(center_x, center_y)`; node `i` along x sits at
//! `center_x - extent_x + i * dx` with `dx = 2 extent_x / (nx - 1)`. Values are
//! stored row-major with `y` as the slow index.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, HomError, Result};
use crate::scalar::Real;

/// Relative slack used when snapping a coordinate onto a grid node.
const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D<T> {
    pub nx: usize,
    pub ny: usize,
    pub extent_x: T,
    pub extent_y: T,
    pub center_x: T,
    pub center_y: T,
}

// node offset from the center, computed from the nearer edge so that
// offsets of nodes `i` and `n - 1 - i` are exact negatives
fn mirrored_offset<T: Real>(i: usize, n: usize, extent: T, step: T) -> T {
    let last = n - 1;
    match (2 * i).cmp(&last) {
        std::cmp::Ordering::Less => -extent + T::from_usize_lossy(i) * step,
        std::cmp::Ordering::Equal => T::zero(),
        std::cmp::Ordering::Greater => extent - T::from_usize_lossy(last - i) * step,
    }
}

/// Builds a grid centered at the origin.
pub fn make_grid<T: Real>(nx: usize, ny: usize, extent_x: T, extent_y: T) -> Result<Grid2D<T>> {
    Grid2D::with_center(nx, ny, extent_x, extent_y, T::zero(), T::zero())
}

impl<T: Real> Grid2D<T> {
    pub fn with_center(
        nx: usize,
        ny: usize,
        extent_x: T,
        extent_y: T,
        center_x: T,
        center_y: T,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(invalid(format!("grid needs at least 2 nodes per axis, got {nx}x{ny}")));
        }
        let extents_ok = extent_x > T::zero()
            && extent_y > T::zero()
            && extent_x.is_finite()
            && extent_y.is_finite();
        if !extents_ok {
            return Err(invalid(format!(
                "grid extents must be positive and finite, got ({extent_x}, {extent_y})"
            )));
        }
        if !(center_x.is_finite() && center_y.is_finite()) {
            return Err(invalid("grid center must be finite"));
        }
        Ok(Self { nx, ny, extent_x, extent_y, center_x, center_y })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> T {
        T::lit(2.0) * self.extent_x / T::from_usize_lossy(self.nx - 1)
    }

    pub fn dy(&self) -> T {
        T::lit(2.0) * self.extent_y / T::from_usize_lossy(self.ny - 1)
    }

    pub fn x(&self, i: usize) -> T {
        self.center_x + mirrored_offset(i, self.nx, self.extent_x, self.dx())
    }

    pub fn y(&self, j: usize) -> T {
        self.center_y + mirrored_offset(j, self.ny, self.extent_y, self.dy())
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// True when reflecting `y -> -y` maps nodes onto nodes.
    pub fn is_symmetric_y(&self) -> bool {
        self.center_y == T::zero()
    }

    pub fn is_symmetric_x(&self) -> bool {
        self.center_x == T::zero()
    }

    /// Composite trapezoid weight of node `(i, j)`.
    pub fn trapezoid_weight(&self, i: usize, j: usize) -> T {
        let half = T::lit(0.5);
        let wx = if i == 0 || i == self.nx - 1 { half } else { T::one() };
        let wy = if j == 0 || j == self.ny - 1 { half } else { T::one() };
        wx * wy * self.dx() * self.dy()
    }

    /// All trapezoid weights in storage order.
    pub fn trapezoid_weights(&self) -> Vec<T> {
        let mut w = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                w.push(self.trapezoid_weight(i, j));
            }
        }
        w
    }

    /// Same node layout as `other`, up to rounding in the extents.
    pub fn matches(&self, other: &Self) -> bool {
        let close = |a: T, b: T| (a - b).abs() <= T::unit_tolerance() * (a.abs() + b.abs() + T::one());
        self.nx == other.nx
            && self.ny == other.ny
            && close(self.extent_x, other.extent_x)
            && close(self.extent_y, other.extent_y)
            && close(self.center_x, other.center_x)
            && close(self.center_y, other.center_y)
    }

    /// Fractional node coordinate of `x`; `None` outside the window.
    fn locate(coord: T, lo: T, step: T, n: usize) -> Option<(usize, T)> {
        let f = (coord - lo) / step;
        let tol = T::lit(SNAP_TOLERANCE);
        let last = T::from_usize_lossy(n - 1);
        if !(f >= -tol && f <= last + tol) {
            return None;
        }
        let nearest = f.round();
        let f = if (f - nearest).abs() < tol { nearest } else { f };
        let f = f.max(T::zero()).min(last);
        let i0 = f.floor().to_usize().unwrap_or(0).min(n - 2);
        Some((i0, f - T::from_usize_lossy(i0)))
    }

    pub(crate) fn locate_x(&self, x: T) -> Option<(usize, T)> {
        Self::locate(x, self.center_x - self.extent_x, self.dx(), self.nx)
    }

    pub(crate) fn locate_y(&self, y: T) -> Option<(usize, T)> {
        Self::locate(y, self.center_y - self.extent_y, self.dy(), self.ny)
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        self.locate_x(x).is_some() && self.locate_y(y).is_some()
    }
}

/// Complex amplitude sampled on every node of a [`Grid2D`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexField2D<T> {
    grid: Grid2D<T>,
    values: Vec<Complex<T>>,
}

/// Samples `f` on every node of `grid`.
pub fn sample<T, F>(f: F, grid: Grid2D<T>) -> Result<ComplexField2D<T>>
where
    T: Real,
    F: Fn(T, T) -> Complex<T>,
{
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..grid.ny {
        let y = grid.y(j);
        for i in 0..grid.nx {
            values.push(f(grid.x(i), y));
        }
    }
    ComplexField2D::from_values(grid, values)
}

impl<T: Real> ComplexField2D<T> {
    pub fn from_values(grid: Grid2D<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HomError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(HomError::NonFiniteSample { ix: k % grid.nx, iy: k / grid.nx });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self { grid, values: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> Complex<T> {
        self.values[self.grid.index(i, j)]
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// `a * self + b * other`, pointwise.
    pub fn combine(&self, a: Complex<T>, other: &Self, b: Complex<T>) -> Result<Self> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * a + y * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid.matches(&other.grid) {
            Ok(())
        } else {
            Err(HomError::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    /// Trapezoid-rule L2 inner product, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        self.check_grid(other)?;
        let g = &self.grid;
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.index(i, j);
                acc = acc + self.values[k].conj() * other.values[k] * g.trapezoid_weight(i, j);
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> T {
        let g = &self.grid;
        let mut acc = T::zero();
        for j in 0..g.ny {
            for i in 0..g.nx {
                acc = acc + self.values[g.index(i, j)].norm_sqr() * g.trapezoid_weight(i, j);
            }
        }
        acc
    }

    /// Rescaled copy with unit L2 norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= T::zero() {
            return Err(HomError::ZeroField);
        }
        Ok(self.scaled(Complex::new(T::one() / n.sqrt(), T::zero())))
    }

    /// `output(x, y) = input(x, -y)`; exact permutation of the samples.
    pub fn flip_y(&self) -> Result<Self> {
        let g = &self.grid;
        if !g.is_symmetric_y() {
            return Err(HomError::AsymmetricGrid { center_y: g.center_y.as_f64() });
        }
        let mut values = Vec::with_capacity(g.len());
        for j in 0..g.ny {
            let src = g.ny - 1 - j;
            values.extend_from_slice(&self.values[src * g.nx..(src + 1) * g.nx]);
        }
        Ok(Self { grid: self.grid, values })
    }

    /// Bilinear interpolation; exact at nodes.
    pub fn interpolate(&self, x: T, y: T) -> Result<Complex<T>> {
        let g = &self.grid;
        let out = || HomError::OutOfWindow { x: x.as_f64(), y: y.as_f64() };
        let (i0, fx) = g.locate_x(x).ok_or_else(out)?;
        let (j0, fy) = g.locate_y(y).ok_or_else(out)?;
        let v00 = self.at(i0, j0);
        if fx == T::zero() && fy == T::zero() {
            return Ok(v00);
        }
        let v10 = self.at(i0 + 1, j0);
        let v01 = self.at(i0, j0 + 1);
        let v11 = self.at(i0 + 1, j0 + 1);
        let one = T::one();
        Ok(v00 * ((one - fx) * (one - fy))
            + v10 * (fx * (one - fy))
            + v01 * ((one - fx) * fy)
            + v11 * (fx * fy))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    /// Fourier transform onto transverse-wavevector coordinates,
    /// `v(q) = (1/2pi) \int f(rho) exp(-i q.rho) d^2 rho`, by a centered DFT.
    ///
    /// The output grid has spacing `2 pi / (n d)` per axis; for even counts it is
    /// offset by half a cell below the origin.
    pub fn angular_spectrum(&self) -> Result<Self> {
        let g = &self.grid;
        let (qgrid, xphase, yphase) = spectral_axes(g)?;
        let mut data = self.values.clone();
        let mut planner = FftPlanner::<T>::new();

        // rows: transform along x
        let fft_x = planner.plan_fft_forward(g.nx);
        for row in data.chunks_mut(g.nx) {
            for (v, p) in row.iter_mut().zip(&xphase.pre) {
                *v = *v * p;
            }
            fft_x.process(row);
            for (v, p) in row.iter_mut().zip(&xphase.post) {
                *v = *v * p;
            }
        }

        // columns: transform along y
        let fft_y = planner.plan_fft_forward(g.ny);
        let mut column = vec![Complex::new(T::zero(), T::zero()); g.ny];
        for i in 0..g.nx {
            for j in 0..g.ny {
                column[j] = data[g.index(i, j)] * yphase.pre[j];
            }
            fft_y.process(&mut column);
            for j in 0..g.ny {
                data[g.index(i, j)] = column[j] * yphase.post[j];
            }
        }
        Self::from_values(qgrid, data)
    }
}

struct AxisPhases<T> {
    pre: Vec<Complex<T>>,
    post: Vec<Complex<T>>,
}

fn axis_phases<T: Real>(n: usize, step: T, origin: T) -> (T, T, AxisPhases<T>) {
    let two_pi = T::TAU();
    let nt = T::from_usize_lossy(n);
    let dq = two_pi / (nt * step);
    let c = n / 2;
    let ct = T::from_usize_lossy(c);
    let norm = step / two_pi.sqrt();
    let pre = (0..n)
        .map(|i| Complex::from_polar(T::one(), two_pi * ct * T::from_usize_lossy(i) / nt))
        .collect();
    let post = (0..n)
        .map(|k| {
            let q = (T::from_usize_lossy(k) - ct) * dq;
            Complex::from_polar(norm, -q * origin)
        })
        .collect();
    // spectral grid: q_k = (k - c) dq, so center = ((n-1)/2 - c) dq
    let center = (T::from_usize_lossy(n - 1) * T::lit(0.5) - ct) * dq;
    let extent = T::from_usize_lossy(n - 1) * T::lit(0.5) * dq;
    (extent, center, AxisPhases { pre, post })
}

fn spectral_axes<T: Real>(g: &Grid2D<T>) -> Result<(Grid2D<T>, AxisPhases<T>, AxisPhases<T>)> {
    let (ex, cx, px) = axis_phases(g.nx, g.dx(), g.center_x - g.extent_x);
    let (ey, cy, py) = axis_phases(g.ny, g.dy(), g.center_y - g.extent_y);
    Ok((Grid2D::with_center(g.nx, g.ny, ex, ey, cx, cy)?, px, py))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn two_by_two_grid_has_corner_nodes() {
        let g = make_grid(2, 2, 1.0, 1.0).unwrap();
        assert_eq!((g.x(0), g.x(1), g.y(0), g.y(1)), (-1.0, 1.0, -1.0, 1.0));
    }

    #[test]
    fn odd_grid_has_center_node() {
        let g = make_grid(3, 3, 1.0, 1.0).unwrap();
        assert_eq!(g.x(1), 0.0);
        assert_eq!(g.y(1), 0.0);
    }

    #[test]
    fn spacing_formula() {
        let w = 1.3e-4f64;
        let g = make_grid(64, 64, 5.0 * w, 5.0 * w).unwrap();
        assert!((g.dx() - 10.0 * w / 63.0).abs() < 1e-18);
        assert!((g.x(63) - 5.0 * w).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_grid(1, 4, 1.0, 1.0).is_err());
        assert!(make_grid(4, 0, 1.0, 1.0).is_err());
        assert!(make_grid(4, 4, 0.0, 1.0).is_err());
        assert!(make_grid(4, 4, 1.0, -2.0).is_err());
    }

    #[test]
    fn sampling_constant_and_linear() {
        let g = make_grid(5, 4, 2.0, 1.0).unwrap();
        let one = sample(|_, _| c(1.0, 0.0), g).unwrap();
        assert!(one.values().iter().all(|v| *v == c(1.0, 0.0)));
        let lin = sample(|x, _| c(x, 0.0), g).unwrap();
        for j in 0..g.ny {
            for i in 0..g.nx {
                assert_eq!(lin.at(i, j), -lin.at(g.nx - 1 - i, j));
            }
        }
    }

    #[test]
    fn gaussian_peaks_at_center_node() {
        let g = make_grid(9, 9, 3.0f64, 3.0).unwrap();
        let f = sample(|x, y| c((-(x * x + y * y)).exp(), 0.0), g).unwrap();
        assert_eq!(f.at(4, 4), c(1.0, 0.0));
    }

    #[test]
    fn sampling_reports_offending_node() {
        let g = make_grid(4, 4, 1.0, 1.0).unwrap();
        let err = sample(|x, y| if x > 0.0 && y < 0.0 { c(f64::NAN, 0.0) } else { c(0.0, 0.0) }, g)
            .unwrap_err();
        assert_eq!(err, HomError::NonFiniteSample { ix: 2, iy: 0 });
    }

    #[test]
    fn gaussian_norm_quadrature() {
        let w = 1.0;
        let amp = (2.0 / (PI * w * w)).sqrt();
        let err_at = |n: usize| {
            let g = make_grid(n, n, 5.0 * w, 5.0 * w).unwrap();
            let f = sample(|x, y| c(amp * (-(x * x + y * y) / (w * w)).exp(), 0.0), g).unwrap();
            (f.inner_product(&f).unwrap().re - 1.0).abs()
        };
        assert!(err_at(128) < 1e-6);
        assert!(err_at(16) > err_at(32));
    }

    #[test]
    fn inner_product_properties() {
        let g = make_grid(17, 17, 3.0, 3.0).unwrap();
        let a = sample(|x, y| c(x, y * 0.5), g).unwrap();
        let b = sample(|x, y| c((x * y).cos(), x - y), g).unwrap();
        let zero = ComplexField2D::zeros(g);
        assert_eq!(a.inner_product(&zero).unwrap(), c(0.0, 0.0));
        let aa = a.inner_product(&a).unwrap();
        assert!(aa.re > 0.0 && aa.im == 0.0);
        let ab = a.inner_product(&b).unwrap();
        let s = c(0.3, -1.2);
        let sab = a.scaled(s).inner_product(&b).unwrap();
        assert!((sab - s.conj() * ab).norm() < 1e-12);
    }

    #[test]
    fn inner_product_rejects_mismatch() {
        let a = ComplexField2D::<f64>::zeros(make_grid(4, 4, 1.0, 1.0).unwrap());
        let b = ComplexField2D::<f64>::zeros(make_grid(5, 4, 1.0, 1.0).unwrap());
        assert!(matches!(a.inner_product(&b), Err(HomError::GridMismatch(_))));
    }

    #[test]
    fn flip_y_properties() {
        for n in [6usize, 7] {
            let g = make_grid(5, n, 2.0, 2.0).unwrap();
            let f = sample(|x, y| c(x * y + y * y * 0.3 + 1.0, x), g).unwrap();
            assert_eq!(f.flip_y().unwrap().flip_y().unwrap(), f);
            let even = sample(|x, y| c((y * y).exp() * x, 0.0), g).unwrap();
            assert_eq!(even.flip_y().unwrap(), even);
            let odd = sample(|x, y| c(y * x, y), g).unwrap();
            assert_eq!(odd.flip_y().unwrap(), odd.scaled(c(-1.0, 0.0)));
        }
        let shifted = Grid2D::with_center(5, 5, 1.0, 1.0, 0.0, 0.1).unwrap();
        let f = ComplexField2D::zeros(shifted);
        assert!(matches!(f.flip_y(), Err(HomError::AsymmetricGrid { .. })));
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_linear_between() {
        let g = make_grid(5, 5, 2.0, 2.0).unwrap();
        let f = sample(|x, y| c(2.0 * x - y + 0.5, x + y), g).unwrap();
        assert_eq!(f.interpolate(g.x(3), g.y(1)).unwrap(), f.at(3, 1));
        let v = f.interpolate(0.37, -1.21).unwrap();
        assert!((v - c(2.0 * 0.37 + 1.21 + 0.5, 0.37 - 1.21)).norm() < 1e-12);
        assert!(matches!(f.interpolate(2.5, 0.0), Err(HomError::OutOfWindow { .. })));
    }

    #[test]
    fn gaussian_transforms_to_gaussian_of_width_two_over_w() {
        let w = 0.7;
        let n = 65;
        let g = make_grid(n, n, 6.0 * w, 6.0 * w).unwrap();
        let f = sample(|x: f64, y: f64| c((-(x * x + y * y) / (w * w)).exp(), 0.0), g).unwrap();
        let v = f.angular_spectrum().unwrap();
        let qg = *v.grid();
        assert!(qg.is_symmetric_y() && qg.is_symmetric_x());
        // (1/2pi) * pi w^2 * exp(-q^2 w^2 / 4)
        for j in 0..n {
            for i in 0..n {
                let (qx, qy) = (qg.x(i), qg.y(j));
                let exact = 0.5 * w * w * (-(qx * qx + qy * qy) * w * w / 4.0).exp();
                assert!((v.at(i, j) - c(exact, 0.0)).norm() < 1e-10, "{i} {j}");
            }
        }
    }

    #[test]
    fn even_counts_give_half_cell_offset_spectrum() {
        let g = make_grid(8, 8, 1.0, 1.0).unwrap();
        let v = ComplexField2D::<f64>::zeros(g).angular_spectrum().unwrap();
        let dq = 2.0 * PI / (8.0 * g.dx());
        assert!((v.grid().center_y + 0.5 * dq).abs() < 1e-12);
        assert!((v.grid().y(4)).abs() < 1e-12);
    }

    #[test]
    fn shift_theorem() {
        let w = 1.0;
        let a = 0.4;
        let g = make_grid(81, 81, 7.0, 7.0).unwrap();
        let gauss = |x: f64, y: f64| c((-(x * x + y * y) / (w * w)).exp(), 0.0);
        let v0 = sample(gauss, g).unwrap().angular_spectrum().unwrap();
        let v1 = sample(|x, y| gauss(x - a, y), g).unwrap().angular_spectrum().unwrap();
        let qg = *v0.grid();
        for j in 0..81 {
            for i in 0..81 {
                let expected = v0.at(i, j) * Complex::from_polar(1.0, -qg.x(i) * a);
                assert!((v1.at(i, j) - expected).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let g = make_grid(9, 7, 1.0, 1.0).unwrap();
        let mut vals = vec![c(0.0, 0.0); g.len()];
        vals[g.index(3, 5)] = c(1.0, 0.0);
        let v = ComplexField2D::from_values(g, vals).unwrap().angular_spectrum().unwrap();
        let m0 = v.values()[0].norm();
        assert!(v.values().iter().all(|z| (z.norm() - m0).abs() < 1e-14));
    }

    #[test]
    fn parseval_at_128() {
        let w = 1.0;
        let g = make_grid(128, 128, 5.0 * w, 5.0 * w).unwrap();
        let f = sample(|x, y| c(x, 0.3 * y) * (-(x * x + y * y) / (w * w)).exp(), g)
            .unwrap()
            .normalized()
            .unwrap();
        let v = f.angular_spectrum().unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
