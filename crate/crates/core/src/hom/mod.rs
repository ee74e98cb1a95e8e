//! Beam splitter, detectors and the coincidence rate behind it.
//!
//! The coincidence amplitude at detectors `D1`, `D2` is the sum of the
//! both-transmitted and both-reflected terms,
//!
//! ```text
//! Psi_tt =  t^2 e^{i K_sum |r1 - r2|^2 / 2Z} W( (x1+x2)/2,  (y1+y2)/2) Pi(s1, s2)
//! Psi_rr = -r^2 e^{i K_sum |r1 - r2|^2 / 2Z} W( (x1+x2)/2, -(y1+y2)/2) Pi(s2, s1)
//! ```
//!
//! A finite path delay `d` makes the two terms partially distinguishable; the
//! cross term is weighted by the temporal overlap `g(d)`.
//!
//! [`coincidence_rate`] integrates over detector pairs by collapsing the 4D sum onto
//! the lattice of midpoints, weighted by the convolution of the two aperture
//! masks. [`coincidence_rate_oracle`] sums the full 4D amplitudes instead.

mod components;
mod spectral;

pub use components::{coincidence_rate_oracle, BiphotonComponents, PairProbabilities, ORACLE_PAIR_CAP};
pub use spectral::{spectral_amplitudes, SpectralAmplitudes};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, HomError, Result};
use crate::fields::{ComplexField2D, Grid2D};
use crate::scalar::Real;
use crate::spdc::PolarizationMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec<T> {
    pub t: T,
    pub r: T,
}

impl<T: Real> BeamSplitterSpec<T> {
    pub fn new(t: T, r: T) -> Result<Self> {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !(unit(t) && unit(r)) {
            return Err(invalid(format!("beam splitter amplitudes must lie in [0, 1], got t={t}, r={r}")));
        }
        if (t * t + r * r - T::one()).abs() > T::unit_tolerance() {
            return Err(invalid(format!("beam splitter needs t^2 + r^2 = 1, got {}", t * t + r * r)));
        }
        Ok(Self { t, r })
    }

    /// 50:50 splitter.
    pub fn balanced() -> Self {
        Self { t: T::FRAC_1_SQRT_2(), r: T::FRAC_1_SQRT_2() }
    }

    /// Splitter with intensity transmittance `t^2`.
    pub fn from_transmittance(transmittance: T) -> Result<Self> {
        if !(transmittance >= T::zero() && transmittance <= T::one()) {
            return Err(invalid("transmittance must lie in [0, 1]"));
        }
        Self::new(transmittance.sqrt(), (T::one() - transmittance).sqrt())
    }
}

/// `a_1 = t a_s + i r flip_y(a_i)`, `a_2 = t a_i + i r flip_y(a_s)`.
pub fn bs_transform_spectrum<T: Real>(
    a_s: &ComplexField2D<T>,
    a_i: &ComplexField2D<T>,
    bs: &BeamSplitterSpec<T>,
) -> Result<(ComplexField2D<T>, ComplexField2D<T>)> {
    if !a_s.grid().matches(a_i.grid()) {
        return Err(HomError::GridMismatch("signal and idler spectra differ".into()));
    }
    let t = Complex::new(bs.t, T::zero());
    let ir = Complex::new(T::zero(), bs.r);
    let a1 = a_s.combine(t, &a_i.flip_y()?, ir)?;
    let a2 = a_i.combine(t, &a_s.flip_y()?, ir)?;
    Ok((a1, a2))
}

/// Spectral line shape of the interference filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterShape {
    #[default]
    Gaussian,
    /// Flat transmission over the FWHM in wavelength.
    RectLambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aperture<T> {
    /// The whole detection grid.
    Full,
    Circular { radius: T, center: (T, T) },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec<T> {
    pub aperture: Aperture<T>,
    pub filter_fwhm: T,
    pub filter_center: T,
    pub filter_shape: FilterShape,
}

impl<T: Real> DetectorSpec<T> {
    pub fn new(aperture: Aperture<T>, filter_fwhm: T, filter_center: T, filter_shape: FilterShape) -> Result<Self> {
        let spec = Self { aperture, filter_fwhm, filter_center, filter_shape };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Aperture::Circular { radius, center } = self.aperture {
            if !(radius > T::zero()) || !center.0.is_finite() || !center.1.is_finite() {
                return Err(invalid("aperture radius must be positive"));
            }
        }
        if !(self.filter_fwhm > T::zero() && self.filter_center > T::zero()) {
            return Err(invalid("filter width and center must be positive"));
        }
        Ok(())
    }

    /// `l_c = (2 ln 2 / pi) lambda0^2 / dlambda`.
    pub fn coherence_length(&self) -> T {
        T::lit(2.0) * T::LN_2() / T::PI() * self.filter_center * self.filter_center / self.filter_fwhm
    }

    /// Photon wavenumber at the filter center.
    pub fn wavenumber(&self) -> T {
        T::TAU() / self.filter_center
    }

    fn accepts(&self, x: T, y: T) -> bool {
        match self.aperture {
            Aperture::Full => true,
            Aperture::Circular { radius, center } => {
                let (dx, dy) = (x - center.0, y - center.1);
                dx * dx + dy * dy <= radius * radius
            }
        }
    }

    /// Trapezoid weights of `grid` restricted to the aperture.
    pub fn weights(&self, grid: &Grid2D<T>) -> Vec<T> {
        let mut w = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let inside = self.accepts(grid.x(i), grid.y(j));
                w.push(if inside { grid.trapezoid_weight(i, j) } else { T::zero() });
            }
        }
        w
    }
}

fn overlap_shape<T: Real>(shape: FilterShape, delay: T, coherence_length: T) -> T {
    let s = delay / coherence_length;
    match shape {
        FilterShape::Gaussian => (-s * s).exp(),
        FilterShape::RectLambda => {
            // flat band of width dk = 2 pi dlambda / lambda0^2 -> sinc(dk delay / 2)
            let u = s * T::lit(2.0) * T::LN_2();
            crate::spdc::sinc(u)
        }
    }
}

/// Indistinguishability envelope `g(delay)` set by the detection filter.
pub fn temporal_overlap<T: Real>(delay: T, det: &DetectorSpec<T>) -> T {
    overlap_shape(det.filter_shape, delay, det.coherence_length())
}

/// Coherence length of a detector pair; `1/l^2` is averaged over the two filters.
pub fn pair_coherence_length<T: Real>(det1: &DetectorSpec<T>, det2: &DetectorSpec<T>) -> T {
    let (l1, l2) = (det1.coherence_length(), det2.coherence_length());
    let inv = (T::one() / (l1 * l1) + T::one() / (l2 * l2)) * T::lit(0.5);
    T::one() / inv.sqrt()
}

/// Joint envelope for a detector pair.
pub fn pair_overlap<T: Real>(delay: T, det1: &DetectorSpec<T>, det2: &DetectorSpec<T>) -> T {
    overlap_shape(det1.filter_shape, delay, pair_coherence_length(det1, det2))
}

/// Everything needed to evaluate coincidences for one pump/polarization/splitter choice.
#[derive(Debug, Clone, PartialEq)]
pub struct HomSetup<T> {
    /// Pump amplitude `W(x, y, Z)` sampled in the detection plane.
    pub pump: ComplexField2D<T>,
    pub pol: PolarizationMatrix<T>,
    pub bs: BeamSplitterSpec<T>,
    pub det1: DetectorSpec<T>,
    pub det2: DetectorSpec<T>,
    /// Shared detector-plane sampling for both arms.
    pub detection_grid: Grid2D<T>,
    /// Distance `Z` of the detection planes.
    pub plane_z: T,
    /// `K = k_1 + k_2`.
    pub k_sum: T,
}

impl<T: Real> HomSetup<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pump: ComplexField2D<T>,
        pol: PolarizationMatrix<T>,
        bs: BeamSplitterSpec<T>,
        det1: DetectorSpec<T>,
        det2: DetectorSpec<T>,
        detection_grid: Grid2D<T>,
        plane_z: T,
        k_sum: T,
    ) -> Result<Self> {
        BeamSplitterSpec::new(bs.t, bs.r)?;
        det1.validate()?;
        det2.validate()?;
        if det1.filter_shape != det2.filter_shape {
            return Err(invalid("both detectors must use the same filter shape"));
        }
        if !(plane_z > T::zero() && k_sum > T::zero()) {
            return Err(invalid("detection plane distance and K must be positive"));
        }
        if (pol.norm_sqr() - T::one()).abs() > T::unit_tolerance() {
            return Err(invalid("polarization matrix must be normalized"));
        }
        let setup = Self { pump, pol, bs, det1, det2, detection_grid, plane_z, k_sum };
        setup.check_coverage()?;
        Ok(setup)
    }

    /// Every pump argument reachable from the detection grid must lie in the pump window.
    fn check_coverage(&self) -> Result<()> {
        let d = &self.detection_grid;
        let p = self.pump.grid();
        let (xa, xb) = (d.x(0), d.x(d.nx - 1));
        let (ya, yb) = (d.y(0), d.y(d.ny - 1));
        let half_span = (yb - ya) * T::lit(0.5);
        let xs = [xa, xb];
        let ys = [ya, yb, -ya, -yb, half_span, -half_span];
        for &x in &xs {
            for &y in &ys {
                if !p.contains(x, y) {
                    return Err(HomError::OutOfWindow { x: x.as_f64(), y: y.as_f64() });
                }
            }
        }
        Ok(())
    }

    pub fn overlap(&self, delay: T) -> T {
        pair_overlap(delay, &self.det1, &self.det2)
    }

    pub fn coherence_length(&self) -> T {
        pair_coherence_length(&self.det1, &self.det2)
    }
}

/// Delay-independent pieces of the coincidence rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceReduction<T> {
    /// `A`, integrated `|Psi_tt|^2 + |Psi_rr|^2`.
    pub baseline: T,
    /// `I = -2 Re sum Psi_tt conj(Psi_rr)`.
    pub interference: T,
}

impl<T: Real> CoincidenceReduction<T> {
    /// Normalized rate `(A - g I) / A`.
    pub fn rate(&self, overlap: T) -> T {
        (self.baseline - overlap * self.interference) / self.baseline
    }
}

/// Convolution of the two arms' aperture weights onto the midpoint lattice.
///
/// Entry `(sx, sy)` is the total weight of detector pairs with `i1 + i2 = sx`,
/// `j1 + j2 = sy`; the midpoint sits at `origin + s * d / 2`.
fn midpoint_multiplicity<T: Real>(grid: &Grid2D<T>, w1: &[T], w2: &[T]) -> Vec<T> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mx = 2 * nx - 1;
    let mut m = vec![T::zero(); mx * (2 * ny - 1)];
    let nonzero2: Vec<(usize, usize, T)> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .filter_map(|(i, j)| {
            let w = w2[j * nx + i];
            (w != T::zero()).then_some((i, j, w))
        })
        .collect();
    for j1 in 0..ny {
        for i1 in 0..nx {
            let a = w1[j1 * nx + i1];
            if a == T::zero() {
                continue;
            }
            for &(i2, j2, b) in &nonzero2 {
                let k = (j1 + j2) * mx + i1 + i2;
                m[k] = m[k] + a * b;
            }
        }
    }
    m
}

/// Collapses the 4D coincidence integral onto the midpoint lattice.
pub fn reduce<T: Real>(setup: &HomSetup<T>) -> Result<CoincidenceReduction<T>> {
    let g = &setup.detection_grid;
    let w1 = setup.det1.weights(g);
    let w2 = setup.det2.weights(g);
    let m = midpoint_multiplicity(g, &w1, &w2);
    let mx = 2 * g.nx - 1;
    let (hx, hy) = (g.dx() * T::lit(0.5), g.dy() * T::lit(0.5));
    let (x0, y0) = (g.x(0), g.y(0));

    let mut n_tt = T::zero();
    let mut n_rr = T::zero();
    let mut cross = Complex::new(T::zero(), T::zero());
    for sy in 0..(2 * g.ny - 1) {
        let y = y0 + T::from_usize_lossy(sy) * hy;
        for sx in 0..mx {
            let weight = m[sy * mx + sx];
            if weight == T::zero() {
                continue;
            }
            let x = x0 + T::from_usize_lossy(sx) * hx;
            let direct = setup.pump.interpolate(x, y)?;
            let mirrored = setup.pump.interpolate(x, -y)?;
            n_tt = n_tt + direct.norm_sqr() * weight;
            n_rr = n_rr + mirrored.norm_sqr() * weight;
            cross = cross + direct * mirrored.conj() * weight;
        }
    }

    let (t2, r2) = (setup.bs.t * setup.bs.t, setup.bs.r * setup.bs.r);
    let pol_norm = setup.pol.norm_sqr();
    let baseline = (t2 * t2 * n_tt + r2 * r2 * n_rr) * pol_norm;
    // sum Psi_tt conj(Psi_rr) = -t^2 r^2 (sum Pi12 conj Pi21) (sum m W conj W_mirror)
    let tt_rr = -(setup.pol.exchange_overlap() * cross) * (t2 * r2);
    let interference = -T::lit(2.0) * tt_rr.re;
    if !(baseline > T::zero()) {
        return Err(HomError::ZeroBaseline);
    }
    Ok(CoincidenceReduction { baseline, interference })
}

/// Normalized coincidence rate at path delay `delay` (baseline = 1).
pub fn coincidence_rate<T: Real>(setup: &HomSetup<T>, delay: T) -> Result<T> {
    Ok(reduce(setup)?.rate(setup.overlap(delay)))
}
