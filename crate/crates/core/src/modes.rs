//! Hermite-Gaussian beams and superpositions of them.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, HomError, Result};
use crate::fields::{sample, ComplexField2D, Grid2D};
use crate::scalar::Real;

/// Paraxial beam parameters shared by every mode of a pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec<T> {
    /// Waist radius `w0`.
    pub waist: T,
    pub rayleigh_range: T,
    /// Wavenumber `k`.
    pub k: T,
    /// Evaluation plane, measured from the waist.
    pub z: T,
}

impl<T: Real> BeamSpec<T> {
    pub fn new(waist: T, rayleigh_range: T, k: T, z: T) -> Result<Self> {
        let spec = Self { waist, rayleigh_range, k, z };
        spec.validate()?;
        Ok(spec)
    }

    /// Beam whose Rayleigh range follows from free-space propagation, `z_R = k w0^2 / 2`.
    pub fn free_space(waist: T, wavelength: T, z: T) -> Result<Self> {
        if !(wavelength > T::zero()) {
            return Err(invalid("wavelength must be positive"));
        }
        let k = T::TAU() / wavelength;
        Self::new(waist, k * waist * waist * T::lit(0.5), k, z)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !(positive(self.waist) && positive(self.rayleigh_range) && positive(self.k)) {
            return Err(invalid(format!(
                "beam needs positive waist, Rayleigh range and wavenumber, got {:?}",
                self
            )));
        }
        if !self.z.is_finite() {
            return Err(invalid("beam plane z must be finite"));
        }
        Ok(())
    }

    pub fn is_free_space_consistent(&self) -> bool {
        let expected = self.k * self.waist * self.waist * T::lit(0.5);
        ((self.rayleigh_range - expected) / expected).abs() <= T::lit(1e-9)
    }

    /// Beam radius `w(z)`.
    pub fn width(&self) -> T {
        let s = self.z / self.rayleigh_range;
        self.waist * (T::one() + s * s).sqrt()
    }

    /// `1 / R(z)`; zero at the waist where the wavefront is flat.
    pub fn inverse_curvature(&self) -> T {
        self.z / (self.z * self.z + self.rayleigh_range * self.rayleigh_range)
    }

    /// Gouy phase `arctan(z / z_R)`.
    pub fn gouy(&self) -> T {
        (self.z / self.rayleigh_range).atan()
    }
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite<T: Real>(n: usize, x: T) -> T {
    let two = T::lit(2.0);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = two * x;
    for k in 1..n {
        let next = two * x * cur - two * T::from_usize_lossy(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k))
}

/// Unit-norm Hermite-Gaussian amplitude `HG_mn(x, y)` in the plane `beam.z`.
pub fn hg_amplitude<T: Real>(m: usize, n: usize, beam: &BeamSpec<T>, x: T, y: T) -> Result<Complex<T>> {
    beam.validate()?;
    Ok(hg_unchecked(m, n, beam, x, y))
}

fn hg_unchecked<T: Real>(m: usize, n: usize, beam: &BeamSpec<T>, x: T, y: T) -> Complex<T> {
    let w = beam.width();
    let sqrt2 = T::SQRT_2();
    let order = m + n;
    let norm = (T::lit(2.0) / (T::PI() * w * w)).sqrt()
        / (T::lit(2.0).powi(order as i32) * factorial::<T>(m) * factorial::<T>(n)).sqrt();
    let r2 = x * x + y * y;
    let envelope =
        norm * hermite(m, x * sqrt2 / w) * hermite(n, y * sqrt2 / w) * (-r2 / (w * w)).exp();
    let phase = -beam.k * r2 * beam.inverse_curvature() * T::lit(0.5)
        - T::from_usize_lossy(order + 1) * beam.gouy();
    Complex::from_polar(envelope, phase)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeTerm<T> {
    pub m: usize,
    pub n: usize,
    pub coeff: Complex<T>,
}

/// Normalized superposition of Hermite-Gaussian modes, optionally rotated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec<T> {
    pub beam: BeamSpec<T>,
    pub terms: Vec<ModeTerm<T>>,
    /// Rotation of the mode frame relative to the lab frame (radians, counterclockwise).
    pub rotation: T,
}

impl<T: Real> PumpSpec<T> {
    pub fn new(beam: BeamSpec<T>, terms: Vec<ModeTerm<T>>, rotation: T) -> Result<Self> {
        beam.validate()?;
        if terms.is_empty() {
            return Err(invalid("pump needs at least one mode"));
        }
        let total: T = terms.iter().map(|t| t.coeff.norm_sqr()).sum();
        if (total - T::one()).abs() > T::unit_tolerance() {
            return Err(invalid(format!("mode coefficients must satisfy sum |c|^2 = 1, got {total}")));
        }
        if !rotation.is_finite() {
            return Err(invalid("rotation must be finite"));
        }
        Ok(Self { beam, terms, rotation })
    }

    /// Rescales arbitrary nonzero coefficients to unit total weight.
    pub fn normalized(beam: BeamSpec<T>, mut terms: Vec<ModeTerm<T>>, rotation: T) -> Result<Self> {
        let total: T = terms.iter().map(|t| t.coeff.norm_sqr()).sum();
        if !(total > T::zero()) {
            return Err(invalid("mode coefficients are all zero"));
        }
        let s = T::one() / total.sqrt();
        for t in &mut terms {
            t.coeff = t.coeff * s;
        }
        Self::new(beam, terms, rotation)
    }

    pub fn single(beam: BeamSpec<T>, m: usize, n: usize) -> Result<Self> {
        Self::new(beam, vec![ModeTerm { m, n, coeff: Complex::new(T::one(), T::zero()) }], T::zero())
    }

    /// Equal-weight `HG10 + HG01`, the mode selected by a wire at 45 degrees.
    pub fn diagonal(beam: BeamSpec<T>) -> Result<Self> {
        let c = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        Self::new(
            beam,
            vec![ModeTerm { m: 1, n: 0, coeff: c }, ModeTerm { m: 0, n: 1, coeff: c }],
            T::zero(),
        )
    }

    /// Amplitude at lab coordinates `(x, y)`.
    pub fn amplitude(&self, x: T, y: T) -> Complex<T> {
        let (s, c) = self.rotation.sin_cos();
        let xr = x * c + y * s;
        let yr = y * c - x * s;
        self.terms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, t| {
                acc + t.coeff * hg_unchecked(t.m, t.n, &self.beam, xr, yr)
            })
    }
}

/// Samples the pump superposition on `grid`.
pub fn pump_field<T: Real>(spec: &PumpSpec<T>, grid: Grid2D<T>) -> Result<ComplexField2D<T>> {
    spec.beam.validate()?;
    sample(|x, y| spec.amplitude(x, y), grid)
}

/// `<flip_y f, f> / <f, f>`: +1 for fields even in y, -1 for odd ones.
pub fn parity_overlap_y<T: Real>(field: &ComplexField2D<T>) -> Result<Complex<T>> {
    let flipped = field.flip_y()?;
    let norm = field.norm_sqr();
    if !(norm > T::zero()) {
        return Err(HomError::ZeroField);
    }
    Ok(flipped.inner_product(field)? / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_grid;
    use proptest::prelude::*;

    /// Explicit series, independent of the recurrence.
    fn hermite_series(n: usize, x: f64) -> f64 {
        let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
        (0..=n / 2)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * (2.0 * x).powi((n - 2 * k) as i32) / (fact(k) * fact(n - 2 * k))
            })
            .sum::<f64>()
            * fact(n)
    }

    fn beam() -> BeamSpec<f64> {
        BeamSpec::free_space(1.0e-3, 351.1e-9, 0.0).unwrap()
    }

    fn default_grid(b: &BeamSpec<f64>) -> Grid2D<f64> {
        make_grid(129, 129, 5.0 * b.waist, 5.0 * b.waist).unwrap()
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite(0, 0.7), 1.0);
        assert!((hermite(1, 0.7f64) - 1.4).abs() < 1e-15);
        assert!((hermite_series(3, 0.5) - (-5.0)).abs() < 1e-12);
        assert!((hermite(3, 0.5f64) - (-5.0)).abs() < 1e-12);
        for n in 0..12 {
            for x in [-2.3, -0.4, 0.0, 0.9, 3.1] {
                let a = hermite(n, x);
                let b = hermite_series(n, x);
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    proptest! {
        #[test]
        fn hermite_parity(n in 0usize..=10, x in -4.0f64..4.0) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let a = hermite(n, -x);
            let b = sign * hermite(n, x);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }

        #[test]
        fn parity_decomposition_identity(
            coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
            rot in 0.0f64..std::f64::consts::PI,
        ) {
            let modes = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (0, 2)];
            let terms: Vec<_> = modes
                .iter()
                .zip(&coeffs)
                .map(|(&(m, n), &(re, im))| ModeTerm { m, n, coeff: Complex::new(re, im) })
                .collect();
            prop_assume!(terms.iter().map(|t| t.coeff.norm_sqr()).sum::<f64>() > 1e-3);
            let b = beam();
            let spec = PumpSpec::normalized(b, terms, rot).unwrap();
            let f = pump_field(&spec, make_grid(33, 33, 5.0 * b.waist, 5.0 * b.waist).unwrap()).unwrap();
            let flipped = f.flip_y().unwrap();
            let half = Complex::new(0.5, 0.0);
            let even = f.combine(half, &flipped, half).unwrap();
            let odd = f.combine(half, &flipped, -half).unwrap();
            let total = f.norm_sqr();
            let expected = (even.norm_sqr() - odd.norm_sqr()) / total;
            let p = parity_overlap_y(&f).unwrap();
            prop_assert!((p.re - expected).abs() < 1e-10);
            prop_assert!(p.im.abs() < 1e-10);
            prop_assert!(p.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn fundamental_peak_is_real_positive() {
        let v = hg_amplitude(0, 0, &beam(), 0.0, 0.0).unwrap();
        assert!(v.re > 0.0 && v.im == 0.0);
    }

    #[test]
    fn hg01_vanishes_on_x_axis() {
        let b = beam();
        for x in [-3e-3, -1e-4, 0.0, 2e-3] {
            assert_eq!(hg_amplitude(0, 1, &b, x, 0.0).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn rejects_invalid_beam() {
        let bad = BeamSpec { waist: -1.0, rayleigh_range: 1.0, k: 1.0, z: 0.0 };
        assert!(hg_amplitude(0, 0, &bad, 0.0, 0.0).is_err());
        assert!(BeamSpec::new(1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn free_space_consistency_flag() {
        assert!(beam().is_free_space_consistent());
        let b = BeamSpec::new(1e-3, 1.0, 1.79e7, 0.0).unwrap();
        assert!(!b.is_free_space_consistent());
    }

    #[test]
    fn orthonormal_on_default_grid() {
        let b = beam();
        let g = default_grid(&b);
        let idx: Vec<(usize, usize)> = (0..=3).flat_map(|m| (0..=3).map(move |n| (m, n))).collect();
        let fields: Vec<_> = idx
            .iter()
            .map(|&(m, n)| pump_field(&PumpSpec::single(b, m, n).unwrap(), g).unwrap())
            .collect();
        for (a, fa) in fields.iter().enumerate() {
            for (c, fc) in fields.iter().enumerate() {
                let ip = fa.inner_product(fc).unwrap();
                let target = if a == c { 1.0 } else { 0.0 };
                assert!((ip - Complex::new(target, 0.0)).norm() < 1e-6, "{:?} {:?}", idx[a], idx[c]);
            }
        }
    }

    #[test]
    fn norm_away_from_waist() {
        let b0 = beam();
        let b = BeamSpec { z: 0.7 * b0.rayleigh_range, ..b0 };
        let g = make_grid(129, 129, 5.0 * b.width(), 5.0 * b.width()).unwrap();
        let f = pump_field(&PumpSpec::single(b, 1, 0).unwrap(), g).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pump_parities() {
        let b = beam();
        let g = default_grid(&b);
        let hg10 = pump_field(&PumpSpec::single(b, 1, 0).unwrap(), g).unwrap();
        assert_eq!(hg10.flip_y().unwrap(), hg10);
        for j in 0..g.ny {
            for i in 0..g.nx {
                assert!((hg10.at(i, j) + hg10.at(g.nx - 1 - i, j)).norm() < 1e-12);
            }
        }
        let hg01 = pump_field(&PumpSpec::single(b, 0, 1).unwrap(), g).unwrap();
        assert_eq!(hg01.flip_y().unwrap(), hg01.scaled(Complex::new(-1.0, 0.0)));
    }

    #[test]
    fn diagonal_superposition_has_antidiagonal_node() {
        let b = beam();
        let spec = PumpSpec::diagonal(b).unwrap();
        let peak = spec.amplitude(b.waist * 0.5, b.waist * 0.5).norm();
        for s in [-2.0, -0.6, 0.3, 1.7] {
            let x = s * b.waist;
            assert!(spec.amplitude(x, -x).norm() < 1e-12 * peak);
        }
        // same beam as a single HG10 rotated by 45 degrees
        let rotated = PumpSpec::new(
            b,
            vec![ModeTerm { m: 1, n: 0, coeff: Complex::new(1.0, 0.0) }],
            std::f64::consts::FRAC_PI_4,
        )
        .unwrap();
        for (x, y) in [(0.3e-3, 0.1e-3), (-1.1e-3, 0.4e-3)] {
            assert!((rotated.amplitude(x, y) - spec.amplitude(x, y)).norm() < 1e-9 * peak);
        }
    }

    #[test]
    fn canonical_parity_overlaps() {
        let b = beam();
        let g = default_grid(&b);
        let p = |spec: PumpSpec<f64>| parity_overlap_y(&pump_field(&spec, g).unwrap()).unwrap();
        assert!((p(PumpSpec::single(b, 1, 0).unwrap()) - 1.0).norm() < 1e-10);
        assert!((p(PumpSpec::single(b, 0, 1).unwrap()) + 1.0).norm() < 1e-10);
        assert!(p(PumpSpec::diagonal(b).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn parity_overlap_errors() {
        let g = make_grid(5, 5, 1.0, 1.0).unwrap();
        assert_eq!(parity_overlap_y(&ComplexField2D::<f64>::zeros(g)), Err(HomError::ZeroField));
        let shifted = crate::fields::Grid2D::with_center(5, 5, 1.0, 1.0, 0.0, 0.2).unwrap();
        let f = sample(|_, _| Complex::new(1.0, 0.0), shifted).unwrap();
        assert!(matches!(parity_overlap_y(&f), Err(HomError::AsymmetricGrid { .. })));
    }

    #[test]
    fn pump_normalization_enforced() {
        let c = Complex::new(1.0, 0.0);
        let terms = vec![ModeTerm { m: 1, n: 0, coeff: c }, ModeTerm { m: 0, n: 1, coeff: c }];
        assert!(PumpSpec::new(beam(), terms.clone(), 0.0).is_err());
        let spec = PumpSpec::normalized(beam(), terms, 0.0).unwrap();
        assert!((spec.terms[0].coeff.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let b = BeamSpec::<f32>::free_space(1.0, 0.5, 0.0).unwrap();
        let g = make_grid(65, 65, 5.0f32, 5.0).unwrap();
        let f = pump_field(&PumpSpec::single(b, 1, 1).unwrap(), g).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-4);
        assert!((parity_overlap_y(&f).unwrap().re + 1.0).abs() < 1e-5);
    }
}
