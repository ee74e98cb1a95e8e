//! Two-photon angular spectrum and polarization state of the down-converted pair.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::ComplexField2D;
use crate::scalar::Real;

/// Relative threshold below which the pump spectrum is treated as zero.
pub const SPECTRAL_WINDOW_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec<T> {
    /// Crystal length along z.
    pub length: T,
    /// Pump wavevector magnitude.
    pub k_pump: T,
    /// Treat the phase-matching sinc as identically one.
    pub thin_crystal: bool,
}

impl<T: Real> CrystalSpec<T> {
    pub fn new(length: T, k_pump: T, thin_crystal: bool) -> Result<Self> {
        if !(length > T::zero() && length.is_finite()) {
            return Err(invalid("crystal length must be positive"));
        }
        if !(k_pump > T::zero() && k_pump.is_finite()) {
            return Err(invalid("pump wavevector must be positive"));
        }
        Ok(Self { length, k_pump, thin_crystal })
    }

    pub fn from_pump_wavelength(length: T, wavelength: T, thin_crystal: bool) -> Result<Self> {
        if !(wavelength > T::zero()) {
            return Err(invalid("pump wavelength must be positive"));
        }
        Self::new(length, T::TAU() / wavelength, thin_crystal)
    }

    /// Amplitude prefactor `(1/pi) sqrt(2 L / K)`, which makes `|Phi|^2`
    /// integrate to one for a unit-norm pump spectrum.
    pub fn prefactor(&self) -> T {
        (T::lit(2.0) * self.length / self.k_pump).sqrt() / T::PI()
    }

    /// Phase-matching factor `sinc(L |q_s - q_i|^2 / 4K)`.
    pub fn phase_matching(&self, diff_sqr: T) -> T {
        if self.thin_crystal {
            return T::one();
        }
        sinc(self.length * diff_sqr / (T::lit(4.0) * self.k_pump))
    }
}

/// `sin(u) / u` with the removable singularity filled in.
pub fn sinc<T: Real>(u: T) -> T {
    if u == T::zero() {
        T::one()
    } else {
        u.sin() / u
    }
}

/// Biphoton angular spectrum `Phi(q_s, q_i)` from the pump spectrum `v`.
pub fn phi<T: Real>(
    q_s: (T, T),
    q_i: (T, T),
    v: &ComplexField2D<T>,
    crystal: &CrystalSpec<T>,
) -> Result<Complex<T>> {
    let pump = v.interpolate(q_s.0 + q_i.0, q_s.1 + q_i.1)?;
    let (dx, dy) = (q_s.0 - q_i.0, q_s.1 - q_i.1);
    Ok(pump * (crystal.prefactor() * crystal.phase_matching(dx * dx + dy * dy)))
}

/// Nodes of `v` whose magnitude exceeds the window threshold, as `(i, j)`.
pub fn spectral_window<T: Real>(v: &ComplexField2D<T>) -> Vec<(usize, usize)> {
    let g = v.grid();
    let cut = v.max_abs() * T::lit(SPECTRAL_WINDOW_THRESHOLD);
    let mut nodes = Vec::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            if v.at(i, j).norm() > cut {
                nodes.push((i, j));
            }
        }
    }
    nodes
}

/// Trapezoid quadrature of `|Phi|^2` over the spectral window squared.
pub fn phi_norm_sqr<T: Real>(v: &ComplexField2D<T>, crystal: &CrystalSpec<T>) -> Result<T> {
    let g = *v.grid();
    let nodes: Vec<((T, T), T)> = spectral_window(v)
        .into_iter()
        .map(|(i, j)| ((g.x(i), g.y(j)), g.trapezoid_weight(i, j)))
        .collect();
    let mut total = T::zero();
    for &(qs, ws) in &nodes {
        let mut row = T::zero();
        for &(qi, wi) in &nodes {
            row = row + phi(qs, qi, v, crystal)?.norm_sqr() * wi;
        }
        total = total + row * ws;
    }
    Ok(total)
}

/// Two-photon polarization amplitudes `c[s][i]` over the basis (H, V).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationMatrix<T> {
    pub c: [[Complex<T>; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationKind<T> {
    /// `|H>|H>`
    SymmetricHh,
    /// `(|H>|V> - |V>|H>) / sqrt 2`
    AntisymmetricSinglet,
    Custom([[Complex<T>; 2]; 2]),
}

pub fn make_polarization<T: Real>(kind: PolarizationKind<T>) -> Result<PolarizationMatrix<T>> {
    let z = Complex::new(T::zero(), T::zero());
    let r = |x: T| Complex::new(x, T::zero());
    match kind {
        PolarizationKind::SymmetricHh => Ok(PolarizationMatrix { c: [[r(T::one()), z], [z, z]] }),
        PolarizationKind::AntisymmetricSinglet => {
            let h = T::FRAC_1_SQRT_2();
            Ok(PolarizationMatrix { c: [[z, r(h)], [r(-h), z]] })
        }
        PolarizationKind::Custom(c) => PolarizationMatrix::normalized(c),
    }
}

/// Symmetric and antisymmetric parts of a polarization matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeParts<T> {
    pub symmetric: [[Complex<T>; 2]; 2],
    pub antisymmetric: [[Complex<T>; 2]; 2],
    /// Squared norms of the two parts; they sum to the norm of the input.
    pub weights: (T, T),
}

fn frobenius_sqr<T: Real>(c: &[[Complex<T>; 2]; 2]) -> T {
    c.iter().flatten().map(|v| v.norm_sqr()).sum()
}

impl<T: Real> PolarizationMatrix<T> {
    pub fn normalized(c: [[Complex<T>; 2]; 2]) -> Result<Self> {
        let n = frobenius_sqr(&c);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(invalid("polarization matrix must be nonzero and finite"));
        }
        let s = T::one() / n.sqrt();
        let mut out = c;
        for v in out.iter_mut().flatten() {
            *v = *v * s;
        }
        Ok(Self { c: out })
    }

    pub fn norm_sqr(&self) -> T {
        frobenius_sqr(&self.c)
    }

    pub fn transpose(&self) -> Self {
        let c = self.c;
        Self { c: [[c[0][0], c[1][0]], [c[0][1], c[1][1]]] }
    }

    /// `sum c[a][b] conj(c[b][a])`: +1 for symmetric, -1 for antisymmetric states.
    pub fn exchange_overlap(&self) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in 0..2 {
            for b in 0..2 {
                acc = acc + self.c[a][b] * self.c[b][a].conj();
            }
        }
        acc
    }
}

pub fn exchange_decompose<T: Real>(p: &PolarizationMatrix<T>) -> ExchangeParts<T> {
    let half = T::lit(0.5);
    let mut symmetric = p.c;
    let mut antisymmetric = p.c;
    for a in 0..2 {
        for b in 0..2 {
            symmetric[a][b] = (p.c[a][b] + p.c[b][a]) * half;
            antisymmetric[a][b] = (p.c[a][b] - p.c[b][a]) * half;
        }
    }
    let weights = (frobenius_sqr(&symmetric), frobenius_sqr(&antisymmetric));
    ExchangeParts { symmetric, antisymmetric, weights }
}
