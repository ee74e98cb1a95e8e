//! Coincidence amplitudes synthesized from the biphoton angular spectrum.
//!
//! Cross-check route: instead of transferring the pump profile directly to the
//! detection plane, the amplitude is built from `Phi(q_s, q_i)`, propagated to the
//! plane `Z` with the paraxial kernel `exp(i q.rho - i q^2 Z / 2k)` and passed
//! through the beam splitter, reflected wavevectors mirrored in `q_y`.

use num_complex::Complex;

use super::components::{check_pair_cap, coincidence_sum};
use super::{pair_overlap, BeamSplitterSpec, DetectorSpec};
use crate::error::{HomError, Result};
use crate::fields::{ComplexField2D, Grid2D};
use crate::scalar::Real;
use crate::spdc::{phi, spectral_window, CrystalSpec, PolarizationMatrix};

/// `tt`/`rr` coincidence amplitudes on a detection grid, laid out like
/// [`super::BiphotonComponents`].
#[derive(Debug, Clone)]
pub struct SpectralAmplitudes<T> {
    grid: Grid2D<T>,
    tt: Vec<Complex<T>>,
    rr: Vec<Complex<T>>,
}

#[allow(clippy::too_many_arguments)]
pub fn spectral_amplitudes<T: Real>(
    spectrum: &ComplexField2D<T>,
    crystal: &CrystalSpec<T>,
    pol: &PolarizationMatrix<T>,
    bs: &BeamSplitterSpec<T>,
    detection_grid: Grid2D<T>,
    plane_z: T,
    k_photon: T,
) -> Result<SpectralAmplitudes<T>> {
    let grid = detection_grid;
    if !grid.is_symmetric_y() {
        return Err(HomError::AsymmetricGrid { center_y: grid.center_y.as_f64() });
    }
    let nd = grid.len();
    check_pair_cap(nd)?;

    let qg = *spectrum.grid();
    let window: Vec<((T, T), T)> = spectral_window(spectrum)
        .into_iter()
        .map(|(i, j)| ((qg.x(i), qg.y(j)), qg.trapezoid_weight(i, j)))
        .collect();
    let nw = window.len();

    // propagation kernel, window node a -> detector node p
    let half_inv_k = plane_z / (T::lit(2.0) * k_photon);
    let mut kernel = Vec::with_capacity(nw * nd);
    for &((qx, qy), _) in &window {
        for p in 0..nd {
            let (x, y) = (grid.x(p % grid.nx), grid.y(p / grid.nx));
            kernel.push(Complex::from_polar(T::one(), qx * x + qy * y - (qx * qx + qy * qy) * half_inv_k));
        }
    }

    let zero = Complex::new(T::zero(), T::zero());
    // partial[a][p2] = sum_b w_a w_b Phi(q_a, q_b) kernel[b][p2]
    let mut partial = vec![zero; nw * nd];
    for (a, &(qa, wa)) in window.iter().enumerate() {
        let row = &mut partial[a * nd..(a + 1) * nd];
        for (b, &(qb, wb)) in window.iter().enumerate() {
            let amp = phi(qa, qb, spectrum, crystal)? * (wa * wb);
            if amp == zero {
                continue;
            }
            for (acc, k) in row.iter_mut().zip(&kernel[b * nd..(b + 1) * nd]) {
                *acc = *acc + amp * k;
            }
        }
    }
    let mut two_photon = vec![zero; nd * nd];
    for a in 0..nw {
        let ka = &kernel[a * nd..(a + 1) * nd];
        let pa = &partial[a * nd..(a + 1) * nd];
        for p1 in 0..nd {
            let e = ka[p1];
            let row = &mut two_photon[p1 * nd..(p1 + 1) * nd];
            for (acc, h) in row.iter_mut().zip(pa) {
                *acc = *acc + e * h;
            }
        }
    }

    let mirror = |p: usize| {
        let (i, j) = (p % grid.nx, p / grid.nx);
        (grid.ny - 1 - j) * grid.nx + i
    };
    let tt_w = bs.t * bs.t;
    let rr_w = -bs.r * bs.r;
    let c = pol.c;
    let mut tt = vec![zero; nd * nd * 4];
    let mut rr = vec![zero; nd * nd * 4];
    for p1 in 0..nd {
        for p2 in 0..nd {
            let direct = two_photon[p1 * nd + p2] * tt_w;
            let mirrored = two_photon[mirror(p1) * nd + mirror(p2)] * rr_w;
            let base = (p1 * nd + p2) * 4;
            for s1 in 0..2 {
                for s2 in 0..2 {
                    tt[base + 2 * s1 + s2] = direct * c[s1][s2];
                    rr[base + 2 * s1 + s2] = mirrored * c[s2][s1];
                }
            }
        }
    }
    Ok(SpectralAmplitudes { grid, tt, rr })
}

impl<T: Real> SpectralAmplitudes<T> {
    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn tt(&self) -> &[Complex<T>] {
        &self.tt
    }

    pub fn rr(&self) -> &[Complex<T>] {
        &self.rr
    }

    /// Normalized coincidence rate, baseline = 1.
    pub fn coincidence_rate(&self, det1: &DetectorSpec<T>, det2: &DetectorSpec<T>, delay: T) -> Result<T> {
        let n = self.grid.len();
        let w1 = det1.weights(&self.grid);
        let w2 = det2.weights(&self.grid);
        let baseline = coincidence_sum(&self.tt, &self.rr, n, &w1, &w2, T::zero());
        if !(baseline > T::zero()) {
            return Err(HomError::ZeroBaseline);
        }
        let g = pair_overlap(delay, det1, det2);
        Ok(coincidence_sum(&self.tt, &self.rr, n, &w1, &w2, g) / baseline)
    }
}
