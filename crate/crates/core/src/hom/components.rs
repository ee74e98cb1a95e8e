use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::HomSetup;
use crate::error::{HomError, Result};
use crate::fields::Grid2D;
use crate::scalar::Real;

/// Largest number of detector-pair samples the 4D paths will allocate.
pub const ORACLE_PAIR_CAP: usize = 32 * 32 * 32 * 32;

/// The four transmission/reflection amplitudes sampled on every detector pair
/// and polarization pair.
///
/// Storage index: `((p1 * n + p2) * 4) + 2 * s1 + s2` where `p = j * nx + i`
/// and `s = 0` (H) or `1` (V). For `tt`/`rr` the first point belongs to detector 1
/// and the second to detector 2; for `tr` (`rt`) both lie in arm 1 (arm 2).
#[derive(Debug, Clone)]
pub struct BiphotonComponents<T> {
    grid: Grid2D<T>,
    pub plane_z: T,
    pub k_sum: T,
    tt: Vec<Complex<T>>,
    rr: Vec<Complex<T>>,
    // one of the two orderings of the same-port amplitude; the other is its exchange
    tr_direct: Vec<Complex<T>>,
    rt_direct: Vec<Complex<T>>,
}

/// Pair-detection probabilities summed over the apertures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairProbabilities<T> {
    pub coincidence: T,
    /// Both photons in arm 1.
    pub bunching_1: T,
    /// Both photons in arm 2.
    pub bunching_2: T,
}

impl<T: Real> PairProbabilities<T> {
    pub fn total(&self) -> T {
        self.coincidence + self.bunching_1 + self.bunching_2
    }
}

pub(super) fn check_pair_cap(nodes: usize) -> Result<()> {
    let requested = nodes.saturating_mul(nodes);
    if requested > ORACLE_PAIR_CAP {
        return Err(HomError::ResourceLimit { requested, cap: ORACLE_PAIR_CAP });
    }
    Ok(())
}

impl<T: Real> BiphotonComponents<T> {
    pub fn build(setup: &HomSetup<T>) -> Result<Self> {
        let grid = setup.detection_grid;
        let n = grid.len();
        check_pair_cap(n)?;
        let pi = setup.pol.c;
        let (t, r) = (setup.bs.t, setup.bs.r);
        let tt_w = Complex::new(t * t, T::zero());
        let rr_w = Complex::new(-r * r, T::zero());
        let tr_w = Complex::new(T::zero(), t * r);
        let scale = setup.k_sum / (T::lit(2.0) * setup.plane_z);
        let half = T::lit(0.5);

        let total = n * n * 4;
        let zero = Complex::new(T::zero(), T::zero());
        let mut tt = vec![zero; total];
        let mut rr = vec![zero; total];
        let mut tr_direct = vec![zero; total];
        let mut rt_direct = vec![zero; total];
        let pump = &setup.pump;

        for p1 in 0..n {
            let (x1, y1) = (grid.x(p1 % grid.nx), grid.y(p1 / grid.nx));
            for p2 in 0..n {
                let (x2, y2) = (grid.x(p2 % grid.nx), grid.y(p2 / grid.nx));
                let mid_x = (x1 + x2) * half;
                let dx = x1 - x2;
                let coincident_phase =
                    Complex::from_polar(T::one(), scale * (dx * dx + (y1 - y2) * (y1 - y2)));
                let same_port_phase =
                    Complex::from_polar(T::one(), scale * (dx * dx + (y1 + y2) * (y1 + y2)));
                let w_direct = pump.interpolate(mid_x, (y1 + y2) * half)?;
                let w_mirror = pump.interpolate(mid_x, -(y1 + y2) * half)?;
                let w_same = pump.interpolate(mid_x, (y2 - y1) * half)?;
                let a_tt = tt_w * coincident_phase * w_direct;
                let a_rr = rr_w * coincident_phase * w_mirror;
                let a_same = tr_w * same_port_phase * w_same;
                let base = (p1 * n + p2) * 4;
                for s1 in 0..2 {
                    for s2 in 0..2 {
                        let k = base + 2 * s1 + s2;
                        tt[k] = a_tt * pi[s1][s2];
                        rr[k] = a_rr * pi[s2][s1];
                        tr_direct[k] = a_same * pi[s1][s2];
                        rt_direct[k] = a_same * pi[s1][s2];
                    }
                }
            }
        }
        Ok(Self { grid, plane_z: setup.plane_z, k_sum: setup.k_sum, tt, rr, tr_direct, rt_direct })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    #[inline]
    pub fn index(&self, p1: usize, p2: usize, s1: usize, s2: usize) -> usize {
        (p1 * self.grid.len() + p2) * 4 + 2 * s1 + s2
    }

    pub fn tt(&self) -> &[Complex<T>] {
        &self.tt
    }

    pub fn rr(&self) -> &[Complex<T>] {
        &self.rr
    }

    fn symmetrized(&self, direct: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.grid.len();
        let mut out = Vec::with_capacity(direct.len());
        for p1 in 0..n {
            for p2 in 0..n {
                for s1 in 0..2 {
                    for s2 in 0..2 {
                        out.push(direct[self.index(p1, p2, s1, s2)] + direct[self.index(p2, p1, s2, s1)]);
                    }
                }
            }
        }
        out
    }

    /// Both photons in arm 1, `Psi_tr(r1, r1')`.
    pub fn tr(&self) -> Vec<Complex<T>> {
        self.symmetrized(&self.tr_direct)
    }

    /// Both photons in arm 2, `Psi_rt(r2, r2')`.
    pub fn rt(&self) -> Vec<Complex<T>> {
        self.symmetrized(&self.rt_direct)
    }

    /// Aperture-weighted probabilities for temporal overlap `g`.
    ///
    /// The rr term is split along an orthonormal pair of temporal modes:
    /// `g` of it overlaps the tt term, `sqrt(1 - g^2)` is orthogonal to it.
    pub fn probabilities(&self, w1: &[T], w2: &[T], overlap: T) -> PairProbabilities<T> {
        let n = self.grid.len();
        let orthogonal = T::one() - overlap * overlap;
        let half = T::lit(0.5);
        let mut coincidence = T::zero();
        let mut bunching_1 = T::zero();
        let mut bunching_2 = T::zero();
        for p1 in 0..n {
            for p2 in 0..n {
                let cw = w1[p1] * w2[p2];
                let b1 = w1[p1] * w1[p2];
                let b2 = w2[p1] * w2[p2];
                for s1 in 0..2 {
                    for s2 in 0..2 {
                        let k = self.index(p1, p2, s1, s2);
                        let swapped = self.index(p2, p1, s2, s1);
                        if cw != T::zero() {
                            coincidence = coincidence + cw * coincident(self.tt[k], self.rr[k], overlap, orthogonal);
                        }
                        if b1 != T::zero() {
                            let (a, b) = (self.tr_direct[k], self.tr_direct[swapped]);
                            bunching_1 = bunching_1 + half * b1 * same_port(a, b, overlap);
                        }
                        if b2 != T::zero() {
                            let (a, b) = (self.rt_direct[k], self.rt_direct[swapped]);
                            bunching_2 = bunching_2 + half * b2 * same_port(a, b, overlap);
                        }
                    }
                }
            }
        }
        PairProbabilities { coincidence, bunching_1, bunching_2 }
    }
}

#[inline]
fn coincident<T: Real>(tt: Complex<T>, rr: Complex<T>, overlap: T, orthogonal: T) -> T {
    (tt + rr * overlap).norm_sqr() + orthogonal * rr.norm_sqr()
}

/// Aperture-weighted coincidence probability of `tt`/`rr` arrays laid out as in
/// [`BiphotonComponents`] over `n` detector nodes.
pub(super) fn coincidence_sum<T: Real>(
    tt: &[Complex<T>],
    rr: &[Complex<T>],
    n: usize,
    w1: &[T],
    w2: &[T],
    overlap: T,
) -> T {
    let orthogonal = T::one() - overlap * overlap;
    let mut total = T::zero();
    for p1 in 0..n {
        for p2 in 0..n {
            let cw = w1[p1] * w2[p2];
            if cw == T::zero() {
                continue;
            }
            let base = (p1 * n + p2) * 4;
            let mut local = T::zero();
            for k in base..base + 4 {
                local = local + coincident(tt[k], rr[k], overlap, orthogonal);
            }
            total = total + cw * local;
        }
    }
    total
}

fn same_port<T: Real>(a: Complex<T>, b: Complex<T>, overlap: T) -> T {
    a.norm_sqr() + b.norm_sqr() + T::lit(2.0) * overlap * (a * b.conj()).re
}

/// Brute-force coincidence rate: direct 4D sum over detector pairs.
pub fn coincidence_rate_oracle<T: Real>(setup: &HomSetup<T>, delay: T) -> Result<T> {
    let components = BiphotonComponents::build(setup)?;
    let g = &setup.detection_grid;
    let n = g.len();
    let w1 = setup.det1.weights(g);
    let w2 = setup.det2.weights(g);
    let (tt, rr) = (components.tt(), components.rr());
    let baseline = coincidence_sum(tt, rr, n, &w1, &w2, T::zero());
    if !(baseline > T::zero()) {
        return Err(HomError::ZeroBaseline);
    }
    Ok(coincidence_sum(tt, rr, n, &w1, &w2, setup.overlap(delay)) / baseline)
}
