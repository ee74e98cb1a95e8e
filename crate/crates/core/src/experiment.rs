//! Delay scans over a fixed scenario, visibility and counting noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, HomError, Result};
use crate::fields::make_grid;
use crate::hom::{reduce, Aperture, BeamSplitterSpec, DetectorSpec, FilterShape, HomSetup};
use crate::modes::{pump_field, BeamSpec, PumpSpec};
use crate::scalar::Real;
use crate::spdc::{make_polarization, PolarizationKind};

/// Samples with `|delay| >= BASELINE_COHERENCE_LENGTHS * l_c` define the baseline.
pub const BASELINE_COHERENCE_LENGTHS: f64 = 5.0;

/// How the transverse planes are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling<T> {
    /// Detector nodes per axis.
    pub detection_nodes: usize,
    /// Half-width of the square detection window.
    pub half_width: T,
}

impl<T: Real> Sampling<T> {
    /// Pump nodes per axis; the pump lattice holds every detector-pair midpoint.
    pub fn pump_nodes(&self) -> usize {
        2 * self.detection_nodes - 1
    }
}

/// Pump, polarization, splitter and detectors of one interferometer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    pub name: String,
    pub pump: PumpSpec<T>,
    pub polarization: PolarizationKind<T>,
    pub bs: BeamSplitterSpec<T>,
    pub det1: DetectorSpec<T>,
    pub det2: DetectorSpec<T>,
    pub sampling: Sampling<T>,
    /// Distance of the detection planes from the beam splitter reference.
    pub plane_z: T,
}

/// First-order pumps used by the reference presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpKind {
    /// `HG10`: even in y.
    Hg10,
    /// `HG01`: odd in y.
    Hg01,
    /// Equal superposition of the two, nodal line at 45 degrees.
    Diagonal,
}

impl<T: Real> Scenario<T> {
    /// 351 nm pump of 0.5 mm waist focused on the detectors 500 mm away,
    /// 1 nm filters at 702 nm, balanced splitter, full apertures.
    pub fn reference(name: &str, pump: PumpKind, polarization: PolarizationKind<T>) -> Result<Self> {
        let waist = T::lit(0.5e-3);
        let beam = BeamSpec::free_space(waist, T::lit(351e-9), T::zero())?;
        let pump = match pump {
            PumpKind::Hg10 => PumpSpec::single(beam, 1, 0)?,
            PumpKind::Hg01 => PumpSpec::single(beam, 0, 1)?,
            PumpKind::Diagonal => PumpSpec::diagonal(beam)?,
        };
        let det = DetectorSpec::new(Aperture::Full, T::lit(1e-9), T::lit(702e-9), FilterShape::Gaussian)?;
        Ok(Self {
            name: name.to_string(),
            pump,
            polarization,
            bs: BeamSplitterSpec::balanced(),
            det1: det,
            det2: det,
            sampling: Sampling { detection_nodes: 65, half_width: T::lit(5.0) * waist },
            plane_z: T::lit(0.5),
        })
    }

    pub fn with_sampling(mut self, detection_nodes: usize) -> Self {
        self.sampling.detection_nodes = detection_nodes;
        self
    }

    /// `K = k_1 + k_2` for degenerate photons at the filter center.
    pub fn k_sum(&self) -> T {
        T::lit(2.0) * self.det1.wavenumber()
    }

    pub fn setup(&self) -> Result<HomSetup<T>> {
        let s = self.sampling;
        let h = s.half_width;
        let detection = make_grid(s.detection_nodes, s.detection_nodes, h, h)?;
        let pump_grid = make_grid(s.pump_nodes(), s.pump_nodes(), h, h)?;
        let pump = pump_field(&self.pump, pump_grid)?;
        HomSetup::new(
            pump,
            make_polarization(self.polarization)?,
            self.bs,
            self.det1,
            self.det2,
            detection,
            self.plane_z,
            self.k_sum(),
        )
    }
}

/// Settings of the optional photon-counting overlay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Expected counts at unit normalized rate.
    pub mean_counts: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig<T> {
    pub scenario: Scenario<T>,
    /// Strictly increasing path-length differences.
    pub delays: Vec<T>,
    pub noise: Option<NoiseSpec>,
}

impl<T: Real> ScanConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.delays.is_empty() {
            return Err(invalid("delay list is empty"));
        }
        if self.delays.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("delays must be strictly increasing"));
        }
        if let Some(noise) = self.noise {
            if !(noise.mean_counts > 0.0 && noise.mean_counts.is_finite()) {
                return Err(invalid("mean_counts must be positive"));
            }
        }
        Ok(())
    }
}

/// `steps` evenly spaced delays from `min` to `max` inclusive.
pub fn linear_delays<T: Real>(min: T, max: T, steps: usize) -> Result<Vec<T>> {
    if steps < 2 || !(min < max) {
        return Err(invalid("delay scan needs min < max and at least two steps"));
    }
    let span = max - min;
    let last = T::from_usize_lossy(steps - 1);
    Ok((0..steps)
        .map(|i| {
            // mirror-exact about the center so symmetric scans give C(d) = C(-d) bit for bit
            let k = i.min(steps - 1 - i);
            let offset = span * T::from_usize_lossy(k) / last;
            if i <= steps - 1 - i { min + offset } else { max - offset }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceCurve<T> {
    pub delays: Vec<T>,
    /// Normalized rates, baseline 1.
    pub rates: Vec<T>,
    pub counts: Option<Vec<u64>>,
    pub noise: Option<NoiseSpec>,
    pub coherence_length: T,
    pub meta: Scenario<T>,
}

pub fn run_scan<T: Real>(cfg: &ScanConfig<T>) -> Result<CoincidenceCurve<T>> {
    cfg.validate()?;
    let setup = cfg.scenario.setup()?;
    let reduction = reduce(&setup)?;
    let rates = cfg.delays.iter().map(|&d| reduction.rate(setup.overlap(d))).collect();
    let curve = CoincidenceCurve {
        delays: cfg.delays.clone(),
        rates,
        counts: None,
        noise: None,
        coherence_length: setup.coherence_length(),
        meta: cfg.scenario.clone(),
    };
    match cfg.noise {
        Some(noise) => add_poisson_noise(&curve, noise.mean_counts, noise.seed),
        None => Ok(curve),
    }
}

/// Poisson counts with mean `rate * mean_counts`, from a ChaCha8 stream seeded by `seed`.
pub fn add_poisson_noise<T: Real>(
    curve: &CoincidenceCurve<T>,
    mean_counts: f64,
    seed: u64,
) -> Result<CoincidenceCurve<T>> {
    if !(mean_counts > 0.0 && mean_counts.is_finite()) {
        return Err(invalid("mean_counts must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(curve.rates.len());
    for &rate in &curve.rates {
        let mean = rate.as_f64().max(0.0) * mean_counts;
        let draw = if mean > 0.0 {
            let dist = Poisson::new(mean).map_err(|e| invalid(format!("poisson mean {mean}: {e}")))?;
            let v: f64 = dist.sample(&mut rng);
            v as u64
        } else {
            0
        };
        counts.push(draw);
    }
    Ok(CoincidenceCurve {
        counts: Some(counts),
        noise: Some(NoiseSpec { mean_counts, seed }),
        ..curve.clone()
    })
}

/// `|C_baseline - C(0)| / C_baseline`, on counts when present, otherwise on rates.
pub fn visibility<T: Real>(curve: &CoincidenceCurve<T>) -> Result<T> {
    let values: Vec<T> = match (&curve.counts, curve.noise) {
        (Some(counts), Some(noise)) => {
            counts.iter().map(|&c| T::lit(c as f64 / noise.mean_counts)).collect()
        }
        _ => curve.rates.clone(),
    };
    let lc = curve.coherence_length;
    let zero_tol = lc * T::lit(1e-9);
    let center = curve
        .delays
        .iter()
        .position(|d| d.abs() <= zero_tol)
        .ok_or(HomError::MissingZeroDelay)?;
    let min_delay = lc * T::lit(BASELINE_COHERENCE_LENGTHS);
    let far: Vec<T> = curve
        .delays
        .iter()
        .zip(&values)
        .filter(|(d, _)| d.abs() >= min_delay)
        .map(|(_, &v)| v)
        .collect();
    if far.is_empty() {
        return Err(HomError::InsufficientBaseline { min_delay: min_delay.as_f64() });
    }
    let baseline = far.iter().copied().sum::<T>() / T::from_usize_lossy(far.len());
    if !(baseline > T::zero()) {
        return Err(HomError::ZeroBaseline);
    }
    Ok((baseline - values[center]).abs() / baseline)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(pump: PumpKind, pol: PolarizationKind<f64>, noise: Option<NoiseSpec>) -> CoincidenceCurve<f64> {
        let scenario = Scenario::reference("test", pump, pol).unwrap().with_sampling(33);
        let delays = linear_delays(-1.5e-3, 1.5e-3, 41).unwrap();
        run_scan(&ScanConfig { scenario, delays, noise }).unwrap()
    }

    #[test]
    fn linear_delays_are_mirror_exact() {
        let d = linear_delays(-1.5e-3, 1.5e-3, 41).unwrap();
        assert_eq!(d.len(), 41);
        assert_eq!(d[20], 0.0);
        for i in 0..41 {
            assert_eq!(d[i], -d[40 - i]);
        }
        assert!(d.windows(2).all(|w| w[0] < w[1]));
        assert!(linear_delays(1.0, 0.0, 5).is_err());
    }

    #[test]
    fn scan_config_validation() {
        let scenario = Scenario::<f64>::reference("x", PumpKind::Hg10, PolarizationKind::SymmetricHh).unwrap();
        let bad = ScanConfig { scenario: scenario.clone(), delays: vec![0.0, 0.0], noise: None };
        assert!(run_scan(&bad).is_err());
        let noise = Some(NoiseSpec { mean_counts: 0.0, seed: 1 });
        let bad = ScanConfig { scenario, delays: vec![0.0, 1.0], noise };
        assert!(run_scan(&bad).is_err());
    }

    #[test]
    fn dip_peak_and_flat_shapes() {
        let dip = scan(PumpKind::Hg10, PolarizationKind::SymmetricHh, None);
        assert!(dip.rates[20].abs() < 1e-9);
        let dip_a = scan(PumpKind::Hg01, PolarizationKind::AntisymmetricSinglet, None);
        assert!(dip_a.rates[20].abs() < 1e-9);
        let flat = scan(PumpKind::Diagonal, PolarizationKind::SymmetricHh, None);
        assert!(flat.rates.iter().all(|r| (r - 1.0).abs() < 1e-9));
        for curve in [&dip, &dip_a] {
            assert!((curve.rates[0] - 1.0).abs() < 1e-6 && (curve.rates[40] - 1.0).abs() < 1e-6);
            for i in 0..41 {
                assert_eq!(curve.rates[i], curve.rates[40 - i]);
                assert!(curve.rates[i] >= 0.0);
            }
        }
    }

    #[test]
    fn ideal_visibilities() {
        let dip = scan(PumpKind::Hg10, PolarizationKind::SymmetricHh, None);
        assert!((visibility(&dip).unwrap() - 1.0).abs() < 1e-9);
        let peak = scan(PumpKind::Hg01, PolarizationKind::SymmetricHh, None);
        assert!((visibility(&peak).unwrap() - 1.0).abs() < 1e-9);
        let flat = scan(PumpKind::Diagonal, PolarizationKind::SymmetricHh, None);
        assert!(visibility(&flat).unwrap().abs() < 1e-9);
    }

    #[test]
    fn visibility_needs_baseline_and_center() {
        let mut curve = scan(PumpKind::Hg10, PolarizationKind::SymmetricHh, None);
        let near: Vec<usize> = (15..26).collect();
        let short = CoincidenceCurve {
            delays: near.iter().map(|&i| curve.delays[i]).collect(),
            rates: near.iter().map(|&i| curve.rates[i]).collect(),
            ..curve.clone()
        };
        assert!(matches!(visibility(&short), Err(HomError::InsufficientBaseline { .. })));
        curve.delays[20] = 1e-6;
        assert_eq!(visibility(&curve), Err(HomError::MissingZeroDelay));
    }

    #[test]
    fn poisson_noise_is_deterministic_and_zero_at_zero_rate() {
        let dip = scan(PumpKind::Hg10, PolarizationKind::SymmetricHh, None);
        let mut dip0 = dip.clone();
        dip0.rates[20] = 0.0;
        let a = add_poisson_noise(&dip0, 1000.0, 42).unwrap();
        let b = add_poisson_noise(&dip0, 1000.0, 42).unwrap();
        let c = add_poisson_noise(&dip0, 1000.0, 43).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_ne!(a.counts, c.counts);
        assert_eq!(a.counts.as_ref().unwrap()[20], 0);
        assert!(add_poisson_noise(&dip, -1.0, 1).is_err());
    }

    #[test]
    fn run_scan_applies_configured_noise() {
        let noise = Some(NoiseSpec { mean_counts: 500.0, seed: 7 });
        let a = scan(PumpKind::Hg01, PolarizationKind::SymmetricHh, noise);
        let b = scan(PumpKind::Hg01, PolarizationKind::SymmetricHh, noise);
        assert!(a.counts.is_some());
        assert_eq!(a, b);
    }

    #[test]
    fn noisy_dip_visibility_over_seeds() {
        let dip = scan(PumpKind::Hg10, PolarizationKind::SymmetricHh, None);
        let mut clean = dip.clone();
        clean.rates.iter_mut().for_each(|r| *r = r.max(0.0));
        clean.rates[20] = 0.0;
        for seed in 0..100 {
            let noisy = add_poisson_noise(&clean, 1000.0, seed).unwrap();
            assert!((visibility(&noisy).unwrap() - 1.0).abs() < 0.05, "seed {seed}");
        }
    }

    #[test]
    fn noisy_peak_visibility_statistics() {
        // baseline ~4 samples of mean 1000, center of mean 2000: sigma(V) ~ 0.04
        let peak = scan(PumpKind::Hg01, PolarizationKind::SymmetricHh, None);
        let vs: Vec<f64> = (0..100)
            .map(|seed| visibility(&add_poisson_noise(&peak, 1000.0, seed).unwrap()).unwrap())
            .collect();
        let mean = vs.iter().sum::<f64>() / vs.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean visibility {mean}");
    }

    #[test]
    fn poisson_mean_law_of_large_numbers() {
        let flat = scan(PumpKind::Diagonal, PolarizationKind::SymmetricHh, None);
        let point = CoincidenceCurve { delays: vec![0.0], rates: vec![flat.rates[0]], ..flat.clone() };
        let mean_counts = 100.0;
        let n = 10_000;
        let total: u64 = (0..n)
            .map(|seed| add_poisson_noise(&point, mean_counts, seed).unwrap().counts.unwrap()[0])
            .sum();
        let estimate = total as f64 / (n as f64 * mean_counts);
        // sigma of the estimate = sqrt(rate / (n * mean_counts))
        let sigma = (1.0 / (n as f64 * mean_counts)).sqrt();
        assert!((estimate - 1.0).abs() < 3.0 * sigma, "{estimate}");
    }
}
