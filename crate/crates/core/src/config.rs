//! Run-config files: TOML blocks, figure presets and validation.
//!
//! A config is resolved in three layers: built-in defaults, then the named
//! preset (if any), then the file itself. Tables merge key by key; arrays and
//! scalars replace. Unknown keys are rejected.
//!
//! ```toml
//! preset = "fig4_even"
//!
//! [pump]
//! waist_mm = 0.5
//! modes = [{ m = 1, n = 0, re = 1.0, im = 0.0 }]
//!
//! [detectors]
//! aperture_mm = 2.0        # diameter, or "full"
//!
//! [delay_scan]
//! min_um = -1500.0
//! max_um = 1500.0
//! steps = 41
//! ```

use std::fmt;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::experiment::{linear_delays, NoiseSpec, Sampling, Scenario};
use crate::hom::{Aperture, BeamSplitterSpec, DetectorSpec, FilterShape};
use crate::modes::{BeamSpec, ModeTerm, PumpSpec};
use crate::spdc::{CrystalSpec, PolarizationKind};

pub const PRESETS: [&str; 5] = ["fig4_even", "fig4_odd", "fig5_even", "fig5_odd", "fig6_superposition"];

const MM: f64 = 1e-3;
const UM: f64 = 1e-6;
const NM: f64 = 1e-9;
const RELATIVE_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Read { path: String, message: String },
    Syntax(String),
    /// A field failed to parse or validate; `field` is the dotted key path.
    Field { field: String, message: String },
    UnknownPreset(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read { path, message } => write!(f, "cannot read config {path}: {message}"),
            ConfigError::Syntax(m) => write!(f, "config syntax error: {m}"),
            ConfigError::Field { field, message } => write!(f, "config field `{field}`: {message}"),
            ConfigError::UnknownPreset(name) => {
                write!(f, "unknown preset `{name}` (expected one of {})", PRESETS.join(", "))
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub m: usize,
    pub n: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpBlock {
    pub waist_mm: f64,
    pub wavelength_nm: f64,
    /// Distance of the detection plane from the pump waist.
    pub z_mm: f64,
    pub rotation_deg: f64,
    /// Coefficients are rescaled to unit total weight.
    pub modes: Vec<ModeEntry>,
}

impl Default for PumpBlock {
    fn default() -> Self {
        Self {
            waist_mm: 0.5,
            wavelength_nm: 351.0,
            z_mm: 0.0,
            rotation_deg: 0.0,
            modes: vec![ModeEntry { m: 1, n: 0, re: 1.0, im: 0.0 }],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationName {
    #[default]
    SymmetricHh,
    AntisymmetricSinglet,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolarizationBlock {
    pub kind: PolarizationName,
    /// `[re, im]` of the HH, HV, VH, VV amplitudes, for `kind = "custom"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 2]; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalBlock {
    #[serde(rename = "L_mm")]
    pub length_mm: f64,
    pub pump_wavelength_nm: f64,
    pub thin_crystal: bool,
}

impl Default for CrystalBlock {
    fn default() -> Self {
        Self { length_mm: 2.0, pump_wavelength_nm: 351.0, thin_crystal: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamSplitterBlock {
    pub t: f64,
    pub r: f64,
}

impl Default for BeamSplitterBlock {
    fn default() -> Self {
        Self { t: std::f64::consts::FRAC_1_SQRT_2, r: std::f64::consts::FRAC_1_SQRT_2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ApertureSetting {
    Diameter(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorsBlock {
    pub aperture_mm: ApertureSetting,
    pub filter_fwhm_nm: f64,
    pub filter_center_nm: f64,
    pub filter_shape: FilterShape,
}

impl Default for DetectorsBlock {
    fn default() -> Self {
        Self {
            aperture_mm: ApertureSetting::Named("full".into()),
            filter_fwhm_nm: 1.0,
            filter_center_nm: 702.0,
            filter_shape: FilterShape::Gaussian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DelayScanBlock {
    pub min_um: f64,
    pub max_um: f64,
    pub steps: usize,
}

impl Default for DelayScanBlock {
    fn default() -> Self {
        Self { min_um: -1500.0, max_um: 1500.0, steps: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseBlock {
    pub mean_counts: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    /// Detector nodes per axis; the pump is sampled on `2n - 1`.
    pub detection_nodes: usize,
    /// Half-width of the detection window in pump waists.
    pub extent_waists: f64,
    pub center_x_mm: f64,
    pub center_y_mm: f64,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self { detection_nodes: 65, extent_waists: 5.0, center_x_mm: 0.0, center_y_mm: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Pump profile transferred to the detection plane.
    #[default]
    DetectionPlane,
    /// Full biphoton angular spectrum, including phase matching.
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomBlock {
    pub plane_z_mm: f64,
    pub route: Route,
    /// Detector nodes per axis on the spectral route.
    pub spectral_nodes: usize,
    /// Pump near-field nodes per axis used for the spectrum on the spectral route.
    pub spectrum_nodes: usize,
}

impl Default for HomBlock {
    fn default() -> Self {
        Self { plane_z_mm: 500.0, route: Route::DetectionPlane, spectral_nodes: 9, spectrum_nodes: 65 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyBlock {
    pub detection_nodes: usize,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        Self { detection_nodes: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub pump: PumpBlock,
    pub polarization: PolarizationBlock,
    pub crystal: CrystalBlock,
    pub beamsplitter: BeamSplitterBlock,
    pub detectors: DetectorsBlock,
    pub delay_scan: DelayScanBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseBlock>,
    pub grid: GridBlock,
    pub hom: HomBlock,
    pub verify: VerifyBlock,
}

fn preset_table(name: &str) -> Result<toml::Table, ConfigError> {
    let diag = std::f64::consts::FRAC_1_SQRT_2;
    let (pol, modes) = match name {
        "fig4_even" => ("symmetric_hh", vec![(1, 0, 1.0)]),
        "fig4_odd" => ("symmetric_hh", vec![(0, 1, 1.0)]),
        "fig5_even" => ("antisymmetric_singlet", vec![(1, 0, 1.0)]),
        "fig5_odd" => ("antisymmetric_singlet", vec![(0, 1, 1.0)]),
        "fig6_superposition" => ("symmetric_hh", vec![(1, 0, diag), (0, 1, diag)]),
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    };
    let mut modes_toml = toml::value::Array::new();
    for (m, n, re) in modes {
        let mut t = toml::Table::new();
        t.insert("m".into(), toml::Value::Integer(m));
        t.insert("n".into(), toml::Value::Integer(n));
        t.insert("re".into(), toml::Value::Float(re));
        t.insert("im".into(), toml::Value::Float(0.0));
        modes_toml.push(toml::Value::Table(t));
    }
    let mut pump = toml::Table::new();
    pump.insert("modes".into(), toml::Value::Array(modes_toml));
    let mut polarization = toml::Table::new();
    polarization.insert("kind".into(), toml::Value::String(pol.into()));
    let mut table = toml::Table::new();
    table.insert("name".into(), toml::Value::String(name.into()));
    table.insert("pump".into(), toml::Value::Table(pump));
    table.insert("polarization".into(), toml::Value::Table(polarization));
    Ok(table)
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

impl RunConfig {
    /// Resolves `text` on top of the defaults and the selected preset.
    ///
    /// `preset_override` wins over a `preset` key in the file.
    pub fn from_toml_str(text: &str, preset_override: Option<&str>) -> Result<Self, ConfigError> {
        let file: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let preset = match preset_override {
            Some(p) => Some(p.to_string()),
            None => match file.get("preset") {
                Some(toml::Value::String(s)) => Some(s.clone()),
                Some(_) => return Err(field_err("preset", "must be a string")),
                None => None,
            },
        };
        let mut table = toml::Table::try_from(RunConfig::default())
            .map_err(|e| ConfigError::Syntax(format!("default config: {e}")))?;
        if let Some(p) = &preset {
            merge(&mut table, preset_table(p)?);
        }
        merge(&mut table, file);
        if let Some(p) = preset {
            table.insert("preset".into(), toml::Value::String(p));
        }
        let cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let field = e.path().to_string();
            field_err(&field, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, preset_override: Option<&str>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml_str(&text, preset_override)
    }

    /// Defaults plus an optional preset, without a file.
    pub fn from_preset(preset: Option<&str>) -> Result<Self, ConfigError> {
        Self::from_toml_str("", preset)
    }

    pub fn scenario_name(&self) -> String {
        self.name.clone().or_else(|| self.preset.clone()).unwrap_or_else(|| "custom".into())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(field_err(field, format!("must be positive and finite, got {v}")))
            }
        };
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(field_err(field, "must be finite"))
            }
        };
        let p = &self.pump;
        positive("pump.waist_mm", p.waist_mm)?;
        positive("pump.wavelength_nm", p.wavelength_nm)?;
        finite("pump.z_mm", p.z_mm)?;
        finite("pump.rotation_deg", p.rotation_deg)?;
        if p.modes.is_empty() {
            return Err(field_err("pump.modes", "needs at least one mode"));
        }
        for (i, m) in p.modes.iter().enumerate() {
            finite(&format!("pump.modes[{i}].re"), m.re)?;
            finite(&format!("pump.modes[{i}].im"), m.im)?;
        }
        if p.modes.iter().all(|m| m.re == 0.0 && m.im == 0.0) {
            return Err(field_err("pump.modes", "all coefficients are zero"));
        }

        match (self.polarization.kind, &self.polarization.matrix) {
            (PolarizationName::Custom, None) => {
                return Err(field_err("polarization.matrix", "required for kind = \"custom\""))
            }
            (PolarizationName::Custom, Some(m)) => {
                if m.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(field_err("polarization.matrix", "entries must be finite"));
                }
                if m.iter().flatten().all(|&v| v == 0.0) {
                    return Err(field_err("polarization.matrix", "must be nonzero"));
                }
            }
            (_, Some(_)) => return Err(field_err("polarization.matrix", "only allowed for kind = \"custom\"")),
            _ => {}
        }

        positive("crystal.L_mm", self.crystal.length_mm)?;
        positive("crystal.pump_wavelength_nm", self.crystal.pump_wavelength_nm)?;
        if !close(self.crystal.pump_wavelength_nm, p.wavelength_nm) {
            return Err(field_err("crystal.pump_wavelength_nm", "must equal pump.wavelength_nm"));
        }

        let bs = &self.beamsplitter;
        BeamSplitterSpec::new(bs.t, bs.r).map_err(|e| field_err("beamsplitter", e.to_string()))?;

        let d = &self.detectors;
        match &d.aperture_mm {
            ApertureSetting::Diameter(v) => positive("detectors.aperture_mm", *v)?,
            ApertureSetting::Named(s) if s == "full" => {}
            ApertureSetting::Named(s) => {
                return Err(field_err("detectors.aperture_mm", format!("expected a diameter or \"full\", got {s:?}")))
            }
        }
        positive("detectors.filter_fwhm_nm", d.filter_fwhm_nm)?;
        positive("detectors.filter_center_nm", d.filter_center_nm)?;
        if !close(d.filter_center_nm, 2.0 * p.wavelength_nm) {
            return Err(field_err(
                "detectors.filter_center_nm",
                "degenerate photons need twice the pump wavelength",
            ));
        }

        let s = &self.delay_scan;
        finite("delay_scan.min_um", s.min_um)?;
        finite("delay_scan.max_um", s.max_um)?;
        if s.steps < 2 {
            return Err(field_err("delay_scan.steps", "needs at least two steps"));
        }
        if !(s.min_um < s.max_um) {
            return Err(field_err("delay_scan.max_um", "must exceed min_um"));
        }

        if let Some(n) = &self.noise {
            positive("noise.mean_counts", n.mean_counts)?;
        }

        let g = &self.grid;
        if g.detection_nodes < 3 {
            return Err(field_err("grid.detection_nodes", "needs at least three nodes"));
        }
        positive("grid.extent_waists", g.extent_waists)?;
        finite("grid.center_x_mm", g.center_x_mm)?;
        if g.center_y_mm != 0.0 {
            return Err(field_err(
                "grid.center_y_mm",
                "detection grid must be symmetric about y = 0 for the reflected terms",
            ));
        }

        positive("hom.plane_z_mm", self.hom.plane_z_mm)?;
        if self.hom.spectral_nodes < 3 {
            return Err(field_err("hom.spectral_nodes", "needs at least three nodes"));
        }
        if self.hom.spectrum_nodes < 3 {
            return Err(field_err("hom.spectrum_nodes", "needs at least three nodes"));
        }
        if self.verify.detection_nodes < 2 {
            return Err(field_err("verify.detection_nodes", "needs at least two nodes"));
        }
        Ok(())
    }

    pub fn pump_spec(&self) -> Result<PumpSpec<f64>, ConfigError> {
        let p = &self.pump;
        let beam = BeamSpec::free_space(p.waist_mm * MM, p.wavelength_nm * NM, p.z_mm * MM)
            .map_err(|e| field_err("pump", e.to_string()))?;
        let terms = p.modes.iter().map(|m| ModeTerm { m: m.m, n: m.n, coeff: Complex::new(m.re, m.im) }).collect();
        PumpSpec::normalized(beam, terms, p.rotation_deg.to_radians()).map_err(|e| field_err("pump.modes", e.to_string()))
    }

    pub fn polarization_kind(&self) -> PolarizationKind<f64> {
        match self.polarization.kind {
            PolarizationName::SymmetricHh => PolarizationKind::SymmetricHh,
            PolarizationName::AntisymmetricSinglet => PolarizationKind::AntisymmetricSinglet,
            PolarizationName::Custom => {
                let m = self.polarization.matrix.unwrap_or([[1.0, 0.0], [0.0; 2], [0.0; 2], [0.0; 2]]);
                let c = |k: usize| Complex::new(m[k][0], m[k][1]);
                PolarizationKind::Custom([[c(0), c(1)], [c(2), c(3)]])
            }
        }
    }

    pub fn detector(&self) -> Result<DetectorSpec<f64>, ConfigError> {
        let d = &self.detectors;
        let aperture = match d.aperture_mm {
            ApertureSetting::Diameter(v) => Aperture::Circular { radius: 0.5 * v * MM, center: (0.0, 0.0) },
            ApertureSetting::Named(_) => Aperture::Full,
        };
        DetectorSpec::new(aperture, d.filter_fwhm_nm * NM, d.filter_center_nm * NM, d.filter_shape)
            .map_err(|e| field_err("detectors", e.to_string()))
    }

    pub fn crystal_spec(&self) -> Result<CrystalSpec<f64>, ConfigError> {
        CrystalSpec::from_pump_wavelength(
            self.crystal.length_mm * MM,
            self.crystal.pump_wavelength_nm * NM,
            self.crystal.thin_crystal,
        )
        .map_err(|e| field_err("crystal", e.to_string()))
    }

    pub fn scenario(&self) -> Result<Scenario<f64>, ConfigError> {
        let bs = BeamSplitterSpec::new(self.beamsplitter.t, self.beamsplitter.r)
            .map_err(|e| field_err("beamsplitter", e.to_string()))?;
        let det = self.detector()?;
        Ok(Scenario {
            name: self.scenario_name(),
            pump: self.pump_spec()?,
            polarization: self.polarization_kind(),
            bs,
            det1: det,
            det2: det,
            sampling: Sampling {
                detection_nodes: self.grid.detection_nodes,
                half_width: self.grid.extent_waists * self.pump.waist_mm * MM,
            },
            plane_z: self.hom.plane_z_mm * MM,
        })
    }

    /// Scan delays in micrometres, as written to the output.
    pub fn delays_um(&self) -> Vec<f64> {
        let s = &self.delay_scan;
        linear_delays(s.min_um, s.max_um, s.steps).unwrap_or_default()
    }

    pub fn delays_m(&self) -> Vec<f64> {
        self.delays_um().iter().map(|d| d * UM).collect()
    }

    pub fn noise_spec(&self) -> Option<NoiseSpec> {
        self.noise.as_ref().map(|n| NoiseSpec { mean_counts: n.mean_counts, seed: n.seed })
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RELATIVE_MATCH * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::from_preset(None).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.scenario_name(), "custom");
        let s = cfg.scenario().unwrap();
        assert!((s.k_sum() - std::f64::consts::TAU / 351e-9).abs() < 1e-9 * s.k_sum());
        assert_eq!(cfg.delays_um().len(), 41);
        assert_eq!(cfg.delays_um()[20], 0.0);
    }

    #[test]
    fn presets_resolve() {
        for name in PRESETS {
            let cfg = RunConfig::from_preset(Some(name)).unwrap();
            assert_eq!(cfg.scenario_name(), name);
            cfg.scenario().unwrap();
        }
        let six = RunConfig::from_preset(Some("fig6_superposition")).unwrap();
        assert_eq!(six.pump.modes.len(), 2);
        let five = RunConfig::from_preset(Some("fig5_odd")).unwrap();
        assert_eq!(five.polarization.kind, PolarizationName::AntisymmetricSinglet);
        assert_eq!(five.pump.modes[0].n, 1);
        assert_eq!(RunConfig::from_preset(Some("fig7")), Err(ConfigError::UnknownPreset("fig7".into())));
    }

    #[test]
    fn file_overrides_preset_and_flag_overrides_file() {
        let text = "preset = \"fig4_even\"\n[detectors]\naperture_mm = 2.0\n[noise]\nmean_counts = 100.0\nseed = 3\n";
        let cfg = RunConfig::from_toml_str(text, None).unwrap();
        assert_eq!(cfg.detectors.aperture_mm, ApertureSetting::Diameter(2.0));
        assert_eq!(cfg.pump.modes[0].m, 1);
        assert_eq!(cfg.noise_spec(), Some(NoiseSpec { mean_counts: 100.0, seed: 3 }));
        let cfg = RunConfig::from_toml_str(text, Some("fig5_odd")).unwrap();
        assert_eq!(cfg.preset.as_deref(), Some("fig5_odd"));
        assert_eq!(cfg.pump.modes[0].n, 1);
        let det = cfg.detector().unwrap();
        assert_eq!(det.aperture, Aperture::Circular { radius: 1e-3, center: (0.0, 0.0) });
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let err = RunConfig::from_toml_str("[detectors]\nfilter_fwhm = 1.0\n", None).unwrap_err();
        match err {
            ConfigError::Field { field, message } => {
                assert_eq!(field, "detectors.filter_fwhm");
                assert!(message.contains("filter_fwhm"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let err = RunConfig::from_toml_str("[pump]\nwaist_mm = \"wide\"\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Field { ref field, .. } if field == "pump.waist_mm"), "{err}");
    }

    #[test]
    fn validation_failures() {
        let cases = [
            ("[pump]\nwaist_mm = -1.0\n", "pump.waist_mm"),
            ("[pump]\nmodes = []\n", "pump.modes"),
            ("[beamsplitter]\nt = 0.5\nr = 0.5\n", "beamsplitter"),
            ("[detectors]\naperture_mm = \"half\"\n", "detectors.aperture_mm"),
            ("[detectors]\nfilter_center_nm = 700.0\n", "detectors.filter_center_nm"),
            ("[crystal]\npump_wavelength_nm = 400.0\n", "crystal.pump_wavelength_nm"),
            ("[delay_scan]\nmin_um = 10.0\nmax_um = -10.0\n", "delay_scan.max_um"),
            ("[noise]\nmean_counts = 0.0\n", "noise.mean_counts"),
            ("[grid]\ncenter_y_mm = 0.1\n", "grid.center_y_mm"),
            ("[polarization]\nkind = \"custom\"\n", "polarization.matrix"),
        ];
        for (text, field) in cases {
            match RunConfig::from_toml_str(text, None) {
                Err(ConfigError::Field { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(RunConfig::from_toml_str("[pump", None), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn custom_polarization_matrix() {
        let text = "[polarization]\nkind = \"custom\"\nmatrix = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]\n";
        let cfg = RunConfig::from_toml_str(text, None).unwrap();
        let pol = crate::spdc::make_polarization(cfg.polarization_kind()).unwrap();
        assert!((pol.exchange_overlap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::from_preset(Some("fig6_superposition")).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml_str(&text, None).unwrap(), cfg);
    }
}
