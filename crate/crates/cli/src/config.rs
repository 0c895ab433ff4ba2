//! TOML experiment configuration.
//!
//! Every key carries its unit in the name and unknown keys are rejected,
//! so a typo fails the parse instead of silently running the default.
//! All fields have defaults; the fully resolved config is echoed in each
//! command's JSON summary.

use anyhow::{bail, Context};
use coldscatter_core::cloud::CloudGeometry;
use coldscatter_core::pumping::PumpConfig;
use coldscatter_core::transition::TransitionParams;
use coldscatter_core::transport::{McConfig, PhaseFunction, ProbeSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub transition: TransitionSection,
    pub cloud: CloudSection,
    pub probe: ProbeSection,
    pub mc: McSection,
    pub pump: PumpSection,
    pub sweep: SweepSection,
    pub model: ModelSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransitionSection {
    /// "rb87-d2-f2-f3" or "rb87-d2-f1-f2-repumper".
    pub preset: String,
    pub wavelength_nm: Option<f64>,
    pub gamma_mhz: Option<f64>,
    pub tau0_ns: Option<f64>,
    pub sigma0_cm2: Option<f64>,
    pub i_sat_mw_cm2: Option<f64>,
}

impl Default for TransitionSection {
    fn default() -> Self {
        TransitionSection {
            preset: "rb87-d2-f2-f3".into(),
            wavelength_nm: None,
            gamma_mhz: None,
            tau0_ns: None,
            sigma0_cm2: None,
            i_sat_mw_cm2: None,
        }
    }
}

impl TransitionSection {
    pub fn resolve(&self) -> anyhow::Result<TransitionParams> {
        let mut p = match self.preset.as_str() {
            "rb87-d2-f2-f3" => TransitionParams::rb87_d2_f2_f3(),
            "rb87-d2-f1-f2-repumper" => TransitionParams::rb87_d2_f1_f2_repumper(),
            other => bail!("unknown transition preset {other:?}"),
        };
        if let Some(v) = self.wavelength_nm {
            p.wavelength_nm = v;
        }
        if let Some(v) = self.gamma_mhz {
            p.gamma_mhz = v;
        }
        if let Some(v) = self.tau0_ns {
            p.tau0_ns = v;
        }
        if let Some(v) = self.sigma0_cm2 {
            p.sigma0_cm2 = v;
        }
        if let Some(v) = self.i_sat_mw_cm2 {
            p.i_sat_mw_cm2 = v;
        }
        p.validate().context("transition parameters")?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CloudSection {
    pub n0_cm3: f64,
    pub r0_um: f64,
    pub z0_um: f64,
    pub temperature_uk: f64,
}

impl Default for CloudSection {
    fn default() -> Self {
        CloudSection { n0_cm3: 5.0e13, r0_um: 9.8, z0_um: 248.0, temperature_uk: 65.0 }
    }
}

impl CloudSection {
    pub fn resolve(&self) -> anyhow::Result<CloudGeometry> {
        CloudGeometry::new(self.n0_cm3, self.r0_um, self.z0_um, self.temperature_uk)
            .context("cloud geometry")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSection {
    pub detuning_mhz: f64,
    pub intensity_mw_cm2: f64,
    pub pulse_length_us: f64,
    /// Beam elevation above horizontal, degrees (negative points down).
    pub elevation_deg: f64,
    /// Beam azimuth from the collection axis, degrees.
    pub azimuth_deg: f64,
    pub spectral_width_mhz: f64,
    pub beam_radius_um: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            detuning_mhz: 0.0,
            intensity_mw_cm2: 0.63,
            pulse_length_us: 2.0,
            elevation_deg: -30.0,
            azimuth_deg: 30.0,
            spectral_width_mhz: 3.0,
            beam_radius_um: 30.0,
        }
    }
}

impl ProbeSection {
    pub fn resolve(&self) -> ProbeSpec {
        let el = self.elevation_deg.to_radians();
        let az = self.azimuth_deg.to_radians();
        ProbeSpec {
            detuning_mhz: self.detuning_mhz,
            intensity_mw_cm2: self.intensity_mw_cm2,
            pulse_length_ns: self.pulse_length_us * 1e3,
            direction: [el.cos() * az.cos(), el.sin(), el.cos() * az.sin()],
            spectral_width_mhz: self.spectral_width_mhz,
            beam_radius_um: self.beam_radius_um,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub n_photons: u64,
    pub seed: u64,
    /// "isotropic" or "dipole".
    pub phase_function: String,
    pub redistribution: bool,
    pub bin_width_ns: f64,
    pub t_max_ns: f64,
    /// 0 picks 10·b² automatically.
    pub max_order: u64,
    pub workers: u32,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            n_photons: 100_000,
            seed: 1,
            phase_function: "isotropic".into(),
            redistribution: true,
            bin_width_ns: 5.0,
            t_max_ns: 10_000.0,
            max_order: 0,
            workers: 4,
        }
    }
}

impl McSection {
    pub fn resolve(&self, beam: ProbeSpec) -> anyhow::Result<McConfig> {
        let phase = match self.phase_function.as_str() {
            "isotropic" => PhaseFunction::Isotropic,
            "dipole" => PhaseFunction::Dipole,
            other => bail!("unknown phase function {other:?} (expected \"isotropic\" or \"dipole\")"),
        };
        let config = McConfig {
            n_photons: self.n_photons,
            seed: self.seed,
            beam,
            phase_function: phase,
            redistribution: self.redistribution,
            bin_width_ns: self.bin_width_ns,
            t_max_ns: self.t_max_ns,
            max_order: self.max_order,
            workers: self.workers,
        };
        config.validate().context("mc settings")?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpSection {
    pub repumper_intensity_mw_cm2: f64,
    pub n_shells: usize,
    pub dt_ns: f64,
    pub duration_us: f64,
    pub branching: f64,
    pub background: f64,
}

impl Default for PumpSection {
    fn default() -> Self {
        let d = PumpConfig::default();
        PumpSection {
            repumper_intensity_mw_cm2: d.repumper_intensity_mw_cm2,
            n_shells: d.n_shells,
            dt_ns: d.dt_ns,
            duration_us: d.duration_us,
            branching: d.branching,
            background: d.background,
        }
    }
}

impl PumpSection {
    pub fn resolve(&self) -> anyhow::Result<PumpConfig> {
        let config = PumpConfig {
            repumper_intensity_mw_cm2: self.repumper_intensity_mw_cm2,
            n_shells: self.n_shells,
            dt_ns: self.dt_ns,
            duration_us: self.duration_us,
            branching: self.branching,
            background: self.background,
        };
        config.validate().context("pump settings")?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Density-axis expansion times, ms; empty uses the reference-table
    /// times reconstructed from the base cloud.
    pub expansion_times_ms: Vec<f64>,
    pub detuning_min_mhz: f64,
    pub detuning_max_mhz: f64,
    pub detuning_step_mhz: f64,
    pub intensity_max_mw_cm2: f64,
    pub intensity_points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            expansion_times_ms: Vec::new(),
            detuning_min_mhz: -24.0,
            detuning_max_mhz: 24.0,
            detuning_step_mhz: 1.0,
            intensity_max_mw_cm2: 10.0,
            intensity_points: 21,
        }
    }
}

/// Analytic-model parameters used by `sweep` and as fixed inputs to
/// spectral fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub amplitude_a: f64,
    pub eta: f64,
    /// Peak on-resonance optical depth; 0 derives it from the cloud.
    pub b0: f64,
    pub delta_shift_mhz: f64,
    pub gamma_prime_mhz: f64,
    /// Saturation-curve parameters.
    pub saturation_scale: f64,
    pub saturation_i_eff_mw_cm2: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            amplitude_a: 25.0,
            eta: 0.08,
            b0: 0.0,
            delta_shift_mhz: 0.8,
            gamma_prime_mhz: 9.0,
            saturation_scale: 10.0,
            saturation_i_eff_mw_cm2: 1.7,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: Option<&std::path::Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(ExperimentConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let config: ExperimentConfig =
                    toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
                Ok(config)
            }
        }
    }
}
