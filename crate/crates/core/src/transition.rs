//! Atomic-transition constants and elementary scattering quantities.
//!
//! Everything here is a pure function of its arguments; detunings and
//! linewidths are FWHM in MHz, intensities in mW/cm², cross sections and
//! mean free paths in cm.

use crate::math;
use crate::{Error, Result};

/// Constants of a single optical transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    /// Transition wavelength, nm.
    pub wavelength_nm: f64,
    /// Natural linewidth (FWHM), MHz.
    pub gamma_mhz: f64,
    /// Excited-state radiative lifetime, ns.
    pub tau0_ns: f64,
    /// Resonant scattering cross section, cm².
    pub sigma0_cm2: f64,
    /// Saturation intensity, mW/cm².
    pub i_sat_mw_cm2: f64,
}

impl TransitionParams {
    /// The nearly closed ⁸⁷Rb D2 F=2 → F′=3 probe transition.
    pub fn rb87_d2_f2_f3() -> Self {
        TransitionParams {
            wavelength_nm: 780.0,
            gamma_mhz: 6.0,
            tau0_ns: 26.0,
            sigma0_cm2: 1.36e-9,
            i_sat_mw_cm2: 1.7,
        }
    }

    /// The open ⁸⁷Rb D2 F=1 → F′=2 repumper transition.
    ///
    /// No separate cross section is available for this line; the preset
    /// reuses the F=2 → F′=3 value, which is adequate for the shielding
    /// estimates it is used in. Rescale `sigma0_cm2` for anything more
    /// quantitative.
    pub fn rb87_d2_f1_f2_repumper() -> Self {
        TransitionParams {
            wavelength_nm: 780.0,
            gamma_mhz: 6.0,
            tau0_ns: 26.0,
            sigma0_cm2: 1.36e-9,
            i_sat_mw_cm2: 1.7,
        }
    }

    /// Checks positivity of all fields and the lifetime/linewidth relation
    /// τ₀ ≈ 1/(2π·γ) to within 5%.
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_nm > 0.0
            && self.gamma_mhz > 0.0
            && self.tau0_ns > 0.0
            && self.sigma0_cm2 > 0.0
            && self.i_sat_mw_cm2 > 0.0)
        {
            return Err(Error::Domain("transition parameters must be strictly positive"));
        }
        // γ in MHz, τ₀ in ns: 1/(2π·γ[MHz]) is in µs ⇒ ×1000 for ns
        let tau_from_gamma = 1e3 / (2.0 * math::PI * self.gamma_mhz);
        if math::abs(self.tau0_ns - tau_from_gamma) / tau_from_gamma > 0.05 {
            return Err(Error::Domain("tau0 and gamma inconsistent: tau0 must be within 5% of 1/(2*pi*gamma)"));
        }
        Ok(())
    }

    /// Wavenumber k = 2π/λ, cm⁻¹.
    pub fn wavenumber_per_cm(&self) -> f64 {
        2.0 * math::PI / (self.wavelength_nm * 1e-7)
    }
}

/// Lorentzian scattering cross section σ(Δ) = σ₀ / (1 + (2Δ/γ′)²), cm².
///
/// `linewidth_mhz` is the effective width γ′ (atom linewidth plus probe
/// laser width when relevant), not necessarily `params.gamma_mhz`.
pub fn cross_section(detuning_mhz: f64, linewidth_mhz: f64, params: &TransitionParams) -> Result<f64> {
    if linewidth_mhz <= 0.0 {
        return Err(Error::Domain("linewidth must be positive"));
    }
    let x = 2.0 * detuning_mhz / linewidth_mhz;
    Ok(params.sigma0_cm2 / (1.0 + x * x))
}

/// Saturation parameter s = (I/I_s) / (1 + (2Δ/γ)²).
pub fn saturation_parameter(intensity_mw_cm2: f64, detuning_mhz: f64, params: &TransitionParams) -> Result<f64> {
    if intensity_mw_cm2 < 0.0 {
        return Err(Error::Domain("intensity must be nonnegative"));
    }
    let x = 2.0 * detuning_mhz / params.gamma_mhz;
    Ok(intensity_mw_cm2 / params.i_sat_mw_cm2 / (1.0 + x * x))
}

/// Optical mean free path l = 1/(ρσ), cm.
pub fn mean_free_path_cm(density_cm3: f64, sigma_cm2: f64) -> Result<f64> {
    if density_cm3 <= 0.0 || sigma_cm2 <= 0.0 {
        return Err(Error::Domain("density and cross section must be positive"));
    }
    Ok(1.0 / (density_cm3 * sigma_cm2))
}

/// Ioffe-Regel parameter kl = (2π/λ)·l.
pub fn ioffe_regel(params: &TransitionParams, mean_free_path_cm: f64) -> Result<f64> {
    if mean_free_path_cm <= 0.0 {
        return Err(Error::Domain("mean free path must be positive"));
    }
    Ok(params.wavenumber_per_cm() * mean_free_path_cm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rb() -> TransitionParams {
        TransitionParams::rb87_d2_f2_f3()
    }

    #[test]
    fn default_preset_is_consistent() {
        rb().validate().unwrap();
        let mut bad = rb();
        bad.tau0_ns = 40.0;
        assert!(bad.validate().is_err());
        bad = rb();
        bad.sigma0_cm2 = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cross_section_examples() {
        let p = rb();
        assert_eq!(cross_section(0.0, 6.0, &p).unwrap(), 1.36e-9);
        // half-width detuning gives sigma0/2
        let s = cross_section(3.0, 6.0, &p).unwrap();
        assert!((s - 6.8e-10).abs() < 1e-22);
        // 1 + (2*24/6)^2 = 65
        let s = cross_section(24.0, 6.0, &p).unwrap();
        assert!((s - 1.36e-9 / 65.0).abs() / s < 1e-12);
    }

    #[test]
    fn cross_section_even_and_peaked_at_zero() {
        let p = rb();
        let mut d = 0.1;
        while d < 50.0 {
            let plus = cross_section(d, 6.0, &p).unwrap();
            let minus = cross_section(-d, 6.0, &p).unwrap();
            assert_eq!(plus, minus);
            assert!(plus < p.sigma0_cm2);
            d += 0.7;
        }
        assert!(cross_section(0.0, 6.0, &p).unwrap() >= cross_section(1e-9, 6.0, &p).unwrap());
    }

    #[test]
    fn cross_section_rejects_bad_linewidth() {
        assert!(cross_section(0.0, 0.0, &rb()).is_err());
        assert!(cross_section(0.0, -1.0, &rb()).is_err());
    }

    #[test]
    fn saturation_examples() {
        let p = rb();
        assert!((saturation_parameter(1.7, 0.0, &p).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(saturation_parameter(0.0, 12.3, &p).unwrap(), 0.0);
        let s = saturation_parameter(0.63, 0.0, &p).unwrap();
        assert!((s - 0.37).abs() < 0.01);
        assert!(saturation_parameter(-1.0, 0.0, &p).is_err());
    }

    #[test]
    fn saturation_tracks_cross_section() {
        // s(I, d) = s(I, 0) * sigma(d, gamma)/sigma0
        let p = rb();
        for d in [0.0, 1.5, -4.0, 9.0, 24.0] {
            let lhs = saturation_parameter(2.0, d, &p).unwrap();
            let rhs = saturation_parameter(2.0, 0.0, &p).unwrap()
                * cross_section(d, p.gamma_mhz, &p).unwrap()
                / p.sigma0_cm2;
            assert!((lhs - rhs).abs() < 1e-14 * lhs.max(1e-30));
        }
    }

    #[test]
    fn mean_free_path_examples() {
        let l = mean_free_path_cm(5.0e13, 1.36e-9).unwrap();
        assert!((l - 1.47e-5).abs() / l < 0.01);
        let l2 = mean_free_path_cm(1.0e14, 1.36e-9).unwrap();
        assert!((l / l2 - 2.0).abs() < 1e-12);
        let l3 = mean_free_path_cm(5.9e10, 1.36e-9).unwrap();
        assert!((l3 - 1.25e-2).abs() / l3 < 0.01);
        assert!(mean_free_path_cm(0.0, 1.0e-9).is_err());
        assert!(mean_free_path_cm(1.0e13, -1.0).is_err());
    }

    #[test]
    fn ioffe_regel_examples() {
        let p = rb();
        let kl = ioffe_regel(&p, 1.47e-5).unwrap();
        assert!((kl - 1.18).abs() < 0.02, "kl = {kl}");
        // l = 1/k gives exactly 1
        let kl = ioffe_regel(&p, 1.0 / p.wavenumber_per_cm()).unwrap();
        assert!((kl - 1.0).abs() < 1e-14);
        let kl = ioffe_regel(&p, 1.25e-2).unwrap();
        assert!((kl - 1.0e3).abs() / kl < 0.02);
        assert!(ioffe_regel(&p, 0.0).is_err());
    }
}
