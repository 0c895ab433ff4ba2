//! Closed-form scattered-power and diffusion models.
//!
//! The density model gives the spatially integrated scattered power of a
//! Gaussian sample as a function of its peak optical depth b,
//! P(b) = A·S(ηb)/(ηb); the spectral variant fixes the sample and lets
//! the optical depth vary with detuning through a Lorentzian. S is the
//! alternating series from [`crate::special::kummer_series`].

use crate::math;
use crate::special::kummer_series;
use crate::{Error, Result};

/// Parameters of the density-dependence model: overall scale A (counts)
/// and the empirical optical-depth scaling η.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityModelParams {
    pub amplitude_a: f64,
    pub eta: f64,
}

impl DensityModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_a > 0.0) || !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Domain("require A > 0 and 0 < eta <= 1"));
        }
        Ok(())
    }
}

/// Parameters of the spectral model: scale, η, peak on-resonance optical
/// depth b₀, line shift δ (MHz), and effective width γ′ (MHz; atom
/// linewidth plus probe laser width).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModelParams {
    pub amplitude_a: f64,
    pub eta: f64,
    pub b0: f64,
    pub delta_shift_mhz: f64,
    pub gamma_prime_mhz: f64,
}

impl SpectralModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b0 > 0.0 && self.gamma_prime_mhz > 0.0) {
            return Err(Error::Domain("require b0 > 0 and gamma_prime > 0"));
        }
        Ok(())
    }
}

/// Scattered power vs. peak optical depth: P(b) = A·S(ηb)/(ηb).
///
/// Strictly decreasing in b; the b → 0⁺ limit equals A and is exposed as
/// [`density_model_dilute_limit`] to avoid the 0/0 boundary.
pub fn density_model(b: f64, p: &DensityModelParams) -> Result<f64> {
    p.validate()?;
    if b <= 0.0 {
        return Err(Error::Domain("optical depth must be positive; the b->0 limit is A"));
    }
    let x = p.eta * b;
    Ok(p.amplitude_a * kummer_series(x)? / x)
}

/// The b → 0⁺ limit of [`density_model`].
pub fn density_model_dilute_limit(p: &DensityModelParams) -> f64 {
    p.amplitude_a
}

/// Lorentzian optical depth b(Δ) = b₀ / (1 + (2(Δ−δ)/γ′)²).
pub fn detuned_optical_depth(detuning_mhz: f64, p: &SpectralModelParams) -> f64 {
    let x = 2.0 * (detuning_mhz - p.delta_shift_mhz) / p.gamma_prime_mhz;
    p.b0 / (1.0 + x * x)
}

/// Spectral response P(Δ) = A·S(η·b(Δ)); peaked at Δ = δ and symmetric
/// about it.
pub fn spectral_model(detuning_mhz: f64, p: &SpectralModelParams) -> Result<f64> {
    p.validate()?;
    Ok(p.amplitude_a * kummer_series(p.eta * detuned_optical_depth(detuning_mhz, p))?)
}

/// Full width at half maximum of the spectral model, MHz, found by
/// bracketing P(Δ) = P(δ)/2 on both wings.
///
/// Optical-depth broadening makes this exceed γ′ whenever η·b₀ is large.
pub fn spectral_fwhm(p: &SpectralModelParams) -> Result<f64> {
    p.validate()?;
    let peak = spectral_model(p.delta_shift_mhz, p)?;
    let half = peak / 2.0;
    // bracket on the high-frequency wing; the model is symmetric
    let mut hi = p.gamma_prime_mhz;
    while spectral_model(p.delta_shift_mhz + hi, p)? > half {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::RootFind("half-maximum not bracketed"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spectral_model(p.delta_shift_mhz + mid, p)? > half {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 * (1.0 + hi) {
            break;
        }
    }
    Ok(lo + hi) // half-width times two
}

/// Decay time of the longest-lived diffusive mode, τ = 3b²τ₀/(5.35π²), ns.
pub fn diffusion_decay_time(b: f64, tau0_ns: f64) -> Result<f64> {
    if b <= 0.0 || tau0_ns <= 0.0 {
        return Err(Error::Domain("optical depth and lifetime must be positive"));
    }
    Ok(3.0 * b * b * tau0_ns / (5.35 * math::PI * math::PI))
}

/// Saturated-pumping time estimate T = 2τ₀·(r₀/l), ns, for a sample of
/// radius r₀ and mean free path l (both µm).
pub fn pumping_time_estimate(r0_um: f64, mean_free_path_um: f64, tau0_ns: f64) -> Result<f64> {
    if !(r0_um > 0.0 && mean_free_path_um > 0.0 && tau0_ns > 0.0) {
        return Err(Error::Domain("all arguments must be positive"));
    }
    Ok(2.0 * tau0_ns * r0_um / mean_free_path_um)
}

/// Two-parameter saturation curve: level = scale·(I/i_eff)/(1 + I/i_eff).
///
/// Linear with slope scale/i_eff at small I, asymptote `scale`.
pub fn steady_state_level(intensity_mw_cm2: f64, scale: f64, i_eff_mw_cm2: f64) -> Result<f64> {
    if !(scale > 0.0 && i_eff_mw_cm2 > 0.0) || intensity_mw_cm2 < 0.0 {
        return Err(Error::Domain("scale and i_eff must be positive, intensity nonnegative"));
    }
    let x = intensity_mw_cm2 / i_eff_mw_cm2;
    Ok(scale * x / (1.0 + x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{exp_integral_e1, EULER_GAMMA};

    #[test]
    fn density_model_examples() {
        let p = DensityModelParams { amplitude_a: 25.0, eta: 0.08 };
        // tiny b approaches the dilute limit A
        let near = density_model(1e-9, &p).unwrap();
        assert!((near - 25.0).abs() < 1e-6);
        assert_eq!(density_model_dilute_limit(&p), 25.0);
        // b = 165: S(13.2)/13.2 times A
        let v = density_model(165.0, &p).unwrap();
        let s = EULER_GAMMA + libm::log(13.2) + exp_integral_e1(13.2).unwrap();
        assert!((v - 25.0 * s / 13.2).abs() < 1e-10);
        assert!((v - 5.98).abs() < 0.02, "P(165) = {v}");
        // monotone decreasing
        assert!(density_model(5.0, &p).unwrap() > density_model(165.0, &p).unwrap());
        assert!(density_model(0.0, &p).is_err());
    }

    #[test]
    fn density_model_series_identity() {
        // P(b) * (eta b) / S(eta b) == A
        let p = DensityModelParams { amplitude_a: 25.0, eta: 0.08 };
        for b in [0.5, 5.0, 53.0, 165.0] {
            let x = p.eta * b;
            let a = density_model(b, &p).unwrap() * x / kummer_series(x).unwrap();
            assert!((a - 25.0).abs() < 1e-10);
        }
    }

    fn spectral() -> SpectralModelParams {
        SpectralModelParams {
            amplitude_a: 10.0,
            eta: 0.10,
            b0: 165.0,
            delta_shift_mhz: 0.8,
            gamma_prime_mhz: 9.0,
        }
    }

    #[test]
    fn spectral_model_examples() {
        let p = spectral();
        let peak = spectral_model(p.delta_shift_mhz, &p).unwrap();
        assert!((peak - p.amplitude_a * kummer_series(p.eta * p.b0).unwrap()).abs() < 1e-12);
        // at delta +- gamma'/2 the optical depth halves
        let b = detuned_optical_depth(p.delta_shift_mhz + p.gamma_prime_mhz / 2.0, &p);
        assert!((b - p.b0 / 2.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_model_symmetry() {
        let p = spectral();
        for u in [0.3, 1.0, 4.5, 12.0, 24.0] {
            let hi = spectral_model(p.delta_shift_mhz + u, &p).unwrap();
            let lo = spectral_model(p.delta_shift_mhz - u, &p).unwrap();
            assert_eq!(hi, lo);
        }
    }

    #[test]
    fn spectral_fwhm_shows_optical_depth_broadening() {
        let p = spectral();
        let w = spectral_fwhm(&p).unwrap();
        assert!(w > 2.0 * p.gamma_prime_mhz, "fwhm = {w}");
        // independently check the half-power points
        let half = spectral_model(p.delta_shift_mhz, &p).unwrap() / 2.0;
        let at_edge = spectral_model(p.delta_shift_mhz + w / 2.0, &p).unwrap();
        assert!((at_edge - half).abs() / half < 1e-6);
        // thin-sample limit: width collapses towards gamma'
        let thin = SpectralModelParams { eta: 1e-6, ..p };
        let w_thin = spectral_fwhm(&thin).unwrap();
        assert!((w_thin - p.gamma_prime_mhz).abs() / p.gamma_prime_mhz < 0.01, "w_thin = {w_thin}");
    }

    #[test]
    fn diffusion_decay_time_examples() {
        let t = diffusion_decay_time(16.5, 26.0).unwrap();
        assert!((t - 402.0).abs() < 1.0, "tau = {t}");
        // the quoted 420 ns sits within ~5% of the formula value
        assert!((420.0 - t).abs() / t < 0.05);
        let t = diffusion_decay_time(165.0, 26.0).unwrap();
        assert!((t - 40.2e3).abs() / t < 0.01);
        // b^2 scaling, exactly
        let r = diffusion_decay_time(33.0, 26.0).unwrap() / diffusion_decay_time(16.5, 26.0).unwrap();
        assert_eq!(r, 4.0);
        assert!(diffusion_decay_time(0.0, 26.0).is_err());
    }

    #[test]
    fn pumping_time_examples() {
        assert_eq!(pumping_time_estimate(1.0, 1.0, 26.0).unwrap(), 52.0);
        let t = pumping_time_estimate(9.8, 0.147, 26.0).unwrap();
        assert!((t - 3.5e3).abs() / t < 0.02, "T = {t}");
        // linear in r0
        let a = pumping_time_estimate(5.0, 0.5, 26.0).unwrap();
        let b = pumping_time_estimate(10.0, 0.5, 26.0).unwrap();
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn steady_state_level_shape() {
        assert_eq!(steady_state_level(0.0, 10.0, 3.0).unwrap(), 0.0);
        // slope scale/i_eff at the origin
        let eps = 1e-8;
        let slope = steady_state_level(eps, 10.0, 3.0).unwrap() / eps;
        assert!((slope - 10.0 / 3.0).abs() < 1e-6);
        assert_eq!(steady_state_level(3.0, 10.0, 3.0).unwrap(), 5.0);
        assert!(steady_state_level(1.0, -1.0, 3.0).is_err());
    }
}
