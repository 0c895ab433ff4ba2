//! Shell-discretized hyperfine optical pumping by the repumper beams.
//!
//! Atoms start in F = 1 and are transferred to F = 2 by on-resonance
//! repumper scattering. The cloud is discretized into radial shells of
//! the transverse Gaussian profile; the repumper reaching a shell is
//! attenuated by the F = 1 column between the sample edge and the shell
//! only, since pumped atoms are transparent to it. The six-beam geometry
//! enters through the attenuation: four beams see the transverse column
//! and two see the longitudinal one, which is larger by the aspect ratio
//! z₀/r₀ and essentially extinguishes those beams in an elongated dense
//! sample. Populations advance with an exponential-Euler update, which
//! conserves atoms exactly per step.

use alloc::vec;
use alloc::vec::Vec;

use crate::cloud::CloudGeometry;
use crate::constants::UM_TO_CM;
use crate::fit::{fit_single_exponential, FitResult, Point};
use crate::math;
use crate::transition::TransitionParams;
use crate::{Error, Result};

/// Repumper and integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpConfig {
    /// Repumper intensity at the cloud, mW/cm².
    pub repumper_intensity_mw_cm2: f64,
    /// Radial shells across [0, 4r₀].
    pub n_shells: usize,
    pub dt_ns: f64,
    pub duration_us: f64,
    /// Probability that one scattering event pumps the atom to F = 2.
    pub branching: f64,
    /// Constant background added to the signal, counts/ns.
    pub background: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        PumpConfig {
            repumper_intensity_mw_cm2: 4.0,
            n_shells: 64,
            dt_ns: 5.0,
            duration_us: 100.0,
            branching: 0.5,
            background: 0.0,
        }
    }
}

impl PumpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_shells < 2 {
            return Err(Error::Domain("need at least 2 shells"));
        }
        if !(self.dt_ns > 0.0 && self.duration_us > 0.0) {
            return Err(Error::Domain("time step and duration must be positive"));
        }
        if !(self.branching > 0.0 && self.branching <= 1.0) {
            return Err(Error::Domain("branching must lie in (0, 1]"));
        }
        if self.repumper_intensity_mw_cm2 < 0.0 || self.background < 0.0 {
            return Err(Error::Domain("intensity and background must be nonnegative"));
        }
        Ok(())
    }
}

/// Time series produced by [`simulate_pumping`].
#[derive(Debug, Clone, PartialEq)]
pub struct PumpHistory {
    /// Bin-end times, ns.
    pub times_ns: Vec<f64>,
    /// Total F = 1 fraction remaining at each time.
    pub f1_fraction: Vec<f64>,
    /// Repumper photons scattered per step (plus background·dt).
    pub signal: Vec<f64>,
    pub dt_ns: f64,
    /// Shell midpoint radii, µm.
    pub shell_radius_um: Vec<f64>,
    /// Atoms per shell.
    pub shell_atoms: Vec<f64>,
    /// Final F = 1 fraction per shell.
    pub f1_final: Vec<f64>,
    /// Running total of atoms transferred to F = 2.
    pub atoms_pumped: f64,
}

/// Integrates the shell rate equations until the F = 1 population falls
/// below 1e-4 of the initial one or the configured duration runs out.
pub fn simulate_pumping(
    cloud: &CloudGeometry,
    params: &TransitionParams,
    config: &PumpConfig,
) -> Result<PumpHistory> {
    config.validate()?;
    params.validate()?;

    // unshielded saturated rate bounds every shell rate
    let s0 = config.repumper_intensity_mw_cm2 / params.i_sat_mw_cm2;
    let r_max = s0 / (1.0 + s0) / (2.0 * params.tau0_ns);
    let worst = config.branching * r_max * config.dt_ns;
    if worst > 0.1 {
        return Err(Error::TimestepTooCoarse { max_step_fraction: worst });
    }

    let n = config.n_shells;
    let r_outer = 4.0 * cloud.r0_um;
    let drho = r_outer / n as f64;
    let mut radius = vec![0.0; n];
    let mut density = vec![0.0; n];
    let mut atoms = vec![0.0; n];
    let mut weight_sum = 0.0;
    for j in 0..n {
        let rho = (j as f64 + 0.5) * drho;
        radius[j] = rho;
        density[j] = cloud.n0_cm3 * math::exp(-rho * rho / (2.0 * cloud.r0_um * cloud.r0_um));
        // spherical-equivalent shell weight of the transverse profile
        atoms[j] = rho * rho * density[j];
        weight_sum += atoms[j];
    }
    for a in atoms.iter_mut() {
        *a *= cloud.n_atoms / weight_sum;
    }
    let total_atoms: f64 = atoms.iter().sum();

    let mut f1 = vec![1.0; n];
    let mut history = PumpHistory {
        times_ns: Vec::new(),
        f1_fraction: Vec::new(),
        signal: Vec::new(),
        dt_ns: config.dt_ns,
        shell_radius_um: radius,
        shell_atoms: atoms.clone(),
        f1_final: Vec::new(),
        atoms_pumped: 0.0,
    };

    let duration_ns = config.duration_us * 1e3;
    let drho_cm = drho * UM_TO_CM;
    let mut cols = vec![0.0; n];
    let mut t = 0.0;
    while t < duration_ns {
        // F=1 column density outside each shell midpoint, outer to inner
        let mut acc = 0.0;
        for j in (0..n).rev() {
            let slab = density[j] * f1[j] * drho_cm;
            cols[j] = acc + 0.5 * slab;
            acc += slab;
        }

        let mut photons = 0.0;
        let aspect = cloud.z0_um / cloud.r0_um;
        for j in 0..n {
            // 4 of 6 beams arrive transversally, 2 along the long axis;
            // the longitudinal column scales with the aspect ratio by
            // self-similarity of the Gaussian profile
            let b_t = params.sigma0_cm2 * cols[j];
            let shield = (2.0 * math::exp(-b_t) + math::exp(-b_t * aspect)) / 3.0;
            let s = s0 * shield;
            let rate = s / (1.0 + s) / (2.0 * params.tau0_ns);
            let decay = math::exp(-config.branching * rate * config.dt_ns);
            let transferred = atoms[j] * f1[j] * (1.0 - decay);
            // each transfer took 1/branching scatterings on average
            photons += transferred / config.branching;
            history.atoms_pumped += transferred;
            f1[j] *= decay;
        }

        t += config.dt_ns;
        let frac = atoms.iter().zip(&f1).map(|(a, f)| a * f).sum::<f64>() / total_atoms;
        history.times_ns.push(t);
        history.f1_fraction.push(frac);
        history.signal.push(photons + config.background * config.dt_ns);
        if frac < 1e-4 {
            break;
        }
    }

    history.f1_final = f1;
    Ok(history)
}

/// Time for the total F = 1 fraction to fall below `level`, ns, by
/// linear interpolation; None if it never does within the run.
pub fn time_to_fraction(history: &PumpHistory, level: f64) -> Option<f64> {
    let mut prev_t = 0.0;
    let mut prev_f = 1.0;
    for (&t, &f) in history.times_ns.iter().zip(&history.f1_fraction) {
        if f <= level {
            let w = (prev_f - level) / (prev_f - f);
            return Some(prev_t + w * (t - prev_t));
        }
        prev_t = t;
        prev_f = f;
    }
    None
}

/// Fits the decaying part of the signal (from its peak on) to a single
/// exponential and returns the fit; the pump time constant is `tau`.
pub fn extract_pump_rate(history: &PumpHistory) -> Result<FitResult> {
    let n = history.signal.len();
    if n < 10 {
        return Err(Error::InsufficientData("pump history shorter than 10 steps"));
    }
    let (peak_idx, peak) = history
        .signal
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let last = history.signal[n - 1];
    if !(peak > 0.0) || last > 0.8 * peak {
        return Err(Error::NonDecaying);
    }
    if n - peak_idx < 10 {
        return Err(Error::InsufficientData("fewer than 10 steps past the signal peak"));
    }
    let data: Vec<Point> = (peak_idx..n)
        .map(|i| {
            let y = history.signal[i];
            (history.times_ns[i], y, 1.0 / y.max(1.0))
        })
        .collect();
    fit_single_exponential(&data)
}

/// Total signal over the run (background included).
pub fn integrated_signal(history: &PumpHistory) -> f64 {
    history.signal.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> TransitionParams {
        TransitionParams::rb87_d2_f1_f2_repumper()
    }

    fn dense_cloud() -> CloudGeometry {
        CloudGeometry::new(5.0e13, 9.8, 248.0, 65.0).unwrap()
    }

    #[test]
    fn atoms_are_conserved() {
        let h = simulate_pumping(&dense_cloud(), &params(), &PumpConfig::default()).unwrap();
        let total: f64 = h.shell_atoms.iter().sum();
        let left: f64 = h.shell_atoms.iter().zip(&h.f1_final).map(|(a, f)| a * f).sum();
        let rel = ((left + h.atoms_pumped) - total).abs() / total;
        assert!(rel < 1e-9, "conservation violated at {rel:e}");
    }

    #[test]
    fn f1_fraction_decreases_monotonically() {
        let h = simulate_pumping(&dense_cloud(), &params(), &PumpConfig::default()).unwrap();
        for w in h.f1_fraction.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(h.f1_fraction[0] < 1.0);
    }

    #[test]
    fn thin_limit_rate_is_saturated_single_atom_rate() {
        // negligible shielding, strongly saturated repumper: the F=1
        // population decays at branching/(2 tau0)
        let cloud = CloudGeometry::new(1e6, 9.8, 248.0, 65.0).unwrap();
        let p = params();
        let config = PumpConfig {
            repumper_intensity_mw_cm2: 1e4 * p.i_sat_mw_cm2,
            dt_ns: 2.0,
            duration_us: 2.0,
            ..PumpConfig::default()
        };
        let h = simulate_pumping(&cloud, &p, &config).unwrap();
        let expected_tau = 2.0 * p.tau0_ns / config.branching; // 104 ns
        let t_half = time_to_fraction(&h, 0.5).unwrap();
        let emp_tau = t_half / libm::log(2.0);
        assert!((emp_tau - expected_tau).abs() / expected_tau < 0.02, "tau = {emp_tau}");
    }

    #[test]
    fn dense_cloud_pumps_much_slower_than_dilute() {
        // reference-table endpoints: b_t ~ 165 vs ~ 5
        let p = params();
        let config = PumpConfig { duration_us: 400.0, ..PumpConfig::default() };
        let dense = dense_cloud();
        let dilute = CloudGeometry::new(5.9e10, 240.0, 345.0, 65.0).unwrap();
        let h_dense = simulate_pumping(&dense, &p, &config).unwrap();
        let h_dilute = simulate_pumping(&dilute, &p, &config).unwrap();
        let tau_dense = extract_pump_rate(&h_dense).unwrap().value("tau").unwrap();
        let tau_dilute = extract_pump_rate(&h_dilute).unwrap().value("tau").unwrap();
        assert!(
            tau_dense > 10.0 * tau_dilute,
            "dense {tau_dense} ns vs dilute {tau_dilute} ns"
        );
        let t_dense = time_to_fraction(&h_dense, 0.5).expect("dense cloud should reach half");
        let t_dilute = time_to_fraction(&h_dilute, 0.5).unwrap();
        assert!(t_dense > 8.0 * t_dilute, "t_half {t_dense} vs {t_dilute}");
    }

    #[test]
    fn integrated_signal_tracks_atom_number_not_density() {
        // complete pumping scatters ~1/branching photons per atom, so the
        // integral varies by less than 2x across a wide density sweep at
        // fixed atom number
        let p = params();
        let base = dense_cloud();
        let mut integrals = Vec::new();
        for scale in [1.0, 0.1, 0.01] {
            // n0 -> s n0, r0 -> r0/sqrt(s) keeps the atom number fixed
            let cloud =
                CloudGeometry::new(5.0e13 * scale, 9.8 / libm::sqrt(scale), 248.0, 65.0).unwrap();
            assert!((cloud.n_atoms - base.n_atoms).abs() / base.n_atoms < 1e-12);
            let config = PumpConfig { duration_us: 2000.0, ..PumpConfig::default() };
            let h = simulate_pumping(&cloud, &p, &config).unwrap();
            assert!(*h.f1_fraction.last().unwrap() < 1e-3, "pumping incomplete at scale {scale}");
            integrals.push(integrated_signal(&h));
        }
        let max = integrals.iter().cloned().fold(f64::MIN, f64::max);
        let min = integrals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 2.0, "integrals vary {min}..{max}");
    }

    #[test]
    fn halving_dt_barely_changes_fitted_rate() {
        let p = params();
        let coarse = PumpConfig { dt_ns: 4.0, duration_us: 50.0, ..PumpConfig::default() };
        let fine = PumpConfig { dt_ns: 2.0, duration_us: 50.0, ..PumpConfig::default() };
        let hc = simulate_pumping(&dense_cloud(), &p, &coarse).unwrap();
        let hf = simulate_pumping(&dense_cloud(), &p, &fine).unwrap();
        let tc = extract_pump_rate(&hc).unwrap().value("tau").unwrap();
        let tf = extract_pump_rate(&hf).unwrap().value("tau").unwrap();
        assert!((tc - tf).abs() / tf < 0.01, "tau {tc} vs {tf}");
        // the trajectories themselves stay close too
        for (i, &fc) in hc.f1_fraction.iter().enumerate() {
            let j = 2 * i + 1;
            if j >= hf.f1_fraction.len() {
                break;
            }
            let ff = hf.f1_fraction[j];
            // absolute comparison: a small timing offset blows up the
            // relative error once the population is nearly gone
            assert!((fc - ff).abs() < 0.01, "step {i}: {fc} vs {ff}");
        }
    }

    #[test]
    fn coarse_timestep_is_rejected() {
        let config = PumpConfig {
            repumper_intensity_mw_cm2: 1e4,
            dt_ns: 100.0,
            ..PumpConfig::default()
        };
        match simulate_pumping(&dense_cloud(), &params(), &config) {
            Err(Error::TimestepTooCoarse { max_step_fraction }) => {
                assert!(max_step_fraction > 0.1);
            }
            other => panic!("expected TimestepTooCoarse, got {other:?}"),
        }
    }

    #[test]
    fn pump_rate_extraction_on_dilute_cloud() {
        let p = params();
        let cloud = CloudGeometry::new(1e10, 9.8, 248.0, 65.0).unwrap();
        let config = PumpConfig { dt_ns: 2.0, duration_us: 5.0, ..PumpConfig::default() };
        let h = simulate_pumping(&cloud, &p, &config).unwrap();
        let fit = extract_pump_rate(&h).unwrap();
        let tau = fit.value("tau").unwrap();
        // unshielded at 4 mW/cm²: rate = branching·(s/(1+s))/(2 tau0)
        let s = config.repumper_intensity_mw_cm2 / p.i_sat_mw_cm2;
        let expected = 2.0 * p.tau0_ns / (config.branching * s / (1.0 + s));
        assert!((tau - expected).abs() / expected < 0.05, "tau = {tau} vs {expected}");
    }

    #[test]
    fn flat_history_is_non_decaying() {
        let h = PumpHistory {
            times_ns: (1..=50).map(|i| i as f64).collect(),
            f1_fraction: vec![1.0; 50],
            signal: vec![7.0; 50],
            dt_ns: 1.0,
            shell_radius_um: vec![],
            shell_atoms: vec![],
            f1_final: vec![],
            atoms_pumped: 0.0,
        };
        assert!(matches!(extract_pump_rate(&h), Err(Error::NonDecaying)));
    }
}

