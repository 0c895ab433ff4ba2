//! Time-resolved Monte Carlo random walk of probe photons.
//!
//! Photons enter along the probe beam, draw exponential optical paths
//! that are inverted exactly against the inhomogeneous Gaussian column
//! density, scatter with a configurable phase function and Doppler
//! frequency redistribution, accumulate exponential scattering delays
//! with mean τ₀, and are binned by escape time. There is no absorption:
//! every launched photon either escapes or hits the scattering-order cap.
//!
//! The ensemble is split into independent RNG substreams, one per
//! worker; merged histograms are exact integer sums, so results depend
//! only on (seed, worker count), never on scheduling.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cloud::CloudGeometry;
use crate::constants::{thermal_speed_um_per_ms, SPEED_OF_LIGHT_UM_PER_NS, UM_TO_CM};
use crate::fit::{fit_double_exponential, fit_single_exponential, FitResult, Point};
use crate::math;
use crate::rng::StreamRng;
use crate::special::inverse_erf;
use crate::transition::{cross_section, TransitionParams};
use crate::{Error, Result};

/// One photon of the random walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonState {
    /// Position, µm.
    pub position: [f64; 3],
    /// Unit propagation direction.
    pub direction: [f64; 3],
    /// Detuning from the bare atomic resonance, MHz.
    pub detuning_mhz: f64,
    /// Time since launch, ns.
    pub elapsed_ns: f64,
    /// Number of scattering events so far.
    pub order: u64,
}

/// Scattering phase function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseFunction {
    /// Uniform over the sphere.
    Isotropic,
    /// Density ∝ 1 + cos²θ relative to the incoming direction.
    Dipole,
}

/// Probe beam geometry and spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpec {
    pub detuning_mhz: f64,
    pub intensity_mw_cm2: f64,
    /// Rectangular pulse length, ns; 0 launches everything at t = 0.
    pub pulse_length_ns: f64,
    /// Unit propagation direction of the beam.
    pub direction: [f64; 3],
    /// Probe laser FWHM, MHz; photons draw their initial detuning from a
    /// Lorentzian of this width when nonzero.
    pub spectral_width_mhz: f64,
    /// Radius of the uniform entry disk, µm; 0 is a pencil beam.
    pub beam_radius_um: f64,
}

impl ProbeSpec {
    /// The standard probe geometry: 30° below horizontal and 30° away
    /// from the collection axis, 2 µs rectangular pulse.
    pub fn standard(detuning_mhz: f64) -> Self {
        let el = (-30.0f64).to_radians();
        let az = 30.0f64.to_radians();
        ProbeSpec {
            detuning_mhz,
            intensity_mw_cm2: 0.63,
            pulse_length_ns: 2000.0,
            direction: [math::cos(el) * math::cos(az), math::sin(el), math::cos(el) * math::sin(az)],
            spectral_width_mhz: 3.0,
            beam_radius_um: 30.0,
        }
    }
}

/// Ensemble configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_photons: u64,
    pub seed: u64,
    pub beam: ProbeSpec,
    pub phase_function: PhaseFunction,
    /// Doppler frequency redistribution on scattering.
    pub redistribution: bool,
    pub bin_width_ns: f64,
    /// Histogram span, ns; later escapes land in the overflow counter.
    pub t_max_ns: f64,
    /// Cap on scatterings per photon; 0 selects 10·b² from the peak
    /// optical depth of the medium.
    pub max_order: u64,
    /// Number of RNG substreams the ensemble is split into.
    pub workers: u32,
}

impl McConfig {
    pub fn new(n_photons: u64, seed: u64, beam: ProbeSpec) -> Self {
        McConfig {
            n_photons,
            seed,
            beam,
            phase_function: PhaseFunction::Isotropic,
            redistribution: true,
            bin_width_ns: 5.0,
            t_max_ns: 10_000.0,
            max_order: 0,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_photons == 0 {
            return Err(Error::Domain("n_photons must be positive"));
        }
        if !(self.bin_width_ns > 0.0 && self.t_max_ns > 0.0) {
            return Err(Error::Domain("bin width and span must be positive"));
        }
        if self.workers == 0 {
            return Err(Error::Domain("worker count must be at least 1"));
        }
        let norm = math::hypot3(self.beam.direction[0], self.beam.direction[1], self.beam.direction[2]);
        if math::abs(norm - 1.0) > 1e-9 {
            return Err(Error::Domain("beam direction must be a unit vector"));
        }
        Ok(())
    }
}

/// The scattering medium the walk happens in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Medium {
    /// Bi-Gaussian atom cloud.
    Gaussian(CloudGeometry),
    /// Homogeneous sphere, used for the diffusion-limit checks.
    UniformSphere {
        density_cm3: f64,
        radius_um: f64,
        temperature_uk: f64,
        mass_u: f64,
    },
}

impl Medium {
    fn extent_um(&self) -> f64 {
        match self {
            Medium::Gaussian(c) => c.r0_um.max(c.z0_um),
            Medium::UniformSphere { radius_um, .. } => *radius_um,
        }
    }

    fn temperature_uk(&self) -> f64 {
        match self {
            Medium::Gaussian(c) => c.temperature_uk,
            Medium::UniformSphere { temperature_uk, .. } => *temperature_uk,
        }
    }

    fn mass_u(&self) -> f64 {
        match self {
            Medium::Gaussian(c) => c.mass_u,
            Medium::UniformSphere { mass_u, .. } => *mass_u,
        }
    }

    /// Peak optical depth along the full line through the center of the
    /// medium's longest axis.
    pub fn peak_optical_depth(&self, sigma_cm2: f64) -> f64 {
        match self {
            Medium::Gaussian(c) => c.longitudinal_optical_depth(sigma_cm2).unwrap_or(0.0),
            Medium::UniformSphere { density_cm3, radius_um, .. } => {
                density_cm3 * sigma_cm2 * 2.0 * radius_um * UM_TO_CM
            }
        }
    }

    /// Column density along a ray, atoms/cm².
    pub fn column_density(&self, origin: [f64; 3], direction: [f64; 3], s_max_um: f64) -> Result<f64> {
        match self {
            Medium::Gaussian(c) => c.column_density(origin, direction, s_max_um),
            Medium::UniformSphere { density_cm3, radius_um, .. } => {
                let (s_in, s_out) = sphere_chord(origin, direction, *radius_um)?;
                let lo = s_in.max(0.0);
                let hi = s_out.min(s_max_um);
                Ok(if hi > lo { density_cm3 * (hi - lo) * UM_TO_CM } else { 0.0 })
            }
        }
    }

    /// Inverts `column_density(origin, dir, s) = target` for s; None when
    /// the ray leaves the medium first.
    fn path_for_column(&self, origin: [f64; 3], direction: [f64; 3], target_cm2: f64) -> Result<Option<f64>> {
        match self {
            Medium::Gaussian(c) => {
                let q = c.ray_quadratic(direction)?;
                let (beta, prefactor) = c.ray_profile(&q, origin);
                if prefactor <= 0.0 {
                    return Ok(None);
                }
                let y = math::erf(beta) + target_cm2 / prefactor;
                if y >= 1.0 {
                    return Ok(None);
                }
                let z = inverse_erf(y)?;
                Ok(Some((z - beta) / q.alpha))
            }
            Medium::UniformSphere { density_cm3, radius_um, .. } => {
                let (s_in, s_out) = sphere_chord(origin, direction, *radius_um)?;
                if s_out <= 0.0 || s_in > s_out {
                    return Ok(None);
                }
                let lo = s_in.max(0.0);
                let available = density_cm3 * (s_out - lo) * UM_TO_CM;
                if target_cm2 >= available {
                    return Ok(None);
                }
                Ok(Some(lo + target_cm2 / (density_cm3 * UM_TO_CM)))
            }
        }
    }
}

/// Entry/exit distances of a ray through a centered sphere; returns
/// (+∞, −∞) when the ray misses.
fn sphere_chord(origin: [f64; 3], direction: [f64; 3], radius_um: f64) -> Result<(f64, f64)> {
    let norm = math::hypot3(direction[0], direction[1], direction[2]);
    if math::abs(norm - 1.0) > 1e-9 {
        return Err(Error::Domain("direction must be a unit vector"));
    }
    let pd = dot(origin, direction);
    let disc = pd * pd - dot(origin, origin) + radius_um * radius_um;
    if disc <= 0.0 {
        return Ok((f64::INFINITY, f64::NEG_INFINITY));
    }
    let root = math::sqrt(disc);
    Ok((-pd - root, -pd + root))
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(v: &mut [f64; 3]) {
    let n = math::hypot3(v[0], v[1], v[2]);
    v[0] /= n;
    v[1] /= n;
    v[2] /= n;
}

/// Any orthonormal pair perpendicular to `d`.
fn perpendicular_basis(d: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if math::abs(d[0]) < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let mut e1 = [
        d[1] * helper[2] - d[2] * helper[1],
        d[2] * helper[0] - d[0] * helper[2],
        d[0] * helper[1] - d[1] * helper[0],
    ];
    normalize(&mut e1);
    let e2 = [
        d[1] * e1[2] - d[2] * e1[1],
        d[2] * e1[0] - d[0] * e1[2],
        d[0] * e1[1] - d[1] * e1[0],
    ];
    (e1, e2)
}

/// Outcome of one free-path draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreePath {
    /// Scatter after this path length, µm.
    Scatter(f64),
    /// The remaining optical depth along the ray is below the drawn one.
    Escape,
}

/// Draws an optical path τ = −ln u and inverts it against the column
/// density seen by `photon` at cross section `sigma_cm2`.
pub fn sample_free_path(medium: &Medium, photon: &PhotonState, sigma_cm2: f64, u: f64) -> Result<FreePath> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain("u must lie in the open interval (0,1)"));
    }
    if sigma_cm2 <= 0.0 {
        return Err(Error::Domain("cross section must be positive"));
    }
    let tau = -math::ln(u);
    match medium.path_for_column(photon.position, photon.direction, tau / sigma_cm2)? {
        Some(s) => Ok(FreePath::Scatter(s)),
        None => Ok(FreePath::Escape),
    }
}

/// One scattering event: redirects the photon, applies the Doppler kick
/// Δ′ = Δ + v·(û_out − û_in)/λ when redistribution is on, and adds an
/// exponential delay with mean τ₀.
pub fn scatter(
    photon: &mut PhotonState,
    medium: &Medium,
    params: &TransitionParams,
    phase: PhaseFunction,
    redistribution: bool,
    rng: &mut StreamRng,
) {
    let incoming = photon.direction;
    let mut outgoing = match phase {
        PhaseFunction::Isotropic => rng.unit_sphere(),
        PhaseFunction::Dipole => sample_dipole(incoming, rng),
    };
    normalize(&mut outgoing);

    if redistribution {
        let t = medium.temperature_uk();
        if t > 0.0 {
            // thermal speed in µm/ns (µm/ms × 1e-6)
            let v_th = thermal_speed_um_per_ms(t, medium.mass_u()) * 1e-6;
            let v = rng.maxwell_velocity(v_th);
            let rel = [outgoing[0] - incoming[0], outgoing[1] - incoming[1], outgoing[2] - incoming[2]];
            let lambda_um = params.wavelength_nm * 1e-3;
            // µm/ns ÷ µm = GHz; detunings are MHz
            photon.detuning_mhz += dot(v, rel) / lambda_um * 1e3;
        }
    }

    photon.direction = outgoing;
    photon.elapsed_ns += rng.exponential(params.tau0_ns);
    photon.order += 1;
}

/// Rejection sampling of cosθ ∝ 1 + cos²θ about the incoming direction.
fn sample_dipole(incoming: [f64; 3], rng: &mut StreamRng) -> [f64; 3] {
    let mu = loop {
        let c = 2.0 * rng.uniform() - 1.0;
        if rng.uniform() * 2.0 <= 1.0 + c * c {
            break c;
        }
    };
    let phi = 2.0 * math::PI * rng.uniform();
    let s = math::sqrt((1.0 - mu * mu).max(0.0));
    let (e1, e2) = perpendicular_basis(incoming);
    [
        mu * incoming[0] + s * (math::cos(phi) * e1[0] + math::sin(phi) * e2[0]),
        mu * incoming[1] + s * (math::cos(phi) * e1[1] + math::sin(phi) * e2[1]),
        mu * incoming[2] + s * (math::cos(phi) * e1[2] + math::sin(phi) * e2[2]),
    ]
}

/// Escape-time histogram plus exact photon accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeHistogram {
    pub bin_width_ns: f64,
    pub counts: Vec<u64>,
    pub launched: u64,
    pub escaped: u64,
    /// Photons terminated at the scattering-order cap.
    pub capped: u64,
    /// Escaped photons that scattered at least once.
    pub scattered: u64,
    pub total_order: u64,
    pub underflow: u64,
    pub overflow: u64,
    /// Escapes after the pulse window (0 when there is no window).
    pub tail_counts: u64,
}

impl TimeHistogram {
    pub fn new(bin_width_ns: f64, t_max_ns: f64) -> Self {
        let bins = (t_max_ns / bin_width_ns) as usize + 1;
        TimeHistogram {
            bin_width_ns,
            counts: vec![0; bins],
            launched: 0,
            escaped: 0,
            capped: 0,
            scattered: 0,
            total_order: 0,
            underflow: 0,
            overflow: 0,
            tail_counts: 0,
        }
    }

    fn record(&mut self, t_ns: f64) {
        if t_ns < 0.0 {
            self.underflow += 1;
            return;
        }
        let idx = (t_ns / self.bin_width_ns) as usize;
        if idx < self.counts.len() {
            self.counts[idx] += 1;
        } else {
            self.overflow += 1;
        }
    }

    /// Exact elementwise addition; merging order does not matter.
    pub fn merge(&mut self, other: &TimeHistogram) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.launched += other.launched;
        self.escaped += other.escaped;
        self.capped += other.capped;
        self.scattered += other.scattered;
        self.total_order += other.total_order;
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.tail_counts += other.tail_counts;
    }

    pub fn mean_order(&self) -> f64 {
        if self.escaped == 0 {
            0.0
        } else {
            self.total_order as f64 / self.escaped as f64
        }
    }

    /// True when more than 1% of launched photons hit the order cap.
    pub fn cap_warning(&self) -> bool {
        self.capped as f64 > 0.01 * self.launched as f64
    }
}

/// Result of a single photon walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkOutcome {
    Escaped,
    OrderCapped,
}

/// Walks one photon to escape or the order cap. Exposed so validation
/// code can inspect final states directly.
pub fn walk_photon(
    medium: &Medium,
    params: &TransitionParams,
    photon: &mut PhotonState,
    phase: PhaseFunction,
    redistribution: bool,
    max_order: u64,
    rng: &mut StreamRng,
) -> Result<WalkOutcome> {
    let escape_radius = 6.0 * medium.extent_um();
    loop {
        let sigma = cross_section(photon.detuning_mhz, params.gamma_mhz, params)?;
        match sample_free_path(medium, photon, sigma, rng.uniform())? {
            FreePath::Escape => {
                // fly to the bookkeeping boundary so elapsed time includes
                // the geometric flight out
                let pd = dot(photon.position, photon.direction);
                let disc = pd * pd - dot(photon.position, photon.position) + escape_radius * escape_radius;
                if disc > 0.0 {
                    let s = -pd + math::sqrt(disc);
                    if s > 0.0 {
                        for k in 0..3 {
                            photon.position[k] += s * photon.direction[k];
                        }
                        photon.elapsed_ns += s / SPEED_OF_LIGHT_UM_PER_NS;
                    }
                }
                return Ok(WalkOutcome::Escaped);
            }
            FreePath::Scatter(s) => {
                for k in 0..3 {
                    photon.position[k] += s * photon.direction[k];
                }
                photon.elapsed_ns += s / SPEED_OF_LIGHT_UM_PER_NS;
                if photon.order >= max_order {
                    return Ok(WalkOutcome::OrderCapped);
                }
                scatter(photon, medium, params, phase, redistribution, rng);
            }
        }
    }
}

/// Effective order cap: 10·b² from the medium's peak optical depth when
/// the config leaves it at 0.
pub fn effective_max_order(medium: &Medium, params: &TransitionParams, config: &McConfig) -> u64 {
    if config.max_order > 0 {
        return config.max_order;
    }
    let b = medium.peak_optical_depth(params.sigma0_cm2);
    ((10.0 * b * b) as u64).max(100)
}

/// Runs the share of the ensemble belonging to one RNG substream.
pub fn run_worker(
    medium: &Medium,
    params: &TransitionParams,
    config: &McConfig,
    worker: u32,
) -> Result<TimeHistogram> {
    config.validate()?;
    let mut rng = StreamRng::new(config.seed, worker as u64);
    let mut hist = TimeHistogram::new(config.bin_width_ns, config.t_max_ns);
    let max_order = effective_max_order(medium, params, config);

    let beam = &config.beam;
    let mut dir0 = beam.direction;
    normalize(&mut dir0);
    let (e1, e2) = perpendicular_basis(dir0);
    let launch_back = 5.0 * medium.extent_um();

    let share = (config.n_photons / config.workers as u64)
        + u64::from((config.n_photons % config.workers as u64) > worker as u64);

    for _ in 0..share {
        let (u, v) = if beam.beam_radius_um > 0.0 { rng.disk(beam.beam_radius_um) } else { (0.0, 0.0) };
        let mut detuning = beam.detuning_mhz;
        if beam.spectral_width_mhz > 0.0 {
            detuning += rng.lorentzian(beam.spectral_width_mhz);
        }
        let t_emit = if beam.pulse_length_ns > 0.0 { rng.uniform() * beam.pulse_length_ns } else { 0.0 };

        let mut photon = PhotonState {
            position: [
                u * e1[0] + v * e2[0] - launch_back * dir0[0],
                u * e1[1] + v * e2[1] - launch_back * dir0[1],
                u * e1[2] + v * e2[2] - launch_back * dir0[2],
            ],
            direction: dir0,
            detuning_mhz: detuning,
            elapsed_ns: 0.0,
            order: 0,
        };

        hist.launched += 1;
        match walk_photon(medium, params, &mut photon, config.phase_function, config.redistribution, max_order, &mut rng)? {
            WalkOutcome::Escaped => {
                hist.escaped += 1;
                hist.total_order += photon.order;
                if photon.order > 0 {
                    hist.scattered += 1;
                }
                let t = t_emit + photon.elapsed_ns;
                if beam.pulse_length_ns > 0.0 && t > beam.pulse_length_ns {
                    hist.tail_counts += 1;
                }
                hist.record(t);
            }
            WalkOutcome::OrderCapped => {
                hist.capped += 1;
            }
        }
    }
    Ok(hist)
}

/// Runs the full ensemble over all substreams sequentially and merges.
/// Callers that want threads can run [`run_worker`] per stream and merge
/// in any order; the result is identical.
pub fn run_ensemble(medium: &Medium, params: &TransitionParams, config: &McConfig) -> Result<TimeHistogram> {
    config.validate()?;
    let mut hist = TimeHistogram::new(config.bin_width_ns, config.t_max_ns);
    for worker in 0..config.workers {
        hist.merge(&run_worker(medium, params, config, worker)?);
    }
    Ok(hist)
}

/// Single- and double-exponential fits of a histogram tail.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub single: FitResult,
    pub double: Option<FitResult>,
    /// Why the double-exponential fit was rejected, if it was.
    pub double_error: Option<String>,
}

/// Fits the post-pulse tail of `hist` inside `window` (ns) to single and
/// double exponentials.
pub fn extract_decay_time(hist: &TimeHistogram, window: (f64, f64)) -> Result<DecayFit> {
    let (t_lo, t_hi) = window;
    let span = hist.counts.len() as f64 * hist.bin_width_ns;
    if !(0.0 <= t_lo && t_lo < t_hi && t_hi <= span) {
        return Err(Error::Domain("window must lie within the histogram span"));
    }
    let mut data: Vec<Point> = Vec::new();
    let mut nonempty = 0;
    for (i, &c) in hist.counts.iter().enumerate() {
        let t = (i as f64 + 0.5) * hist.bin_width_ns;
        if t >= t_lo && t <= t_hi {
            let y = c as f64;
            if c > 0 {
                nonempty += 1;
            }
            data.push((t, y, 1.0 / y.max(1.0)));
        }
    }
    if nonempty < 20 {
        return Err(Error::InsufficientData(
            "fewer than 20 nonempty bins in the fit window; run more photons",
        ));
    }
    let single = fit_single_exponential(&data)?;
    match fit_double_exponential(&data, None) {
        Ok(double) => Ok(DecayFit { single, double: Some(double), double_error: None }),
        Err(e) => Ok(DecayFit {
            single,
            double: None,
            double_error: Some(alloc::format!("{e}")),
        }),
    }
}
