//! Reproducible random-number substreams for the Monte Carlo engine.
//!
//! Each worker draws from its own ChaCha8 stream derived from
//! (seed, stream index), so ensemble results are independent of how the
//! streams are scheduled across threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;

/// A counter-based generator pinned to one substream of a seed.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        StreamRng { inner, spare_normal: None }
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential draw with the given mean.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * math::ln(self.uniform())
    }

    /// Standard normal via Box-Muller, caching the spare value.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let th = 2.0 * math::PI * u2;
        self.spare_normal = Some(r * math::sin(th));
        r * math::cos(th)
    }

    /// Lorentzian (Cauchy) draw centered at zero with the given FWHM.
    pub fn lorentzian(&mut self, fwhm: f64) -> f64 {
        let angle = math::PI * (self.uniform() - 0.5);
        0.5 * fwhm * math::sin(angle) / math::cos(angle)
    }

    /// Uniform direction on the unit sphere.
    pub fn unit_sphere(&mut self) -> [f64; 3] {
        let u = 2.0 * self.uniform() - 1.0;
        let phi = 2.0 * math::PI * self.uniform();
        let s = math::sqrt((1.0 - u * u).max(0.0));
        [s * math::cos(phi), s * math::sin(phi), u]
    }

    /// Maxwell-Boltzmann velocity vector for thermal speed `v_th`
    /// (same units out as in; one-dimensional RMS equals `v_th`).
    pub fn maxwell_velocity(&mut self, v_th: f64) -> [f64; 3] {
        [v_th * self.normal(), v_th * self.normal(), v_th * self.normal()]
    }

    /// Uniform point on a disk of the given radius, as (u, v) coordinates.
    pub fn disk(&mut self, radius: f64) -> (f64, f64) {
        let r = radius * math::sqrt(self.uniform());
        let phi = 2.0 * math::PI * self.uniform();
        (r * math::cos(phi), r * math::sin(phi))
    }

    /// Poisson draw; Knuth's product method for small means, normal
    /// approximation above 64. Used for synthetic photon-count data.
    pub fn poisson(&mut self, mean: f64) -> f64 {
        if mean <= 0.0 {
            return 0.0;
        }
        if mean > 64.0 {
            return math::floor(mean + math::sqrt(mean) * self.normal() + 0.5).max(0.0);
        }
        let limit = math::exp(-mean);
        let mut k = 0u64;
        let mut p = 1.0;
        loop {
            p *= self.uniform();
            if p <= limit {
                return k as f64;
            }
            k += 1;
        }
    }
}
