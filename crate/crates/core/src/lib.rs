//! Light transport in dense, ultracold bi-Gaussian atomic clouds.
//!
//! The crate collects the pieces needed to model near-resonance scattering
//! from an optically thick cold-atom sample: elementary transition and
//! scattering quantities ([`transition`]), the bi-Gaussian cloud geometry
//! with ballistic expansion and exact column densities ([`cloud`]),
//! closed-form scattered-power and diffusion models ([`models`]), a
//! time-resolved Monte Carlo random walk of probe photons ([`transport`]),
//! a shell-discretized hyperfine optical-pumping integrator ([`pumping`]),
//! and damped Gauss-Newton curve fitting ([`fit`]).
//!
//! The core is `no_std` (with `alloc`); all IO, configuration, and the
//! command-line front end live in the companion `coldscatter` crate.
//!
//! Unit conventions: detunings and linewidths in MHz, lengths in µm,
//! densities in atoms/cm³, cross sections in cm², times in ns unless a
//! name says otherwise. Conversions happen only at IO boundaries.

#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod cloud;
pub mod constants;
mod error;
pub mod fit;
pub(crate) mod math;
pub mod models;
pub mod pumping;
pub mod rng;
pub mod special;
pub mod transition;
pub mod transport;

pub use error::{Error, Result};
pub use cloud::CloudGeometry;
pub use fit::FitResult;
pub use transition::TransitionParams;
pub use transport::{McConfig, PhotonState, ProbeSpec, TimeHistogram};
