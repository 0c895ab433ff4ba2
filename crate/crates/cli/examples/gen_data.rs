//! Regenerates the bundled synthetic datasets in `crates/cli/data/`.
//!
//! Run from the workspace root:
//!     cargo run -p coldscatter --example gen_data
//!
//! Seeds are fixed, so the files are reproducible; the true parameters
//! are noted in each file's header comment row... CSV has no comments,
//! so they are recorded here instead:
//!   density_power.csv: P(b) = A·S(ηb)/(ηb), A = 25, η = 0.08, 2% noise
//!   spectrum.csv:      P(Δ) = A·S(η·b(Δ)), A = 25, η = 0.10, δ = 0.8 MHz,
//!                      b0 = 165, γ' = 9 MHz, 2% noise
//!   decay_double.csv:  2000·exp(−t/100) + 600·exp(−t/500) + 5, Poisson
//!   saturation.csv:    10·x/(1.7 + x), 2% noise

use std::fmt::Write as _;

use coldscatter_core::models::{
    density_model, spectral_model, DensityModelParams, SpectralModelParams,
};
use coldscatter_core::rng::StreamRng;

fn write(name: &str, content: String) {
    let path = format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::write(&path, content).unwrap();
    println!("wrote {path}");
}

fn main() {
    let mut rng = StreamRng::new(20260823, 0);

    let mut s = String::from("b_t,counts\n");
    let dm = DensityModelParams { amplitude_a: 25.0, eta: 0.08 };
    for b in [165.0, 117.0, 82.0, 53.0, 16.0, 5.0] {
        let y = density_model(b, &dm).unwrap() * (1.0 + 0.02 * rng.normal());
        writeln!(s, "{b},{y}").unwrap();
    }
    write("density_power.csv", s);

    let sp = SpectralModelParams {
        amplitude_a: 25.0,
        eta: 0.10,
        b0: 165.0,
        delta_shift_mhz: 0.8,
        gamma_prime_mhz: 9.0,
    };
    let mut s = String::from("detuning_mhz,counts\n");
    for i in -24..=24 {
        let d = i as f64;
        let y = spectral_model(d, &sp).unwrap() * (1.0 + 0.02 * rng.normal());
        writeln!(s, "{d},{y}").unwrap();
    }
    write("spectrum.csv", s);

    let mut s = String::from("t_ns,counts\n");
    let mut t = 2.5;
    while t < 3000.0 {
        let mean = 2000.0 * (-t / 100.0f64).exp() + 600.0 * (-t / 500.0f64).exp() + 5.0;
        writeln!(s, "{t},{}", rng.poisson(mean)).unwrap();
        t += 5.0;
    }
    write("decay_double.csv", s);

    let mut s = String::from("intensity_mw_cm2,level\n");
    for i in 1..=20 {
        let x = 0.5 * i as f64;
        let y = 10.0 * x / (1.7 + x) * (1.0 + 0.02 * rng.normal());
        writeln!(s, "{x},{y}").unwrap();
    }
    write("saturation.csv", s);
}
