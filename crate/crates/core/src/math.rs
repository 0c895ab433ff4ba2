//! Thin wrappers over `libm` so the crate stays `no_std`.

#![allow(dead_code)]

pub use libm::{cos, erf, exp, fabs as abs, floor, log as ln, pow, sin, sqrt};

pub const PI: f64 = core::f64::consts::PI;

pub fn hypot3(x: f64, y: f64, z: f64) -> f64 {
    sqrt(x * x + y * y + z * z)
}

pub fn powi(x: f64, n: i32) -> f64 {
    pow(x, n as f64)
}
