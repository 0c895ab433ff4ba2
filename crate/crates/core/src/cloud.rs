//! Bi-Gaussian cloud geometry: densities, optical depths, ballistic
//! expansion, and exact Gaussian line integrals along arbitrary rays.
//!
//! Density convention: n(x,y,z) = n₀·exp(−(x²+y²)/(2r₀²) − z²/(2z₀²)),
//! which ties the peak transverse optical depth to b_t = √(2π)·n₀·σ·r₀.

use alloc::vec::Vec;

use crate::constants::{thermal_speed_um_per_ms, RB87_MASS_U, UM_TO_CM};
use crate::math;
use crate::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// A bi-Gaussian atom cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudGeometry {
    /// Peak density at the cloud center, atoms/cm³.
    pub n0_cm3: f64,
    /// Transverse Gaussian radius, µm.
    pub r0_um: f64,
    /// Longitudinal Gaussian radius, µm.
    pub z0_um: f64,
    /// Total atom number, (2π)^{3/2}·n₀·r₀²·z₀.
    pub n_atoms: f64,
    /// Temperature, µK.
    pub temperature_uk: f64,
    /// Atomic mass, u. Defaults to ⁸⁷Rb.
    pub mass_u: f64,
}

impl CloudGeometry {
    /// Builds a cloud from peak density, radii, and temperature; the atom
    /// number follows from the self-consistency relation.
    pub fn new(n0_cm3: f64, r0_um: f64, z0_um: f64, temperature_uk: f64) -> Result<Self> {
        if !(n0_cm3 > 0.0 && r0_um > 0.0 && z0_um > 0.0 && temperature_uk > 0.0) {
            return Err(Error::Domain("cloud parameters must be strictly positive"));
        }
        let vol_cm3 = math::powi(r0_um * UM_TO_CM, 2) * (z0_um * UM_TO_CM);
        let n_atoms = math::pow(2.0 * math::PI, 1.5) * n0_cm3 * vol_cm3;
        Ok(CloudGeometry {
            n0_cm3,
            r0_um,
            z0_um,
            n_atoms,
            temperature_uk,
            mass_u: RB87_MASS_U,
        })
    }

    /// Overrides the atom number; it must agree with the Gaussian
    /// self-consistency relation to 0.5%.
    pub fn with_atom_number(mut self, n_atoms: f64) -> Result<Self> {
        if math::abs(n_atoms - self.n_atoms) / self.n_atoms > 5e-3 {
            return Err(Error::Domain(
                "atom number inconsistent with (2pi)^{3/2} n0 r0^2 z0 beyond 0.5%",
            ));
        }
        self.n_atoms = n_atoms;
        Ok(self)
    }

    pub fn with_mass(mut self, mass_u: f64) -> Result<Self> {
        if mass_u <= 0.0 {
            return Err(Error::Domain("mass must be positive"));
        }
        self.mass_u = mass_u;
        Ok(self)
    }

    /// Density at a point (µm coordinates), atoms/cm³.
    pub fn density_at(&self, point: [f64; 3]) -> f64 {
        let [x, y, z] = point;
        let arg = (x * x + y * y) / (2.0 * self.r0_um * self.r0_um)
            + z * z / (2.0 * self.z0_um * self.z0_um);
        self.n0_cm3 * math::exp(-arg)
    }

    /// Peak transverse optical depth b_t = √(2π)·n₀·σ·r₀.
    pub fn transverse_optical_depth(&self, sigma_cm2: f64) -> Result<f64> {
        if sigma_cm2 <= 0.0 {
            return Err(Error::Domain("cross section must be positive"));
        }
        Ok(SQRT_2PI * self.n0_cm3 * sigma_cm2 * self.r0_um * UM_TO_CM)
    }

    /// Peak longitudinal optical depth b_l = √(2π)·n₀·σ·z₀.
    pub fn longitudinal_optical_depth(&self, sigma_cm2: f64) -> Result<f64> {
        if sigma_cm2 <= 0.0 {
            return Err(Error::Domain("cross section must be positive"));
        }
        Ok(SQRT_2PI * self.n0_cm3 * sigma_cm2 * self.z0_um * UM_TO_CM)
    }

    /// Free flight for `t_ms` milliseconds: radii grow as
    /// √(r₀² + v_th²t²), the peak density drops so the atom number is
    /// conserved, the temperature is unchanged.
    pub fn ballistic_expand(&self, t_ms: f64) -> Result<CloudGeometry> {
        if t_ms < 0.0 {
            return Err(Error::Domain("expansion time must be nonnegative"));
        }
        let v = thermal_speed_um_per_ms(self.temperature_uk, self.mass_u);
        let d2 = (v * t_ms) * (v * t_ms);
        let r = math::sqrt(self.r0_um * self.r0_um + d2);
        let z = math::sqrt(self.z0_um * self.z0_um + d2);
        let n0 = self.n0_cm3 * (self.r0_um * self.r0_um * self.z0_um) / (r * r * z);
        Ok(CloudGeometry {
            n0_cm3: n0,
            r0_um: r,
            z0_um: z,
            n_atoms: self.n_atoms,
            temperature_uk: self.temperature_uk,
            mass_u: self.mass_u,
        })
    }

    /// Exact line integral of the density along the ray
    /// `origin + s·direction` for s ∈ [0, s_max], in atoms/cm².
    ///
    /// `s_max` may be infinite. Expressed through the error function;
    /// monotone nondecreasing in `s_max`.
    pub fn column_density(&self, origin: [f64; 3], direction: [f64; 3], s_max_um: f64) -> Result<f64> {
        let q = self.ray_quadratic(direction)?;
        if s_max_um < 0.0 {
            return Err(Error::Domain("s_max must be nonnegative"));
        }
        Ok(self.column_from_quadratic(&q, origin, s_max_um))
    }

    /// Precomputed quadratic coefficients of the exponent along a ray
    /// direction; shared by `column_density` and the free-path inversion.
    pub(crate) fn ray_quadratic(&self, direction: [f64; 3]) -> Result<RayQuadratic> {
        let [dx, dy, dz] = direction;
        let norm = math::hypot3(dx, dy, dz);
        if math::abs(norm - 1.0) > 1e-9 {
            return Err(Error::Domain("direction must be a unit vector"));
        }
        let a = (dx * dx + dy * dy) / (2.0 * self.r0_um * self.r0_um)
            + dz * dz / (2.0 * self.z0_um * self.z0_um);
        Ok(RayQuadratic { a, alpha: math::sqrt(a), dir: direction })
    }

    pub(crate) fn column_from_quadratic(&self, q: &RayQuadratic, origin: [f64; 3], s_max_um: f64) -> f64 {
        let (beta, prefactor) = self.ray_profile(q, origin);
        let upper = if s_max_um.is_finite() {
            math::erf(q.alpha * s_max_um + beta)
        } else {
            1.0
        };
        prefactor * (upper - math::erf(beta))
    }

    /// Returns (β, K) such that the column to distance s is
    /// K·(erf(α·s + β) − erf(β)), with K in atoms/cm².
    pub(crate) fn ray_profile(&self, q: &RayQuadratic, origin: [f64; 3]) -> (f64, f64) {
        let [ox, oy, oz] = origin;
        let [dx, dy, dz] = q.dir;
        let b = (ox * dx + oy * dy) / (self.r0_um * self.r0_um) + oz * dz / (self.z0_um * self.z0_um);
        let c = (ox * ox + oy * oy) / (2.0 * self.r0_um * self.r0_um)
            + oz * oz / (2.0 * self.z0_um * self.z0_um);
        let beta = b / (2.0 * q.alpha);
        // beta^2 - c <= 0 always (closest-approach exponent is nonnegative)
        let prefactor =
            self.n0_cm3 * math::exp(beta * beta - c) * math::sqrt(math::PI) / (2.0 * q.alpha) * UM_TO_CM;
        (beta, prefactor)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RayQuadratic {
    #[allow(dead_code)]
    pub a: f64,
    pub alpha: f64,
    pub dir: [f64; 3],
}

/// One row of the sample-parameter table: peak transverse optical depth,
/// peak density, and the two Gaussian radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub bt: f64,
    pub n0_cm3: f64,
    pub r0_um: f64,
    pub z0_um: f64,
}

/// Reference QUEST sample parameters measured at six expansion stages,
/// from the densest sample down to a nearly spherical dilute cloud.
pub const TABLE1_REFERENCE: [Table1Row; 6] = [
    Table1Row { bt: 165.0, n0_cm3: 5.0e13, r0_um: 9.8, z0_um: 248.0 },
    Table1Row { bt: 117.0, n0_cm3: 2.5e13, r0_um: 13.8, z0_um: 248.0 },
    Table1Row { bt: 82.0, n0_cm3: 1.2e13, r0_um: 19.5, z0_um: 248.0 },
    Table1Row { bt: 53.0, n0_cm3: 5.1e12, r0_um: 30.4, z0_um: 249.0 },
    Table1Row { bt: 16.0, n0_cm3: 5.2e11, r0_um: 92.3, z0_um: 264.0 },
    Table1Row { bt: 5.0, n0_cm3: 5.9e10, r0_um: 240.0, z0_um: 345.0 },
];

/// Expands `base` by each time in `expansion_times_ms` and reports the
/// resulting (b_t, n₀, r₀, z₀) rows. An empty time list yields the base
/// row alone; t = 0 reproduces the base.
pub fn table1_generate(
    base: &CloudGeometry,
    expansion_times_ms: &[f64],
    sigma_cm2: f64,
) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::new();
    if expansion_times_ms.is_empty() {
        rows.push(row_of(base, sigma_cm2)?);
        return Ok(rows);
    }
    for &t in expansion_times_ms {
        let c = base.ballistic_expand(t)?;
        rows.push(row_of(&c, sigma_cm2)?);
    }
    Ok(rows)
}

fn row_of(cloud: &CloudGeometry, sigma_cm2: f64) -> Result<Table1Row> {
    Ok(Table1Row {
        bt: cloud.transverse_optical_depth(sigma_cm2)?,
        n0_cm3: cloud.n0_cm3,
        r0_um: cloud.r0_um,
        z0_um: cloud.z0_um,
    })
}

/// Reconstructs the expansion times behind the reference table rows.
///
/// The times are not part of the reference data; each one is recovered by
/// a 1-D least-squares match of (r₀, z₀, b_t) in log space against the
/// target row. A plain inversion of r(t) alone misses the b_t tolerance
/// on the fifth row because of rounding in the reference values.
pub fn reference_expansion_times_ms(base: &CloudGeometry, sigma_cm2: f64) -> Result<Vec<f64>> {
    let mut times = Vec::with_capacity(TABLE1_REFERENCE.len());
    for (i, target) in TABLE1_REFERENCE.iter().enumerate() {
        // the first row is the unexpanded sample by definition; fitting
        // it would trade the exact radii against rounding in its b_t
        times.push(if i == 0 { 0.0 } else { fit_time_for_row(base, sigma_cm2, target)? });
    }
    Ok(times)
}

fn fit_time_for_row(base: &CloudGeometry, sigma_cm2: f64, target: &Table1Row) -> Result<f64> {
    let objective = |t: f64| -> Result<f64> {
        let c = base.ballistic_expand(t)?;
        let bt = c.transverse_optical_depth(sigma_cm2)?;
        let er = math::ln(c.r0_um / target.r0_um);
        let ez = math::ln(c.z0_um / target.z0_um);
        let eb = math::ln(bt / target.bt);
        Ok(er * er + ez * ez + eb * eb)
    };
    // coarse scan then golden-section refinement
    let t_max = 6.0;
    let n = 600;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let t = t_max * i as f64 / n as f64;
        let f = objective(t)?;
        if f < best {
            best = f;
            best_i = i;
        }
    }
    let step = t_max / n as f64;
    let mut lo = (best_i as f64 - 1.0).max(0.0) * step;
    let mut hi = (best_i as f64 + 1.0) * step;
    let phi = (math::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}
