//! Physical constants and unit conversion factors.

/// Boltzmann constant, J/K.
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

/// Atomic mass unit, kg.
pub const ATOMIC_MASS_KG: f64 = 1.660_539_068_92e-27;

/// Mass of ⁸⁷Rb in atomic mass units.
pub const RB87_MASS_U: f64 = 86.909_180;

/// Speed of light, µm/ns.
pub const SPEED_OF_LIGHT_UM_PER_NS: f64 = 299_792.458;

/// µm → cm.
pub const UM_TO_CM: f64 = 1e-4;

/// cm → µm.
pub const CM_TO_UM: f64 = 1e4;

/// Thermal speed √(k_B·T/m) in µm/ms for a temperature in µK and mass in u.
pub fn thermal_speed_um_per_ms(temperature_uk: f64, mass_u: f64) -> f64 {
    let t_k = temperature_uk * 1e-6;
    let m_kg = mass_u * ATOMIC_MASS_KG;
    // m/s == 1e3 µm/ms
    crate::math::sqrt(K_BOLTZMANN * t_k / m_kg) * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_speed_rb87_at_65uk() {
        // 65 µK ⁸⁷Rb moves at about 79 µm/ms
        let v = thermal_speed_um_per_ms(65.0, RB87_MASS_U);
        assert!((v - 78.86).abs() < 0.2, "v = {v}");
    }
}
