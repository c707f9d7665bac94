//! Physical constants and unit conversions. Everything internal is SI.

/// Proton gyromagnetic ratio, rad s⁻¹ T⁻¹.
pub const GAMMA_H: f64 = 2.6752218744e8;
/// μ0/4π in T·m/A.
pub const MU0_OVER_4PI: f64 = 1e-7;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;

pub const ANGSTROM: f64 = 1e-10;
/// One Gauss per centimetre expressed in tesla per metre.
pub const GAUSS_PER_CM: f64 = 1e-2;

/// Angle where 3cos²θ − 1 vanishes, arccos(1/√3).
pub fn magic_angle() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

/// The constant set used throughout the crate, bundled for reporting.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhysicalConstants {
    pub gamma_h: f64,
    pub mu0_over_4pi: f64,
    pub hbar: f64,
    pub magic_angle: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            gamma_h: GAMMA_H,
            mu0_over_4pi: MU0_OVER_4PI,
            hbar: HBAR,
            magic_angle: magic_angle(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magic_angle_zeroes_second_legendre() {
        let c = magic_angle().cos();
        assert!((3.0 * c * c - 1.0).abs() < 1e-15);
        assert!((magic_angle().to_degrees() - 54.7356).abs() < 1e-4);
    }
}
