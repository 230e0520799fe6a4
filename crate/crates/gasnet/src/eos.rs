//! Isothermal equations of state: ideal gas and the CNGA correlation.
//!
//! Both models express density as a function of pressure at fixed temperature,
//!
//! ```text
//! rho(p) = (b1 * p + b2 * p^2) / (Rg * T)
//! ```
//!
//! with `b1 = 1, b2 = 0` for the ideal gas. The CNGA coefficients are computed
//! from temperature, specific gravity and atmospheric pressure. All quantities
//! here are dimensional SI; nondimensional callers convert at the boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// CNGA correlation constants.
const CNGA_A1: f64 = 344_400.0;
const CNGA_A2: f64 = 1.785;
const CNGA_A3: f64 = 3.825;
/// Pascal per psi, as it appears in the CNGA correlation.
const PA_PER_PSI: f64 = 6894.75729;

/// Default specific gas constant for natural gas, J/(kg K).
///
/// The governing equations treat Rg as given data; this default is a
/// repository choice for convenience, not a measured constant.
pub const DEFAULT_GAS_CONSTANT: f64 = 518.3;
/// Default gas temperature, K.
pub const DEFAULT_TEMPERATURE: f64 = 288.706;
/// Default specific gravity of natural gas relative to air.
pub const DEFAULT_SPECIFIC_GRAVITY: f64 = 0.6;
/// Default atmospheric pressure used by the CNGA correlation, Pa.
pub const DEFAULT_ATMOSPHERIC_PRESSURE: f64 = 101_350.0;

#[derive(Debug, Error)]
pub enum EosError {
    #[error("pressure must be positive, got {0:.6e} Pa")]
    NonPositivePressure(f64),
    #[error("density must be positive, got {0:.6e} kg/m^3")]
    NonPositiveDensity(f64),
    #[error("CNGA coefficients overflow for specific gravity {specific_gravity}: 10^(a2*G) is not finite")]
    CoefficientOverflow { specific_gravity: f64 },
    #[error("invalid EoS parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Which density-pressure relation is in effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EosKind {
    Ideal,
    Cnga,
}

impl std::fmt::Display for EosKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EosKind::Ideal => write!(f, "ideal"),
            EosKind::Cnga => write!(f, "cnga"),
        }
    }
}

/// An isothermal equation of state with fixed coefficients.
///
/// Immutable after construction; all methods are pure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosModel {
    pub kind: EosKind,
    /// Dimensionless coefficient; 1 for the ideal gas.
    pub b1: f64,
    /// Coefficient in 1/Pa; 0 for the ideal gas.
    pub b2: f64,
    /// Specific gas constant, J/(kg K).
    pub gas_constant: f64,
    /// Gas temperature, K.
    pub temperature: f64,
    /// Specific gravity relative to air (CNGA input).
    pub specific_gravity: f64,
    /// Atmospheric pressure, Pa (CNGA input).
    pub p_atm: f64,
}

/// Computes the CNGA coefficients `(b1, b2)` from temperature, specific
/// gravity and atmospheric pressure. `b1 = 1 + p_atm * b2` holds exactly.
pub fn cnga_coefficients(
    temperature: f64,
    specific_gravity: f64,
    p_atm: f64,
) -> Result<(f64, f64), EosError> {
    check_positive("temperature", temperature)?;
    check_positive("specific_gravity", specific_gravity)?;
    check_positive("p_atm", p_atm)?;
    let factor = CNGA_A1 * 10f64.powf(CNGA_A2 * specific_gravity)
        / (1.8 * temperature).powf(CNGA_A3);
    if !factor.is_finite() {
        return Err(EosError::CoefficientOverflow { specific_gravity });
    }
    let b2 = factor / PA_PER_PSI;
    let b1 = 1.0 + p_atm * b2;
    Ok((b1, b2))
}

fn check_positive(name: &'static str, value: f64) -> Result<(), EosError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(EosError::InvalidParameter { name, value })
    }
}

impl EosModel {
    /// Ideal gas model: `rho = p / (Rg T)`.
    pub fn ideal(gas_constant: f64, temperature: f64) -> Result<Self, EosError> {
        check_positive("gas_constant", gas_constant)?;
        check_positive("temperature", temperature)?;
        Ok(Self {
            kind: EosKind::Ideal,
            b1: 1.0,
            b2: 0.0,
            gas_constant,
            temperature,
            specific_gravity: DEFAULT_SPECIFIC_GRAVITY,
            p_atm: DEFAULT_ATMOSPHERIC_PRESSURE,
        })
    }

    /// CNGA model with coefficients computed from the correlation.
    pub fn cnga(
        gas_constant: f64,
        temperature: f64,
        specific_gravity: f64,
        p_atm: f64,
    ) -> Result<Self, EosError> {
        check_positive("gas_constant", gas_constant)?;
        let (b1, b2) = cnga_coefficients(temperature, specific_gravity, p_atm)?;
        Ok(Self {
            kind: EosKind::Cnga,
            b1,
            b2,
            gas_constant,
            temperature,
            specific_gravity,
            p_atm,
        })
    }

    /// Model of the given kind with all defaults.
    pub fn with_defaults(kind: EosKind) -> Self {
        match kind {
            EosKind::Ideal => Self::ideal(DEFAULT_GAS_CONSTANT, DEFAULT_TEMPERATURE).unwrap(),
            EosKind::Cnga => Self::cnga(
                DEFAULT_GAS_CONSTANT,
                DEFAULT_TEMPERATURE,
                DEFAULT_SPECIFIC_GRAVITY,
                DEFAULT_ATMOSPHERIC_PRESSURE,
            )
            .unwrap(),
        }
    }

    /// `Rg * T`, the square of the ideal-gas isothermal sound speed, (m/s)^2.
    pub fn rg_t(&self) -> f64 {
        self.gas_constant * self.temperature
    }

    /// Density at pressure `p` (Pa), kg/m^3.
    pub fn density(&self, p: f64) -> Result<f64, EosError> {
        if p <= 0.0 || p.is_nan() {
            return Err(EosError::NonPositivePressure(p));
        }
        Ok((self.b1 * p + self.b2 * p * p) / self.rg_t())
    }

    /// d(rho)/dp at pressure `p`, kg/(m^3 Pa). Strictly positive.
    pub fn drho_dp(&self, p: f64) -> Result<f64, EosError> {
        if p <= 0.0 || p.is_nan() {
            return Err(EosError::NonPositivePressure(p));
        }
        Ok((self.b1 + 2.0 * self.b2 * p) / self.rg_t())
    }

    /// d^2(rho)/dp^2, constant for this family of models.
    pub fn d2rho_dp2(&self) -> f64 {
        2.0 * self.b2 / self.rg_t()
    }

    /// Pressure at density `rho` (positive root of the quadratic), Pa.
    pub fn pressure(&self, rho: f64) -> Result<f64, EosError> {
        if rho <= 0.0 || rho.is_nan() {
            return Err(EosError::NonPositiveDensity(rho));
        }
        let m = rho * self.rg_t();
        if self.b2 == 0.0 {
            return Ok(m / self.b1);
        }
        // Stable form of the positive root of b2 p^2 + b1 p - m = 0:
        // avoids cancellation when b2 p << b1.
        let disc = (self.b1 * self.b1 + 4.0 * self.b2 * m).sqrt();
        Ok(2.0 * m / (self.b1 + disc))
    }

    /// Isothermal sound speed `c = sqrt(dp/drho)` at density `rho`, m/s.
    ///
    /// Constant for the ideal gas; for CNGA the quadratic is inverted first.
    pub fn sound_speed(&self, rho: f64) -> Result<f64, EosError> {
        if rho <= 0.0 || rho.is_nan() {
            return Err(EosError::NonPositiveDensity(rho));
        }
        let p = self.pressure(rho)?;
        Ok((1.0 / self.drho_dp(p)?).sqrt())
    }
}

/// Nondimensional view of an [`EosModel`]: `rho_bar(p_bar) = rho(p0 * p_bar) / rho0`.
///
/// For the ideal gas this reduces to `rho_bar = Eu * p_bar` with
/// `Eu = p0 / (rho0 c0^2)`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledEos {
    pub model: EosModel,
    /// Nominal pressure, Pa.
    pub p0: f64,
    /// Nominal density, kg/m^3.
    pub rho0: f64,
}

impl ScaledEos {
    pub fn density(&self, p_bar: f64) -> Result<f64, EosError> {
        Ok(self.model.density(self.p0 * p_bar)? / self.rho0)
    }

    pub fn drho_dp(&self, p_bar: f64) -> Result<f64, EosError> {
        Ok(self.model.drho_dp(self.p0 * p_bar)? * self.p0 / self.rho0)
    }

    pub fn d2rho_dp2(&self) -> f64 {
        self.model.d2rho_dp2() * self.p0 * self.p0 / self.rho0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Golden values: direct evaluation of the coefficient formulas at the
    // default inputs (T = 288.706 K, G = 0.6, p_atm = 101350 Pa), recorded
    // at 40-digit precision before the model code was written.
    const GOLDEN_B1: f64 = 1.0024417832439048;
    const GOLDEN_B2: f64 = 2.4092582574294508e-8;

    #[test]
    fn cnga_coefficients_match_golden_values() {
        let (b1, b2) = cnga_coefficients(288.706, 0.6, 101_350.0).unwrap();
        assert!((b1 - GOLDEN_B1).abs() / GOLDEN_B1 < 1e-14);
        assert!((b2 - GOLDEN_B2).abs() / GOLDEN_B2 < 1e-14);
    }

    #[test]
    fn cnga_coefficient_identity_holds_to_rounding() {
        // b1 - 1 = p_atm * b2: the same factor enters both formulas, so the
        // identity holds up to the one rounding in forming 1 + p_atm b2.
        for (t, g, patm) in [(288.706, 0.6, 101_350.0), (300.0, 0.65, 99_000.0)] {
            let (b1, b2) = cnga_coefficients(t, g, patm).unwrap();
            assert!((b1 - 1.0 - patm * b2).abs() <= f64::EPSILON * b1);
        }
    }

    #[test]
    fn cnga_overflow_is_a_domain_error() {
        // The literal value printed for G in some sources (288.706) makes
        // 10^(a2 G) overflow; that must surface as a typed error.
        let err = cnga_coefficients(288.706, 288.706, 101_350.0).unwrap_err();
        assert!(matches!(err, EosError::CoefficientOverflow { .. }));
    }

    #[test]
    fn ideal_model_has_unit_coefficients() {
        let m = EosModel::ideal(518.3, 288.706).unwrap();
        assert_eq!(m.b1, 1.0);
        assert_eq!(m.b2, 0.0);
    }

    #[test]
    fn ideal_density_is_unity_at_rg_t() {
        let m = EosModel::ideal(518.3, 288.706).unwrap();
        let p = m.rg_t();
        assert!((m.density(p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_cnga_matches_ideal() {
        let ideal = EosModel::ideal(518.3, 288.706).unwrap();
        let mut cnga = EosModel::with_defaults(EosKind::Cnga);
        cnga.b1 = 1.0;
        cnga.b2 = 0.0;
        for p in [1e5, 1e6, 5e6, 1e7] {
            assert_eq!(ideal.density(p).unwrap(), cnga.density(p).unwrap());
        }
    }

    #[test]
    fn cnga_density_matches_golden_value_at_5mpa() {
        // rho = (b1 p + b2 p^2)/(Rg T) evaluated independently at p = 5 MPa.
        let m = EosModel::with_defaults(EosKind::Cnga);
        let rho = m.density(5e6).unwrap();
        assert!((rho - 37.521127812292576).abs() / 37.521127812292576 < 1e-13);
    }

    #[test]
    fn drho_dp_matches_golden_and_finite_difference() {
        let m = EosModel::with_defaults(EosKind::Cnga);
        let d = m.drho_dp(5e6).unwrap();
        assert!((d - 8.309263490633173e-6).abs() / 8.309263490633173e-6 < 1e-13);
        let h = 1.0;
        let fd = (m.density(5e6 + h).unwrap() - m.density(5e6 - h).unwrap()) / (2.0 * h);
        assert!((d - fd).abs() / d < 1e-8);
    }

    #[test]
    fn drho_dp_is_increasing_in_pressure_for_cnga() {
        let m = EosModel::with_defaults(EosKind::Cnga);
        assert!(m.drho_dp(6e6).unwrap() > m.drho_dp(5e6).unwrap());
    }

    #[test]
    fn ideal_drho_dp_is_constant() {
        let m = EosModel::ideal(518.3, 288.706).unwrap();
        let expect = 1.0 / m.rg_t();
        for p in [1e5, 1e6, 1e7] {
            assert_eq!(m.drho_dp(p).unwrap(), expect);
        }
    }

    #[test]
    fn ideal_sound_speed() {
        // Rg T = 160000 (m/s)^2 -> c = 400 m/s at any density.
        let m = EosModel::ideal(400.0, 400.0).unwrap();
        for rho in [0.5, 1.0, 50.0] {
            assert!((m.sound_speed(rho).unwrap() - 400.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cnga_sound_speed_matches_golden_and_inverse_identity() {
        let m = EosModel::with_defaults(EosKind::Cnga);
        let rho = m.density(5e6).unwrap();
        let c = m.sound_speed(rho).unwrap();
        assert!((c - 346.911530169241).abs() / 346.911530169241 < 1e-13);
        // c(rho)^2 * drho_dp(p(rho)) = 1.
        let ident = c * c * m.drho_dp(m.pressure(rho).unwrap()).unwrap();
        assert!((ident - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pressure_density_round_trip() {
        let m = EosModel::with_defaults(EosKind::Cnga);
        for p in [1e3, 1e5, 1e6, 5e6, 2e7, 1e8] {
            let back = m.pressure(m.density(p).unwrap()).unwrap();
            assert!((back - p).abs() / p < 1e-10, "p = {p}");
        }
    }

    #[test]
    fn non_positive_inputs_are_rejected() {
        let m = EosModel::with_defaults(EosKind::Cnga);
        assert!(matches!(
            m.density(0.0),
            Err(EosError::NonPositivePressure(_))
        ));
        assert!(matches!(
            m.density(-1.0),
            Err(EosError::NonPositivePressure(_))
        ));
        assert!(matches!(
            m.sound_speed(-1.0),
            Err(EosError::NonPositiveDensity(_))
        ));
    }

    #[test]
    fn scaled_eos_reduces_to_euler_times_pressure_for_ideal() {
        let model = EosModel::ideal(518.3, 288.706).unwrap();
        let rho0 = model.density(101_325.0).unwrap();
        let scaled = ScaledEos {
            model,
            p0: 8.8e6,
            rho0,
        };
        let eu = 8.8e6 / (rho0 * model.rg_t());
        for p_bar in [0.3, 1.0, 1.7] {
            assert!((scaled.density(p_bar).unwrap() - eu * p_bar).abs() < 1e-12 * eu);
            assert!((scaled.drho_dp(p_bar).unwrap() - eu).abs() < 1e-12 * eu);
        }
        assert_eq!(scaled.d2rho_dp2(), 0.0);
    }
}
