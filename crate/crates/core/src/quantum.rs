//! Detailed-balance occupancy limits and sideband thermometry.
//!
//! Motional scattering enhances the two sidebands with the Lorentzian weights
//! A± = ((κ/2)² + (Δ ∓ Ωm)²)⁻¹. Every quantity here is a ratio of weights, so
//! the common rate prefactor (η², photon flux) never needs fixing.
//!
//! Naming convention, fixed throughout the crate: the *red/Stokes* sideband is
//! the motional-increasing one with weight A⁺·(n+1); the *blue/anti-Stokes*
//! sideband is motional-decreasing with weight A⁻·n.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{MechanicalMode, OpticalMode};

/// Unnormalized Lorentzian sideband weights (s²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandWeights {
    /// Lower-sideband (anti-Stokes enhancement) weight A⁻.
    pub a_minus: f64,
    /// Upper-sideband (Stokes enhancement) weight A⁺.
    pub a_plus: f64,
}

impl SidebandWeights {
    /// A⁻/A⁺, the Stokes suppression factor at red detuning.
    pub fn ratio(&self) -> f64 {
        self.a_minus / self.a_plus
    }

    /// Stokes suppression in dB: 10·log10(A⁻/A⁺).
    pub fn suppression_db(&self) -> f64 {
        10.0 * self.ratio().log10()
    }
}

/// Sideband weights at a given laser detuning.
pub fn sideband_weights(optical: &OpticalMode, mech: &MechanicalMode, delta: f64) -> SidebandWeights {
    let half = 0.5 * optical.kappa();
    let om = mech.omega_m();
    SidebandWeights {
        a_minus: 1.0 / (half * half + (delta + om) * (delta + om)),
        a_plus: 1.0 / (half * half + (delta - om) * (delta - om)),
    }
}

/// Detailed-balance occupancy floor n_min = A⁺/(A⁻ − A⁺), reservoir heating
/// neglected. Requires a cooling configuration (A⁻ > A⁺).
pub fn n_min_detailed_balance(weights: &SidebandWeights) -> Result<f64> {
    let diff = weights.a_minus - weights.a_plus;
    if diff <= 0.0 {
        return Err(Error::HeatingRegime(format!(
            "no cooling steady state: A- = {} <= A+ = {}",
            weights.a_minus, weights.a_plus
        )));
    }
    Ok(weights.a_plus / diff)
}

/// Weak-binding (Doppler) occupancy limit κ/(4Ωm).
pub fn doppler_limit(optical: &OpticalMode, mech: &MechanicalMode) -> f64 {
    optical.kappa() / (4.0 * mech.omega_m())
}

/// Resolved-sideband occupancy limit κ²/(16Ωm²); the Δ = −Ωm value of the
/// detailed-balance floor, exactly.
pub fn rsb_limit(optical: &OpticalMode, mech: &MechanicalMode) -> f64 {
    let x = optical.kappa() / (4.0 * mech.omega_m());
    x * x
}

/// Occupancy inferred from measured sideband powers.
///
/// Solves P_red/P_blue = A⁺(n+1)/(A⁻·n) for n, where `p_red` is the
/// motional-increasing (Stokes) power and `p_blue` the motional-decreasing
/// (anti-Stokes) power:
///
/// ```text
/// n = A⁺·p_blue / (A⁻·p_red − A⁺·p_blue)
/// ```
pub fn occupancy_from_sidebands(p_red: f64, p_blue: f64, weights: &SidebandWeights) -> Result<f64> {
    if !(p_red > 0.0 && p_blue > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sideband powers must be positive, got red={p_red}, blue={p_blue}"
        )));
    }
    let denom = weights.a_minus * p_red - weights.a_plus * p_blue;
    if denom <= 0.0 {
        return Err(Error::NonPhysicalRatio(format!(
            "measured asymmetry exceeds the detailed-balance bound \
             (A-·p_red = {} <= A+·p_blue = {})",
            weights.a_minus * p_red,
            weights.a_plus * p_blue
        )));
    }
    Ok(weights.a_plus * p_blue / denom)
}

/// Forward model: sideband powers `(p_red, p_blue) ∝ (A⁺(n+1), A⁻·n)` for a
/// given occupancy, in the arbitrary units of the weights.
pub fn sideband_powers(n: f64, weights: &SidebandWeights) -> (f64, f64) {
    (weights.a_plus * (n + 1.0), weights.a_minus * n)
}
