//! Laser-noise heating: classical phase/intensity noise turns into a
//! radiation-pressure force noise, competes with the cooling rate and floors
//! the achievable occupancy.
//!
//! Standing assumptions of these closed forms: pump on the lower sideband
//! (Δ = −Ωm), deeply resolved cavity (κ ≪ Ωm) and critical coupling. They are
//! checked and reported as warnings rather than errors, since the formulas
//! remain useful estimates at moderate resolution.

use serde::Serialize;

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::params::{Environment, LaserDrive, MechanicalMode, OpticalMode};

/// Radiation-pressure force PSD from laser phase noise: S_φ·P²/(Ωm²·R²).
pub fn force_psd_phase(s_phi: f64, power: f64, omega_m: f64, radius: f64) -> f64 {
    s_phi * power * power / (omega_m * omega_m * radius * radius)
}

/// Radiation-pressure force PSD from relative intensity noise: S_I·P²/(Ωm²·R²).
pub fn force_psd_intensity(s_i: f64, power: f64, omega_m: f64, radius: f64) -> f64 {
    s_i * power * power / (omega_m * omega_m * radius * radius)
}

/// Thermal Langevin force PSD 2·k_B·T·m_eff·Γ.
pub fn thermal_force_psd(temperature: f64, m_eff: f64, gamma: f64, consts: &Constants) -> f64 {
    2.0 * consts.kb * temperature * m_eff * gamma
}

/// Effective laser temperature: the T for which the thermal force PSD equals
/// the given noise-force PSD, T_laser = S_F/(2·k_B·m_eff·Γ).
pub fn laser_temperature(s_f: f64, m_eff: f64, gamma: f64, consts: &Constants) -> f64 {
    s_f / (2.0 * consts.kb * m_eff * gamma)
}

/// Cooling rate in the same approximation set: Γcool = ω·P/(Ωm³·m_eff·R²)
/// (the asymptotic rate at critical coupling).
pub fn cooling_rate_simplified(
    omega_laser: f64,
    power: f64,
    omega_m: f64,
    m_eff: f64,
    radius: f64,
) -> f64 {
    omega_laser * power / (omega_m * omega_m * omega_m * m_eff * radius * radius)
}

/// The full noise budget of a pump/mode configuration.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseBudget {
    /// Force PSD from phase noise (N²/Hz).
    pub s_f_phase: f64,
    /// Force PSD from intensity noise (N²/Hz).
    pub s_f_intensity: f64,
    /// Thermal force PSD 2kB·T·m_eff·Γm (N²/Hz).
    pub s_f_thermal: f64,
    /// Effective laser temperature (K) for the combined laser force noise.
    pub t_laser: f64,
    /// Effective mode temperature T_eff = (Γm/Γcool)(T + T_laser) (K).
    pub t_eff: f64,
    /// Noise-limited occupancy kB·T_eff/(ħΩm).
    pub n_floor: f64,
    /// Cooling rate Γcool (rad/s) in the simplified form.
    pub gamma_cool: f64,
    /// Violations of the standing approximations, if any.
    pub warnings: Vec<String>,
}

/// Evaluate the noise budget for a driven mode in a thermal environment.
pub fn effective_occupancy(
    optical: &OpticalMode,
    mech: &MechanicalMode,
    laser: &LaserDrive,
    env: &Environment,
    consts: &Constants,
) -> Result<NoiseBudget> {
    let radius = optical.require_radius()?;
    let m_eff = mech.require_m_eff()?;
    let gamma_m = mech.require_gamma_m()?;
    let om = mech.omega_m();
    let omega_laser = optical.omega0() + laser.detuning;

    let s_f_phase = force_psd_phase(laser.s_phi, laser.power, om, radius);
    let s_f_intensity = force_psd_intensity(laser.s_i, laser.power, om, radius);
    let s_f_thermal = thermal_force_psd(env.temperature, m_eff, gamma_m, consts);
    let t_laser = laser_temperature(s_f_phase + s_f_intensity, m_eff, gamma_m, consts);
    let gamma_cool = cooling_rate_simplified(omega_laser, laser.power, om, m_eff, radius);

    let mut warnings = Vec::new();
    if gamma_cool < 10.0 * gamma_m {
        warnings.push(format!(
            "cooling rate {gamma_cool:.3e} rad/s is not well above the damping \
             {gamma_m:.3e} rad/s; T_eff = (Γm/Γcool)(T + T_laser) assumes Γcool ≫ Γm"
        ));
    }
    let resolvedness = om / optical.kappa();
    if resolvedness < 5.0 {
        warnings.push(format!(
            "sideband resolution Ωm/κ = {resolvedness:.2} is low; the force-noise \
             formulas assume κ ≪ Ωm"
        ));
    }
    if (laser.detuning + om).abs() > 0.01 * om {
        warnings.push(format!(
            "detuning {:.3e} rad/s is away from the lower sideband -Ωm",
            laser.detuning
        ));
    }
    if (optical.coupling() - 1.0).abs() > 0.01 {
        warnings.push(format!(
            "coupling K = {:.3} is away from critical",
            optical.coupling()
        ));
    }

    let t_eff = gamma_m / gamma_cool * (env.temperature + t_laser);
    Ok(NoiseBudget {
        s_f_phase,
        s_f_intensity,
        s_f_thermal,
        t_laser,
        t_eff,
        n_floor: consts.kb * t_eff / (consts.hbar * om),
        gamma_cool,
        warnings,
    })
}

/// Pump power balancing laser-noise heating against cooling:
/// P_opt = √(2·k_B·T·m_eff·Γ/S_φ)·R·Ωm.
pub fn optimal_power(
    env: &Environment,
    mech: &MechanicalMode,
    s_phi: f64,
    optical: &OpticalMode,
    consts: &Constants,
) -> Result<f64> {
    if !(s_phi > 0.0) {
        return Err(Error::ZeroPhaseNoise);
    }
    let radius = optical.require_radius()?;
    let m_eff = mech.require_m_eff()?;
    let gamma_m = mech.require_gamma_m()?;
    Ok(
        (2.0 * consts.kb * env.temperature * m_eff * gamma_m / s_phi).sqrt()
            * radius
            * mech.omega_m(),
    )
}

/// Lowest phase-noise-limited occupancy, reached at the optimal power:
/// n_min = √(2·k_B·T·m_eff·Γ·S_φ)·R·Ωm/(ħ·ω).
pub fn n_min_noise(
    env: &Environment,
    mech: &MechanicalMode,
    s_phi: f64,
    optical: &OpticalMode,
    omega_laser: f64,
    consts: &Constants,
) -> Result<f64> {
    if !(s_phi >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "phase-noise PSD must be non-negative, got {s_phi}"
        )));
    }
    let radius = optical.require_radius()?;
    let m_eff = mech.require_m_eff()?;
    let gamma_m = mech.require_gamma_m()?;
    Ok(
        (2.0 * consts.kb * env.temperature * m_eff * gamma_m * s_phi).sqrt() * radius
            * mech.omega_m()
            / (consts.hbar * omega_laser),
    )
}
