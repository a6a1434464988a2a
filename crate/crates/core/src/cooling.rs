//! Radiation-pressure cooling rates, detuning optimization and cooling-factor
//! bookkeeping.
//!
//! The general rate is the difference-of-Lorentzians form
//!
//! ```text
//! Γc = (ω0/Ωm)·(1/(m_eff R²))·(K/(2(K+1)))·κ²/(Δ²+(κ/2)²)
//!      ·[ ((Δ+Ωm)² + (κ/2)²)⁻¹ − ((Δ−Ωm)² + (κ/2)²)⁻¹ ]·P
//! ```
//!
//! valid while Γc < κ. It is antisymmetric in Δ; negative values signal
//! amplification (blue-detuned pumping) and are returned, not clipped.

use serde::Serialize;

use crate::error::Result;
use crate::optimize;
use crate::params::{LaserDrive, MechanicalMode, OpticalMode};
use crate::SPEED_OF_LIGHT;

/// Cooling rate Γc (rad/s) for an arbitrary detuning.
pub fn cooling_rate_general(
    optical: &OpticalMode,
    mech: &MechanicalMode,
    laser: &LaserDrive,
) -> Result<f64> {
    let m_eff = mech.require_m_eff()?;
    let radius = optical.require_radius()?;
    let k = optical.coupling();
    let prefactor = optical.omega0() / mech.omega_m() / (m_eff * radius * radius) * k
        / (2.0 * (k + 1.0))
        * laser.power;
    Ok(prefactor * lorentzian_part(laser.detuning, optical.kappa(), mech.omega_m()))
}

/// The detuning-dependent factor of the general rate, with the buildup
/// Lorentzian and the sideband difference spelled out.
fn lorentzian_part(delta: f64, kappa: f64, omega_m: f64) -> f64 {
    let half = 0.5 * kappa;
    let lor = |x: f64| 1.0 / (x * x + half * half);
    kappa * kappa * lor(delta) * (lor(delta + omega_m) - lor(delta - omega_m))
}

/// Resolved-sideband cooling rate at Δ = −Ωm, in the finesse form
///
/// ```text
/// Γc ≈ (8ω0/Ωm)·n²F²·(P/(m_eff c²))·(τ/τ_ex)·(1 + 4τ²Ωm²)⁻¹ ,  τ = 1/κ.
/// ```
///
/// This keeps only the anti-Stokes Lorentzian of the general rate, so it
/// overshoots by the relative amount (1 + 16τ²Ωm²)⁻¹ outside the deeply
/// resolved regime.
pub fn cooling_rate_rsb(
    optical: &OpticalMode,
    mech: &MechanicalMode,
    laser: &LaserDrive,
) -> Result<f64> {
    let m_eff = mech.require_m_eff()?;
    let finesse = optical.require_finesse()?;
    let n = optical.n_index();
    let tau = optical.tau();
    let om = mech.omega_m();
    Ok(8.0 * optical.omega0() / om * n * n * finesse * finesse * laser.power
        / (m_eff * SPEED_OF_LIGHT * SPEED_OF_LIGHT)
        * (tau / optical.tau_ex())
        / (1.0 + 4.0 * tau * tau * om * om))
}

/// Asymptotic maximum of the cooling rate over (Δ, κ):
/// Γc_max = (ω0/Ωm³)·(1/(m_eff R²))·(2K/(K+1))·P, reached for Δ = −Ωm, κ → 0.
pub fn max_cooling_rate(optical: &OpticalMode, mech: &MechanicalMode, power: f64) -> Result<f64> {
    let m_eff = mech.require_m_eff()?;
    let radius = optical.require_radius()?;
    let k = optical.coupling();
    let om = mech.omega_m();
    Ok(optical.omega0() / (om * om * om) / (m_eff * radius * radius) * 2.0 * k / (k + 1.0) * power)
}

/// Γc/Γc_max as a function of (Δ, κ, Ωm) alone; power, mass, radius and
/// coupling all cancel in the ratio.
pub fn normalized_cooling_rate(delta: f64, kappa: f64, omega_m: f64) -> f64 {
    0.25 * omega_m * omega_m * lorentzian_part(delta, kappa, omega_m)
}

/// Detuning Δ* < 0 maximising the cooling rate for the given mode pair.
///
/// A 4096-point log-spaced scan of |Δ| brackets the maximum (the objective
/// has a single positive lobe on Δ < 0), then golden-section refines it to
/// 1e-12 relative interval.
pub fn optimal_detuning(optical: &OpticalMode, mech: &MechanicalMode) -> f64 {
    let kappa = optical.kappa();
    let om = mech.omega_m();
    let f = |d: f64| normalized_cooling_rate(d, kappa, om);

    const N: usize = 4096;
    let lo = 1e-6 * om.min(kappa);
    let hi = 1e3 * (om + kappa);
    let ratio = (hi / lo).ln() / (N - 1) as f64;
    let mag = |i: usize| lo * (ratio * i as f64).exp();

    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..N {
        let v = f(-mag(i));
        if v > best.1 {
            best = (i, v);
        }
    }
    let a = -mag((best.0 + 1).min(N - 1));
    let b = -mag(best.0.saturating_sub(1));
    optimize::golden_max(f, a, b, 1e-12).0
}

/// Normalized cooling-rate surface over a (κ, Δ) grid.
#[derive(Debug, Clone, Serialize)]
pub struct CoolingSurface {
    pub detunings: Vec<f64>,
    pub kappas: Vec<f64>,
    /// Row-major, one row per κ: `values[i_kappa * detunings.len() + i_delta]`.
    pub values: Vec<f64>,
}

impl CoolingSurface {
    pub fn at(&self, i_kappa: usize, i_delta: usize) -> f64 {
        self.values[i_kappa * self.detunings.len() + i_delta]
    }

    /// Long-format CSV `(Δ/2π Hz, κ/2π Hz, Γc/Γc_max)`.
    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in header {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str("delta_hz,kappa_hz,normalized_rate\n");
        for (i, &k) in self.kappas.iter().enumerate() {
            for (j, &d) in self.detunings.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    d / std::f64::consts::TAU,
                    k / std::f64::consts::TAU,
                    self.at(i, j)
                ));
            }
        }
        out
    }
}

/// Evaluate Γc/Γc_max on the outer product of the two grids.
pub fn cooling_surface(mech: &MechanicalMode, detunings: &[f64], kappas: &[f64]) -> CoolingSurface {
    let om = mech.omega_m();
    let mut values = Vec::with_capacity(detunings.len() * kappas.len());
    for &kappa in kappas {
        for &delta in detunings {
            values.push(normalized_cooling_rate(delta, kappa, om));
        }
    }
    CoolingSurface {
        detunings: detunings.to_vec(),
        kappas: kappas.to_vec(),
        values,
    }
}

/// Cooling-rate bookkeeping against the mechanical damping.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoolingResult {
    /// Cooling rate Γc (rad/s); negative for amplification.
    pub gamma_c: f64,
    /// Γm + Γc (rad/s).
    pub gamma_eff: f64,
    /// Occupancy reduction n_R/n_f = (Γc + Γm)/Γm.
    pub cooling_factor: f64,
    /// Γc < 0: blue-detuned amplification rather than cooling.
    pub amplification: bool,
    /// Γc < κ, the validity condition of the rate expression.
    pub rate_below_linewidth: bool,
    /// Cooling factor below the entropy-flow bound κ/Γm.
    pub within_entropy_bound: bool,
    /// Cooling factor below the mechanical quality factor.
    pub within_quality_bound: bool,
}

/// Fold a cooling rate into the effective linewidth and occupancy-reduction
/// factor, with its validity flags.
pub fn cooling_factor(
    gamma_c: f64,
    mech: &MechanicalMode,
    optical: &OpticalMode,
) -> Result<CoolingResult> {
    let gamma_m = mech.require_gamma_m()?;
    let factor = (gamma_c + gamma_m) / gamma_m;
    let q_m = mech.omega_m() / gamma_m;
    Ok(CoolingResult {
        gamma_c,
        gamma_eff: gamma_m + gamma_c,
        cooling_factor: factor,
        amplification: gamma_c < 0.0,
        rate_below_linewidth: gamma_c < optical.kappa(),
        within_entropy_bound: factor < optical.kappa() / gamma_m,
        within_quality_bound: factor < q_m,
    })
}
