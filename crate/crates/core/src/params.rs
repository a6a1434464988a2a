//! Physical parameter bundles and derived coupling figures.
//!
//! Everything downstream consumes validated instances of these types. All
//! frequencies and rates are angular (rad/s).

use serde::{Deserialize, Serialize};

use crate::constants::{Constants, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

const LIFETIME_CONSISTENCY: f64 = 1e-12;
const FINESSE_CONSISTENCY: f64 = 1e-9;

/// A whispering-gallery optical mode.
///
/// Construction accepts either the linewidth form `(κ, K)` or the lifetime
/// form `(τ0, τ_ex)`; the other pair is derived. The two are tied by
/// κ = 1/τ0 + 1/τ_ex and K = τ0/τ_ex = 1/(κ·τ_ex − 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalMode {
    omega0: f64,
    kappa: f64,
    tau0: f64,
    tau_ex: f64,
    n_index: f64,
    radius: Option<f64>,
    finesse: Option<f64>,
}

impl OpticalMode {
    /// Build from the intrinsic and coupling photon lifetimes.
    pub fn from_lifetimes(omega0: f64, tau0: f64, tau_ex: f64, n_index: f64) -> Result<Self> {
        if !(omega0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "resonance frequency must be positive, got {omega0}"
            )));
        }
        if !(tau0 > 0.0 && tau_ex > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "photon lifetimes must be positive, got tau0={tau0}, tau_ex={tau_ex}"
            )));
        }
        if !(n_index > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "refractive index must be positive, got {n_index}"
            )));
        }
        Ok(Self {
            omega0,
            kappa: 1.0 / tau0 + 1.0 / tau_ex,
            tau0,
            tau_ex,
            n_index,
            radius: None,
            finesse: None,
        })
    }

    /// Build from the FWHM linewidth κ and the coupling parameter K = τ0/τ_ex.
    pub fn from_linewidth(omega0: f64, kappa: f64, coupling: f64, n_index: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "linewidth must be positive, got {kappa}"
            )));
        }
        if !(coupling > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling parameter must be positive, got {coupling}"
            )));
        }
        let tau_ex = (1.0 + coupling) / (coupling * kappa);
        let tau0 = coupling * tau_ex;
        let mode = Self::from_lifetimes(omega0, tau0, tau_ex, n_index)?;
        debug_assert!((mode.kappa - kappa).abs() <= LIFETIME_CONSISTENCY * kappa);
        Ok(mode)
    }

    /// Attach the cavity radius (m).
    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        self.radius = Some(radius);
        self.check_finesse_consistency()?;
        Ok(self)
    }

    /// Attach a measured finesse.
    ///
    /// The finesse is kept as provided; when a radius is also known the two
    /// must satisfy F = c/(n·R·κ) to within 1e-9 relative.
    pub fn with_finesse(mut self, finesse: f64) -> Result<Self> {
        if !(finesse > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "finesse must be positive, got {finesse}"
            )));
        }
        self.finesse = Some(finesse);
        self.check_finesse_consistency()?;
        Ok(self)
    }

    fn check_finesse_consistency(&self) -> Result<()> {
        if let (Some(f), Some(r)) = (self.finesse, self.radius) {
            let implied = SPEED_OF_LIGHT / (self.n_index * r * self.kappa);
            if ((f - implied) / implied).abs() > FINESSE_CONSISTENCY {
                return Err(Error::InvalidParameter(format!(
                    "finesse {f} inconsistent with radius: c/(nRκ) = {implied}"
                )));
            }
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// FWHM linewidth (rad/s).
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Intrinsic photon lifetime (s).
    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// Coupling photon lifetime (s).
    pub fn tau_ex(&self) -> f64 {
        self.tau_ex
    }

    /// Total photon lifetime τ = 1/κ (s).
    pub fn tau(&self) -> f64 {
        1.0 / self.kappa
    }

    /// Coupling parameter K = τ0/τ_ex.
    pub fn coupling(&self) -> f64 {
        self.tau0 / self.tau_ex
    }

    pub fn n_index(&self) -> f64 {
        self.n_index
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn require_radius(&self) -> Result<f64> {
        self.radius.ok_or(Error::MissingParameter("cavity radius"))
    }

    /// Finesse: the stored measured value if any, else c/(n·R·κ) from the
    /// radius, else unknown.
    pub fn finesse(&self) -> Option<f64> {
        self.finesse.or_else(|| {
            self.radius
                .map(|r| SPEED_OF_LIGHT / (self.n_index * r * self.kappa))
        })
    }

    pub fn require_finesse(&self) -> Result<f64> {
        self.finesse().ok_or(Error::MissingParameter("finesse"))
    }

    /// Round-trip time 2π·n·R/c (s).
    pub fn round_trip_time(&self) -> Option<f64> {
        self.radius
            .map(|r| std::f64::consts::TAU * self.n_index * r / SPEED_OF_LIGHT)
    }

    /// Vacuum wavelength 2πc/ω0 (m).
    pub fn wavelength(&self) -> f64 {
        std::f64::consts::TAU * SPEED_OF_LIGHT / self.omega0
    }
}

/// A mechanical eigenmode of the resonator.
///
/// Damping and effective mass are optional: presets for devices where they
/// were never measured leave them unset, and operations needing them fail
/// explicitly instead of guessing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalMode {
    omega_m: f64,
    gamma_m: Option<f64>,
    m_eff: Option<f64>,
}

impl MechanicalMode {
    pub fn new(omega_m: f64) -> Result<Self> {
        if !(omega_m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mechanical frequency must be positive, got {omega_m}"
            )));
        }
        Ok(Self {
            omega_m,
            gamma_m: None,
            m_eff: None,
        })
    }

    /// Attach the intrinsic damping rate (rad/s). Requires Q_m > 1.
    pub fn with_damping(mut self, gamma_m: f64) -> Result<Self> {
        if !(gamma_m > 0.0 && gamma_m < self.omega_m) {
            return Err(Error::InvalidParameter(format!(
                "damping must satisfy 0 < gamma_m < omega_m, got {gamma_m}"
            )));
        }
        self.gamma_m = Some(gamma_m);
        Ok(self)
    }

    /// Attach the effective mass (kg).
    pub fn with_mass(mut self, m_eff: f64) -> Result<Self> {
        if !(m_eff > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "effective mass must be positive, got {m_eff}"
            )));
        }
        self.m_eff = Some(m_eff);
        Ok(self)
    }

    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    pub fn gamma_m(&self) -> Option<f64> {
        self.gamma_m
    }

    pub fn require_gamma_m(&self) -> Result<f64> {
        self.gamma_m
            .ok_or(Error::MissingParameter("mechanical damping"))
    }

    pub fn m_eff(&self) -> Option<f64> {
        self.m_eff
    }

    pub fn require_m_eff(&self) -> Result<f64> {
        self.m_eff.ok_or(Error::MissingParameter("effective mass"))
    }

    /// Mechanical quality factor Ωm/Γm.
    pub fn quality_factor(&self) -> Option<f64> {
        self.gamma_m.map(|g| self.omega_m / g)
    }

    /// Zero-point motion √(ħ/(m_eff·Ωm)) (m).
    pub fn x_zpf(&self, consts: &Constants) -> Result<f64> {
        Ok((consts.hbar / (self.require_m_eff()? * self.omega_m)).sqrt())
    }
}

/// The drive laser: launched power, detuning from the pumped optical mode and
/// its classical noise spectral densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserDrive {
    /// Launched power (W).
    pub power: f64,
    /// Detuning Δ = ω_laser − ω0 (rad/s).
    pub detuning: f64,
    /// Phase-noise PSD S_φ (rad²/Hz), white around the band of interest.
    pub s_phi: f64,
    /// Relative intensity-noise PSD S_I (1/Hz).
    pub s_i: f64,
}

impl LaserDrive {
    pub fn new(power: f64, detuning: f64) -> Result<Self> {
        if !(power >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power must be non-negative, got {power}"
            )));
        }
        Ok(Self {
            power,
            detuning,
            s_phi: 0.0,
            s_i: 0.0,
        })
    }

    pub fn with_phase_noise(mut self, s_phi: f64) -> Result<Self> {
        if !(s_phi >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "phase-noise PSD must be non-negative, got {s_phi}"
            )));
        }
        self.s_phi = s_phi;
        Ok(self)
    }

    pub fn with_intensity_noise(mut self, s_i: f64) -> Result<Self> {
        if !(s_i >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "intensity-noise PSD must be non-negative, got {s_i}"
            )));
        }
        self.s_i = s_i;
        Ok(self)
    }
}

/// Thermal reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Reservoir temperature (K).
    pub temperature: f64,
}

impl Environment {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        Ok(Self { temperature })
    }
}

/// Dimensionless figures characterising the opto-mechanical coupling at the
/// lower-sideband working point Δ = −Ωm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingFigures {
    /// η = ω0·x_zpf/(Ωm·R); available only when mass and radius are known.
    pub eta: Option<f64>,
    /// Sideband resolution Ωm/κ.
    pub resolvedness: f64,
    /// Fraction of the launched power coupled at Δ = −Ωm: (4τ²Ωm² + 1)⁻¹.
    pub coupled_fraction: f64,
}

/// Coupling figures for an optical/mechanical mode pair.
pub fn derive(
    optical: &OpticalMode,
    mech: &MechanicalMode,
    consts: &Constants,
) -> Result<CouplingFigures> {
    let tau = optical.tau();
    let om = mech.omega_m();
    let eta = match (optical.radius(), mech.m_eff()) {
        (Some(r), Some(_)) => Some(optical.omega0() * mech.x_zpf(consts)? / (om * r)),
        _ => None,
    };
    Ok(CouplingFigures {
        eta,
        resolvedness: om / optical.kappa(),
        coupled_fraction: 1.0 / (4.0 * tau * tau * om * om + 1.0),
    })
}

/// Sideband-resolution classes. Boundaries are inclusive on the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeClass {
    /// Ωm/κ < 1: motional sidebands buried in the cavity line.
    Weak,
    /// 1 ≤ Ωm/κ < 10.
    Resolved,
    /// Ωm/κ ≥ 10: sidebands fully separated from the carrier.
    DeeplyResolved,
}

/// Regime label together with the numeric ratio it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub class: RegimeClass,
    /// Ωm/κ.
    pub ratio: f64,
}

pub fn classify_regime(optical: &OpticalMode, mech: &MechanicalMode) -> Regime {
    let ratio = mech.omega_m() / optical.kappa();
    let class = if ratio < 1.0 {
        RegimeClass::Weak
    } else if ratio < 10.0 {
        RegimeClass::Resolved
    } else {
        RegimeClass::DeeplyResolved
    };
    Regime { class, ratio }
}
