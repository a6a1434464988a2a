//! Steady-state field and DC transmission of a cavity whose radius is driven
//! harmonically, x(t) = x0·sin(Ωm·t).
//!
//! The motion phase-modulates the intracavity field with modulation index
//! β = (x0/R)(ω0/Ωm); the steady state is a Bessel series over sidebands and
//! the DC transmission is a comb of Lorentzian dips at Δ = −n·Ωm with weights
//! Jₙ(β)². Fitting those weights back out recovers β and, when the radius is
//! known, the mechanical amplitude.

use num_complex::Complex64;
use serde::Serialize;

use crate::bessel::bessel_j_upto;
use crate::error::{Error, Result};
use crate::optimize;
use crate::params::{MechanicalMode, OpticalMode};

/// Series truncation order: Jₙ(β) decays super-exponentially past n ≈ β, and
/// this margin keeps the discarded tail Σ_{|n|>N} Jₙ² below 1e-12 up to β ~ 20.
pub fn truncation_order(beta: f64) -> usize {
    let b = beta.abs();
    8usize.max((b + 10.0 * b.cbrt() + 6.0).ceil() as usize)
}

/// Modulation index β = x0·ω0/(R·Ωm).
pub fn modulation_index(x0: f64, optical: &OpticalMode, mech: &MechanicalMode) -> Result<f64> {
    if !(x0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "displacement amplitude must be non-negative, got {x0}"
        )));
    }
    Ok(x0 / calibration_constant(optical, mech)?)
}

/// Displacement amplitude for a given modulation index: x0 = β·R·Ωm/ω0.
pub fn amplitude_from_beta(beta: f64, optical: &OpticalMode, mech: &MechanicalMode) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "modulation index must be non-negative, got {beta}"
        )));
    }
    Ok(beta * calibration_constant(optical, mech)?)
}

/// The x0/β conversion constant R·Ωm/ω0 (m per unit β).
pub fn calibration_constant(optical: &OpticalMode, mech: &MechanicalMode) -> Result<f64> {
    Ok(optical.require_radius()? * mech.omega_m() / optical.omega0())
}

/// Amplitude/modulation-index pair, kept consistent by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationState {
    /// Displacement amplitude (m).
    pub x0: f64,
    /// Modulation index β.
    pub beta: f64,
}

impl OscillationState {
    pub fn from_amplitude(x0: f64, optical: &OpticalMode, mech: &MechanicalMode) -> Result<Self> {
        Ok(Self {
            x0,
            beta: modulation_index(x0, optical, mech)?,
        })
    }

    pub fn from_beta(beta: f64, optical: &OpticalMode, mech: &MechanicalMode) -> Result<Self> {
        Ok(Self {
            x0: amplitude_from_beta(beta, optical, mech)?,
            beta,
        })
    }
}

/// Steady-state intracavity amplitude at time `t`, in the frame rotating at
/// the laser frequency:
///
/// ```text
/// ã(t) = (s/√τ_ex)·e^{iβcos(Ωm t)}·Σₙ (−i)ⁿ Jₙ(β) e^{inΩm t} / (κ/2 + i(Δ+nΩm))
/// ```
///
/// `drive_amplitude` is s with |s|² the launched power (W); |ã|² is then the
/// intracavity energy (J). |ã(t)|² is periodic with the mechanical period.
pub fn intracavity_field(
    t: f64,
    beta: f64,
    delta: f64,
    optical: &OpticalMode,
    mech: &MechanicalMode,
    drive_amplitude: f64,
) -> Complex64 {
    let n_max = truncation_order(beta);
    let j = bessel_j_upto(n_max, beta);
    let om = mech.omega_m();
    let half = 0.5 * optical.kappa();
    let minus_i = Complex64::new(0.0, -1.0);

    let mut sum = Complex64::new(0.0, 0.0);
    for n in -(n_max as i32)..=(n_max as i32) {
        let jn = if n < 0 && n % 2 != 0 {
            -j[(-n) as usize]
        } else {
            j[n.unsigned_abs() as usize]
        };
        let phase = Complex64::from_polar(1.0, n as f64 * om * t);
        let denom = Complex64::new(half, delta + n as f64 * om);
        sum += minus_i.powi(n) * jn * phase / denom;
    }
    let wobble = Complex64::from_polar(1.0, beta * (om * t).cos());
    drive_amplitude / optical.tau_ex().sqrt() * wobble * sum
}

/// Period-averaged intracavity energy ⟨|ã|²⟩ (J); by Parseval this is the
/// incoherent sum of the sideband Lorentzians.
pub fn mean_intracavity_energy(
    beta: f64,
    delta: f64,
    optical: &OpticalMode,
    mech: &MechanicalMode,
    power: f64,
) -> f64 {
    let n_max = truncation_order(beta);
    let j = bessel_j_upto(n_max, beta);
    let om = mech.omega_m();
    let half = 0.5 * optical.kappa();
    let mut sum = 0.0;
    for n in -(n_max as i32)..=(n_max as i32) {
        let jn = j[n.unsigned_abs() as usize];
        let x = delta + n as f64 * om;
        sum += jn * jn / (half * half + x * x);
    }
    power / optical.tau_ex() * sum
}

/// Normalized DC transmission of the oscillating cavity:
///
/// ```text
/// T(Δ) = 1 − K·κ²/(1+K)² · Σₙ Jₙ(β)² / ((κ/2)² + (Δ + nΩm)²)
/// ```
///
/// The coupling parameter is passed explicitly so coupling conditions can be
/// scanned without rebuilding the mode.
pub fn dc_transmission(
    delta: f64,
    beta: f64,
    coupling: f64,
    optical: &OpticalMode,
    mech: &MechanicalMode,
) -> f64 {
    let kappa = optical.kappa();
    let om = mech.omega_m();
    let n_max = truncation_order(beta);
    let j = bessel_j_upto(n_max, beta);
    let half = 0.5 * kappa;

    let mut sum = 0.0;
    for n in -(n_max as i32)..=(n_max as i32) {
        let jn = j[n.unsigned_abs() as usize];
        let x = delta + n as f64 * om;
        sum += jn * jn / (half * half + x * x);
    }
    1.0 - coupling * kappa * kappa / ((1.0 + coupling) * (1.0 + coupling)) * sum
}

/// Transmission samples over a detuning grid.
#[derive(Debug, Clone, Serialize)]
pub struct TransmissionScan {
    /// Detuning grid (rad/s), strictly increasing.
    pub detunings: Vec<f64>,
    /// Normalized transmitted power, each in [0, 1].
    pub transmission: Vec<f64>,
}

impl TransmissionScan {
    /// Indices of strict local minima.
    pub fn local_minima(&self) -> Vec<usize> {
        let t = &self.transmission;
        (1..t.len().saturating_sub(1))
            .filter(|&i| t[i] < t[i - 1] && t[i] < t[i + 1])
            .collect()
    }

    /// CSV `(detuning Hz, transmission)` with a `#` header block.
    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in header {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str("detuning_hz,transmission\n");
        for (d, t) in self.detunings.iter().zip(&self.transmission) {
            out.push_str(&format!("{},{}\n", d / std::f64::consts::TAU, t));
        }
        out
    }
}

/// Vectorized [`dc_transmission`] over a strictly increasing grid.
pub fn transmission_scan(
    detunings: &[f64],
    beta: f64,
    coupling: f64,
    optical: &OpticalMode,
    mech: &MechanicalMode,
) -> Result<TransmissionScan> {
    if detunings.len() < 2 || detunings.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "detuning grid must be strictly increasing".into(),
        ));
    }
    let transmission = detunings
        .iter()
        .map(|&d| dc_transmission(d, beta, coupling, optical, mech))
        .collect();
    Ok(TransmissionScan {
        detunings: detunings.to_vec(),
        transmission,
    })
}

/// Modulation index recovered from measured dip weights.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaFit {
    pub beta: f64,
    /// RMS residual of the order-0-normalized weights.
    pub residual_rms: f64,
}

/// Least-squares fit of relative dip weights wₙ ∝ Jₙ(β)².
///
/// Weights are normalized to the order-0 entry so detector gain cancels; the
/// single scalar parameter is located by a dense scan over (0, β_max] and
/// polished by parabolic refinement. A residual landscape whose minimum sits
/// on either boundary is reported as non-convergence.
pub fn fit_modulation_index(weights: &[(i32, f64)], beta_max: f64) -> Result<BetaFit> {
    if weights.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two sideband orders to fit".into(),
        ));
    }
    if !(beta_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta_max must be positive, got {beta_max}"
        )));
    }
    if weights.iter().any(|&(_, w)| !(w >= 0.0)) {
        return Err(Error::InvalidParameter(
            "sideband weights must be non-negative".into(),
        ));
    }
    let w0 = weights
        .iter()
        .find(|&&(n, _)| n == 0)
        .map(|&(_, w)| w)
        .ok_or_else(|| {
            Error::InvalidParameter("an order-0 weight is required for normalization".into())
        })?;
    if !(w0 > 0.0) {
        return Err(Error::InvalidParameter(
            "the order-0 weight must be positive".into(),
        ));
    }

    let max_order = weights.iter().map(|&(n, _)| n.unsigned_abs()).max().unwrap() as usize;
    let sse = |beta: f64| -> f64 {
        let j = bessel_j_upto(max_order, beta);
        let j0sq = j[0] * j[0];
        if j0sq < 1e-30 {
            return f64::INFINITY;
        }
        weights
            .iter()
            .map(|&(n, w)| {
                let jn = j[n.unsigned_abs() as usize];
                let model = jn * jn / j0sq;
                let d = w / w0 - model;
                d * d
            })
            .sum()
    };

    const SCAN: usize = 2000;
    let grid = |i: usize| beta_max * (i + 1) as f64 / SCAN as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..SCAN {
        let v = sse(grid(i));
        if v < best.1 {
            best = (i, v);
        }
    }
    if best.0 == 0 || best.0 == SCAN - 1 {
        return Err(Error::NoConvergence(format!(
            "no interior residual minimum in (0, {beta_max}]"
        )));
    }
    let (beta, min_sse) = optimize::parabolic_min(
        sse,
        grid(best.0 - 1),
        grid(best.0),
        grid(best.0 + 1),
        1e-12,
    );
    Ok(BetaFit {
        beta,
        residual_rms: (min_sse / weights.len() as f64).sqrt(),
    })
}
