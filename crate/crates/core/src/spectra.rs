//! Displacement-noise and heterodyne spectrum synthesis, Lorentzian fitting
//! and occupancy extraction.
//!
//! Convention used throughout: spectra are one-sided with
//! ∫ S_x(Ω) dΩ/2π = ⟨x²⟩, grids are angular (rad/s) and uniform, densities
//! are per ordinary Hz.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::params::{MechanicalMode, OpticalMode};
use crate::quantum;
use crate::readout;

/// What the sample values measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumUnits {
    /// Displacement PSD, m²/Hz.
    DisplacementPsd,
    /// Uncalibrated RF power density.
    Arbitrary,
}

/// Sidedness of the density convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    OneSided,
}

/// A sampled spectral density on a uniform angular-frequency grid.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub units: SpectrumUnits,
    pub sidedness: Sidedness,
}

const GRID_UNIFORMITY: f64 = 1e-9;

impl Spectrum {
    pub fn new(omega: Vec<f64>, values: Vec<f64>, units: SpectrumUnits) -> Result<Self> {
        if omega.len() != values.len() || omega.len() < 2 {
            return Err(Error::InvalidParameter(
                "spectrum needs equal-length grid and samples with at least 2 points".into(),
            ));
        }
        let step = omega[1] - omega[0];
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(
                "frequency grid must be increasing".into(),
            ));
        }
        for w in omega.windows(2) {
            if ((w[1] - w[0]) - step).abs() > GRID_UNIFORMITY * step {
                return Err(Error::InvalidParameter(
                    "frequency grid must be uniform to 1e-9 relative".into(),
                ));
            }
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "spectral densities must be non-negative".into(),
            ));
        }
        Ok(Self {
            omega,
            values,
            units,
            sidedness: Sidedness::OneSided,
        })
    }

    /// Grid spacing (rad/s).
    pub fn step(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }

    /// Sample indices inside the window `[lo, hi]` (rad/s).
    pub fn window_indices(&self, lo: f64, hi: f64) -> Vec<usize> {
        self.omega
            .iter()
            .enumerate()
            .filter(|(_, &w)| w >= lo && w <= hi)
            .map(|(i, _)| i)
            .collect()
    }

    /// CSV with a self-describing `#` header; frequencies written in Hz.
    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        let units = match self.units {
            SpectrumUnits::DisplacementPsd => "m^2_per_hz",
            SpectrumUnits::Arbitrary => "arbitrary",
        };
        out.push_str(&format!("# units = {units}\n"));
        out.push_str("# sidedness = one_sided\n");
        out.push_str("# convention = integral S dOmega/2pi equals mean square\n");
        for (k, v) in header {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str("frequency_hz,density\n");
        for (w, v) in self.omega.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", w / std::f64::consts::TAU, v));
        }
        out
    }

    /// Parse the CSV form written by [`Spectrum::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut units = SpectrumUnits::Arbitrary;
        let mut omega = Vec::new();
        let mut values = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    if k.trim() == "units" {
                        units = match v.trim() {
                            "m^2_per_hz" => SpectrumUnits::DisplacementPsd,
                            "arbitrary" => SpectrumUnits::Arbitrary,
                            other => {
                                return Err(Error::Config(format!(
                                    "unknown spectrum units '{other}'"
                                )))
                            }
                        };
                    }
                }
                continue;
            }
            if line.starts_with(|c: char| c.is_ascii_alphabetic()) {
                continue; // column header row
            }
            let mut cols = line.split(',');
            let (f, v) = (cols.next(), cols.next());
            match (f, v) {
                (Some(f), Some(v)) => {
                    let f: f64 = f
                        .trim()
                        .parse()
                        .map_err(|e| Error::Config(format!("bad frequency '{f}': {e}")))?;
                    let v: f64 = v
                        .trim()
                        .parse()
                        .map_err(|e| Error::Config(format!("bad density '{v}': {e}")))?;
                    omega.push(std::f64::consts::TAU * f);
                    values.push(v);
                }
                _ => return Err(Error::Config(format!("malformed CSV row '{line}'"))),
            }
        }
        Spectrum::new(omega, values, units)
    }
}

/// One-sided thermal displacement PSD of a damped oscillator (m²/Hz):
///
/// ```text
/// S_x(Ω) = (4·k_B·T_eff·Γ_eff/m_eff) / ((Ωm² − Ω²)² + Γ_eff²·Ω²)
/// ```
///
/// normalized so that ∫ S_x dΩ/2π = k_B·T_eff/(m_eff·Ωm²) (equipartition).
pub fn thermal_psd(
    omega: f64,
    t_eff: f64,
    mech: &MechanicalMode,
    gamma_eff: f64,
    consts: &Constants,
) -> Result<f64> {
    if !(gamma_eff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "effective linewidth must be positive, got {gamma_eff}"
        )));
    }
    let m = mech.require_m_eff()?;
    let om = mech.omega_m();
    let d = om * om - omega * omega;
    Ok(4.0 * consts.kb * t_eff * gamma_eff / m / (d * d + gamma_eff * gamma_eff * omega * omega))
}

/// A mechanical mode with its effective (possibly cooled) temperature and
/// linewidth.
#[derive(Debug, Clone)]
pub struct ThermalMode {
    pub mech: MechanicalMode,
    pub t_eff: f64,
    pub gamma_eff: f64,
}

/// Parameters of the shot-noise background x_min(Ω)².
#[derive(Debug, Clone, Serialize)]
pub struct ShotNoiseBackground {
    pub finesse: f64,
    pub eta_det: f64,
    pub p_cav: f64,
    pub lambda_vacuum: f64,
    pub n_index: f64,
    pub kappa: f64,
}

impl ShotNoiseBackground {
    /// Equivalent displacement PSD of the readout shot noise (m²/Hz).
    pub fn psd(&self, omega: f64, consts: &Constants) -> f64 {
        let x = readout::shot_noise_sensitivity(
            omega,
            self.finesse,
            self.eta_det,
            self.p_cav,
            self.lambda_vacuum,
            self.n_index,
            self.kappa,
            consts,
        );
        x * x
    }
}

/// A synthesized displacement spectrum with its per-mode peak visibility.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub spectrum: Spectrum,
    /// Peak signal over background (dB), one entry per mode; empty when no
    /// background model was supplied.
    pub peak_to_background_db: Vec<f64>,
}

/// Sum of thermal mode PSDs plus the shot-noise background on a grid.
pub fn synthesize(
    modes: &[ThermalMode],
    background: Option<&ShotNoiseBackground>,
    omega_grid: &[f64],
    consts: &Constants,
) -> Result<Synthesis> {
    for (i, m) in modes.iter().enumerate() {
        let om = m.mech.omega_m();
        if omega_grid.first().is_none_or(|&lo| om < lo)
            || omega_grid.last().is_none_or(|&hi| om > hi)
        {
            return Err(Error::InvalidParameter(format!(
                "grid does not cover the peak of mode {i} at {om} rad/s"
            )));
        }
    }
    let mut values = vec![0.0; omega_grid.len()];
    for (v, &w) in values.iter_mut().zip(omega_grid) {
        for m in modes {
            *v += thermal_psd(w, m.t_eff, &m.mech, m.gamma_eff, consts)?;
        }
        if let Some(bg) = background {
            *v += bg.psd(w, consts);
        }
    }
    let mut peak_to_background_db = Vec::new();
    if let Some(bg) = background {
        for m in modes {
            let om = m.mech.omega_m();
            let signal = thermal_psd(om, m.t_eff, &m.mech, m.gamma_eff, consts)?;
            peak_to_background_db.push(10.0 * (signal / bg.psd(om, consts)).log10());
        }
    }
    Ok(Synthesis {
        spectrum: Spectrum::new(omega_grid.to_vec(), values, SpectrumUnits::DisplacementPsd)?,
        peak_to_background_db,
    })
}

/// Lorentzian line parameters fitted to a spectrum window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LorentzianFit {
    /// Line center (rad/s).
    pub center: f64,
    /// FWHM (rad/s).
    pub width: f64,
    /// Integrated area ∫(S − offset) dΩ (units of the spectrum × rad/s).
    pub area: f64,
    /// Constant background offset.
    pub offset: f64,
    /// RMS of the fit residual.
    pub residual_rms: f64,
}

const LM_MAX_ITER: usize = 200;

/// Nonlinear least squares for center/width/area plus a constant offset.
///
/// Levenberg-style damping with an analytic Jacobian, started from moment
/// estimates (centroid, half-maximum width, trapezoid area). The window is
/// rescaled internally so all four parameters are order unity.
pub fn fit_lorentzian(spectrum: &Spectrum, window: (f64, f64)) -> Result<LorentzianFit> {
    let idx = spectrum.window_indices(window.0, window.1);
    if idx.len() < 5 {
        return Err(Error::DegenerateWindow(format!(
            "only {} samples inside the window",
            idx.len()
        )));
    }
    let w: Vec<f64> = idx.iter().map(|&i| spectrum.omega[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| spectrum.values[i]).collect();
    let y_max = y.iter().cloned().fold(f64::MIN, f64::max);
    let y_min = y.iter().cloned().fold(f64::MAX, f64::min);
    if !(y_max > y_min) {
        return Err(Error::DegenerateWindow("window has zero variance".into()));
    }

    // moment-based initialization on the background-subtracted data
    let net: Vec<f64> = y.iter().map(|v| v - y_min).collect();
    let net_sum: f64 = net.iter().sum();
    let centroid = w.iter().zip(&net).map(|(w, n)| w * n).sum::<f64>() / net_sum;
    let half = 0.5 * (y_max - y_min);
    let above: usize = y.iter().filter(|&&v| v - y_min > half).count();
    let dw = w[1] - w[0];
    let width0 = (above.max(2) as f64) * dw;
    let area0 = net_sum * dw;

    // rescale: u = (ω − centroid)/width0, ŷ = y/y_max
    let u: Vec<f64> = w.iter().map(|w| (w - centroid) / width0).collect();
    let yn: Vec<f64> = y.iter().map(|v| v / y_max).collect();
    // parameters (center, width, area, offset) in scaled units
    let mut p = [0.0, 1.0, area0 / (y_max * width0), y_min / y_max];

    let model = |p: &[f64; 4], u: f64| -> (f64, [f64; 4]) {
        let h = 0.5 * p[1];
        let du = u - p[0];
        let den = du * du + h * h;
        let lor = h / (std::f64::consts::PI * den);
        let m = p[3] + p[2] * lor;
        let dc = p[2] * 2.0 * du * h / (std::f64::consts::PI * den * den);
        let dwidth = p[2] * 0.5 * (du * du - h * h) / (std::f64::consts::PI * den * den);
        (m, [dc, dwidth, lor, 1.0])
    };
    let sse = |p: &[f64; 4]| -> f64 {
        u.iter()
            .zip(&yn)
            .map(|(&u, &y)| {
                let (m, _) = model(p, u);
                (y - m) * (y - m)
            })
            .sum()
    };

    let mut lambda = 1e-3;
    let mut current = sse(&p);
    let mut converged = false;
    'outer: for _ in 0..LM_MAX_ITER {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (&ui, &yi) in u.iter().zip(&yn) {
            let (m, g) = model(&p, ui);
            let r = yi - m;
            let g = Vector4::from_row_slice(&g);
            jtj += g * g.transpose();
            jtr += g * r;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for k in 0..4 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [
                p[0] + step[0],
                p[1] + step[1],
                p[2] + step[2],
                p[3] + step[3],
            ];
            if !(trial[1] > 0.0) {
                lambda *= 10.0;
                continue;
            }
            let trial_sse = sse(&trial);
            if trial_sse <= current {
                let rel_step =
                    step.amax() / (1.0 + p.iter().fold(0f64, |a, &v| a.max(v.abs())));
                p = trial;
                let improvement = (current - trial_sse) / current.max(1e-300);
                current = trial_sse;
                lambda = (lambda / 3.0).max(1e-14);
                accepted = true;
                if rel_step < 1e-10 || improvement < 1e-14 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step found at any damping: we are at the minimum
            converged = true;
            break 'outer;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "Lorentzian fit stalled with residual {current:.3e}"
        )));
    }
    if !(p[1] > 0.0 && p[2] > 0.0) {
        return Err(Error::NoConvergence(format!(
            "fit produced non-positive width {} or area {}",
            p[1] * width0,
            p[2] * y_max * width0
        )));
    }
    Ok(LorentzianFit {
        center: centroid + p[0] * width0,
        width: p[1] * width0,
        area: p[2] * y_max * width0,
        offset: p[3] * y_max,
        residual_rms: (current / u.len() as f64).sqrt() * y_max,
    })
}

/// Phonon occupancy from a calibrated displacement-spectrum fit: the mode
/// energy is E = m_eff·Ωm²·⟨x²⟩ with ⟨x²⟩ = area/2π, and n = E/(ħΩm) − 1/2.
pub fn occupancy_from_spectrum(
    fit: &LorentzianFit,
    mech: &MechanicalMode,
    consts: &Constants,
) -> Result<f64> {
    let m = mech.require_m_eff()?;
    let om = mech.omega_m();
    let mean_square = fit.area / std::f64::consts::TAU;
    let energy = m * om * om * mean_square;
    let quantum = consts.hbar * om;
    let n = energy / quantum - 0.5;
    if n < 0.0 {
        return Err(Error::SubZeroPoint(format!(
            "fitted energy {energy:.3e} J is below the zero-point energy {:.3e} J",
            0.5 * quantum
        )));
    }
    Ok(n)
}

/// Heterodyne beat spectrum of the two motional sidebands.
#[derive(Debug, Clone)]
pub struct HeterodyneSpectrum {
    pub spectrum: Spectrum,
    /// Integrated power of the Stokes line at Ω_AOM − Ωm, ∝ A⁺(n+1).
    pub stokes_power: f64,
    /// Integrated power of the anti-Stokes line at Ω_AOM + Ωm, ∝ A⁻·n.
    pub anti_stokes_power: f64,
    pub stokes_center: f64,
    pub anti_stokes_center: f64,
}

/// Two Lorentzians of width Γ_eff at Ω_AOM ± Ωm with integrated powers in
/// the detailed-balance ratio A⁺(n+1) : A⁻·n (arbitrary overall scale).
pub fn heterodyne_spectrum(
    delta: f64,
    n: f64,
    omega_aom: f64,
    optical: &OpticalMode,
    mech: &MechanicalMode,
    gamma_eff: f64,
    omega_grid: &[f64],
) -> Result<HeterodyneSpectrum> {
    if !(n >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "occupancy must be non-negative, got {n}"
        )));
    }
    if !(gamma_eff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "effective linewidth must be positive, got {gamma_eff}"
        )));
    }
    let om = mech.omega_m();
    let stokes_center = omega_aom - om;
    let anti_stokes_center = omega_aom + om;
    let lo = omega_grid.first().copied().unwrap_or(f64::INFINITY);
    let hi = omega_grid.last().copied().unwrap_or(f64::NEG_INFINITY);
    if stokes_center < lo || anti_stokes_center > hi {
        return Err(Error::InvalidParameter(
            "grid must cover both sidebands at Ω_AOM ± Ωm".into(),
        ));
    }
    let weights = quantum::sideband_weights(optical, mech, delta);
    let (stokes_power, anti_stokes_power) = quantum::sideband_powers(n, &weights);

    let half = 0.5 * gamma_eff;
    let lor = |w: f64, c: f64| half / (std::f64::consts::PI * ((w - c) * (w - c) + half * half));
    let values: Vec<f64> = omega_grid
        .iter()
        .map(|&w| {
            stokes_power * lor(w, stokes_center) + anti_stokes_power * lor(w, anti_stokes_center)
        })
        .collect();
    Ok(HeterodyneSpectrum {
        spectrum: Spectrum::new(omega_grid.to_vec(), values, SpectrumUnits::Arbitrary)?,
        stokes_power,
        anti_stokes_power,
        stokes_center,
        anti_stokes_center,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn mech2() -> MechanicalMode {
        Sample::sample2().mechanical().unwrap()
    }

    fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let coarse = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let fine = (b - a) / 12.0 * (f(a) + 4.0 * f(lm) + 2.0 * f(m) + 4.0 * f(rm) + f(b));
        if depth == 0 || (fine - coarse).abs() <= 15.0 * tol {
            fine + (fine - coarse) / 15.0
        } else {
            simpson(f, a, m, tol / 2.0, depth - 1) + simpson(f, m, b, tol / 2.0, depth - 1)
        }
    }

    #[test]
    fn thermal_peak_value() {
        let c = Constants::codata();
        let mech = mech2();
        let om = mech.omega_m();
        let gamma = om / 1e4;
        let peak = thermal_psd(om, 300.0, &mech, gamma, &c).unwrap();
        let expected = 4.0 * c.kb * 300.0 / (1e-11 * gamma * om * om);
        assert!(((peak - expected) / expected).abs() < 1e-12);
        // halving the temperature halves the density everywhere
        let half = thermal_psd(om * 0.98, 150.0, &mech, gamma, &c).unwrap();
        let full = thermal_psd(om * 0.98, 300.0, &mech, gamma, &c).unwrap();
        assert!(((2.0 * half - full) / full).abs() < 1e-13);
    }

    #[test]
    fn equipartition_by_quadrature() {
        let c = Constants::codata();
        let mech = mech2();
        let om = mech.omega_m();
        let gamma = om / 1e4;
        let f = |w: f64| thermal_psd(w, 300.0, &mech, gamma, &c).unwrap() / TAU;
        // split at the peak so the adaptive rule sees it
        let total = simpson(f, 0.0, om - 50.0 * gamma, 1e-32, 42)
            + simpson(f, om - 50.0 * gamma, om + 50.0 * gamma, 1e-32, 42)
            + simpson(f, om + 50.0 * gamma, 40.0 * om, 1e-32, 42);
        let expected = c.kb * 300.0 / (1e-11 * om * om);
        assert!(
            ((total - expected) / expected).abs() < 1e-3,
            "quadrature {total} vs equipartition {expected}"
        );
    }

    #[test]
    fn synthesis_modes_and_background() {
        let c = Constants::codata();
        let base = mech2();
        let modes: Vec<ThermalMode> = [0.6, 1.0, 1.45]
            .iter()
            .map(|&f| ThermalMode {
                mech: MechanicalMode::new(base.omega_m() * f)
                    .unwrap()
                    .with_mass(1e-11)
                    .unwrap(),
                t_eff: 300.0,
                gamma_eff: base.omega_m() / 3000.0,
            })
            .collect();
        let bg = ShotNoiseBackground {
            finesse: 1.5e5,
            eta_det: 0.5,
            p_cav: 1e-6,
            lambda_vacuum: 1064e-9,
            n_index: 1.4,
            kappa: TAU * 5.8e6,
        };
        let grid: Vec<f64> = (0..12000)
            .map(|i| base.omega_m() * (0.3 + 1.4 * i as f64 / 11999.0))
            .collect();
        let syn = synthesize(&modes, Some(&bg), &grid, &c).unwrap();

        // local maxima well above background: exactly one per mode
        let v = &syn.spectrum.values;
        let mut peaks = 0;
        for i in 1..v.len() - 1 {
            let floor = 3.0 * bg.psd(grid[i], &c);
            if v[i] > v[i - 1] && v[i] > v[i + 1] && v[i] > floor {
                peaks += 1;
            }
        }
        assert_eq!(peaks, 3);
        assert_eq!(syn.peak_to_background_db.len(), 3);
        for db in &syn.peak_to_background_db {
            assert!(*db > 20.0);
        }

        // background-only synthesis is x_min² pointwise
        let empty = synthesize(&[], Some(&bg), &grid, &c).unwrap();
        for (i, &w) in grid.iter().enumerate() {
            assert_eq!(empty.spectrum.values[i], bg.psd(w, &c));
        }
    }

    #[test]
    fn room_temperature_peak_sixty_db_above_shot_noise() {
        // The 40.6 MHz breathing mode at 300 K read out with F = 1.5e5,
        // η = 0.5, 1 µW at 1064 nm sits close to 60 dB above the shot-noise
        // background at the peak.
        let c = Constants::codata();
        let s = Sample::sample2();
        let mech = s.mechanical().unwrap();
        let optical = s.optical().unwrap();
        let mode = ThermalMode {
            mech,
            t_eff: 300.0,
            gamma_eff: mech.gamma_m().unwrap(),
        };
        let bg = ShotNoiseBackground {
            finesse: optical.finesse().unwrap(),
            eta_det: 0.5,
            p_cav: 1e-6,
            lambda_vacuum: 1064e-9,
            n_index: 1.4,
            kappa: optical.kappa(),
        };
        let om = mode.mech.omega_m();
        let grid: Vec<f64> = (0..2000)
            .map(|i| om * (0.99 + 0.02 * i as f64 / 1999.0))
            .collect();
        let syn = synthesize(std::slice::from_ref(&mode), Some(&bg), &grid, &c).unwrap();
        let db = syn.peak_to_background_db[0];
        assert!((db - 60.0).abs() < 2.0, "signal-to-background {db} dB");
    }

    #[test]
    fn round_trip_across_occupancies() {
        // synthesize → fit → occupancy stays within 3% for n over three
        // decades at 20 dB signal-to-background and 5% bin noise.
        let c = Constants::codata();
        let base = mech2();
        let om = base.omega_m();
        let gamma_eff = TAU * 20e3;
        for n_inject in [1e3, 1e4, 1e5] {
            let t_eff = c.hbar * om * (n_inject + 0.5) / c.kb;
            let mode = ThermalMode {
                mech: base,
                t_eff,
                gamma_eff,
            };
            let grid: Vec<f64> = (0..800)
                .map(|i| om - 8.0 * gamma_eff + 16.0 * gamma_eff * i as f64 / 799.0)
                .collect();
            let syn = synthesize(std::slice::from_ref(&mode), None, &grid, &c).unwrap();
            let offset = thermal_psd(om, t_eff, &base, gamma_eff, &c).unwrap() / 100.0;
            let mut errs = Vec::new();
            for seed in 0..20u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let noisy: Vec<f64> = syn
                    .spectrum
                    .values
                    .iter()
                    .map(|v| (v + offset) * (1.0 + 0.05 * rng.gen_range(-1.0..1.0f64)))
                    .collect();
                let spec =
                    Spectrum::new(grid.clone(), noisy, SpectrumUnits::DisplacementPsd).unwrap();
                let fit =
                    fit_lorentzian(&spec, (om - 5.0 * gamma_eff, om + 5.0 * gamma_eff)).unwrap();
                let n = occupancy_from_spectrum(&fit, &base, &c).unwrap();
                errs.push(((n - n_inject) / n_inject).abs());
            }
            errs.sort_by(f64::total_cmp);
            assert!(
                errs[errs.len() / 2] < 0.03,
                "n = {n_inject}: median error {}",
                errs[errs.len() / 2]
            );
        }
    }

    #[test]
    fn synthesis_requires_covering_grid() {
        let mode = ThermalMode {
            mech: mech2(),
            t_eff: 300.0,
            gamma_eff: 1e4,
        };
        let grid: Vec<f64> = (0..100).map(|i| 1e6 + 1e3 * i as f64).collect();
        assert!(synthesize(&[mode], None, &grid, &Constants::codata()).is_err());
    }

    #[test]
    fn grid_refinement_leaves_samples_unchanged() {
        let c = Constants::codata();
        let mode = ThermalMode {
            mech: mech2(),
            t_eff: 300.0,
            gamma_eff: 2e4,
        };
        let om = mode.mech.omega_m();
        let coarse: Vec<f64> = (0..=400)
            .map(|i| om * (0.9 + 0.2 * i as f64 / 400.0))
            .collect();
        let fine: Vec<f64> = (0..=4000)
            .map(|i| om * (0.9 + 0.2 * i as f64 / 4000.0))
            .collect();
        let sc = synthesize(std::slice::from_ref(&mode), None, &coarse, &c).unwrap();
        let sf = synthesize(std::slice::from_ref(&mode), None, &fine, &c).unwrap();
        for i in 0..=400 {
            let a = sc.spectrum.values[i];
            let b = sf.spectrum.values[10 * i];
            assert!(
                ((a - b) / a).abs() < 1e-12,
                "grid refinement moved a sample: {a} vs {b}"
            );
        }
    }

    fn lorentzian(w: f64, c: f64, fwhm: f64, area: f64, offset: f64) -> f64 {
        let h = 0.5 * fwhm;
        offset + area * h / (std::f64::consts::PI * ((w - c) * (w - c) + h * h))
    }

    #[test]
    fn fit_recovers_noiseless_parameters() {
        let center = TAU * 40.6e6;
        let fwhm = TAU * 50e3;
        let area = 1.5e-27;
        let offset = 3e-36;
        let grid: Vec<f64> = (0..2000)
            .map(|i| center - 10.0 * fwhm + 20.0 * fwhm * i as f64 / 1999.0)
            .collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&w| lorentzian(w, center, fwhm, area, offset))
            .collect();
        let spec = Spectrum::new(grid, values, SpectrumUnits::DisplacementPsd).unwrap();
        let fit = fit_lorentzian(&spec, (center - 10.0 * fwhm, center + 10.0 * fwhm)).unwrap();
        assert!(((fit.center - center) / center).abs() < 1e-9);
        assert!(((fit.width - fwhm) / fwhm).abs() < 1e-6);
        assert!(((fit.area - area) / area).abs() < 1e-6);
        assert!(((fit.offset - offset) / offset).abs() < 1e-4);
    }

    #[test]
    fn fit_statistics_under_noise() {
        // 5% multiplicative noise, 500 bins over 10 widths: width and area
        // recovered within 2% in the median over seeds.
        let center = TAU * 40.6e6;
        let fwhm = TAU * 50e3;
        let area = 1.5e-27;
        let offset = 1e-33;
        let grid: Vec<f64> = (0..500)
            .map(|i| center - 5.0 * fwhm + 10.0 * fwhm * i as f64 / 499.0)
            .collect();
        let mut width_err = Vec::new();
        let mut area_err = Vec::new();
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = grid
                .iter()
                .map(|&w| {
                    let noise: f64 = 1.0 + 0.05 * rng.gen_range(-1.0..1.0f64);
                    lorentzian(w, center, fwhm, area, offset) * noise
                })
                .collect();
            let spec =
                Spectrum::new(grid.clone(), values, SpectrumUnits::DisplacementPsd).unwrap();
            let fit = fit_lorentzian(&spec, (grid[0], grid[499])).unwrap();
            width_err.push(((fit.width - fwhm) / fwhm).abs());
            area_err.push(((fit.area - area) / area).abs());
        }
        width_err.sort_by(f64::total_cmp);
        area_err.sort_by(f64::total_cmp);
        assert!(width_err[50] < 0.02, "median width error {}", width_err[50]);
        assert!(area_err[50] < 0.02, "median area error {}", area_err[50]);
    }

    #[test]
    fn degenerate_window_rejected() {
        let grid: Vec<f64> = (0..100).map(|i| 1e6 + 1e3 * i as f64).collect();
        let spec = Spectrum::new(grid, vec![2.5; 100], SpectrumUnits::Arbitrary).unwrap();
        assert!(matches!(
            fit_lorentzian(&spec, (1e6, 1.1e6)),
            Err(Error::DegenerateWindow(_))
        ));
        // and a window with too few samples
        assert!(matches!(
            fit_lorentzian(&spec, (1e6, 1.002e6)),
            Err(Error::DegenerateWindow(_))
        ));
    }

    #[test]
    fn occupancy_encoding_round_trip() {
        let c = Constants::codata();
        let mech = mech2();
        let om = mech.omega_m();
        let m = mech.m_eff().unwrap();
        // area encoding n_f = 5900 exactly
        let area = TAU * (5900.0 + 0.5) * c.hbar * om / (m * om * om);
        assert!((area - 1.5326357158149015e-27).abs() < 1e-40);
        let fit = LorentzianFit {
            center: om,
            width: 1e4,
            area,
            offset: 0.0,
            residual_rms: 0.0,
        };
        let n = occupancy_from_spectrum(&fit, &mech, &c).unwrap();
        assert!((n - 5900.0).abs() < 1e-8);

        // doubling the area doubles n + 1/2
        let fit2 = LorentzianFit {
            area: 2.0 * area,
            ..fit
        };
        let n2 = occupancy_from_spectrum(&fit2, &mech, &c).unwrap();
        assert!(((n2 + 0.5) - 2.0 * (n + 0.5)).abs() < 1e-8);

        // zero-point energy maps to n = 0
        let zp = LorentzianFit {
            area: TAU * 0.5 * c.hbar / (m * om),
            ..fit
        };
        assert!(occupancy_from_spectrum(&zp, &mech, &c).unwrap().abs() < 1e-12);
        let sub = LorentzianFit {
            area: zp.area * 0.99,
            ..fit
        };
        assert!(matches!(
            occupancy_from_spectrum(&sub, &mech, &c),
            Err(Error::SubZeroPoint(_))
        ));
    }

    #[test]
    fn heterodyne_asymmetry() {
        let s = Sample::sample2();
        let optical = s.optical().unwrap();
        let mech = s.mechanical().unwrap();
        let om = mech.omega_m();
        let aom = TAU * 200e6;
        let gamma_eff = TAU * 30e3;
        let grid: Vec<f64> = (0..20000)
            .map(|i| aom - 1.5 * om + 3.0 * om * i as f64 / 19999.0)
            .collect();

        // Δ = 0, n ≫ 1: sidebands equal to 1/n
        let h = heterodyne_spectrum(0.0, 1e6, aom, &optical, &mech, gamma_eff, &grid).unwrap();
        let ratio = h.stokes_power / h.anti_stokes_power;
        assert!((ratio - 1.0).abs() < 1.1e-6);

        // n = 0: zero-point asymmetry, anti-Stokes vanishes
        let h0 = heterodyne_spectrum(0.0, 0.0, aom, &optical, &mech, gamma_eff, &grid).unwrap();
        assert_eq!(h0.anti_stokes_power, 0.0);
        assert!(h0.stokes_power > 0.0);

        // detuning chosen for A-/A+ = 40: Stokes is 16 dB down at large n
        let f = |delta: f64| {
            let w = quantum::sideband_weights(&optical, &mech, delta);
            w.ratio() - 40.0
        };
        let (mut a, mut b) = (-om, -0.01 * om);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let delta40 = 0.5 * (a + b);
        let n = 1e4;
        let h40 = heterodyne_spectrum(delta40, n, aom, &optical, &mech, gamma_eff, &grid).unwrap();
        let db = 10.0 * (h40.anti_stokes_power / h40.stokes_power).log10();
        let expected = 10.0 * (40.0 * n / (n + 1.0)).log10();
        assert!((db - expected).abs() < 1e-6, "suppression {db} dB");
        assert!((db - 16.0).abs() < 0.1, "suppression {db} dB vs 16 dB");

        // cross-module round trip through the thermometry formula
        let w = quantum::sideband_weights(&optical, &mech, delta40);
        let rec =
            quantum::occupancy_from_sidebands(h40.stokes_power, h40.anti_stokes_power, &w)
                .unwrap();
        assert!(((rec - n) / n).abs() < 1e-6);
    }

    #[test]
    fn csv_round_trip() {
        let grid: Vec<f64> = (0..50).map(|i| TAU * (1e6 + 1e3 * i as f64)).collect();
        let values: Vec<f64> = (0..50).map(|i| 1e-30 * (1.0 + i as f64)).collect();
        let spec = Spectrum::new(grid, values, SpectrumUnits::DisplacementPsd).unwrap();
        let csv = spec.to_csv(&[("sample".into(), "sample2".into())]);
        let back = Spectrum::from_csv(&csv).unwrap();
        assert_eq!(back.units, SpectrumUnits::DisplacementPsd);
        assert_eq!(back.values, spec.values);
        for (a, b) in back.omega.iter().zip(&spec.omega) {
            assert!(((a - b) / b).abs() < 1e-15);
        }
    }
}
