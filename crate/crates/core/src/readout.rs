//! Hänsch–Couillaud polarization readout.
//!
//! One polarization component couples to the cavity and picks up its
//! dispersive phase; the orthogonal component passes by and serves as local
//! oscillator. A quarter-wave plate at 45° to the polarizing beam splitter
//! decomposes the output into circular components whose power difference
//! h = |l|² − |r|² is the error signal. Polarization mode dispersion of the
//! fiber is compensated by an extra quarter/half-wave pair in front of the
//! analyzer.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use crate::constants::{Constants, SPEED_OF_LIGHT};
use crate::error::Result;
use crate::params::OpticalMode;

pub type JonesMatrix = Matrix2<Complex64>;
pub type JonesVector = Vector2<Complex64>;

/// Field pair in the (cavity, local-oscillator) polarization basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationField {
    pub e_cav: Complex64,
    pub e_lo: Complex64,
}

impl PolarizationField {
    /// Real positive amplitudes for the given powers (W).
    pub fn from_powers(p_cav: f64, p_lo: f64) -> Self {
        Self {
            e_cav: Complex64::new(p_cav.sqrt(), 0.0),
            e_lo: Complex64::new(p_lo.sqrt(), 0.0),
        }
    }

    pub fn p_cav(&self) -> f64 {
        self.e_cav.norm_sqr()
    }

    pub fn p_lo(&self) -> f64 {
        self.e_lo.norm_sqr()
    }

    fn vector(&self) -> JonesVector {
        JonesVector::new(self.e_cav, self.e_lo)
    }
}

/// Jones matrices for the optical elements in the chain.
pub mod jones {
    use super::*;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);
    const I: Complex64 = Complex64::new(0.0, 1.0);
    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    /// Quarter-wave plate, fast axis along x: diag(1, i).
    pub fn quarter_wave() -> JonesMatrix {
        JonesMatrix::new(ONE, ZERO, ZERO, I)
    }

    /// Half-wave plate, fast axis along x: diag(1, −1).
    pub fn half_wave() -> JonesMatrix {
        JonesMatrix::new(ONE, ZERO, ZERO, -ONE)
    }

    /// Basis rotation R_θ = [[cosθ, sinθ], [−sinθ, cosθ]].
    pub fn rotation(theta: f64) -> JonesMatrix {
        let c = Complex64::new(theta.cos(), 0.0);
        let s = Complex64::new(theta.sin(), 0.0);
        JonesMatrix::new(c, s, -s, c)
    }

    /// An element rotated to angle θ: R_θ⁻¹·E·R_θ.
    pub fn rotated(element: &JonesMatrix, theta: f64) -> JonesMatrix {
        rotation(-theta) * element * rotation(theta)
    }

    /// Cavity element diag(t(Δ), 1): only the cavity polarization acquires
    /// the taper transfer t.
    pub fn cavity(t: Complex64) -> JonesMatrix {
        JonesMatrix::new(t, ZERO, ZERO, ONE)
    }
}

/// Complex taper transfer function for the cavity polarization component:
///
/// ```text
/// t(Δ) = (τ_ex − τ0 + 2iΔτ0τ_ex) / (τ_ex + τ0 + 2iΔτ0τ_ex)
/// ```
pub fn taper_transfer(delta: f64, tau0: f64, tau_ex: f64) -> Complex64 {
    let num = Complex64::new(tau_ex - tau0, 2.0 * delta * tau0 * tau_ex);
    let den = Complex64::new(tau_ex + tau0, 2.0 * delta * tau0 * tau_ex);
    num / den
}

/// Fields on the two photodiodes.
#[derive(Debug, Clone, Copy)]
pub struct Detection {
    pub l: Complex64,
    pub r: Complex64,
}

impl Detection {
    /// Error signal h = |l|² − |r|² (W).
    pub fn error_signal(&self) -> f64 {
        self.l.norm_sqr() - self.r.norm_sqr()
    }
}

/// Detection through the compensated analyzer R₄₅·Q·C_Δ:
/// (l, r) = (t·E_cav + i·E_LO, −t·E_cav + i·E_LO)/√2.
pub fn detect(field: &PolarizationField, delta: f64, optical: &OpticalMode) -> Detection {
    let t = taper_transfer(delta, optical.tau0(), optical.tau_ex());
    let chain =
        jones::rotation(std::f64::consts::FRAC_PI_4) * jones::quarter_wave() * jones::cavity(t);
    let out = chain * field.vector();
    Detection {
        l: out[0],
        r: out[1],
    }
}

/// The analyzer plate angles and the fiber PMD they have to undo.
#[derive(Debug, Clone)]
pub struct AnalyzerChain {
    /// Angles of the compensation quarter-wave, compensation half-wave and
    /// analyzer quarter-wave plates, then the output basis rotation.
    pub theta: [f64; 4],
    /// Polarization mode dispersion of the fiber, an arbitrary unitary.
    pub pmd: JonesMatrix,
}

impl AnalyzerChain {
    /// Everything between the cavity and the photodiodes:
    /// R_{θ4}·(R_{θ3}⁻¹QR_{θ3})·(R_{θ2}⁻¹HR_{θ2})·(R_{θ1}⁻¹QR_{θ1})·P.
    pub fn analyzer_matrix(&self) -> JonesMatrix {
        jones::rotation(self.theta[3])
            * jones::rotated(&jones::quarter_wave(), self.theta[2])
            * jones::rotated(&jones::half_wave(), self.theta[1])
            * jones::rotated(&jones::quarter_wave(), self.theta[0])
            * self.pmd
    }

    /// True when the chain reduces to R₄₅·Q up to a global phase, i.e. the
    /// plates fully compensate the PMD.
    pub fn is_compensated(&self, tol: f64) -> bool {
        let m = self.analyzer_matrix();
        let target = jones::rotation(std::f64::consts::FRAC_PI_4) * jones::quarter_wave();
        // align the global phase on the largest target entry
        let (mut idx, mut mag) = ((0, 0), 0.0);
        for i in 0..2 {
            for j in 0..2 {
                if target[(i, j)].norm() > mag {
                    mag = target[(i, j)].norm();
                    idx = (i, j);
                }
            }
        }
        let phase = m[idx] / target[idx];
        if phase.norm() == 0.0 {
            return false;
        }
        let phase = phase / Complex64::new(phase.norm(), 0.0);
        (m - target.map(|v| v * phase)).norm() <= tol * target.norm()
    }

    /// The chain whose PMD is exactly undone by the given plate angles:
    /// P := plates⁻¹·R₄₅·Q, so `analyzer_matrix()` equals R₄₅·Q.
    pub fn compensated(theta: [f64; 4]) -> Self {
        let plates = jones::rotation(theta[3])
            * jones::rotated(&jones::quarter_wave(), theta[2])
            * jones::rotated(&jones::half_wave(), theta[1])
            * jones::rotated(&jones::quarter_wave(), theta[0]);
        let target = jones::rotation(std::f64::consts::FRAC_PI_4) * jones::quarter_wave();
        // all factors are unitary, so the inverse is the adjoint
        let pmd = plates.adjoint() * target;
        Self { theta, pmd }
    }
}

/// Detection through the full plate chain.
pub fn detect_with_chain(
    field: &PolarizationField,
    delta: f64,
    optical: &OpticalMode,
    chain: &AnalyzerChain,
) -> Detection {
    let t = taper_transfer(delta, optical.tau0(), optical.tau_ex());
    let out = chain.analyzer_matrix() * jones::cavity(t) * field.vector();
    Detection {
        l: out[0],
        r: out[1],
    }
}

/// Closed-form error signal for real field amplitudes (adiabatic regime):
///
/// ```text
/// h(Δ) = 8τ0²τ_ex·Δ·√(P_cav·P_LO) / (τ_ex² + 2τ0τ_ex + τ0²(1 + 4Δ²τ_ex²))
/// ```
pub fn error_signal(delta: f64, tau0: f64, tau_ex: f64, p_cav: f64, p_lo: f64) -> f64 {
    8.0 * tau0 * tau0 * tau_ex * delta * (p_cav * p_lo).sqrt()
        / (tau_ex * tau_ex
            + 2.0 * tau0 * tau_ex
            + tau0 * tau0 * (1.0 + 4.0 * delta * delta * tau_ex * tau_ex))
}

/// Displacement responsivity on resonance, ∂h/∂x at Δ = 0:
/// (8ω0/(τ_ex·κ²·R))·√(P_cav·P_LO) (W/m). A displacement x detunes the mode
/// by Δ = ω0·x/R, and the identity (τ0+τ_ex)² = κ²τ0²τ_ex² makes this form
/// exact for any coupling.
pub fn error_signal_slope(optical: &OpticalMode, p_cav: f64, p_lo: f64) -> Result<f64> {
    let radius = optical.require_radius()?;
    let kappa = optical.kappa();
    Ok(
        8.0 * optical.omega0() / (optical.tau_ex() * kappa * kappa * radius)
            * (p_cav * p_lo).sqrt(),
    )
}

/// Cavity low-pass factor for the detected RF power at Fourier frequency Ω:
/// 1/((κ/2)² + Ω²). A fixed displacement amplitude produces this much less
/// signal power above the cavity bandwidth.
pub fn dynamic_response(omega: f64, kappa: f64) -> f64 {
    1.0 / (0.25 * kappa * kappa + omega * omega)
}

/// Amplitude of the error-signal oscillation produced by a harmonic
/// displacement x(t) = x0·sin(Ωt) with the readout on resonance; the sine and
/// cosine quadratures add in quadrature to
///
/// ```text
/// |h| = (4/(τ_ex·κ))·√(P_LO·P_cav)·(x0·ω0/R) / √((κ/2)² + Ω²)
/// ```
pub fn displacement_signal_amplitude(
    x0: f64,
    omega: f64,
    optical: &OpticalMode,
    p_cav: f64,
    p_lo: f64,
) -> Result<f64> {
    let radius = optical.require_radius()?;
    let kappa = optical.kappa();
    Ok(
        4.0 / (optical.tau_ex() * kappa) * (p_lo * p_cav).sqrt() * x0 * optical.omega0() / radius
            * dynamic_response(omega, kappa).sqrt(),
    )
}

/// Amplitude of the error-signal oscillation from phase modulation of depth
/// δφ at frequency Ω (probe and local oscillator are modulated together):
/// |h| = (4/(τ_ex·κ))·√(P_LO·P_cav)·δφ·Ω/√((κ/2)² + Ω²).
pub fn phase_mod_signal_amplitude(
    dphi: f64,
    omega: f64,
    optical: &OpticalMode,
    p_cav: f64,
    p_lo: f64,
) -> f64 {
    4.0 / (optical.tau_ex() * optical.kappa()) * (p_lo * p_cav).sqrt() * dphi * omega
        * dynamic_response(omega, optical.kappa()).sqrt()
}

/// Shot-noise limited displacement sensitivity (m/√Hz):
///
/// ```text
/// x_min(Ω) = λ_medium/(8πF·√(η_det·P_cav/ħω)) · √(1 + Ω²/(κ/2)²)
/// ```
///
/// with λ_medium = λ_vacuum/n and the photon energy ħω taken at the vacuum
/// wavelength.
#[allow(clippy::too_many_arguments)]
pub fn shot_noise_sensitivity(
    omega: f64,
    finesse: f64,
    eta_det: f64,
    p_cav: f64,
    lambda_vacuum: f64,
    n_index: f64,
    kappa: f64,
    consts: &Constants,
) -> f64 {
    let omega_laser = std::f64::consts::TAU * SPEED_OF_LIGHT / lambda_vacuum;
    let lambda_medium = lambda_vacuum / n_index;
    let photon_rate = eta_det * p_cav / (consts.hbar * omega_laser);
    let flat = lambda_medium / (8.0 * std::f64::consts::PI * finesse * photon_rate.sqrt());
    let half = 0.5 * kappa;
    flat * (1.0 + omega * omega / (half * half)).sqrt()
}

/// Displacement amplitude that produces the same readout signal as a phase
/// modulation of depth δφ at frequency Ω: x_equiv = δφ·R·Ω/ω0. Independent
/// of cavity bandwidth, coupling and readout power.
pub fn calibrate(dphi: f64, omega: f64, optical: &OpticalMode) -> Result<f64> {
    let radius = optical.require_radius()?;
    Ok(dphi * radius * omega / optical.omega0())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::OpticalMode;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn mode(kappa: f64, coupling: f64) -> OpticalMode {
        OpticalMode::from_linewidth(TAU * SPEED_OF_LIGHT / 1064e-9, kappa, coupling, 1.44)
            .unwrap()
            .with_radius(38e-6)
            .unwrap()
    }

    #[test]
    fn taper_transfer_limits() {
        let tau0 = 1e-7;
        // critical coupling on resonance: full extinction
        assert!(taper_transfer(0.0, tau0, tau0).norm() < 1e-15);
        // undercoupled tau_ex = 3 tau0 on resonance: t = 1/2
        let t = taper_transfer(0.0, tau0, 3.0 * tau0);
        assert!((t - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        // far off resonance: unity transmission
        let t = taper_transfer(1e9 / tau0, tau0, tau0);
        assert!((t.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn detect_matches_closed_form() {
        let optical = mode(TAU * 5.8e6, 1.0);
        let field = PolarizationField::from_powers(2e-6, 8e-4);
        let kappa = optical.kappa();
        for dfrac in [-5.0, -1.3, -0.2, 0.0, 0.37, 2.0, 5.0] {
            let delta = dfrac * kappa;
            let h = detect(&field, delta, &optical).error_signal();
            let closed = error_signal(delta, optical.tau0(), optical.tau_ex(), 2e-6, 8e-4);
            // floor at machine epsilon of the dominant LO power
            assert!(
                (h - closed).abs() <= 1e-12 * closed.abs() + 1e-15 * field.p_lo(),
                "Δ = {dfrac}κ: {h} vs {closed}"
            );
        }
    }

    #[test]
    fn closed_form_reference_value() {
        // 40-digit evaluation at tau_ex = 3 tau0, Δ = 0.37 κ.
        let tau0 = 2.0 / (TAU * 5.8e6);
        let tau_ex = 3.0 * tau0;
        let kappa = 1.0 / tau0 + 1.0 / tau_ex;
        let h = error_signal(0.37 * kappa, tau0, tau_ex, 2e-6, 8e-4);
        let expected = 1.9126389247867666e-5;
        assert!(((h - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn balanced_detection_on_resonance() {
        let optical = mode(TAU * 5.8e6, 1.0);
        let field = PolarizationField::from_powers(2e-6, 8e-4);
        let det = detect(&field, 0.0, &optical);
        assert!(det.error_signal().abs() < 1e-15 * field.p_lo());
        // t(0) = 0 at critical coupling: the cavity-polarization power is
        // dissipated in the resonator and only the LO reaches the diodes.
        let each = 0.5 * field.p_lo();
        assert!((det.l.norm_sqr() - each).abs() < 1e-12 * each);
        assert!((det.r.norm_sqr() - each).abs() < 1e-12 * each);
    }

    #[test]
    fn full_chain_equals_reduced_when_compensated() {
        let optical = mode(TAU * 5.8e6, 0.7);
        let field = PolarizationField::from_powers(2e-6, 8e-4);
        let angle_sets = [
            [0.1, -0.9, 1.2, 0.4],
            [1.0, 2.0, -0.5, -1.3],
            [0.0, 0.0, 0.0, 0.0],
        ];
        for theta in angle_sets {
            let chain = AnalyzerChain::compensated(theta);
            assert!(chain.is_compensated(1e-12));
            for dfrac in [-3.0, -1.0, 0.0, 0.5, 2.0] {
                let delta = dfrac * optical.kappa();
                let full = detect_with_chain(&field, delta, &optical, &chain);
                let reduced = detect(&field, delta, &optical);
                assert!(
                    (full.error_signal() - reduced.error_signal()).abs() <= 1e-12 * field.p_lo()
                );
                assert!((full.l.norm_sqr() - reduced.l.norm_sqr()).abs() <= 1e-12 * field.p_lo());
            }
        }
    }

    #[test]
    fn plate_angles_compensating_identity_pmd() {
        // With no PMD, plates at (45°, −22.5°, 45°) ahead of a 45° PBS
        // reproduce the bare quarter-wave analyzer.
        let chain = AnalyzerChain {
            theta: [TAU / 8.0, -TAU / 16.0, TAU / 8.0, TAU / 8.0],
            pmd: JonesMatrix::identity(),
        };
        assert!(chain.is_compensated(1e-12));
        let skewed = AnalyzerChain {
            theta: [TAU / 8.0, -TAU / 16.0, TAU / 8.0, TAU / 6.0],
            pmd: JonesMatrix::identity(),
        };
        assert!(!skewed.is_compensated(1e-9));
    }

    #[test]
    fn elements_are_unitary() {
        let els = [
            jones::quarter_wave(),
            jones::half_wave(),
            jones::rotation(0.83),
            jones::rotated(&jones::quarter_wave(), -1.2),
        ];
        let mut product = JonesMatrix::identity();
        for e in els {
            let gram = e.adjoint() * e;
            assert!((gram - JonesMatrix::identity()).norm() < 1e-12);
            product *= e;
        }
        let det = product[(0, 0)] * product[(1, 1)] - product[(0, 1)] * product[(1, 0)];
        assert!((det.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_matches_numeric_derivative() {
        for coupling in [0.25, 1.0, 4.0] {
            let optical = mode(TAU * 5.8e6, coupling);
            let slope = error_signal_slope(&optical, 2e-6, 8e-4).unwrap();
            let dx = 1e-18;
            let to_delta = optical.omega0() / optical.radius().unwrap();
            let numeric = (error_signal(
                to_delta * dx,
                optical.tau0(),
                optical.tau_ex(),
                2e-6,
                8e-4,
            ) - error_signal(
                -to_delta * dx,
                optical.tau0(),
                optical.tau_ex(),
                2e-6,
                8e-4,
            )) / (2.0 * dx);
            assert!(
                ((numeric - slope) / slope).abs() < 1e-6,
                "K = {coupling}: {numeric} vs {slope}"
            );
        }
    }

    #[test]
    fn dynamic_response_shape() {
        let kappa = TAU * 5.8e6;
        let dc = dynamic_response(0.0, kappa);
        assert!((dc - 1.0 / (0.5 * kappa).powi(2)).abs() < 1e-12 * dc);
        assert!((dynamic_response(0.5 * kappa, kappa) - 0.5 * dc).abs() < 1e-12 * dc);
        let far = dynamic_response(10.0 * kappa, kappa);
        assert!(((far - dc / 401.0) / far).abs() < 1e-12);
    }

    #[test]
    fn adiabatic_limit_recovers_static_slope() {
        let optical = mode(TAU * 5.8e6, 1.0);
        let kappa = optical.kappa();
        let x0 = 1e-15;
        let amp = displacement_signal_amplitude(x0, kappa / 100.0, &optical, 2e-6, 8e-4).unwrap();
        let adiabatic = error_signal_slope(&optical, 2e-6, 8e-4).unwrap() * x0;
        assert!(
            ((amp - adiabatic) / adiabatic).abs() < 1e-3,
            "{amp} vs {adiabatic}"
        );
    }

    #[test]
    fn sensitivity_reference_value() {
        // F = 40000, η = 0.5, P_cav = 1 µW, λ = 1064 nm / 1.4.
        let x = shot_noise_sensitivity(
            0.0,
            40000.0,
            0.5,
            1e-6,
            1064e-9,
            1.4,
            TAU * 5.8e6,
            &Constants::codata(),
        );
        let expected = 4.6195140376205021e-19;
        assert!(((x - expected) / expected).abs() < 1e-12, "{x}");
    }

    #[test]
    fn sensitivity_scalings() {
        let c = Constants::codata();
        let kappa = TAU * 5.8e6;
        let x1 = shot_noise_sensitivity(0.0, 40000.0, 0.5, 1e-6, 1064e-9, 1.4, kappa, &c);
        let x2 = shot_noise_sensitivity(0.0, 80000.0, 0.5, 1e-6, 1064e-9, 1.4, kappa, &c);
        assert!(((x1 - 2.0 * x2) / x1).abs() < 1e-15);
        let x3 = shot_noise_sensitivity(0.5 * kappa, 40000.0, 0.5, 1e-6, 1064e-9, 1.4, kappa, &c);
        assert!(((x3 / x1) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn calibration_reference_value() {
        // 17°/V modulator driven at 1 V, Ω/2π = 40.6 MHz, R = 38 µm, 1064 nm.
        let optical = mode(TAU * 5.8e6, 1.0);
        let dphi = 17f64.to_radians();
        let x = calibrate(dphi, TAU * 40.6e6, &optical).unwrap();
        let expected = 1.6246388869776468e-12;
        assert!(((x - expected) / expected).abs() < 1e-12, "{x}");
        assert_eq!(calibrate(0.0, TAU * 40.6e6, &optical).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn error_signal_antisymmetric(dfrac in 0.001f64..5.0, k in 0.1f64..10.0) {
            let optical = mode(TAU * 5.8e6, k);
            let field = PolarizationField::from_powers(2e-6, 8e-4);
            let delta = dfrac * optical.kappa();
            let hp = detect(&field, delta, &optical).error_signal();
            let hm = detect(&field, -delta, &optical).error_signal();
            prop_assert!((hp + hm).abs() <= 1e-12 * hp.abs().max(1e-30));
        }

        #[test]
        fn calibration_equivalence(
            log_kappa in 6.0f64..9.0,
            k in prop::sample::select(vec![0.1f64, 1.0, 10.0]),
            omfrac in 0.01f64..20.0,
        ) {
            // A displacement x0 at Ω and a phase modulation δφ = x0·ω0/(R·Ω)
            // produce identical signal amplitudes, whatever κ and K.
            let optical = mode(TAU * 10f64.powf(log_kappa), k);
            let omega = omfrac * optical.kappa();
            let x0 = 1e-14;
            let dphi = x0 * optical.omega0() / (optical.radius().unwrap() * omega);
            let a = displacement_signal_amplitude(x0, omega, &optical, 2e-6, 8e-4).unwrap();
            let b = phase_mod_signal_amplitude(dphi, omega, &optical, 2e-6, 8e-4);
            prop_assert!(((a - b) / a).abs() < 1e-12);
            // and the inverse map recovers x0 exactly
            let x = calibrate(dphi, omega, &optical).unwrap();
            prop_assert!(((x - x0) / x0).abs() < 1e-12);
        }
    }
}
