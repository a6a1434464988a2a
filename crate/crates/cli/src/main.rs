//! Command-line surface of the resolved-sideband cooling model set.
//!
//! Frequencies are ordinary (Hz) on this boundary and converted to angular
//! units once, on the way in; outputs likewise report Hz. All commands are
//! deterministic: identical inputs produce byte-identical outputs.
//!
//! Exit codes: 0 ok, 2 bad arguments, 3 physics-domain error (heating regime,
//! non-physical ratios, sub-zero-point energies), 4 fit non-convergence.

// range guards are written `!(hi > lo)` on purpose: they must reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::TAU;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sideband_core::config::{Sample, SampleLibrary};
use sideband_core::params::{Environment, LaserDrive};
use sideband_core::{
    cavity_field, cooling, noise, params, quantum, readout, spectra, verify, Constants,
    Error,
};

#[derive(Parser)]
#[command(
    name = "sideband",
    version,
    about = "Analytic models for resolved-sideband cooling of microresonators"
)]
struct Cli {
    /// TOML file defining additional samples (sections shadow built-ins).
    #[arg(long, global = true, env = "SIDEBAND_SAMPLES")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Sample selection plus per-invocation parameter overrides.
#[derive(Args, Clone)]
struct SampleArgs {
    /// Sample name: a built-in (sample1, sample2) or a --config section.
    #[arg(long)]
    sample: String,
    /// Override the effective mass (kg).
    #[arg(long)]
    m_eff_kg: Option<f64>,
    /// Override the cavity radius (m).
    #[arg(long)]
    radius_m: Option<f64>,
    /// Override the mechanical damping Γm/2π (Hz).
    #[arg(long)]
    gamma_m_hz: Option<f64>,
    /// Override the coupling parameter K.
    #[arg(long)]
    coupling: Option<f64>,
    /// Override the pump wavelength (nm).
    #[arg(long)]
    wavelength_nm: Option<f64>,
    /// Override the reservoir temperature (K).
    #[arg(long)]
    temp_k: Option<f64>,
}

impl SampleArgs {
    fn load(&self, config: &Option<PathBuf>) -> Result<Sample, Error> {
        let lib = match config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                SampleLibrary::from_toml(&text)?
            }
            None => SampleLibrary::builtin(),
        };
        let mut sample = lib.get(&self.sample)?.clone();
        if let Some(m) = self.m_eff_kg {
            sample.m_eff_kg = Some(m);
        }
        if let Some(r) = self.radius_m {
            sample.radius_m = Some(r);
            sample.finesse = None; // an explicit radius supersedes a quoted finesse
        }
        if let Some(g) = self.gamma_m_hz {
            sample.gamma_m_hz = Some(g);
        }
        if let Some(k) = self.coupling {
            sample.coupling = k;
        }
        if let Some(l) = self.wavelength_nm {
            sample.wavelength_m = l * 1e-9;
        }
        if let Some(t) = self.temp_k {
            sample.temperature_k = t;
        }
        Ok(sample)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Cooling rate, effective linewidth and cooling factor at a detuning.
    CoolingRate {
        #[command(flatten)]
        sample: SampleArgs,
        /// Laser detuning Δ/2π (Hz); defaults to the lower sideband −Ωm.
        #[arg(long, allow_hyphen_values = true)]
        detuning_hz: Option<f64>,
        /// Launched power (W).
        #[arg(long)]
        power_w: f64,
    },
    /// Detuning maximizing the cooling rate.
    OptimizeDetuning {
        #[command(flatten)]
        sample: SampleArgs,
        /// Launched power (W) for reporting Γc(Δ*); omit for the
        /// normalized rate only.
        #[arg(long)]
        power_w: Option<f64>,
    },
    /// Normalized cooling-rate surface over (detuning, linewidth) as CSV.
    Surface {
        #[command(flatten)]
        sample: SampleArgs,
        /// κ/2π range as log10 decades "a:b" (Hz), e.g. 5:8.
        #[arg(long)]
        kappa_decades: String,
        /// Number of κ grid points.
        #[arg(long, default_value_t = 61)]
        kappa_points: usize,
        /// Detuning grid half-span in units of Ωm.
        #[arg(long, default_value_t = 2.5)]
        detuning_span: f64,
        /// Number of detuning grid points.
        #[arg(long, default_value_t = 101)]
        detuning_points: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Occupancy limits and sideband asymmetry at a detuning.
    Limits {
        #[command(flatten)]
        sample: SampleArgs,
        /// Laser detuning Δ/2π (Hz); defaults to −Ωm.
        #[arg(long, allow_hyphen_values = true)]
        detuning_hz: Option<f64>,
    },
    /// DC transmission of the driven (oscillating) cavity as CSV.
    Transmission {
        #[command(flatten)]
        sample: SampleArgs,
        /// Modulation index β.
        #[arg(long)]
        beta: f64,
        /// Scan half-span in units of Ωm.
        #[arg(long, default_value_t = 3.0)]
        span: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 2001)]
        points: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Also write the scan as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Fit a modulation index to measured sideband dip weights.
    FitBeta {
        /// Comma-separated order:weight pairs, e.g. "0:1.0,1:0.62,2:0.18".
        #[arg(long)]
        weights: String,
        /// Upper edge of the fit range.
        #[arg(long, default_value_t = 10.0)]
        beta_max: f64,
        /// Optional sample for converting β to a displacement amplitude.
        #[arg(long)]
        sample: Option<String>,
    },
    /// Shot-noise-limited displacement sensitivity curve as CSV.
    Sensitivity {
        #[command(flatten)]
        sample: SampleArgs,
        /// Override the finesse (defaults to the sample's).
        #[arg(long)]
        finesse: Option<f64>,
        /// Detection quantum efficiency.
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        /// Coupled power (W).
        #[arg(long, default_value_t = 1e-6)]
        pcav_w: f64,
        /// Highest Fourier frequency (Hz); defaults to 10 κ/2π.
        #[arg(long)]
        max_freq_hz: Option<f64>,
        /// Number of grid points.
        #[arg(long, default_value_t = 1001)]
        points: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Displacement equivalent to a known phase modulation.
    Calibrate {
        #[command(flatten)]
        sample: SampleArgs,
        /// Phase-modulation depth δφ (rad).
        #[arg(long)]
        dphi_rad: f64,
        /// Modulation frequency Ω/2π (Hz).
        #[arg(long)]
        freq_hz: f64,
    },
    /// Laser-noise heating budget, optimal power and occupancy floor.
    Budget {
        #[command(flatten)]
        sample: SampleArgs,
        /// Launched power (W).
        #[arg(long)]
        power_w: f64,
        /// Phase-noise PSD S_φ (rad²/Hz); defaults to the sample's.
        #[arg(long)]
        sphi: Option<f64>,
        /// Relative intensity-noise PSD S_I (1/Hz); defaults to the sample's.
        #[arg(long)]
        si: Option<f64>,
        /// Laser frequency (Hz) for the occupancy floor; defaults to the
        /// pump frequency at Δ = −Ωm.
        #[arg(long)]
        laser_freq_hz: Option<f64>,
        /// Use two-digit rounded ħ and k_B instead of CODATA.
        #[arg(long)]
        rounded_constants: bool,
    },
    /// Displacement/heterodyne spectrum synthesis, fitting and occupancy.
    #[command(subcommand)]
    Spectrum(SpectrumCommand),
    /// Heterodyne sideband spectrum around the AOM offset as CSV.
    Heterodyne {
        #[command(flatten)]
        sample: SampleArgs,
        /// Laser detuning Δ/2π (Hz).
        #[arg(long, allow_hyphen_values = true)]
        detuning_hz: f64,
        /// Phonon occupancy n.
        #[arg(long)]
        n: f64,
        /// AOM offset frequency (Hz).
        #[arg(long)]
        aom_hz: f64,
        /// Effective mechanical linewidth Γ_eff/2π (Hz).
        #[arg(long, default_value_t = 30e3)]
        gamma_eff_hz: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 4001)]
        points: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance table (exit 0 iff every criterion passes).
    Verify,
}

#[derive(Subcommand)]
enum SpectrumCommand {
    /// Synthesize a thermal displacement spectrum with shot-noise background.
    Synth {
        #[command(flatten)]
        sample: SampleArgs,
        /// Effective mode temperature (K); alternative to --n-occupancy.
        #[arg(long, conflicts_with = "n_occupancy")]
        t_eff_k: Option<f64>,
        /// Phonon occupancy encoding T_eff = ħΩm(n + 1/2)/kB.
        #[arg(long)]
        n_occupancy: Option<f64>,
        /// Effective linewidth Γ_eff/2π (Hz).
        #[arg(long, default_value_t = 20e3)]
        gamma_eff_hz: f64,
        /// Include the shot-noise background of the readout.
        #[arg(long)]
        background: bool,
        /// Readout finesse for the background (defaults to the sample's).
        #[arg(long)]
        finesse: Option<f64>,
        /// Grid half-span in units of Γ_eff.
        #[arg(long, default_value_t = 8.0)]
        span_widths: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 1001)]
        points: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a Lorentzian line in a window of a spectrum CSV.
    Fit {
        /// Input CSV (as written by `spectrum synth`).
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Window center (Hz).
        #[arg(long)]
        center_hz: f64,
        /// Full window width (Hz).
        #[arg(long)]
        window_hz: f64,
    },
    /// Fit a window and convert the line area to a phonon occupancy.
    Occupancy {
        #[command(flatten)]
        sample: SampleArgs,
        /// Input CSV with a calibrated displacement PSD (m²/Hz).
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Window center (Hz).
        #[arg(long)]
        center_hz: f64,
        /// Full window width (Hz).
        #[arg(long)]
        window_hz: f64,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_)
        | Error::MissingParameter(_)
        | Error::Config(_)
        | Error::StepSize(_) => 2,
        Error::HeatingRegime(_)
        | Error::NonPhysicalRatio(_)
        | Error::ZeroPhaseNoise
        | Error::SubZeroPoint(_)
        | Error::DegenerateWindow(_) => 3,
        Error::NoConvergence(_) => 4,
    }
}

fn main() -> ExitCode {
    // die quietly when the consumer of a pipe goes away (e.g. `... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("valid JSON"));
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn sample_header(sample: &Sample, name: &str) -> Vec<(String, String)> {
    let mut h = vec![
        ("sample".to_string(), name.to_string()),
        ("omega_m_hz".to_string(), format!("{}", sample.omega_m_hz)),
        (
            "wavelength_m".to_string(),
            format!("{}", sample.wavelength_m),
        ),
        ("coupling".to_string(), format!("{}", sample.coupling)),
        ("n_index".to_string(), format!("{}", sample.n_index)),
        (
            "temperature_k".to_string(),
            format!("{}", sample.temperature_k),
        ),
    ];
    let mut opt = |key: &str, v: Option<f64>| {
        if let Some(v) = v {
            h.push((key.to_string(), format!("{v}")));
        }
    };
    opt("kappa_hz", sample.kappa_hz);
    opt("tau0_s", sample.tau0_s);
    opt("tau_ex_s", sample.tau_ex_s);
    opt("gamma_m_hz", sample.gamma_m_hz);
    opt("m_eff_kg", sample.m_eff_kg);
    opt("radius_m", sample.radius_m);
    opt("finesse", sample.finesse);
    h
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::CoolingRate {
            sample,
            detuning_hz,
            power_w,
        } => {
            let s = sample.load(&cli.config)?;
            let optical = s.optical()?;
            let mech = s.mechanical()?;
            let delta = detuning_hz.map_or(-mech.omega_m(), |d| TAU * d);
            let laser = LaserDrive::new(power_w, delta)?;
            let gamma_c = cooling::cooling_rate_general(&optical, &mech, &laser)?;
            let fig = params::derive(&optical, &mech, &Constants::codata())?;
            let mut out = json!({
                "sample": sample.sample,
                "detuning_hz": delta / TAU,
                "power_w": power_w,
                "gamma_c_hz": gamma_c / TAU,
                "coupled_fraction": fig.coupled_fraction,
                "coupled_power_w": fig.coupled_fraction * power_w,
            });
            if mech.gamma_m().is_some() {
                let res = cooling::cooling_factor(gamma_c, &mech, &optical)?;
                out["gamma_eff_hz"] = json!(res.gamma_eff / TAU);
                out["cooling_factor"] = json!(res.cooling_factor);
                out["amplification"] = json!(res.amplification);
                out["rate_below_linewidth"] = json!(res.rate_below_linewidth);
                out["within_entropy_bound"] = json!(res.within_entropy_bound);
                out["within_quality_bound"] = json!(res.within_quality_bound);
            }
            print_json(&out);
            Ok(ExitCode::SUCCESS)
        }

        Command::OptimizeDetuning { sample, power_w } => {
            let s = sample.load(&cli.config)?;
            let optical = s.optical()?;
            let mech = s.mechanical()?;
            let delta = cooling::optimal_detuning(&optical, &mech);
            let mut out = json!({
                "sample": sample.sample,
                "detuning_hz": delta / TAU,
                "detuning_over_omega_m": delta / mech.omega_m(),
                "normalized_rate": cooling::normalized_cooling_rate(
                    delta, optical.kappa(), mech.omega_m()),
            });
            if let Some(p) = power_w {
                let laser = LaserDrive::new(p, delta)?;
                out["gamma_c_hz"] =
                    json!(cooling::cooling_rate_general(&optical, &mech, &laser)? / TAU);
                out["power_w"] = json!(p);
            }
            print_json(&out);
            Ok(ExitCode::SUCCESS)
        }

        Command::Surface {
            sample,
            kappa_decades,
            kappa_points,
            detuning_span,
            detuning_points,
            out,
        } => {
            let s = sample.load(&cli.config)?;
            let mech = s.mechanical()?;
            let (lo, hi) = kappa_decades
                .split_once(':')
                .ok_or_else(|| Error::Config("--kappa-decades expects 'a:b'".into()))?;
            let lo: f64 = lo
                .parse()
                .map_err(|e| Error::Config(format!("bad decade '{lo}': {e}")))?;
            let hi: f64 = hi
                .parse()
                .map_err(|e| Error::Config(format!("bad decade '{hi}': {e}")))?;
            if !(hi > lo) || kappa_points < 2 || detuning_points < 2 {
                return Err(Error::Config(
                    "need hi > lo decades and at least 2 points per axis".into(),
                ));
            }
            let kappas: Vec<f64> = (0..kappa_points)
                .map(|i| {
                    TAU * 10f64.powf(lo + (hi - lo) * i as f64 / (kappa_points - 1) as f64)
                })
                .collect();
            let om = mech.omega_m();
            let detunings: Vec<f64> = (0..detuning_points)
                .map(|i| {
                    -detuning_span * om
                        + 2.0 * detuning_span * om * i as f64 / (detuning_points - 1) as f64
                })
                .collect();
            let surf = cooling::cooling_surface(&mech, &detunings, &kappas);
            write_file(&out, &surf.to_csv(&sample_header(&s, &sample.sample)))?;
            println!(
                "wrote {} x {} surface to {}",
                kappas.len(),
                detunings.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Limits {
            sample,
            detuning_hz,
        } => {
            let s = sample.load(&cli.config)?;
            let optical = s.optical()?;
            let mech = s.mechanical()?;
            let delta = detuning_hz.map_or(-mech.omega_m(), |d| TAU * d);
            let weights = quantum::sideband_weights(&optical, &mech, delta);
            let n_min = quantum::n_min_detailed_balance(&weights)?;
            let fig = params::derive(&optical, &mech, &Constants::codata())?;
            let regime = params::classify_regime(&optical, &mech);
            print_json(&json!({
                "sample": sample.sample,
                "detuning_hz": delta / TAU,
                "n_min_detailed_balance": n_min,
                "doppler_limit": quantum::doppler_limit(&optical, &mech),
                "rsb_limit": quantum::rsb_limit(&optical, &mech),
                "suppression_db": weights.suppression_db(),
                "sideband_ratio": weights.ratio(),
                "resolvedness": fig.resolvedness,
                "coupled_fraction": fig.coupled_fraction,
                "eta": fig.eta,
                "regime": regime.class,
            }));
            Ok(ExitCode::SUCCESS)
        }

        Command::Transmission {
            sample,
            beta,
            span,
            points,
            out,
            json: json_path,
        } => {
            let s = sample.load(&cli.config)?;
            let optical = s.optical()?;
            let mech = s.mechanical()?;
            let om = mech.omega_m();
            if points < 2 {
                return Err(Error::Config("need at least 2 grid points".into()));
            }
            let grid: Vec<f64> = (0..points)
                .map(|i| -span * om + 2.0 * span * om * i as f64 / (points - 1) as f64)
                .collect();
            let scan = cavity_field::transmission_scan(&grid, beta, s.coupling, &optical, &mech)?;
            let mut header = sample_header(&s, &sample.sample);
            header.push(("beta".to_string(), format!("{beta}")));
            write_file(&out, &scan.to_csv(&header))?;
            if let Some(path) = json_path {
                let payload = json!({
                    "sample": sample.sample,
                    "beta": beta,
                    "coupling": s.coupling,
                    "detuning_hz": scan.detunings.iter().map(|d| d / TAU).collect::<Vec<_>>(),
                    "transmission": scan.transmission,
                });
                write_file(&path, &serde_json::to_string_pretty(&payload).expect("valid JSON"))?;
            }
            println!("wrote {} points to {}", points, out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::FitBeta {
            weights,
            beta_max,
            sample,
        } => {
            let mut parsed = Vec::new();
            for pair in weights.split(',') {
                let (n, w) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("bad weight pair '{pair}'")))?;
                let n: i32 = n
                    .trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("bad order '{n}': {e}")))?;
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("bad weight '{w}': {e}")))?;
                parsed.push((n, w));
            }
            let fit = cavity_field::fit_modulation_index(&parsed, beta_max)?;
            let mut out = json!({
                "beta": fit.beta,
                "residual_rms": fit.residual_rms,
            });
            if let Some(name) = sample {
                let args = SampleArgs {
                    sample: name,
                    m_eff_kg: None,
                    radius_m: None,
                    gamma_m_hz: None,
                    coupling: None,
                    wavelength_nm: None,
                    temp_k: None,
                };
                let s = args.load(&cli.config)?;
                let optical = s.optical()?;
                let mech = s.mechanical()?;
                if optical.radius().is_some() {
                    out["x0_m"] =
                        json!(cavity_field::amplitude_from_beta(fit.beta, &optical, &mech)?);
                }
            }
            print_json(&out);
            Ok(ExitCode::SUCCESS)
        }

        Command::Sensitivity {
            sample,
            finesse,
            eta,
            pcav_w,
            max_freq_hz,
            points,
            out,
        } => {
            let s = sample.load(&cli.config)?;
            let optical = s.optical()?;
            let f = match finesse {
                Some(f) => f,
                None => optical.require_finesse()?,
            };
            let kappa = optical.kappa();
            let max_omega = max_freq_hz.map_or(10.0 * kappa, |f| TAU * f);
            if points < 2 {
                return Err(Error::Config("need at least 2 grid points".into()));
            }
            let consts = Constants::codata();
            let mut csv = String::new();
            let mut header = sample_header(&s, &sample.sample);
            header.push(("finesse".to_string(), format!("{f}")));
            header.push(("eta_det".to_string(), format!("{eta}")));
            header.push(("p_cav_w".to_string(), format!("{pcav_w}")));
            for (k, v) in &header {
                csv.push_str(&format!("# {k} = {v}\n"));
            }
            csv.push_str("frequency_hz,xmin_m_per_rthz\n");
            for i in 0..points {
                let omega = max_omega * i as f64 / (points - 1) as f64;
                let x = readout::shot_noise_sensitivity(
                    omega,
                    f,
                    eta,
                    pcav_w,
                    s.wavelength_m,
                    s.n_index,
                    kappa,
                    &consts,
                );
                csv.push_str(&format!("{},{}\n", omega / TAU, x));
            }
            write_file(&out, &csv)?;
            println!("wrote {} points to {}", points, out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Calibrate {
            sample,
            dphi_rad,
            freq_hz,
        } => {
            let s = sample.load(&cli.config)?;
            let optical = s.optical()?;
            let x = readout::calibrate(dphi_rad, TAU * freq_hz, &optical)?;
            print_json(&json!({
                "sample": sample.sample,
                "dphi_rad": dphi_rad,
                "freq_hz": freq_hz,
                "x_equiv_m": x,
            }));
            Ok(ExitCode::SUCCESS)
        }

        Command::Budget {
            sample,
            power_w,
            sphi,
            si,
            laser_freq_hz,
            rounded_constants,
        } => {
            let s = sample.load(&cli.config)?;
            let optical = s.optical()?;
            let mech = s.mechanical()?;
            let env = Environment::new(s.temperature_k)?;
            let consts = if rounded_constants {
                Constants::rounded()
            } else {
                Constants::codata()
            };
            let s_phi = sphi.unwrap_or(s.s_phi);
            let s_i = si.unwrap_or(s.s_i);
            let laser = LaserDrive::new(power_w, -mech.omega_m())?
                .with_phase_noise(s_phi)?
                .with_intensity_noise(s_i)?;
            let budget = noise::effective_occupancy(&optical, &mech, &laser, &env, &consts)?;
            let omega_laser = laser_freq_hz
                .map_or(optical.omega0() + laser.detuning, |f| TAU * f);
            let p_opt = noise::optimal_power(&env, &mech, s_phi, &optical, &consts);
            let n_min = noise::n_min_noise(&env, &mech, s_phi, &optical, omega_laser, &consts)?;
            print_json(&json!({
                "sample": sample.sample,
                "power_w": power_w,
                "s_phi_rad2_per_hz": s_phi,
                "s_i_per_hz": s_i,
                "temperature_k": s.temperature_k,
                "constants": if rounded_constants { "rounded" } else { "codata" },
                "s_f_phase_n2_per_hz": budget.s_f_phase,
                "s_f_intensity_n2_per_hz": budget.s_f_intensity,
                "s_f_thermal_n2_per_hz": budget.s_f_thermal,
                "t_laser_k": budget.t_laser,
                "t_eff_k": budget.t_eff,
                "n_floor": budget.n_floor,
                "gamma_cool_hz": budget.gamma_cool / TAU,
                "p_opt_w": p_opt.ok(),
                "n_min_noise": n_min,
                "laser_freq_hz": omega_laser / TAU,
                "warnings": budget.warnings,
            }));
            Ok(ExitCode::SUCCESS)
        }

        Command::Spectrum(cmd) => run_spectrum(cmd, &cli.config),

        Command::Heterodyne {
            sample,
            detuning_hz,
            n,
            aom_hz,
            gamma_eff_hz,
            points,
            out,
        } => {
            let s = sample.load(&cli.config)?;
            let optical = s.optical()?;
            let mech = s.mechanical()?;
            let om = mech.omega_m();
            let aom = TAU * aom_hz;
            if points < 2 {
                return Err(Error::Config("need at least 2 grid points".into()));
            }
            let grid: Vec<f64> = (0..points)
                .map(|i| {
                    aom - 1.5 * om + 3.0 * om * i as f64 / (points - 1) as f64
                })
                .collect();
            let h = spectra::heterodyne_spectrum(
                TAU * detuning_hz,
                n,
                aom,
                &optical,
                &mech,
                TAU * gamma_eff_hz,
                &grid,
            )?;
            let mut header = sample_header(&s, &sample.sample);
            header.push(("detuning_hz".to_string(), format!("{detuning_hz}")));
            header.push(("occupancy".to_string(), format!("{n}")));
            header.push(("aom_hz".to_string(), format!("{aom_hz}")));
            write_file(&out, &h.spectrum.to_csv(&header))?;
            print_json(&json!({
                "sample": sample.sample,
                "stokes_center_hz": h.stokes_center / TAU,
                "anti_stokes_center_hz": h.anti_stokes_center / TAU,
                "stokes_power": h.stokes_power,
                "anti_stokes_power": h.anti_stokes_power,
                "stokes_suppression_db":
                    10.0 * (h.anti_stokes_power / h.stokes_power).log10(),
                "out": out.display().to_string(),
            }));
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify => {
            let results = verify::run_all();
            for c in &results {
                println!("{}", c.report_line());
            }
            let passed = results.iter().filter(|c| c.passed).count();
            println!("{passed}/{} criteria passed", results.len());
            if passed == results.len() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn run_spectrum(cmd: SpectrumCommand, config: &Option<PathBuf>) -> Result<ExitCode, Error> {
    match cmd {
        SpectrumCommand::Synth {
            sample,
            t_eff_k,
            n_occupancy,
            gamma_eff_hz,
            background,
            finesse,
            span_widths,
            points,
            out,
        } => {
            let s = sample.load(config)?;
            let optical = s.optical()?;
            let mech = s.mechanical()?;
            let consts = Constants::codata();
            let om = mech.omega_m();
            let t_eff = match (t_eff_k, n_occupancy) {
                (Some(t), None) => t,
                (None, Some(n)) => consts.hbar * om * (n + 0.5) / consts.kb,
                (None, None) => s.temperature_k,
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let gamma_eff = TAU * gamma_eff_hz;
            if points < 2 {
                return Err(Error::Config("need at least 2 grid points".into()));
            }
            let grid: Vec<f64> = (0..points)
                .map(|i| {
                    om - span_widths * gamma_eff
                        + 2.0 * span_widths * gamma_eff * i as f64 / (points - 1) as f64
                })
                .collect();
            let bg = if background {
                Some(spectra::ShotNoiseBackground {
                    finesse: match finesse {
                        Some(f) => f,
                        None => optical.require_finesse()?,
                    },
                    eta_det: 0.5,
                    p_cav: 1e-6,
                    lambda_vacuum: s.wavelength_m,
                    n_index: s.n_index,
                    kappa: optical.kappa(),
                })
            } else {
                None
            };
            let mode = spectra::ThermalMode {
                mech,
                t_eff,
                gamma_eff,
            };
            let syn =
                spectra::synthesize(std::slice::from_ref(&mode), bg.as_ref(), &grid, &consts)?;
            let mut header = sample_header(&s, &sample.sample);
            header.push(("t_eff_k".to_string(), format!("{t_eff}")));
            header.push(("gamma_eff_hz".to_string(), format!("{gamma_eff_hz}")));
            write_file(&out, &syn.spectrum.to_csv(&header))?;
            let mut payload = json!({
                "sample": sample.sample,
                "t_eff_k": t_eff,
                "gamma_eff_hz": gamma_eff_hz,
                "points": points,
                "out": out.display().to_string(),
            });
            if let Some(db) = syn.peak_to_background_db.first() {
                payload["peak_to_background_db"] = json!(db);
            }
            print_json(&payload);
            Ok(ExitCode::SUCCESS)
        }

        SpectrumCommand::Fit {
            input,
            center_hz,
            window_hz,
        } => {
            let text = fs::read_to_string(&input)
                .map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
            let spec = spectra::Spectrum::from_csv(&text)?;
            let fit = fit_window(&spec, center_hz, window_hz)?;
            print_json(&fit_json(&fit));
            Ok(ExitCode::SUCCESS)
        }

        SpectrumCommand::Occupancy {
            sample,
            input,
            center_hz,
            window_hz,
        } => {
            let s = sample.load(config)?;
            let mech = s.mechanical()?;
            let text = fs::read_to_string(&input)
                .map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
            let spec = spectra::Spectrum::from_csv(&text)?;
            if spec.units != spectra::SpectrumUnits::DisplacementPsd {
                return Err(Error::InvalidParameter(
                    "occupancy extraction needs a calibrated displacement PSD (m²/Hz)".into(),
                ));
            }
            let fit = fit_window(&spec, center_hz, window_hz)?;
            let n = spectra::occupancy_from_spectrum(&fit, &mech, &Constants::codata())?;
            let mut payload = fit_json(&fit);
            payload["occupancy"] = json!(n);
            payload["sample"] = json!(sample.sample);
            print_json(&payload);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn fit_window(
    spec: &spectra::Spectrum,
    center_hz: f64,
    window_hz: f64,
) -> Result<spectra::LorentzianFit, Error> {
    let center = TAU * center_hz;
    let half = 0.5 * TAU * window_hz;
    spectra::fit_lorentzian(spec, (center - half, center + half))
}

fn fit_json(fit: &spectra::LorentzianFit) -> serde_json::Value {
    json!({
        "center_hz": fit.center / TAU,
        "width_hz": fit.width / TAU,
        "area": fit.area,
        "offset": fit.offset,
        "residual_rms": fit.residual_rms,
    })
}
