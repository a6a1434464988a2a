//! Analytic model set for resolved-sideband radiation-pressure cooling of a
//! whispering-gallery microresonator.
//!
//! The crate covers the full signal chain of such an experiment:
//!
//! - [`params`] — validated parameter bundles (optical mode, mechanical mode,
//!   laser drive, environment) and derived coupling figures,
//! - [`cooling`] — radiation-pressure cooling rates, detuning optimisation and
//!   cooling-factor bookkeeping,
//! - [`quantum`] — detailed-balance occupancy limits and sideband thermometry,
//! - [`cavity_field`] — steady-state field and DC transmission of a cavity
//!   whose radius oscillates harmonically (Bessel sideband spectra),
//! - [`readout`] — Hänsch–Couillaud polarization readout: Jones chain, error
//!   signal, shot-noise sensitivity and phase-modulation calibration,
//! - [`noise`] — laser phase/intensity noise heating and the noise-limited
//!   occupancy floor,
//! - [`spectra`] — displacement/heterodyne spectrum synthesis and Lorentzian
//!   fitting,
//! - [`oracle`] — brute-force time-domain integration of the driven-cavity
//!   equation of motion, used as ground truth for the analytic steady states,
//! - [`verify`] — the cross-check suite tying all of the above together.
//!
//! All frequencies are stored internally in angular units (rad/s); conversion
//! from ordinary frequency happens at the API boundary of downstream tools.

// validation guards are written `!(x > 0.0)` on purpose: they must reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference values in tests are frozen verbatim from 40-digit evaluations
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod bessel;
pub mod cavity_field;
pub mod config;
pub mod constants;
pub mod cooling;
pub mod error;
pub mod noise;
pub mod optimize;
pub mod oracle;
pub mod params;
pub mod quantum;
pub mod readout;
pub mod spectra;
pub mod verify;

pub use constants::{Constants, SPEED_OF_LIGHT};
pub use error::{Error, Result};
pub use params::{
    CouplingFigures, Environment, LaserDrive, MechanicalMode, OpticalMode, Regime, RegimeClass,
};
