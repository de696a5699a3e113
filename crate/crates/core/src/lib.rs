//! Full counting statistics and thermodynamic uncertainty relations for
//! three- and four-level maser heat engines.
//!
//! The pipeline is: [`models`] builds the χ-tilted Liouvillian of a chosen
//! engine, [`fcs`] turns it into the mean and variance of the photon
//! current, [`observables`] forms σ, Q and R, and [`sweep`] maps all of
//! that over parameter grids and random draws.

// `!(x > y)` is used deliberately so that NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod fcs;
pub mod io;
pub mod linalg;
pub mod models;
pub mod observables;
pub mod scalar;
pub mod sweep;
pub mod validate;

pub use error::{Result, TurError};
pub use fcs::{cumulants, Cumulants, FcsOptions, Method, TrajectoryOptions};
pub use models::{
    build_tilted_liouvillian, steady_state, EngineParams, LevelFrequencies, ModelKind,
    TiltedLiouvillian,
};
pub use observables::{tur_q, tur_q_with, TurOptions, TurReport};
pub use scalar::Precision;
pub use sweep::{q_histogram, Histogram, SweepSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
