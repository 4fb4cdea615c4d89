//! Anomalies of random products of SL(2,R) matrices.
//!
//! A family `T_{λ,σ}` has an anomaly of order `k` at `λ = 0` when every
//! `k`-fold product is `±1` there. This crate classifies such anomalies,
//! computes the lowest-order invariant density of the phase dynamics and
//! the leading coefficient of the Lyapunov exponent, and estimates the
//! exponent by direct simulation.
//!
//! The crate is `no_std` with `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod math;
mod walk;

pub mod catalog;
pub mod classify;
pub mod error;
pub mod family;
pub mod jet;
pub mod lyapunov;
pub mod mat2;
pub mod measure;
pub mod phase;
pub mod poly;
pub mod quad;
pub mod rng;
pub mod spectral;

pub use classify::{classify_anomaly, AnomalyReport, AnomalyType, Degree};
pub use error::CoreError;
pub use family::{Atom, Factor, FamilySpec};
pub use jet::Jet2;
pub use mat2::Mat2;
pub use phase::Phase;
