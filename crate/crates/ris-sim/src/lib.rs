//! Uplink multi-RIS network simulator.
//!
//! A base station serves one desired user amid mobile interferers; a ring of
//! reconfigurable reflecting surfaces around it can each be switched ON or OFF
//! and steered through a quantized phase codebook. Because a passive surface
//! reflects desired and interfering signals alike, the controller predicts
//! user trajectories (a from-scratch two-layer LSTM trained on GPS traces) and
//! pre-computes, one horizon ahead, the activation vector and phase
//! configurations that maximize the desired user's SINR.
//!
//! The crate is organized bottom-up:
//!
//! - [`geom`]: geographic projection, distances, angular separation
//! - [`channel`]: path loss and seeded Rayleigh fading
//! - [`ris`]: phase codebooks, phase selection, reflection gain
//! - [`link`]: link budgets and SINR evaluation
//! - [`control`]: ON-OFF strategies (threshold rule, exhaustive oracle, baselines)
//! - [`trajectory`]: PLT ingestion, resampling, windowing, error metric
//! - [`predictor`]: LSTM regressor, Adam training, multi-step rollout
//! - [`sim`]: scenario assembly, frame loop, method-comparison sweeps
//! - [`synth`]: synthetic GPS walkers for demos and self-contained tests
//! - [`cli`]: the operator commands behind the `ris-sim` binary
//!
//! See the crate examples for one runnable walkthrough per capability.

pub mod channel;
pub mod cli;
pub mod control;
pub mod error;
pub(crate) mod fingerprint;
pub mod geom;
pub mod link;
pub mod predictor;
pub mod ris;
pub mod sim;
pub mod synth;
pub mod trajectory;

pub use error::{Error, Result};
