//! Large-scale path loss and small-scale Rayleigh fading.
//!
//! The direct link attenuates as `C d^-alpha`; the two-hop reflected link as
//! `C (d_i d_ui)^-alpha` (product-distance model), where `C` is the unit
//! distance free-space loss derived from carrier frequency and antenna gains.
//! Small-scale fading is drawn as circularly-symmetric complex Gaussian with
//! unit power, seeded per (frame, link) so that replays are bit-identical.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex channel amplitude.
pub type ComplexGain = Complex64;

/// Speed of light in m/s as used by the path-loss constant.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// RF parameters entering the unit-distance path loss.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathLossParams {
    /// Carrier frequency in Hz.
    pub f_hz: f64,
    /// Linear transmit antenna gain.
    pub gt: f64,
    /// Linear receive antenna gain.
    pub gr: f64,
    /// Path-loss exponent (>= 2).
    pub alpha: f64,
}

impl PathLossParams {
    pub fn new(f_hz: f64, gt: f64, gr: f64, alpha: f64) -> Result<Self> {
        if !(f_hz > 0.0) || !(gt > 0.0) || !(gr > 0.0) {
            return Err(Error::Channel(format!(
                "frequency and gains must be positive (f={f_hz}, gt={gt}, gr={gr})"
            )));
        }
        if !(alpha >= 2.0) {
            return Err(Error::Channel(format!("path-loss exponent {alpha} < 2")));
        }
        Ok(PathLossParams { f_hz, gt, gr, alpha })
    }

    /// Free-space defaults: 2.4 GHz, unit antenna gains, exponent 2.
    pub fn free_space() -> Self {
        PathLossParams { f_hz: 2.4e9, gt: 1.0, gr: 1.0, alpha: 2.0 }
    }
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self::free_space()
    }
}

/// Unit-distance free-space path loss: `C = (c sqrt(gt gr) / (4 pi f))^2`.
pub fn unit_pathloss(params: &PathLossParams) -> f64 {
    let num = SPEED_OF_LIGHT * (params.gt * params.gr).sqrt();
    (num / (4.0 * std::f64::consts::PI * params.f_hz)).powi(2)
}

/// Direct-link path loss `C d^-alpha`. `d` must be positive.
pub fn pathloss_direct(c: f64, d_m: f64, alpha: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::Channel(format!("non-positive distance {d_m}")));
    }
    Ok(c * d_m.powf(-alpha))
}

/// Reflected-link path loss `C (d_i d_ui)^-alpha` (product-distance model).
///
/// Defined as the direct-link loss at the product distance, so the
/// `reflected(a, b) == direct(a*b)` identity holds bit-exactly.
pub fn pathloss_reflected(c: f64, d_i_m: f64, d_ui_m: f64, alpha: f64) -> Result<f64> {
    if !(d_i_m > 0.0) || !(d_ui_m > 0.0) {
        return Err(Error::Channel(format!(
            "non-positive distance in reflected link ({d_i_m}, {d_ui_m})"
        )));
    }
    pathloss_direct(c, d_i_m * d_ui_m, alpha)
}

/// Normalized small-scale fading of one two-hop link: per-element gains of the
/// surface-to-receiver leg (`to_bs`) and the transmitter-to-surface leg
/// (`from_user`). Both vectors have one entry per reflecting element.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeChannel {
    pub to_bs: Vec<ComplexGain>,
    pub from_user: Vec<ComplexGain>,
}

impl CascadeChannel {
    pub fn new(to_bs: Vec<ComplexGain>, from_user: Vec<ComplexGain>) -> Result<Self> {
        if to_bs.is_empty() || to_bs.len() != from_user.len() {
            return Err(Error::Channel(format!(
                "cascade legs must be non-empty and equal length ({} vs {})",
                to_bs.len(),
                from_user.len()
            )));
        }
        Ok(CascadeChannel { to_bs, from_user })
    }

    pub fn len(&self) -> usize {
        self.to_bs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_bs.is_empty()
    }
}

/// Draw `n` i.i.d. CN(0,1) gains: independent real/imaginary parts of
/// variance 1/2 each, so `E|h|^2 = 1` (Rayleigh-distributed magnitude).
pub fn sample_cn01(rng: &mut impl rand::Rng, n: usize) -> Vec<ComplexGain> {
    let comp = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid stddev");
    (0..n)
        .map(|_| Complex64::new(comp.sample(rng), comp.sample(rng)))
        .collect()
}

/// Deterministic sub-seed for one (frame, link) stream.
///
/// SplitMix64-style mixing of the master seed with the component ids, so that
/// adding a method or link to a sweep never perturbs another stream's draws.
pub fn subseed(master: u64, parts: &[u64]) -> u64 {
    let mut state = master ^ 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        state = state.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
    }
    state
}

/// RNG for one sub-seeded stream.
pub fn stream_rng(master: u64, parts: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(subseed(master, parts))
}
