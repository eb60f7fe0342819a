//! Link budget and SINR evaluation.
//!
//! A [`LinkBudget`] captures one instant of the network: transmit power, noise
//! power, the path-loss-scaled direct gain of every user, and per (user,
//! surface) two-hop channels with their angle-attenuation factors. The SINR of
//! the desired user is the ratio of its received power to the summed
//! interferer powers plus noise; interferers add in power (independent data
//! streams), each through the same phase configurations as the desired signal.

use crate::channel::{CascadeChannel, ComplexGain};
use crate::error::{Error, Result};
use crate::ris::{reflect_gain, PhaseConfig};

/// Binary per-surface activation states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OnOffVector {
    v: Vec<bool>,
}

impl OnOffVector {
    pub fn new(v: Vec<bool>) -> Self {
        OnOffVector { v }
    }

    pub fn all_off(r: usize) -> Self {
        OnOffVector { v: vec![false; r] }
    }

    pub fn all_on(r: usize) -> Self {
        OnOffVector { v: vec![true; r] }
    }

    /// Only surface `i` active.
    pub fn only(r: usize, i: usize) -> Self {
        let mut v = vec![false; r];
        v[i] = true;
        OnOffVector { v }
    }

    /// Decode a bitmask; bit `i` drives surface `i`.
    pub fn from_mask(r: usize, mask: u64) -> Self {
        OnOffVector {
            v: (0..r).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.v[i]
    }

    pub fn set(&mut self, i: usize, on: bool) {
        self.v[i] = on;
    }

    pub fn count_on(&self) -> usize {
        self.v.iter().filter(|&&b| b).count()
    }

    pub fn states(&self) -> &[bool] {
        &self.v
    }

    /// Bit-string form, surface 0 first ("1011...").
    pub fn bit_string(&self) -> String {
        self.v.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl std::fmt::Display for OnOffVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.bit_string())
    }
}

/// One user's two-hop channel through one surface, path-loss scaled.
#[derive(Debug, Clone)]
pub struct ScaledCascade {
    /// `sqrt(eta_ui) h_i` on the surface-to-BS leg and `h_ui` on the
    /// user-to-surface leg.
    pub channel: CascadeChannel,
    /// Angle-dependent reflected-power factor in (0, 1].
    pub atten: f64,
}

/// Direct gain plus per-surface cascades of one user.
#[derive(Debug, Clone)]
pub struct UserChannel {
    /// `sqrt(eta_u) g_u`.
    pub direct: ComplexGain,
    /// One entry per surface.
    pub cascades: Vec<ScaledCascade>,
}

impl UserChannel {
    /// Per-element products `sqrt(atten) to_bs[n] from_user[n]` for surface `i`
    /// -- the cascade vector that phase selection optimizes over.
    pub fn cascade_products(&self, i: usize) -> Vec<ComplexGain> {
        let sc = &self.cascades[i];
        let a = sc.atten.sqrt();
        sc.channel
            .to_bs
            .iter()
            .zip(&sc.channel.from_user)
            .map(|(b, u)| a * b * u)
            .collect()
    }
}

/// Full RF description of one simulation instant.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    /// Transmit power in watts (every user transmits at this power).
    pub p_tx: f64,
    /// Noise power in watts.
    pub noise: f64,
    /// The desired user.
    pub desired: UserChannel,
    /// The interfering users.
    pub interferers: Vec<UserChannel>,
}

impl LinkBudget {
    /// Number of surfaces.
    pub fn surfaces(&self) -> usize {
        self.desired.cascades.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_tx > 0.0) || !(self.noise > 0.0) {
            return Err(Error::Link(format!(
                "powers must be positive (p_tx={}, noise={})",
                self.p_tx, self.noise
            )));
        }
        let r = self.surfaces();
        for (m, u) in self.interferers.iter().enumerate() {
            if u.cascades.len() != r {
                return Err(Error::Link(format!(
                    "interferer {m} has {} cascades, expected {r}",
                    u.cascades.len()
                )));
            }
        }
        Ok(())
    }

    fn check_dims(&self, v: &OnOffVector, configs: &[PhaseConfig]) -> Result<()> {
        let r = self.surfaces();
        if v.len() != r || configs.len() != r {
            return Err(Error::Link(format!(
                "dimension mismatch: {} surfaces, |v| = {}, |configs| = {}",
                r,
                v.len(),
                configs.len()
            )));
        }
        Ok(())
    }
}

/// Per-surface reflected gains of every user under fixed phase configurations.
///
/// The reflected gain of a surface does not depend on the ON-OFF vector, so
/// strategies that evaluate many activation patterns compute this once. All
/// SINR values in the crate flow through [`ReflectGains::sinr`], keeping
/// repeated evaluations of identical inputs bit-identical.
#[derive(Debug, Clone)]
pub struct ReflectGains {
    p_tx: f64,
    noise: f64,
    desired_direct: ComplexGain,
    desired_refl: Vec<ComplexGain>,
    interferers: Vec<(ComplexGain, Vec<ComplexGain>)>,
}

impl ReflectGains {
    pub fn compute(budget: &LinkBudget, configs: &[PhaseConfig]) -> Result<Self> {
        budget.validate()?;
        let r = budget.surfaces();
        if configs.len() != r {
            return Err(Error::Link(format!(
                "{} phase configs for {} surfaces",
                configs.len(),
                r
            )));
        }
        let per_user = |u: &UserChannel| -> Result<Vec<ComplexGain>> {
            u.cascades
                .iter()
                .zip(configs)
                .map(|(sc, cfg)| reflect_gain(cfg, &sc.channel, sc.atten))
                .collect()
        };
        Ok(ReflectGains {
            p_tx: budget.p_tx,
            noise: budget.noise,
            desired_direct: budget.desired.direct,
            desired_refl: per_user(&budget.desired)?,
            interferers: budget
                .interferers
                .iter()
                .map(|u| Ok((u.direct, per_user(u)?)))
                .collect::<Result<_>>()?,
        })
    }

    fn combine(direct: ComplexGain, refl: &[ComplexGain], v: &OnOffVector) -> ComplexGain {
        let mut amp = direct;
        for (i, r) in refl.iter().enumerate() {
            if v.get(i) {
                amp += r;
            }
        }
        amp
    }

    /// Desired-signal amplitude under activation `v`.
    pub fn amplitude(&self, v: &OnOffVector) -> ComplexGain {
        Self::combine(self.desired_direct, &self.desired_refl, v)
    }

    /// Aggregate interference power in watts under activation `v`.
    pub fn interference(&self, v: &OnOffVector) -> f64 {
        self.interference_at(v, self.p_tx)
    }

    fn interference_at(&self, v: &OnOffVector, p_tx: f64) -> f64 {
        let mut acc = 0.0;
        for (direct, refl) in &self.interferers {
            acc += Self::combine(*direct, refl, v).norm_sqr();
        }
        p_tx * acc
    }

    /// SINR of the desired user under activation `v`.
    pub fn sinr(&self, v: &OnOffVector) -> f64 {
        self.sinr_at(v, self.p_tx)
    }

    /// SINR at an alternative transmit power (the gains do not depend on it).
    pub fn sinr_at(&self, v: &OnOffVector, p_tx: f64) -> f64 {
        p_tx * self.amplitude(v).norm_sqr() / (self.interference_at(v, p_tx) + self.noise)
    }

    pub fn surfaces(&self) -> usize {
        self.desired_refl.len()
    }

    pub fn p_tx(&self) -> f64 {
        self.p_tx
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }
}

/// Received desired-signal amplitude: direct gain plus the active surfaces'
/// reflected gains.
pub fn desired_amplitude(
    budget: &LinkBudget,
    v: &OnOffVector,
    configs: &[PhaseConfig],
) -> Result<ComplexGain> {
    budget.check_dims(v, configs)?;
    Ok(ReflectGains::compute(budget, configs)?.amplitude(v))
}

/// Aggregate interference power in watts: interferers add in power, each seen
/// through its own direct path plus the active surfaces.
pub fn interference_power(
    budget: &LinkBudget,
    v: &OnOffVector,
    configs: &[PhaseConfig],
) -> Result<f64> {
    budget.check_dims(v, configs)?;
    Ok(ReflectGains::compute(budget, configs)?.interference(v))
}

/// SINR of the desired user. Never divides by zero (noise > 0).
pub fn sinr(budget: &LinkBudget, v: &OnOffVector, configs: &[PhaseConfig]) -> Result<f64> {
    budget.check_dims(v, configs)?;
    Ok(ReflectGains::compute(budget, configs)?.sinr(v))
}

/// SINR via the direct links only (every surface off).
///
/// Mirrors the all-off evaluation path exactly: the two agree bit-for-bit.
pub fn sinr_direct(budget: &LinkBudget) -> Result<f64> {
    budget.validate()?;
    let mut acc = 0.0;
    for u in &budget.interferers {
        acc += u.direct.norm_sqr();
    }
    let interference = budget.p_tx * acc;
    Ok(budget.p_tx * budget.desired.direct.norm_sqr() / (interference + budget.noise))
}

/// `10 log10(x)` helper for SINR reporting.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
