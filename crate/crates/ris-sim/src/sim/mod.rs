//! Scenario assembly and the frame loop.
//!
//! A scenario is one base station at the origin, `R` reflecting surfaces
//! evenly spaced on a circle around it, and `1 + U_I` replayed GPS tracks
//! placed into an annular user region. Each frame covers one
//! pilot/configuration/transmission cycle: observe histories up to the
//! decision instant, let every strategy pick its activation vector and phase
//! configurations from the positions it trusts (predicted, stale, or true),
//! then score all of them on the true geometry one horizon later, under
//! identical fading draws.

mod frame;
pub mod predictors;
mod sweep;

pub use frame::{run_frame, FrameResult, MethodOutcome};
pub use predictors::{LinearPredictor, LstmPredictor, PositionPredictor, TruthPredictor};
pub use sweep::{
    run_sweep, write_rows_csv, PointSummary, RunManifest, SweepKind, SweepOutput, SweepRow,
    SweepSpec, UserPlacement,
};

use serde::{Deserialize, Serialize};

use crate::channel::{stream_rng, PathLossParams};
use crate::error::{Error, Result};
use crate::geom::{to_local, GeoPoint, LocalPoint};
use crate::trajectory::{segment_and_resample, Trajectory, MAX_GAP_S};
use rand::Rng;

/// Full parameterization of one simulation scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of reflecting surfaces on the ring.
    pub ris_count: usize,
    /// Ring radius around the base station, meters.
    pub ris_radius_m: f64,
    /// Reflecting elements per surface.
    pub elements: usize,
    /// Transmit power of every user, watts.
    pub p_tx_w: f64,
    /// Noise power, watts.
    pub noise_w: f64,
    /// Number of interfering users (one desired user is implicit).
    pub interferers: usize,
    /// Phase quantization bits.
    pub phase_bits: u32,
    /// Resample step, seconds.
    pub dt_s: f64,
    /// Prediction horizon, seconds; must be a multiple of `dt_s`.
    pub horizon_s: f64,
    /// Reference angle of the reflected-power attenuation, degrees.
    pub lambda0_deg: f64,
    /// History window length in points.
    pub in_len: usize,
    /// Inner radius of the user region, meters.
    pub region_min_m: f64,
    /// Outer radius of the user region, meters.
    pub region_max_m: f64,
    /// Maximum diameter a placed track may span, meters.
    pub track_span_m: f64,
    /// Direct-link path-loss parameters.
    pub pathloss_direct: PathLossParams,
    /// Reflected-link path-loss parameters (defaults equal to direct).
    pub pathloss_reflected: PathLossParams,
    /// Master seed for fading draws and placement.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            ris_count: 10,
            ris_radius_m: 10.0,
            elements: 600,
            p_tx_w: 1.0,
            noise_w: 1e-12,
            interferers: 10,
            phase_bits: 2,
            dt_s: 5.0,
            horizon_s: 50.0,
            lambda0_deg: 5.0,
            in_len: 8,
            region_min_m: 50.0,
            region_max_m: 500.0,
            track_span_m: 100.0,
            pathloss_direct: PathLossParams::free_space(),
            pathloss_reflected: PathLossParams::free_space(),
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.ris_count == 0 {
            problems.push("ris_count must be at least 1".to_string());
        }
        if self.elements == 0 {
            problems.push("elements must be at least 1".to_string());
        }
        if !(self.p_tx_w > 0.0) || !(self.noise_w > 0.0) {
            problems.push("p_tx_w and noise_w must be positive".to_string());
        }
        if !(self.dt_s > 0.0) {
            problems.push("dt_s must be positive".to_string());
        }
        let steps = self.horizon_s / self.dt_s;
        if !(steps >= 1.0) || (steps - steps.round()).abs() > 1e-9 {
            problems.push(format!(
                "horizon_s {} must be a positive multiple of dt_s {}",
                self.horizon_s, self.dt_s
            ));
        }
        if !(1..=8).contains(&self.phase_bits) {
            problems.push(format!("phase_bits {} outside 1..=8", self.phase_bits));
        }
        if self.in_len < 2 {
            problems.push("in_len must be at least 2".to_string());
        }
        if !(self.region_min_m > self.ris_radius_m) {
            problems.push("region_min_m must exceed ris_radius_m".to_string());
        }
        if !(self.region_max_m > self.region_min_m + self.track_span_m) {
            problems.push("user region too narrow for track_span_m".to_string());
        }
        if !(self.lambda0_deg > 0.0 && self.lambda0_deg <= 180.0) {
            problems.push(format!("lambda0_deg {} outside (0, 180]", self.lambda0_deg));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Horizon expressed in resample steps.
    pub fn horizon_steps(&self) -> usize {
        (self.horizon_s / self.dt_s).round() as usize
    }

    pub fn lambda0_rad(&self) -> f64 {
        self.lambda0_deg.to_radians()
    }

    /// Total users including the desired one.
    pub fn users(&self) -> usize {
        self.interferers + 1
    }
}

/// One replayed track with its affine placement into the scenario plane.
#[derive(Debug, Clone)]
pub struct PlacedUser {
    pub name: String,
    /// Resampled track, timestamps rebased to start at 0.
    pub track: Trajectory,
    /// Scale applied to the centered local track.
    pub scale: f64,
    /// Placed centroid position.
    pub offset: LocalPoint,
    geo_origin: GeoPoint,
    centroid: LocalPoint,
}

impl PlacedUser {
    /// Map a geographic position through this user's placement transform.
    pub fn place(&self, p: &GeoPoint) -> Result<LocalPoint> {
        let l = to_local(&self.geo_origin, p)?;
        Ok(LocalPoint::new(
            self.offset.x + self.scale * (l.x - self.centroid.x),
            self.offset.y + self.scale * (l.y - self.centroid.y),
        ))
    }

    /// Placed position at a rebased track time.
    pub fn position_at(&self, t: f64) -> Result<LocalPoint> {
        self.place(&self.track.at(t)?)
    }
}

/// A fully assembled scenario ready for frame evaluation.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub ris_positions: Vec<LocalPoint>,
    /// Index 0 is the desired user.
    pub users: Vec<PlacedUser>,
}

/// Build a scenario from raw tracks: `tracks[0]` is the desired user, the
/// rest are interferers (their count must match the config).
///
/// Each raw track is gap-split and resampled at `dt_s`; the longest segment
/// is replayed. All tracks are projected with the desired user's centroid as
/// the geographic origin, then independently shrunk to `track_span_m` and
/// translated onto deterministic seed-derived spots inside the user annulus.
pub fn build_scenario(config: &ScenarioConfig, tracks: Vec<(String, Trajectory)>) -> Result<Scenario> {
    config.validate()?;
    if tracks.len() != config.users() {
        return Err(Error::Sim(format!(
            "need {} tracks (1 desired + {} interferers), got {}",
            config.users(),
            config.interferers,
            tracks.len()
        )));
    }

    let min_points = config.in_len + config.horizon_steps() + 1;
    let mut resampled: Vec<(String, Trajectory)> = Vec::with_capacity(tracks.len());
    for (name, raw) in tracks {
        let segment = segment_and_resample(&raw, config.dt_s, MAX_GAP_S)
            .into_iter()
            .max_by_key(|s| s.len())
            .ok_or_else(|| Error::Sim(format!("track '{name}' too short to resample")))?;
        if segment.len() < min_points {
            return Err(Error::Sim(format!(
                "track '{name}' covers {} steps, need {min_points} for one frame",
                segment.len()
            )));
        }
        let t0 = segment.points()[0].t;
        let rebased = Trajectory::new(
            segment
                .points()
                .iter()
                .map(|p| GeoPoint::new(p.lat, p.lon, p.t - t0))
                .collect(),
        )?;
        resampled.push((name, rebased));
    }

    // geographic origin: centroid of the desired user's replayed window
    let desired = &resampled[0].1;
    let n = desired.len() as f64;
    let geo_origin = GeoPoint::fixed(
        desired.points().iter().map(|p| p.lat).sum::<f64>() / n,
        desired.points().iter().map(|p| p.lon).sum::<f64>() / n,
    );

    let user_count = resampled.len();
    let mut users = Vec::with_capacity(user_count);
    for (u, (name, track)) in resampled.into_iter().enumerate() {
        let locals = track
            .points()
            .iter()
            .map(|p| to_local(&geo_origin, p))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Sim(format!("track '{name}' outside projectable range: {e}")))?;
        let ln = locals.len() as f64;
        let centroid = LocalPoint::new(
            locals.iter().map(|p| p.x).sum::<f64>() / ln,
            locals.iter().map(|p| p.y).sum::<f64>() / ln,
        );
        let span = locals
            .iter()
            .map(|p| p.dist(&centroid))
            .fold(0.0f64, f64::max)
            .max(1e-6);
        let scale = (config.track_span_m / 2.0 / span).min(1.0);
        let placed_span = scale * span;

        let mut rng = stream_rng(config.seed, &[u64::from_le_bytes(*b"placeusr"), u as u64]);
        let r_lo = config.region_min_m + placed_span;
        let r_hi = config.region_max_m - placed_span;
        if !(r_hi > r_lo) {
            return Err(Error::Sim(format!(
                "track '{name}' span {placed_span:.1} m does not fit the user region"
            )));
        }
        let radius = rng.random_range(r_lo..r_hi);
        let sector = std::f64::consts::TAU / user_count as f64;
        let bearing = sector * u as f64 + rng.random_range(-0.3..0.3) * sector;
        let offset = LocalPoint::new(radius * bearing.cos(), radius * bearing.sin());

        users.push(PlacedUser { name, track, scale, offset, geo_origin, centroid });
    }

    let ris_positions = (0..config.ris_count)
        .map(|i| {
            let angle = std::f64::consts::TAU * i as f64 / config.ris_count as f64;
            LocalPoint::new(
                config.ris_radius_m * angle.cos(),
                config.ris_radius_m * angle.sin(),
            )
        })
        .collect();

    Ok(Scenario { config: config.clone(), ris_positions, users })
}

impl Scenario {
    /// Frames available given the shortest replayed track.
    pub fn frame_count(&self) -> usize {
        let shortest = self.users.iter().map(|u| u.track.len()).min().unwrap_or(0);
        let needed = self.config.in_len + self.config.horizon_steps();
        shortest.saturating_sub(needed) + usize::from(shortest >= needed)
    }

    /// Decision instant of frame `f` (rebased seconds).
    pub fn t_decide(&self, frame: usize) -> f64 {
        (self.config.in_len - 1 + frame) as f64 * self.config.dt_s
    }

    /// Evaluation instant of frame `f`.
    pub fn t_eval(&self, frame: usize) -> f64 {
        self.t_decide(frame) + self.config.horizon_s
    }

    /// Same scenario at a different transmit power.
    pub fn with_power(&self, p_tx_w: f64) -> Scenario {
        let mut s = self.clone();
        s.config.p_tx_w = p_tx_w;
        s
    }

    /// Same scenario with a different element count per surface.
    pub fn with_elements(&self, elements: usize) -> Scenario {
        let mut s = self.clone();
        s.config.elements = elements;
        s
    }
}
