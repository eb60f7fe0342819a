//! GPS trajectory ingestion and dataset construction.
//!
//! Parses PLT track files (six header lines, then
//! `lat,lon,0,altitude,days,date,time` records), resamples each track onto a
//! uniform time grid by linear interpolation -- splitting at recording gaps
//! rather than interpolating across them -- and slices the result into
//! fixed-length sliding windows for one-step-ahead training. Also provides
//! the per-coordinate z-score normalization and the mean great-circle error
//! metric used for evaluation.

mod dataset;
mod plt;

pub use dataset::{
    build_dataset, split_files, Dataset, DatasetConfig, DatasetManifest, FileEntry, SegmentRecord,
    Split, MANIFEST_VERSION,
};
pub use plt::{parse_plt, ParsedPlt};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{haversine_m, GeoPoint};

/// Source gaps longer than this are never interpolated across; the track is
/// split instead (GPS dropouts would otherwise fabricate motion).
pub const MAX_GAP_S: f64 = 60.0;

/// A time-ordered GPS track with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<GeoPoint>,
}

impl Trajectory {
    /// Build from points; timestamps must be strictly increasing and at least
    /// two points are required.
    pub fn new(points: Vec<GeoPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Trajectory(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        for w in points.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::Trajectory(format!(
                    "timestamps not strictly increasing at t={}",
                    w[1].t
                )));
            }
        }
        Ok(Trajectory { points })
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.points.last().unwrap().t - self.points.first().unwrap().t
    }

    /// Position at time `t` by linear interpolation between neighbors.
    /// `t` must lie within the track's time span.
    pub fn at(&self, t: f64) -> Result<GeoPoint> {
        let first = self.points.first().unwrap();
        let last = self.points.last().unwrap();
        if t < first.t || t > last.t {
            return Err(Error::Trajectory(format!(
                "time {t} outside track span [{}, {}]",
                first.t, last.t
            )));
        }
        let idx = self.points.partition_point(|p| p.t <= t);
        if idx == 0 {
            return Ok(*first);
        }
        if idx == self.points.len() {
            return Ok(*last);
        }
        let (a, b) = (&self.points[idx - 1], &self.points[idx]);
        let w = (t - a.t) / (b.t - a.t);
        Ok(GeoPoint {
            lat: a.lat + w * (b.lat - a.lat),
            lon: a.lon + w * (b.lon - a.lon),
            t,
        })
    }
}

/// Resample one gap-free track onto the uniform grid `t0, t0+dt, ...` by
/// linear interpolation. The final grid point is the last one at or before
/// the track end, so endpoints are preserved within one `dt`.
pub fn resample(traj: &Trajectory, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::Trajectory(format!("resample step {dt} must be positive")));
    }
    if traj.duration_s() < dt {
        return Err(Error::Trajectory(format!(
            "track duration {:.1}s shorter than resample step {dt}s",
            traj.duration_s()
        )));
    }
    let t0 = traj.points.first().unwrap().t;
    let steps = (traj.duration_s() / dt).floor() as usize;
    let points = (0..=steps)
        .map(|k| traj.at(t0 + k as f64 * dt))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(points)
}

/// Split a raw track at recording gaps larger than `max_gap_s`, then resample
/// each piece at `dt`. Pieces too short to resample are dropped.
pub fn segment_and_resample(traj: &Trajectory, dt: f64, max_gap_s: f64) -> Vec<Trajectory> {
    let mut segments = Vec::new();
    let mut start = 0;
    for i in 1..traj.points.len() {
        if traj.points[i].t - traj.points[i - 1].t > max_gap_s {
            segments.push(&traj.points[start..i]);
            start = i;
        }
    }
    segments.push(&traj.points[start..]);

    segments
        .into_iter()
        .filter(|s| s.len() >= 2)
        .filter_map(|s| {
            let t = Trajectory::new(s.to_vec()).ok()?;
            resample(&t, dt).ok()
        })
        .collect()
}

/// One supervised sample: a fixed-length input window and the point
/// `horizon` steps past its end.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    /// `(lat, lon)` pairs, oldest first.
    pub input: Vec<[f64; 2]>,
    /// The prediction target.
    pub target: [f64; 2],
}

/// Slice a resampled track into overlapping windows with stride 1.
///
/// Yields `len - in_len - horizon + 1` samples; shorter tracks yield none.
pub fn make_windows(traj: &Trajectory, in_len: usize, horizon: usize) -> Vec<WindowSample> {
    assert!(in_len >= 1 && horizon >= 1);
    let pts = traj.points();
    if pts.len() < in_len + horizon {
        return Vec::new();
    }
    (0..=pts.len() - in_len - horizon)
        .map(|start| WindowSample {
            input: pts[start..start + in_len].iter().map(|p| [p.lat, p.lon]).collect(),
            target: {
                let t = &pts[start + in_len + horizon - 1];
                [t.lat, t.lon]
            },
        })
        .collect()
}

/// Per-coordinate z-score statistics, computed on the training split only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean_lat: f64,
    pub mean_lon: f64,
    pub std_lat: f64,
    pub std_lon: f64,
}

impl NormStats {
    /// Fit from `(lat, lon)` pairs. Errors when a coordinate is constant
    /// (zero standard deviation cannot normalize).
    pub fn fit(points: &[[f64; 2]]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Trajectory("no points to fit normalization".into()));
        }
        let n = points.len() as f64;
        let mean_lat = points.iter().map(|p| p[0]).sum::<f64>() / n;
        let mean_lon = points.iter().map(|p| p[1]).sum::<f64>() / n;
        let var_lat = points.iter().map(|p| (p[0] - mean_lat).powi(2)).sum::<f64>() / n;
        let var_lon = points.iter().map(|p| (p[1] - mean_lon).powi(2)).sum::<f64>() / n;
        let (std_lat, std_lon) = (var_lat.sqrt(), var_lon.sqrt());
        // 1e-12 deg is ~0.1 um of motion: constant up to summation noise
        if std_lat < 1e-12 || std_lon < 1e-12 {
            return Err(Error::Trajectory(
                "zero standard deviation: coordinates are constant".into(),
            ));
        }
        Ok(NormStats { mean_lat, mean_lon, std_lat, std_lon })
    }

    pub fn normalize(&self, p: [f64; 2]) -> [f64; 2] {
        [
            (p[0] - self.mean_lat) / self.std_lat,
            (p[1] - self.mean_lon) / self.std_lon,
        ]
    }

    pub fn denormalize(&self, z: [f64; 2]) -> [f64; 2] {
        [
            z[0] * self.std_lat + self.mean_lat,
            z[1] * self.std_lon + self.mean_lon,
        ]
    }
}

/// Arithmetic mean of pointwise great-circle distances, in meters.
pub fn mean_haversine_error(pred: &[GeoPoint], truth: &[GeoPoint]) -> Result<f64> {
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(Error::Trajectory(format!(
            "length mismatch: {} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| haversine_m(p, t))
        .sum::<f64>()
        / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_track(n: usize, dt: f64) -> Trajectory {
        Trajectory::new(
            (0..n)
                .map(|k| GeoPoint::new(39.98 + 1e-5 * k as f64, 116.32 + 2e-5 * k as f64, k as f64 * dt))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn trajectory_rejects_non_monotone_timestamps() {
        let pts = vec![
            GeoPoint::new(39.98, 116.32, 0.0),
            GeoPoint::new(39.98, 116.32, 0.0),
        ];
        assert!(Trajectory::new(pts).is_err());
        assert!(Trajectory::new(vec![GeoPoint::new(39.98, 116.32, 0.0)]).is_err());
    }

    #[test]
    fn resample_is_identity_on_uniform_track() {
        let t = linear_track(10, 5.0);
        let r = resample(&t, 5.0).unwrap();
        assert_eq!(r.points(), t.points());
    }

    #[test]
    fn resample_midpoint_is_arithmetic_mean() {
        let t = Trajectory::new(vec![
            GeoPoint::new(39.98, 116.32, 0.0),
            GeoPoint::new(39.99, 116.34, 10.0),
        ])
        .unwrap();
        let r = resample(&t, 5.0).unwrap();
        assert_eq!(r.len(), 3);
        assert!((r.points()[1].lat - 39.985).abs() < 1e-12);
        assert!((r.points()[1].lon - 116.33).abs() < 1e-12);
        assert_eq!(r.points()[1].t, 5.0);
    }

    #[test]
    fn resample_rejects_short_track() {
        let t = Trajectory::new(vec![
            GeoPoint::new(39.98, 116.32, 0.0),
            GeoPoint::new(39.98, 116.32, 2.0),
        ])
        .unwrap();
        assert!(resample(&t, 5.0).is_err());
    }

    #[test]
    fn gaps_split_the_track_without_interpolation() {
        // 0..50s, then a 200s dropout, then 250..300s: two segments.
        let mut pts: Vec<GeoPoint> =
            (0..=10).map(|k| GeoPoint::new(39.98, 116.32 + 1e-5 * k as f64, k as f64 * 5.0)).collect();
        pts.extend((0..=10).map(|k| GeoPoint::new(39.99, 116.40 + 1e-5 * k as f64, 250.0 + k as f64 * 5.0)));
        let t = Trajectory::new(pts).unwrap();
        let segs = segment_and_resample(&t, 5.0, MAX_GAP_S);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].len(), 11);
        assert_eq!(segs[1].len(), 11);
        // no resampled point falls inside the dropout
        for s in &segs {
            for p in s.points() {
                assert!(p.t <= 50.0 || p.t >= 250.0, "interpolated across gap at t={}", p.t);
            }
        }
    }

    #[test]
    fn window_counts() {
        assert_eq!(make_windows(&linear_track(9, 5.0), 8, 1).len(), 1);
        assert_eq!(make_windows(&linear_track(20, 5.0), 8, 1).len(), 12);
        assert!(make_windows(&linear_track(8, 5.0), 8, 1).is_empty());
    }

    #[test]
    fn window_target_is_the_next_point() {
        let t = linear_track(12, 5.0);
        for (s, w) in make_windows(&t, 8, 1).iter().enumerate() {
            let expect = &t.points()[s + 8];
            assert_eq!(w.target, [expect.lat, expect.lon], "window {s}");
            assert_eq!(w.input.len(), 8);
            // target never leaks into the input
            assert!(w.input.iter().all(|p| *p != w.target));
        }
    }

    #[test]
    fn normalization_round_trip() {
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|k| [39.98 + 1e-4 * k as f64, 116.32 - 2e-4 * k as f64])
            .collect();
        let stats = NormStats::fit(&pts).unwrap();
        let mean = [stats.mean_lat, stats.mean_lon];
        let z = stats.normalize(mean);
        assert!(z[0].abs() < 1e-12 && z[1].abs() < 1e-12);
        for p in &pts {
            let back = stats.denormalize(stats.normalize(*p));
            assert!((back[0] - p[0]).abs() / p[0].abs() < 1e-12);
            assert!((back[1] - p[1]).abs() / p[1].abs() < 1e-12);
        }
    }

    #[test]
    fn normalization_rejects_constant_coordinate() {
        let pts = vec![[39.98, 116.32]; 10];
        assert!(NormStats::fit(&pts).is_err());
    }

    #[test]
    fn mean_error_values() {
        let a = vec![GeoPoint::fixed(39.98, 116.32)];
        assert_eq!(mean_haversine_error(&a, &a).unwrap(), 0.0);

        let pred = vec![GeoPoint::fixed(0.0, 0.0)];
        let truth = vec![GeoPoint::fixed(0.0, 1.0)];
        let e = mean_haversine_error(&pred, &truth).unwrap();
        assert!((e - 111_194.9).abs() < 0.1, "got {e}");

        // mean of a 0 m and a ~100 m error
        let p2 = vec![GeoPoint::fixed(0.0, 0.0), GeoPoint::fixed(0.0, 0.0)];
        let t2 = vec![GeoPoint::fixed(0.0, 0.0), GeoPoint::fixed(0.0, 100.0 / 111_194.92664455873)];
        let e2 = mean_haversine_error(&p2, &t2).unwrap();
        assert!((e2 - 50.0).abs() < 1e-6, "got {e2}");

        assert!(mean_haversine_error(&a, &p2).is_err());
        assert!(mean_haversine_error(&[], &[]).is_err());
    }
}
