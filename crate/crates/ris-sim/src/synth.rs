//! Synthetic pedestrian GPS traces.
//!
//! Seeded walkers with smoothly varying turn rate (an Ornstein-Uhlenbeck
//! process on heading rate, so turns persist long enough to be learnable),
//! mild speed variation, and white GPS noise. Output is available as a
//! [`Trajectory`] or as PLT file text, so demos and tests run without any
//! external dataset. Real PLT files drop in unchanged.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::channel::stream_rng;
use crate::geom::{from_local, GeoPoint, LocalPoint};
use crate::trajectory::Trajectory;

/// Walker parameters; defaults give a plausible urban pedestrian.
#[derive(Debug, Clone)]
pub struct WalkerConfig {
    pub seed: u64,
    /// Total duration in seconds.
    pub duration_s: f64,
    /// Recording interval in seconds (whole seconds keep PLT timestamps exact).
    pub sample_dt_s: f64,
    /// Mean walking speed, m/s.
    pub speed_mps: f64,
    /// Stationary standard deviation of the turn rate, rad/s.
    pub turn_std: f64,
    /// Correlation time of the turn rate, seconds.
    pub turn_tau_s: f64,
    /// White position noise, meters (1-sigma per axis).
    pub gps_noise_m: f64,
    /// Geographic anchor of the walk.
    pub origin: GeoPoint,
    /// Epoch seconds of the first sample.
    pub start_t: f64,
}

impl Default for WalkerConfig {
    fn default() -> Self {
        WalkerConfig {
            seed: 0,
            duration_s: 600.0,
            sample_dt_s: 2.0,
            speed_mps: 1.3,
            turn_std: 0.06,
            turn_tau_s: 150.0,
            gps_noise_m: 2.5,
            origin: GeoPoint::fixed(39.98, 116.32),
            // 2008-10-23 00:00:00 UTC
            start_t: 1224720000.0,
        }
    }
}

/// Generate one walker track.
pub fn walker_trajectory(cfg: &WalkerConfig) -> Trajectory {
    let mut rng = stream_rng(cfg.seed, &[u64::from_le_bytes(*b"walker__")]);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let dt = cfg.sample_dt_s;
    let n = (cfg.duration_s / dt).floor() as usize + 1;

    let mut heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut turn_rate: f64 = cfg.turn_std * normal.sample(&mut rng);
    let decay = (-dt / cfg.turn_tau_s).exp();
    let kick = cfg.turn_std * (1.0 - decay * decay).sqrt();
    let speed_jitter = 0.1 * cfg.speed_mps;

    let mut x = 0.0f64;
    let mut y = 0.0f64;
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let noisy = LocalPoint::new(
            x + cfg.gps_noise_m * normal.sample(&mut rng),
            y + cfg.gps_noise_m * normal.sample(&mut rng),
        );
        let mut p = from_local(&cfg.origin, &noisy);
        p.t = cfg.start_t + k as f64 * dt;
        points.push(p);

        let speed = cfg.speed_mps + speed_jitter * normal.sample(&mut rng);
        x += speed * dt * heading.cos();
        y += speed * dt * heading.sin();
        heading += turn_rate * dt;
        turn_rate = decay * turn_rate + kick * normal.sample(&mut rng);
    }
    Trajectory::new(points).expect("strictly increasing timestamps")
}

/// Render a trajectory as PLT file text (six headers plus records).
pub fn to_plt(track: &Trajectory) -> String {
    let mut out = String::from(
        "Geolife trajectory\nWGS 84\nAltitude is in Feet\nReserved 3\n0,2,255,My Track,0,0,2,8421376\n0\n",
    );
    for p in track.points() {
        let secs = p.t.round() as i64;
        let dt = chrono::DateTime::from_timestamp(secs, 0).expect("valid timestamp");
        // days since 1899-12-30, the PLT serial-date convention
        let days = secs as f64 / 86400.0 + 25569.0;
        out.push_str(&format!(
            "{:.6},{:.6},0,100,{:.10},{},{}\n",
            p.lat,
            p.lon,
            days,
            dt.format("%Y-%m-%d"),
            dt.format("%H:%M:%S"),
        ));
    }
    out
}

/// A deterministic corpus of walker PLT files, `(file name, content)` pairs.
pub fn demo_corpus(seed: u64, n_files: usize, duration_s: f64) -> Vec<(String, String)> {
    (0..n_files)
        .map(|i| {
            let mut rng = stream_rng(seed, &[u64::from_le_bytes(*b"corpus__"), i as u64]);
            let cfg = WalkerConfig {
                seed: seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
                duration_s,
                speed_mps: rng.random_range(1.0..1.6),
                turn_std: rng.random_range(0.04..0.09),
                // one shared neighborhood: test walkers stay inside the
                // coordinate range the training walkers cover
                origin: GeoPoint::fixed(
                    39.98 + rng.random_range(-0.003..0.003),
                    116.32 + rng.random_range(-0.003..0.003),
                ),
                start_t: 1224720000.0 + rng.random_range(0..86400) as f64,
                ..WalkerConfig::default()
            };
            (format!("walker_{i:03}.plt"), to_plt(&walker_trajectory(&cfg)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{haversine_m, to_local};
    use crate::trajectory::parse_plt;

    #[test]
    fn walker_is_deterministic_and_plausible() {
        let cfg = WalkerConfig::default();
        let a = walker_trajectory(&cfg);
        let b = walker_trajectory(&cfg);
        assert_eq!(a, b);
        assert_eq!(a.len(), 301);

        // speed sanity: mean step within walking range
        let mut dist = 0.0;
        for w in a.points().windows(2) {
            dist += haversine_m(&w[0], &w[1]);
        }
        let mean_speed = dist / a.duration_s();
        assert!((0.5..3.0).contains(&mean_speed), "mean speed {mean_speed}");
    }

    #[test]
    fn walkers_actually_turn() {
        // heading change over the track must exceed a straight line's
        let t = walker_trajectory(&WalkerConfig { seed: 4, ..Default::default() });
        let o = t.points()[0];
        let locs: Vec<_> = t.points().iter().map(|p| to_local(&o, p).unwrap()).collect();
        let mut total_turn = 0.0;
        for w in locs.windows(20).step_by(10) {
            let h1 = (w[10].y - w[0].y).atan2(w[10].x - w[0].x);
            let h2 = (w[19].y - w[9].y).atan2(w[19].x - w[9].x);
            let mut d = h2 - h1;
            while d > std::f64::consts::PI {
                d -= std::f64::consts::TAU;
            }
            while d < -std::f64::consts::PI {
                d += std::f64::consts::TAU;
            }
            total_turn += d.abs();
        }
        assert!(total_turn > 0.5, "track barely turns: {total_turn} rad");
    }

    #[test]
    fn plt_round_trip_through_the_parser() {
        let track = walker_trajectory(&WalkerConfig { seed: 9, ..Default::default() });
        let text = to_plt(&track);
        let parsed = parse_plt(&text).unwrap();
        assert_eq!(parsed.trajectory.len(), track.len());
        assert_eq!(parsed.dropped, 0);
        for (a, b) in parsed.trajectory.points().iter().zip(track.points()) {
            assert!((a.lat - b.lat).abs() < 1e-6);
            assert!((a.lon - b.lon).abs() < 1e-6);
            assert_eq!(a.t, b.t);
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = demo_corpus(5, 3, 120.0);
        let b = demo_corpus(5, 3, 120.0);
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a[0].0.ends_with(".plt"));
    }
}
