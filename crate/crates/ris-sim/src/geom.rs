//! Geographic and planar geometry.
//!
//! Converts WGS-84 coordinates into a local east/north plane around a
//! scenario origin, measures great-circle distances, and computes the
//! angular separation at a reflecting surface between two user directions.
//! All geometry is 2-D: transmitter, surface, and user heights are ignored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in meters (spherical model).
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Points farther than this from the projection origin are rejected:
/// the equirectangular approximation degrades quickly beyond ~1 degree.
pub const MAX_PROJECTION_DEG: f64 = 1.0;

/// A WGS-84 position with an optional timestamp (seconds, monotone within a track).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    /// Latitude in degrees, [-90, 90].
    pub lat: f64,
    /// Longitude in degrees, [-180, 180].
    pub lon: f64,
    /// Timestamp in seconds. Zero for static points.
    pub t: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64, t: f64) -> Self {
        GeoPoint { lat, lon, t }
    }

    /// Static point (t = 0).
    pub fn fixed(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon, t: 0.0 }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }
}

/// A point in the local scenario plane: meters east (x) and north (y) of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalPoint {
    pub x: f64,
    pub y: f64,
}

impl LocalPoint {
    pub fn new(x: f64, y: f64) -> Self {
        LocalPoint { x, y }
    }

    /// Euclidean distance to another local point.
    pub fn dist(&self, other: &LocalPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Distance from the plane origin.
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Great-circle distance in meters between two positions on the spherical Earth.
///
/// Symmetric, non-negative, and zero only for coincident inputs.
pub fn haversine_m(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let s = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * s.sqrt().min(1.0).asin()
}

/// Project `p` onto the local plane centered at `origin`.
///
/// Equirectangular: `x = R cos(lat0) dlon`, `y = R dlat` (radians). Valid only
/// near the origin; inputs farther than [`MAX_PROJECTION_DEG`] are rejected.
pub fn to_local(origin: &GeoPoint, p: &GeoPoint) -> Result<LocalPoint> {
    let dlat = p.lat - origin.lat;
    let dlon = p.lon - origin.lon;
    if dlat.abs() >= MAX_PROJECTION_DEG || dlon.abs() >= MAX_PROJECTION_DEG {
        return Err(Error::Geometry(format!(
            "point ({}, {}) is more than {MAX_PROJECTION_DEG} deg from origin ({}, {})",
            p.lat, p.lon, origin.lat, origin.lon
        )));
    }
    Ok(LocalPoint {
        x: EARTH_RADIUS_M * origin.lat.to_radians().cos() * dlon.to_radians(),
        y: EARTH_RADIUS_M * dlat.to_radians(),
    })
}

/// Inverse of [`to_local`]: recover the geographic position of a local point.
pub fn from_local(origin: &GeoPoint, p: &LocalPoint) -> GeoPoint {
    let lat = origin.lat + (p.y / EARTH_RADIUS_M).to_degrees();
    let lon = origin.lon + (p.x / (EARTH_RADIUS_M * origin.lat.to_radians().cos())).to_degrees();
    GeoPoint { lat, lon, t: 0.0 }
}

/// Angle in [0, pi] at `vertex` between the directions toward `a` and `b`.
///
/// This is the angular separation seen by a reflecting surface between the
/// desired user and an interferer. Errors if either point coincides with the
/// vertex (the direction is undefined).
pub fn separation_angle(vertex: &LocalPoint, a: &LocalPoint, b: &LocalPoint) -> Result<f64> {
    let (ux, uy) = (a.x - vertex.x, a.y - vertex.y);
    let (vx, vy) = (b.x - vertex.x, b.y - vertex.y);
    let nu = ux.hypot(uy);
    let nv = vx.hypot(vy);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Geometry(
            "separation angle undefined: point coincides with vertex".into(),
        ));
    }
    let cos = ((ux * vx + uy * vy) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(cos.acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Independent oracle: spherical law of cosines on the same sphere.
    fn law_of_cosines_m(a: &GeoPoint, b: &GeoPoint) -> f64 {
        let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
        let dl = (b.lon - a.lon).to_radians();
        let c = (p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos()).clamp(-1.0, 1.0);
        EARTH_RADIUS_M * c.acos()
    }

    #[test]
    fn haversine_identical_points_is_zero() {
        let p = GeoPoint::fixed(39.9, 116.3);
        assert_eq!(haversine_m(&p, &p), 0.0);
    }

    #[test]
    fn haversine_one_degree_of_longitude_at_equator() {
        let a = GeoPoint::fixed(0.0, 0.0);
        let b = GeoPoint::fixed(0.0, 1.0);
        let d = haversine_m(&a, &b);
        // One degree of arc: R * pi/180 = 111_194.926... m, cross-checked
        // against the law-of-cosines oracle.
        assert_relative_eq!(d, law_of_cosines_m(&a, &b), max_relative = 1e-9);
        assert!((d - 111_194.9).abs() < 0.1, "got {d}");
    }

    #[test]
    fn haversine_matches_law_of_cosines_on_random_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = GeoPoint::fixed(rng.random_range(-60.0..60.0), rng.random_range(-179.0..179.0));
            let b = GeoPoint::fixed(
                a.lat + rng.random_range(-0.5..0.5),
                a.lon + rng.random_range(-0.5..0.5),
            );
            let h = haversine_m(&a, &b);
            assert_eq!(h, haversine_m(&b, &a), "symmetry violated for {a:?} {b:?}");
            // law of cosines loses precision for very short arcs; compare loosely there
            if h > 100.0 {
                assert_relative_eq!(h, law_of_cosines_m(&a, &b), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn to_local_of_origin_is_zero() {
        let o = GeoPoint::fixed(39.98, 116.32);
        let p = to_local(&o, &o).unwrap();
        assert_eq!((p.x, p.y), (0.0, 0.0));
    }

    #[test]
    fn to_local_longitude_step_matches_haversine() {
        let o = GeoPoint::fixed(0.0, 0.0);
        let p = GeoPoint::fixed(0.0, 0.001);
        let l = to_local(&o, &p).unwrap();
        assert_eq!(l.y, 0.0);
        let d = haversine_m(&o, &p);
        assert!(
            ((l.x - d) / d).abs() < 1e-3,
            "projection {} vs haversine {}",
            l.x,
            d
        );
        assert!((l.x - 111.19).abs() < 0.01, "got {}", l.x);
    }

    #[test]
    fn projection_round_trip_recovers_input() {
        let o = GeoPoint::fixed(39.98, 116.32);
        let p = GeoPoint::fixed(39.9852, 116.3171);
        let back = from_local(&o, &to_local(&o, &p).unwrap());
        assert!((back.lat - p.lat).abs() < 1e-9);
        assert!((back.lon - p.lon).abs() < 1e-9);
    }

    #[test]
    fn to_local_rejects_far_points() {
        let o = GeoPoint::fixed(39.98, 116.32);
        assert!(to_local(&o, &GeoPoint::fixed(41.5, 116.32)).is_err());
        assert!(to_local(&o, &GeoPoint::fixed(39.98, 114.0)).is_err());
    }

    #[test]
    fn separation_angle_basics() {
        let v = LocalPoint::new(0.0, 0.0);
        let a = LocalPoint::new(1.0, 0.0);
        assert_eq!(
            separation_angle(&v, &a, &LocalPoint::new(2.0, 0.0)).unwrap(),
            0.0
        );
        assert_relative_eq!(
            separation_angle(&v, &a, &LocalPoint::new(0.0, 1.0)).unwrap(),
            std::f64::consts::FRAC_PI_2
        );
        assert_relative_eq!(
            separation_angle(&v, &a, &LocalPoint::new(-1.0, 0.0)).unwrap(),
            std::f64::consts::PI
        );
    }

    #[test]
    fn separation_angle_rejects_degenerate_input() {
        let v = LocalPoint::new(1.0, 2.0);
        let a = LocalPoint::new(3.0, 4.0);
        assert!(separation_angle(&v, &v, &a).is_err());
        assert!(separation_angle(&v, &a, &v).is_err());
    }

    proptest! {
        #[test]
        fn separation_angle_symmetric_and_bounded(
            ax in -100.0..100.0f64, ay in -100.0..100.0f64,
            bx in -100.0..100.0f64, by in -100.0..100.0f64,
        ) {
            let v = LocalPoint::new(0.0, 0.0);
            let a = LocalPoint::new(ax, ay);
            let b = LocalPoint::new(bx, by);
            prop_assume!(a.norm() > 1e-9 && b.norm() > 1e-9);
            let t1 = separation_angle(&v, &a, &b).unwrap();
            let t2 = separation_angle(&v, &b, &a).unwrap();
            prop_assert_eq!(t1.to_bits(), t2.to_bits());
            prop_assert!((0.0..=std::f64::consts::PI).contains(&t1));
        }

        #[test]
        fn near_origin_projection_agrees_with_haversine(
            dlat in -0.01..0.01f64, dlon in -0.01..0.01f64,
        ) {
            prop_assume!(dlat.abs() > 1e-6 || dlon.abs() > 1e-6);
            let o = GeoPoint::fixed(39.98, 116.32);
            let p = GeoPoint::fixed(o.lat + dlat, o.lon + dlon);
            let h = haversine_m(&o, &p);
            let l = to_local(&o, &p).unwrap().norm();
            prop_assert!((h - l).abs() / h <= 1e-4, "haversine {} vs planar {}", h, l);
        }
    }
}
