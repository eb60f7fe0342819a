//! PLT track-file parsing.
//!
//! Layout: six header lines (ignored), then one record per line:
//! `lat,lon,0,altitude_ft,days,date,time` with `date` as `YYYY-MM-DD` and
//! `time` as `HH:MM:SS`. Timestamps are taken from the date/time fields
//! (integer epoch seconds; the fractional `days` field carries less
//! precision and is ignored).

use chrono::{NaiveDate, NaiveTime};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::geom::GeoPoint;

/// Number of header lines preceding the records.
pub const PLT_HEADER_LINES: usize = 6;

/// Parse result: the track plus how many records were dropped for
/// out-of-order/duplicate timestamps or out-of-range coordinates.
#[derive(Debug, Clone)]
pub struct ParsedPlt {
    pub trajectory: Trajectory,
    pub dropped: usize,
}

/// Parse PLT file content.
///
/// Structurally malformed records (wrong field count, unparseable numbers or
/// dates) abort with the offending line number. Records that parse but step
/// backward in time, repeat a timestamp, or carry out-of-range coordinates
/// are dropped and counted. Fewer than two surviving points is an error.
pub fn parse_plt(text: &str) -> Result<ParsedPlt> {
    let mut points: Vec<GeoPoint> = Vec::new();
    let mut dropped = 0usize;

    for (idx, line) in text.lines().enumerate() {
        if idx < PLT_HEADER_LINES {
            continue;
        }
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 7 comma-separated fields, got {}", fields.len()),
            });
        }
        let lat: f64 = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad latitude '{}'", fields[0]),
        })?;
        let lon: f64 = fields[1].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad longitude '{}'", fields[1]),
        })?;
        let date = NaiveDate::parse_from_str(fields[5].trim(), "%Y-%m-%d").map_err(|_| {
            Error::Parse {
                line: lineno,
                msg: format!("bad date '{}'", fields[5]),
            }
        })?;
        let time = NaiveTime::parse_from_str(fields[6].trim(), "%H:%M:%S").map_err(|_| {
            Error::Parse {
                line: lineno,
                msg: format!("bad time '{}'", fields[6]),
            }
        })?;
        let t = date.and_time(time).and_utc().timestamp() as f64;

        let p = GeoPoint::new(lat, lon, t);
        if !p.is_valid() {
            dropped += 1;
            continue;
        }
        if let Some(last) = points.last() {
            if !(t > last.t) {
                dropped += 1;
                continue;
            }
        }
        points.push(p);
    }

    if points.len() < 2 {
        return Err(Error::Trajectory(format!(
            "fewer than 2 valid records ({} kept, {dropped} dropped)",
            points.len()
        )));
    }
    Ok(ParsedPlt {
        trajectory: Trajectory::new(points)?,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Geolife trajectory\nWGS 84\nAltitude is in Feet\nReserved 3\n0,2,255,My Track,0,0,2,8421376\n0\n";

    fn with_records(records: &[&str]) -> String {
        format!("{HEADER}{}\n", records.join("\n"))
    }

    #[test]
    fn minimal_file_parses() {
        let text = with_records(&[
            "39.984702,116.318417,0,492,39744.245,2008-10-23,05:53:05",
            "39.984710,116.318500,0,492,39744.246,2008-10-23,05:53:10",
        ]);
        let parsed = parse_plt(&text).unwrap();
        assert_eq!(parsed.trajectory.len(), 2);
        assert_eq!(parsed.dropped, 0);
    }

    #[test]
    fn field_positions_match_the_documented_layout() {
        // Hand-parsed reference record: fields 1-2 are lat/lon in degrees,
        // fields 6-7 the civil date and time.
        let text = with_records(&[
            "39.984702,116.318417,0,492,39744.245,2008-10-23,05:53:05",
            "40.000000,116.320000,0,500,39744.246,2008-10-23,05:53:15",
        ]);
        let parsed = parse_plt(&text).unwrap();
        let p = parsed.trajectory.points()[0];
        assert_eq!(p.lat, 39.984702);
        assert_eq!(p.lon, 116.318417);
        let q = parsed.trajectory.points()[1];
        assert_eq!(q.t - p.t, 10.0);
    }

    #[test]
    fn corrupt_line_errors_with_its_number() {
        let text = with_records(&[
            "39.984702,116.318417,0,492,39744.245,2008-10-23,05:53:05",
            "this is not a record",
            "39.984710,116.318500,0,492,39744.246,2008-10-23,05:53:10",
        ]);
        match parse_plt(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_order_records_are_dropped_and_counted() {
        let text = with_records(&[
            "39.984702,116.318417,0,492,39744.245,2008-10-23,05:53:05",
            "39.984705,116.318450,0,492,39744.244,2008-10-23,05:53:00",
            "39.984705,116.318450,0,492,39744.245,2008-10-23,05:53:05",
            "39.984710,116.318500,0,492,39744.246,2008-10-23,05:53:10",
        ]);
        let parsed = parse_plt(&text).unwrap();
        assert_eq!(parsed.trajectory.len(), 2);
        assert_eq!(parsed.dropped, 2);
    }

    #[test]
    fn out_of_range_coordinates_are_dropped() {
        let text = with_records(&[
            "39.984702,116.318417,0,492,39744.245,2008-10-23,05:53:05",
            "400.0,116.318450,0,492,39744.2455,2008-10-23,05:53:07",
            "39.984710,116.318500,0,492,39744.246,2008-10-23,05:53:10",
        ]);
        let parsed = parse_plt(&text).unwrap();
        assert_eq!(parsed.trajectory.len(), 2);
        assert_eq!(parsed.dropped, 1);
    }

    #[test]
    fn too_few_valid_records_is_an_error() {
        let text = with_records(&["39.984702,116.318417,0,492,39744.245,2008-10-23,05:53:05"]);
        assert!(parse_plt(&text).is_err());
    }
}
