//! Two-line element export and parsing.
//!
//! Exported elements describe the circular orbits produced by
//! [`propagate`](super::propagate): eccentricity and argument of perigee are
//! zero, so mean anomaly equals the argument of latitude at epoch. RAAN is
//! measured in the run's inertial frame, whose x axis is the prime meridian
//! at epoch.

use std::fmt::Write as _;

use super::{orbital_period, ShellConfig};
use crate::error::{Error, Result};
use crate::geo::EarthModel;

const SECONDS_PER_DAY: f64 = 86_400.0;
const MAX_CATALOG_NUMBER: usize = 99_999;

/// Epoch as a calendar year plus fractional day of year (1.0 = Jan 1, 00:00 UTC).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TleEpoch {
    pub year: i32,
    pub day_of_year: f64,
}

impl Default for TleEpoch {
    fn default() -> Self {
        TleEpoch {
            year: 2000,
            day_of_year: 1.0,
        }
    }
}

/// Orbital elements read back from a TLE triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct TleRecord {
    pub name: String,
    pub catalog_number: u32,
    pub epoch: TleEpoch,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
    pub mean_motion_rev_per_day: f64,
}

/// Checksum over the first 68 columns: digits count their value, '-' counts 1.
pub fn checksum(line: &str) -> u32 {
    line.chars()
        .take(68)
        .map(|c| match c {
            '-' => 1,
            c => c.to_digit(10).unwrap_or(0),
        })
        .sum::<u32>()
        % 10
}

fn fixed(value: f64, width: usize, decimals: usize, field: &str) -> Result<String> {
    let s = format!("{value:>width$.decimals$}");
    if s.len() > width {
        return Err(Error::Format(format!("{field} value {value} exceeds {width} columns")));
    }
    Ok(s)
}

fn wrap_degrees(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    // rounding to 4 decimals could print 360.0000
    if d >= 359.999_95 {
        0.0
    } else {
        d
    }
}

/// Renders one name line plus two element lines per satellite, in flat-index order.
pub fn export_tle(earth: &EarthModel, shell: &ShellConfig, epoch: TleEpoch) -> Result<String> {
    shell.validate()?;
    let total = shell.total_satellites();
    if total > MAX_CATALOG_NUMBER {
        return Err(Error::Format(format!(
            "{total} satellites exceed the 5-digit catalog number field"
        )));
    }
    if !(1.0..367.0).contains(&epoch.day_of_year) {
        return Err(Error::Format(format!("epoch day {} outside [1, 367)", epoch.day_of_year)));
    }
    let mean_motion = SECONDS_PER_DAY / orbital_period(earth, shell);
    let mean_motion = fixed(mean_motion, 11, 8, "mean motion")?;
    let incl = fixed(shell.inclination_deg, 8, 4, "inclination")?;
    let epoch_field = format!("{:02}{}", epoch.year.rem_euclid(100), fixed(epoch.day_of_year, 12, 8, "epoch day")?.replace(' ', "0"));

    let mut out = String::with_capacity(total * 160);
    for (index, id) in shell.satellite_ids().enumerate() {
        let catalog_number = index + 1;
        let raan = fixed(wrap_degrees(shell.raan_rad(id.orbit).to_degrees()), 8, 4, "RAAN")?;
        let anomaly = fixed(
            wrap_degrees(shell.initial_arg_of_latitude_rad(id).to_degrees()),
            8,
            4,
            "mean anomaly",
        )?;
        let line1 = format!(
            "1 {catalog_number:05}U 00000ABC {epoch_field}  .00000000  00000-0  00000-0 0 {:>4}",
            index % 10_000
        );
        let line2 = format!(
            "2 {catalog_number:05} {incl} {raan} 0000000   0.0000 {anomaly} {mean_motion}{:>5}",
            0
        );
        debug_assert_eq!(line1.len(), 68);
        debug_assert_eq!(line2.len(), 68);
        let _ = writeln!(out, "{}-{} {}", shell.name, index, index);
        let _ = writeln!(out, "{line1}{}", checksum(&line1));
        let _ = writeln!(out, "{line2}{}", checksum(&line2));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(line: &str, cols: std::ops::Range<usize>, what: &str, lineno: usize) -> Result<T> {
    let raw = line
        .get(cols.clone())
        .ok_or_else(|| Error::Format(format!("line {lineno}: missing {what} columns {cols:?}")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {lineno}: bad {what} {raw:?}")))
}

fn check_line(line: &str, expected_tag: char, lineno: usize) -> Result<()> {
    if line.len() != 69 || !line.starts_with(expected_tag) {
        return Err(Error::Format(format!("line {lineno}: expected 69-column line {expected_tag}")));
    }
    let stated = line[68..].parse::<u32>().map_err(|_| Error::Format(format!("line {lineno}: bad checksum digit")))?;
    if stated != checksum(line) {
        return Err(Error::Format(format!(
            "line {lineno}: checksum {stated} != computed {}",
            checksum(line)
        )));
    }
    Ok(())
}

/// Parses name/line1/line2 triplets, verifying checksums.
pub fn parse_tle(text: &str) -> Result<Vec<TleRecord>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if lines.len() % 3 != 0 {
        return Err(Error::Format(format!("{} non-empty lines is not a multiple of 3", lines.len())));
    }
    lines
        .chunks(3)
        .map(|chunk| {
            let (_, name) = chunk[0];
            let (n1, l1) = chunk[1];
            let (n2, l2) = chunk[2];
            check_line(l1, '1', n1)?;
            check_line(l2, '2', n2)?;
            let year: i32 = field(l1, 18..20, "epoch year", n1)?;
            let eccentricity: f64 = format!("0.{}", &l2[26..33])
                .parse()
                .map_err(|_| Error::Format(format!("line {n2}: bad eccentricity")))?;
            Ok(TleRecord {
                name: name.to_string(),
                catalog_number: field(l1, 2..7, "catalog number", n1)?,
                epoch: TleEpoch {
                    year: if year < 57 { 2000 + year } else { 1900 + year },
                    day_of_year: field(l1, 20..32, "epoch day", n1)?,
                },
                inclination_deg: field(l2, 8..16, "inclination", n2)?,
                raan_deg: field(l2, 17..25, "RAAN", n2)?,
                eccentricity,
                arg_perigee_deg: field(l2, 34..42, "argument of perigee", n2)?,
                mean_anomaly_deg: field(l2, 43..51, "mean anomaly", n2)?,
                mean_motion_rev_per_day: field(l2, 52..63, "mean motion", n2)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::ShellCatalog;

    fn export(name: &str) -> String {
        let shell = ShellCatalog::builtin().get(name).unwrap().clone();
        export_tle(&EarthModel::default(), &shell, TleEpoch::default()).unwrap()
    }

    #[test]
    fn checksum_rule() {
        // ISS reference line; published checksum digit 7
        let iss = "1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927";
        assert_eq!(checksum(iss), 7);
        for line in export("S1").lines().filter(|l| l.starts_with('1') || l.starts_with('2')) {
            let digit = line[68..].parse::<u32>().unwrap();
            assert_eq!(digit, checksum(line));
            assert_eq!(line.len(), 69);
        }
    }

    #[test]
    fn s2_export() {
        let text = export("S2");
        let records = parse_tle(&text).unwrap();
        assert_eq!(records.len(), 720);
        for line in text.lines().filter(|l| l.starts_with("2 ")) {
            assert_eq!(line[8..16].trim(), "70.0000");
        }
        assert_eq!(records[36].raan_deg, 18.0);
        assert_eq!(records[1].mean_anomaly_deg, 10.0);
    }

    #[test]
    fn round_trip_inclination_and_mean_motion() {
        let earth = EarthModel::default();
        for name in ["S1", "K3", "T1", "T2"] {
            let shell = ShellCatalog::builtin().get(name).unwrap().clone();
            let records = parse_tle(&export(name)).unwrap();
            let mm = SECONDS_PER_DAY / orbital_period(&earth, &shell);
            for r in &records {
                assert!((r.inclination_deg - shell.inclination_deg).abs() < 5e-5);
                assert!((r.mean_motion_rev_per_day - mm).abs() < 5e-5);
                assert_eq!(r.eccentricity, 0.0);
            }
        }
    }

    #[test]
    fn corrupted_checksum_rejected() {
        let text = export("S5");
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let l = &mut lines[1];
        let bad = (l[68..].parse::<u32>().unwrap() + 1) % 10;
        l.replace_range(68.., &bad.to_string());
        assert!(matches!(parse_tle(&lines.join("\n")), Err(Error::Format(_))));
    }

    #[test]
    fn field_budget_errors() {
        assert!(fixed(1000.0, 8, 4, "x").is_err());
        assert_eq!(fixed(5.5, 8, 4, "x").unwrap(), "  5.5000");
        let shell = ShellCatalog::builtin().get("S1").unwrap().clone();
        let bad_epoch = TleEpoch {
            year: 2000,
            day_of_year: 400.0,
        };
        assert!(export_tle(&EarthModel::default(), &shell, bad_epoch).is_err());
    }
}
