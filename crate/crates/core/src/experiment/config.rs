//! Flat `key = value` experiment configuration and run manifests.
//!
//! The manifest written next to every run uses the same format, so a
//! manifest can be fed back as a config to reproduce the run.

use std::path::PathBuf;

use crate::constellation::{ShellCatalog, ShellConfig};
use crate::error::{Error, Result};
use crate::geo::EarthModel;
use crate::metrics::{Metric, SPEED_OF_LIGHT_M_S};
use crate::topology::GslPolicy;
use crate::traffic::{bundled_cities, load_cities, City};

const TIE_BREAK: &str = "lexicographic-node-sequence";
const PERCENTILE: &str = "lower-nearest";
const CATALOG_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub enum CitySource {
    Bundled,
    File(PathBuf),
}

impl CitySource {
    pub fn load(&self) -> Result<Vec<City>> {
        match self {
            CitySource::Bundled => Ok(bundled_cities()),
            CitySource::File(p) => load_cities(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSelection {
    pub ecdfs: Vec<Metric>,
    pub heatmap: bool,
    /// Per-snapshot path dump (large: one line per pair per snapshot).
    pub path_dump: bool,
    /// TLE, ISL and TM files.
    pub network_files: bool,
}

impl Default for OutputSelection {
    fn default() -> Self {
        OutputSelection {
            ecdfs: Metric::ALL.to_vec(),
            heatmap: true,
            path_dump: false,
            network_files: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub shells: Vec<ShellConfig>,
    pub duration_s: f64,
    pub step_s: f64,
    pub gsl_policy: GslPolicy,
    pub cities: CitySource,
    pub outputs: OutputSelection,
    pub workers: usize,
    pub earth: EarthModel,
    /// When set, the loaded city dataset must hash to this value.
    pub expected_cities_sha256: Option<String>,
}

impl ExperimentSpec {
    pub const DEFAULT_DURATION_S: f64 = 400.0;
    pub const DEFAULT_STEP_S: f64 = 1.0;

    pub fn new(shells: Vec<ShellConfig>) -> Self {
        ExperimentSpec {
            shells,
            duration_s: Self::DEFAULT_DURATION_S,
            step_s: Self::DEFAULT_STEP_S,
            gsl_policy: GslPolicy::default(),
            cities: CitySource::Bundled,
            outputs: OutputSelection::default(),
            workers: super::default_workers(),
            earth: EarthModel::default(),
            expected_cities_sha256: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shells.is_empty() {
            return Err(Error::Config("no shells selected".into()));
        }
        for s in &self.shells {
            s.validate()?;
        }
        super::snapshot_times(self.duration_s, self.step_s)?;
        GslPolicy::new(self.gsl_policy.min_elevation_deg)?;
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(())
    }

    /// Builds a spec from parsed key-value pairs; later keys override earlier ones.
    pub fn from_pairs(pairs: &[(String, String)], catalog: &ShellCatalog) -> Result<Self> {
        let mut spec = ExperimentSpec::new(Vec::new());
        let mut selected: Vec<String> = Vec::new();
        let mut custom: Vec<ShellConfig> = Vec::new();
        for (key, value) in pairs {
            let bad = |what: &str| Error::Config(format!("{key} = {value}: {what}"));
            match key.as_str() {
                "shell" | "shells" => {
                    selected = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                }
                "duration" => spec.duration_s = value.parse().map_err(|_| bad("expected seconds"))?,
                "step" => spec.step_s = value.parse().map_err(|_| bad("expected seconds"))?,
                "min-elev" => {
                    spec.gsl_policy = GslPolicy::new(value.parse().map_err(|_| bad("expected degrees"))?)?;
                }
                "cities" => {
                    spec.cities = if value == "bundled" {
                        CitySource::Bundled
                    } else {
                        CitySource::File(PathBuf::from(value))
                    };
                }
                "workers" => {
                    spec.workers = value.parse().map_err(|_| bad("expected a worker count"))?;
                }
                "seed" => {
                    value.parse::<u64>().map_err(|_| bad("expected an integer"))?;
                }
                "format" => {
                    if value != "csv" {
                        return Err(bad("only csv is supported"));
                    }
                }
                "ecdf" => spec.outputs.ecdfs = parse_metrics(value).map_err(|e| bad(&e))?,
                "heatmap" => spec.outputs.heatmap = parse_bool(value).ok_or_else(|| bad("expected true/false"))?,
                "dump-paths" => spec.outputs.path_dump = parse_bool(value).ok_or_else(|| bad("expected true/false"))?,
                "network-files" => {
                    spec.outputs.network_files = parse_bool(value).ok_or_else(|| bad("expected true/false"))?;
                }
                "earth.radius_m" => spec.earth.radius_m = value.parse().map_err(|_| bad("expected meters"))?,
                "earth.mu_m3s2" => spec.earth.mu_m3s2 = value.parse().map_err(|_| bad("expected m^3/s^2"))?,
                "earth.rotation_rate_rad_s" => {
                    spec.earth.rotation_rate_rad_s = value.parse().map_err(|_| bad("expected rad/s"))?;
                }
                "cities_sha256" => spec.expected_cities_sha256 = Some(value.clone()),
                "speed_of_light_m_s" => {
                    let c: f64 = value.parse().map_err(|_| bad("expected m/s"))?;
                    if c != SPEED_OF_LIGHT_M_S {
                        return Err(bad("this build uses 3e8 m/s"));
                    }
                }
                "tie_break" if value == TIE_BREAK => {}
                "percentile" if value == PERCENTILE => {}
                "catalog_version" if value == CATALOG_VERSION => {}
                "tie_break" | "percentile" | "catalog_version" => return Err(bad("not supported by this build")),
                "snapshot_count" => {}
                k if k.starts_with("shell.") => {
                    let name = &k["shell.".len()..];
                    let shell = parse_shell(name, value).map_err(|e| bad(&e.to_string()))?;
                    custom.retain(|s| s.name != shell.name);
                    custom.push(shell);
                }
                _ => return Err(Error::Config(format!("unknown key {key}"))),
            }
        }
        if selected.is_empty() {
            selected = custom.iter().map(|s| s.name.clone()).collect();
        }
        spec.shells = selected
            .iter()
            .map(|name| {
                custom
                    .iter()
                    .find(|s| &s.name == name)
                    .or_else(|| catalog.get(name))
                    .cloned()
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "unknown shell {name}; valid shells: {}",
                            catalog.names().collect::<Vec<_>>().join(", ")
                        ))
                    })
            })
            .collect::<Result<_>>()?;
        spec.validate()?;
        Ok(spec)
    }

    /// Manifest text recording every constant that affects results.
    pub fn manifest(&self, cities_sha256: &str, snapshot_count: usize) -> String {
        let mut lines = vec![
            "# leo-topo run manifest; usable as --config to reproduce this run".to_string(),
            format!(
                "shells = {}",
                self.shells.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(",")
            ),
        ];
        for s in &self.shells {
            lines.push(format!(
                "shell.{} = {},{},{},{},{}",
                s.name, s.altitude_km, s.num_orbits, s.sats_per_orbit, s.inclination_deg, s.inter_plane_phase_fraction
            ));
        }
        lines.extend([
            format!("duration = {}", self.duration_s),
            format!("step = {}", self.step_s),
            format!("snapshot_count = {snapshot_count}"),
            format!("min-elev = {}", self.gsl_policy.min_elevation_deg),
            format!(
                "cities = {}",
                match &self.cities {
                    CitySource::Bundled => "bundled".to_string(),
                    CitySource::File(p) => p.display().to_string(),
                }
            ),
            format!("cities_sha256 = {cities_sha256}"),
            format!("workers = {}", self.workers),
            format!(
                "ecdf = {}",
                if self.outputs.ecdfs.is_empty() {
                    "none".to_string()
                } else {
                    self.outputs.ecdfs.iter().map(|m| m.column()).collect::<Vec<_>>().join(",")
                }
            ),
            format!("heatmap = {}", self.outputs.heatmap),
            format!("dump-paths = {}", self.outputs.path_dump),
            format!("network-files = {}", self.outputs.network_files),
            format!("earth.radius_m = {}", self.earth.radius_m),
            format!("earth.mu_m3s2 = {}", self.earth.mu_m3s2),
            format!("earth.rotation_rate_rad_s = {}", self.earth.rotation_rate_rad_s),
            format!("speed_of_light_m_s = {SPEED_OF_LIGHT_M_S}"),
            format!("tie_break = {TIE_BREAK}"),
            format!("percentile = {PERCENTILE}"),
            format!("catalog_version = {CATALOG_VERSION}"),
        ]);
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_metrics(v: &str) -> std::result::Result<Vec<Metric>, String> {
    match v {
        "all" => Ok(Metric::ALL.to_vec()),
        "none" => Ok(Vec::new()),
        _ => v
            .split(',')
            .map(|c| Metric::from_column(c.trim()).ok_or_else(|| format!("unknown metric {c}")))
            .collect(),
    }
}

/// `altitude_km,num_orbits,sats_per_orbit,inclination_deg[,phase_fraction]`
fn parse_shell(name: &str, value: &str) -> Result<ShellConfig> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if !(4..=5).contains(&parts.len()) {
        return Err(Error::Config(
            "expected altitude_km,num_orbits,sats_per_orbit,inclination_deg[,phase_fraction]".into(),
        ));
    }
    let num = |i: usize| -> Result<f64> {
        parts[i].parse().map_err(|_| Error::Config(format!("bad number {:?}", parts[i])))
    };
    let count = |i: usize| -> Result<u32> {
        parts[i].parse().map_err(|_| Error::Config(format!("bad count {:?}", parts[i])))
    };
    let shell = ShellConfig::new(name, num(0)?, count(1)?, count(2)?, num(3)?)?;
    match parts.get(4) {
        Some(_) => shell.with_phase_fraction(num(4)?),
        None => Ok(shell),
    }
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .map(|(i, l)| {
            let (k, v) = l.split_once('=').ok_or_else(|| Error::Parse {
                path: "<config>".into(),
                line: i as u64 + 1,
                msg: format!("expected key = value, got {l:?}"),
            })?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}
