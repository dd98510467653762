//! Per-pair latency, stability and hop metrics; ECDFs; distance x hops heatmaps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geo::{geodesic_distance, EarthModel, GeoCoord};
use crate::routing::{count_changes, RoutePath};

/// Propagation speed used for every RTT, in m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 3.0e8;

/// Round trip over an undirected path: twice the one-way length at light speed.
pub fn rtt_of_path(path: &RoutePath) -> f64 {
    rtt_of_length(path.length_m())
}

pub fn rtt_of_length(one_way_m: f64) -> f64 {
    2.0 * one_way_m / SPEED_OF_LIGHT_M_S
}

/// RTT of a straight surface great-circle path at light speed.
pub fn ideal_rtt(earth: &EarthModel, a: &GeoCoord, b: &GeoCoord) -> Result<f64> {
    let d = geodesic_distance(earth, a, b);
    if d <= 0.0 {
        return Err(Error::DegeneratePair(format!(
            "identical endpoints ({}, {})",
            a.latitude_deg, a.longitude_deg
        )));
    }
    Ok(rtt_of_length(d))
}

/// Snapshot-by-snapshot observations for one pair. `None` marks an
/// unreachable snapshot.
#[derive(Debug, Clone, Default)]
pub struct PairTimeSeries {
    pub pair_id: usize,
    pub rtt_s: Vec<Option<f64>>,
    pub hops: Vec<Option<u32>>,
    /// Index into `distinct_paths` of the path used at each snapshot.
    pub path_ids: Vec<Option<u32>>,
    pub distinct_paths: Vec<Vec<u32>>,
}

impl PairTimeSeries {
    pub fn new(pair_id: usize) -> Self {
        PairTimeSeries {
            pair_id,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.rtt_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rtt_s.is_empty()
    }

    /// Appends the next snapshot's route.
    pub fn push(&mut self, route: Option<&RoutePath>) {
        match route {
            None => {
                self.rtt_s.push(None);
                self.hops.push(None);
                self.path_ids.push(None);
            }
            Some(path) => {
                self.rtt_s.push(Some(rtt_of_path(path)));
                self.hops.push(Some(path.hop_count() as u32));
                let id = self.intern(&path.nodes);
                self.path_ids.push(Some(id));
            }
        }
    }

    fn intern(&mut self, nodes: &[u32]) -> u32 {
        // the previous snapshot's path is by far the most likely match
        if let Some(Some(last)) = self.path_ids.last() {
            if self.distinct_paths[*last as usize] == nodes {
                return *last;
            }
        }
        match self.distinct_paths.iter().position(|p| p == nodes) {
            Some(i) => i as u32,
            None => {
                self.distinct_paths.push(nodes.to_vec());
                (self.distinct_paths.len() - 1) as u32
            }
        }
    }

    pub fn reachable_count(&self) -> usize {
        self.rtt_s.iter().flatten().count()
    }
}

/// The per-pair metric set over one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSummary {
    pub pair_id: usize,
    pub max_rtt_ms: f64,
    pub min_rtt_ms: f64,
    pub rtt_spread_ms: f64,
    /// Max-to-min slowdown.
    pub slowdown_m: f64,
    /// Geodesic slowdown: max RTT over the great-circle RTT.
    pub slowdown_g: f64,
    pub path_changes: usize,
    pub avg_hops: f64,
    pub hop_spread: u32,
    pub hop_ratio: f64,
    pub reachable_fraction: f64,
}

/// Extrema and averages over reachable snapshots only.
pub fn summarize_pair(series: &PairTimeSeries, ideal_rtt_s: f64) -> Result<PairSummary> {
    let path_changes = count_changes(&series.path_ids)?;
    let rtts: Vec<f64> = series.rtt_s.iter().flatten().copied().collect();
    if rtts.is_empty() {
        return Err(Error::NeverReachable(series.pair_id));
    }
    let hops: Vec<u32> = series.hops.iter().flatten().copied().collect();
    let max = rtts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = rtts.iter().copied().fold(f64::INFINITY, f64::min);
    let max_hops = *hops.iter().max().expect("hops recorded with rtts");
    let min_hops = *hops.iter().min().expect("hops recorded with rtts");
    let avg_hops = hops.iter().map(|&h| f64::from(h)).sum::<f64>() / hops.len() as f64;
    Ok(PairSummary {
        pair_id: series.pair_id,
        max_rtt_ms: max * 1e3,
        min_rtt_ms: min * 1e3,
        rtt_spread_ms: (max - min) * 1e3,
        slowdown_m: max / min,
        slowdown_g: max / ideal_rtt_s,
        path_changes,
        avg_hops,
        hop_spread: max_hops - min_hops,
        hop_ratio: f64::from(max_hops) / f64::from(min_hops),
        reachable_fraction: rtts.len() as f64 / series.len() as f64,
    })
}

/// Checks the per-summary invariants, returning a description of the first violation.
pub fn check_summary(s: &PairSummary) -> Option<String> {
    let finite = [s.max_rtt_ms, s.min_rtt_ms, s.rtt_spread_ms, s.slowdown_m, s.slowdown_g, s.avg_hops, s.hop_ratio]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        return Some(format!("pair {}: non-finite metric", s.pair_id));
    }
    if s.slowdown_m < 1.0 {
        return Some(format!("pair {}: S_m {} < 1", s.pair_id, s.slowdown_m));
    }
    if s.slowdown_g <= 1.0 {
        return Some(format!("pair {}: S_g {} <= 1", s.pair_id, s.slowdown_g));
    }
    if s.rtt_spread_ms < 0.0 || s.hop_ratio < 1.0 {
        return Some(format!("pair {}: negative spread or hop ratio < 1", s.pair_id));
    }
    None
}

/// Metric columns that can be turned into an ECDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    MaxRtt,
    MinRtt,
    RttSpread,
    SlowdownM,
    SlowdownG,
    PathChanges,
    AvgHops,
    HopSpread,
    HopRatio,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::MaxRtt,
        Metric::MinRtt,
        Metric::RttSpread,
        Metric::SlowdownM,
        Metric::SlowdownG,
        Metric::PathChanges,
        Metric::AvgHops,
        Metric::HopSpread,
        Metric::HopRatio,
    ];

    /// Column name in the metrics CSV.
    pub fn column(self) -> &'static str {
        match self {
            Metric::MaxRtt => "max_rtt_ms",
            Metric::MinRtt => "min_rtt_ms",
            Metric::RttSpread => "spread_ms",
            Metric::SlowdownM => "slowdown_m",
            Metric::SlowdownG => "slowdown_g",
            Metric::PathChanges => "path_changes",
            Metric::AvgHops => "avg_hops",
            Metric::HopSpread => "hop_spread",
            Metric::HopRatio => "hop_ratio",
        }
    }

    pub fn from_column(name: &str) -> Option<Metric> {
        Self::ALL.into_iter().find(|m| m.column() == name)
    }

    pub fn of(self, s: &PairSummary) -> f64 {
        match self {
            Metric::MaxRtt => s.max_rtt_ms,
            Metric::MinRtt => s.min_rtt_ms,
            Metric::RttSpread => s.rtt_spread_ms,
            Metric::SlowdownM => s.slowdown_m,
            Metric::SlowdownG => s.slowdown_g,
            Metric::PathChanges => s.path_changes as f64,
            Metric::AvgHops => s.avg_hops,
            Metric::HopSpread => f64::from(s.hop_spread),
            Metric::HopRatio => s.hop_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcdfSeries {
    pub metric: String,
    /// (value, cumulative fraction), strictly increasing in value.
    pub points: Vec<(f64, f64)>,
}

impl EcdfSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,fraction\n");
        for (v, f) in &self.points {
            let _ = writeln!(out, "{v:.6},{f:.6}");
        }
        out
    }
}

fn sorted_finite(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Config(format!("non-finite sample {v}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// Empirical CDF: fraction k/n at the k-th smallest value, duplicates merged.
pub fn ecdf(metric: &str, values: &[f64]) -> Result<EcdfSeries> {
    let sorted = sorted_finite(values)?;
    let n = sorted.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => points.push((v, frac)),
        }
    }
    Ok(EcdfSeries {
        metric: metric.to_string(),
        points,
    })
}

/// Lower-nearest percentile: the smallest sample whose cumulative fraction
/// reaches `p` (p in [0, 1]). The median is `percentile(v, 0.5)`.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    let sorted = sorted_finite(values)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("percentile {p} outside [0, 1]")));
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

pub fn median(values: &[f64]) -> Result<f64> {
    percentile(values, 0.5)
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Counts of pairs per (distance bin, hop bin) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub distance_bin_km: f64,
    pub hop_bin: f64,
    /// Keyed by bin indices (floor(value / width)).
    pub cells: BTreeMap<(i64, i64), usize>,
}

impl Heatmap {
    pub const DEFAULT_DISTANCE_BIN_KM: f64 = 2500.0;
    pub const DEFAULT_HOP_BIN: f64 = 1.0;

    pub fn total(&self) -> usize {
        self.cells.values().sum()
    }

    pub fn count(&self, distance_km: f64, hops: f64) -> usize {
        let key = (
            (distance_km / self.distance_bin_km).floor() as i64,
            (hops / self.hop_bin).floor() as i64,
        );
        self.cells.get(&key).copied().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dist_bin_lo_km,hop_bin_lo,count\n");
        for (&(d, h), &c) in &self.cells {
            let _ = writeln!(out, "{},{},{c}", d as f64 * self.distance_bin_km, h as f64 * self.hop_bin);
        }
        out
    }
}

pub fn heatmap_bins(pairs: &[(f64, f64)], distance_bin_km: f64, hop_bin: f64) -> Result<Heatmap> {
    if !(distance_bin_km > 0.0 && hop_bin > 0.0) {
        return Err(Error::Config(format!(
            "bin widths must be positive, got {distance_bin_km} km and {hop_bin} hops"
        )));
    }
    let mut cells = BTreeMap::new();
    for &(d, h) in pairs {
        let key = ((d / distance_bin_km).floor() as i64, (h / hop_bin).floor() as i64);
        *cells.entry(key).or_insert(0) += 1;
    }
    Ok(Heatmap {
        distance_bin_km,
        hop_bin,
        cells,
    })
}
