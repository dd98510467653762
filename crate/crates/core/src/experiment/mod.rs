//! Run orchestration: snapshot loop, aggregation, sweeps and reports.

mod config;
mod output;
mod study;

use std::path::PathBuf;

pub use config::{parse_key_values, ExperimentSpec, OutputSelection, CitySource};
pub use output::{distance_hops_heatmap, metrics_csv, read_metrics_csv, run, write_shell_outputs, RunOutcome, ShellOutcome, METRICS_HEADER};
pub use study::{
    angle_study_from_runs, compare_shells, run_angle_study, AngleStudy, AngleStudyRow, Comparison, MetricDelta,
};

use crate::constellation::{propagate, ShellCatalog, ShellConfig, ALT_SWEEP_KM, FINE_SWEEP_SATS, INCL_SWEEP_DEG, SWEEP_ORBITS, SWEEP_SATS};
use crate::error::{Error, Result};
use crate::geo::{geodesic_distance, EarthModel};
use crate::metrics::{check_summary, ideal_rtt, summarize_pair, PairSummary, PairTimeSeries};
use crate::routing::{shortest_paths_snapshot, PairRoute};
use crate::topology::{build_plus_grid, snapshot_from_positions, GslPolicy};
use crate::traffic::{pair_angle, TrafficMatrix};

/// Summary plus endpoint context for one ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub src_id: u32,
    pub dst_id: u32,
    pub geodesic_km: f64,
    /// `None` for antipodal endpoints, where the angle is undefined.
    pub geo_angle_deg: Option<f64>,
    pub summary: PairSummary,
}

/// Everything produced for one shell.
#[derive(Debug, Clone)]
pub struct ShellRun {
    pub shell: ShellConfig,
    pub snapshot_count: usize,
    pub total_pairs: usize,
    pub records: Vec<PairRecord>,
    /// Pair ids with no reachable snapshot; excluded from `records`.
    pub never_reachable: Vec<usize>,
    /// Pair ids whose endpoints coincide; excluded from `records`.
    pub degenerate: Vec<usize>,
    /// Lag with the strongest recurrence of path choices, if one was found.
    pub recurrence_period_s: Option<f64>,
}

impl ShellRun {
    pub fn summaries(&self) -> impl Iterator<Item = &PairSummary> {
        self.records.iter().map(|r| &r.summary)
    }

    pub fn metric_values(&self, metric: crate::metrics::Metric) -> Vec<f64> {
        self.summaries().map(|s| metric.of(s)).collect()
    }
}

/// Snapshot instants `k * step` for `k` in `0..duration / step`.
pub fn snapshot_times(duration_s: f64, step_s: f64) -> Result<Vec<f64>> {
    if !(step_s > 0.0 && duration_s >= step_s) || !duration_s.is_finite() {
        return Err(Error::Config(format!(
            "need duration >= step > 0, got duration {duration_s} s, step {step_s} s"
        )));
    }
    let ratio = duration_s / step_s;
    let count = ratio.round();
    if (ratio - count).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Config(format!(
            "duration {duration_s} s is not a whole number of {step_s} s steps"
        )));
    }
    Ok((0..count as usize).map(|k| k as f64 * step_s).collect())
}

/// Called with each snapshot's routes, in time order.
pub type SnapshotObserver<'a> = dyn FnMut(f64, &[PairRoute]) -> Result<()> + 'a;

fn route_snapshot(
    earth: &EarthModel,
    shell: &ShellConfig,
    isl: &[crate::topology::IslEdge],
    matrix: &TrafficMatrix,
    policy: &GslPolicy,
    t: f64,
) -> Vec<PairRoute> {
    let sats = propagate(earth, shell, t);
    let g = snapshot_from_positions(earth, &sats, isl, &matrix.cities, policy, t);
    shortest_paths_snapshot(&g, matrix)
}

/// Maps snapshot instants to routes, on a private pool when `workers > 1`.
struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    #[cfg(feature = "parallel")]
    fn new(workers: usize) -> Result<Self> {
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Executor { pool })
    }

    #[cfg(not(feature = "parallel"))]
    fn new(_workers: usize) -> Result<Self> {
        Ok(Executor {})
    }

    #[cfg(feature = "parallel")]
    fn map(&self, times: &[f64], f: impl Fn(f64) -> Vec<PairRoute> + Sync + Send) -> Vec<Vec<PairRoute>> {
        use rayon::prelude::*;
        match &self.pool {
            Some(pool) => pool.install(|| times.par_iter().map(|&t| f(t)).collect()),
            None => times.iter().map(|&t| f(t)).collect(),
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn map(&self, times: &[f64], f: impl Fn(f64) -> Vec<PairRoute>) -> Vec<Vec<PairRoute>> {
        times.iter().map(|&t| f(t)).collect()
    }
}

/// Default worker count: available cores.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Routes every snapshot of one shell and summarizes each pair.
///
/// Snapshots are routed in parallel chunks and merged in time order, so the
/// result does not depend on `workers`.
pub fn simulate_shell(
    earth: &EarthModel,
    shell: &ShellConfig,
    matrix: &TrafficMatrix,
    policy: &GslPolicy,
    times: &[f64],
    workers: usize,
    mut observer: Option<&mut SnapshotObserver<'_>>,
) -> Result<ShellRun> {
    shell.validate()?;
    if times.is_empty() {
        return Err(Error::EmptySeries);
    }
    let isl = build_plus_grid(shell)?;
    let mut series: Vec<PairTimeSeries> = (0..matrix.len()).map(PairTimeSeries::new).collect();
    for s in &mut series {
        s.rtt_s.reserve(times.len());
        s.hops.reserve(times.len());
        s.path_ids.reserve(times.len());
    }

    let executor = Executor::new(workers)?;
    let chunk_len = workers.max(1) * 4;
    for chunk in times.chunks(chunk_len) {
        let routed = executor.map(chunk, |t| route_snapshot(earth, shell, &isl, matrix, policy, t));
        for (&t, routes) in chunk.iter().zip(&routed) {
            if let Some(obs) = observer.as_mut() {
                obs(t, routes)?;
            }
            for (s, r) in series.iter_mut().zip(routes) {
                s.push(r.path());
            }
        }
    }

    let mut records = Vec::with_capacity(matrix.len());
    let mut never_reachable = Vec::new();
    let mut degenerate = Vec::new();
    for s in &series {
        let (a, b) = matrix.endpoints(s.pair_id);
        let ideal = match ideal_rtt(earth, &a.coord, &b.coord) {
            Ok(v) => v,
            Err(Error::DegeneratePair(_)) => {
                degenerate.push(s.pair_id);
                continue;
            }
            Err(e) => return Err(e),
        };
        let summary = match summarize_pair(s, ideal) {
            Ok(v) => v,
            Err(Error::NeverReachable(id)) => {
                never_reachable.push(id);
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some(violation) = check_summary(&summary) {
            return Err(Error::Config(format!("shell {}: metric invariant violated: {violation}", shell.name)));
        }
        records.push(PairRecord {
            src_id: a.id,
            dst_id: b.id,
            geodesic_km: geodesic_distance(earth, &a.coord, &b.coord) / 1000.0,
            geo_angle_deg: pair_angle(matrix, matrix.pairs[s.pair_id]).ok(),
            summary,
        });
    }

    let step = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    Ok(ShellRun {
        shell: shell.clone(),
        snapshot_count: times.len(),
        total_pairs: matrix.len(),
        records,
        never_reachable,
        degenerate,
        recurrence_period_s: recurrence_lag(&series).map(|lag| lag as f64 * step),
    })
}

/// Lag (in snapshots) at which path choices best repeat themselves.
///
/// For each lag the fraction of (pair, t) samples using the same path at
/// `t` and `t + lag` is computed over a subsample of pairs. Matching decays
/// from lag 1 as paths churn; the reported lag is the strongest match after
/// the first local minimum of that curve. `None` when no such rebound exists.
pub fn recurrence_lag(series: &[PairTimeSeries]) -> Option<usize> {
    let n = series.first()?.path_ids.len();
    if n < 8 {
        return None;
    }
    let stride = (series.len() / 500).max(1);
    let sample: Vec<&PairTimeSeries> = series.iter().step_by(stride).collect();
    let max_lag = n / 2;
    let matches: Vec<f64> = (1..=max_lag)
        .map(|lag| {
            let mut hit = 0usize;
            let mut total = 0usize;
            for s in &sample {
                for t in 0..n - lag {
                    if let (Some(a), Some(b)) = (s.path_ids[t], s.path_ids[t + lag]) {
                        total += 1;
                        hit += usize::from(a == b);
                    }
                }
            }
            if total == 0 {
                0.0
            } else {
                hit as f64 / total as f64
            }
        })
        .collect();
    let first_min = (1..matches.len().saturating_sub(1)).find(|&i| matches[i] <= matches[i - 1] && matches[i] < matches[i + 1])?;
    let (best, &value) = matches[first_min + 1..]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
    (value > matches[first_min]).then_some(first_min + 1 + best + 1)
}

/// Named shell grids used by the sweeps.
#[derive(Debug, Clone)]
pub struct SweepCatalog {
    pub sweeps: Vec<(&'static str, Vec<String>)>,
}

impl SweepCatalog {
    pub fn builtin() -> Self {
        let grid = |sats: &[u32]| -> Vec<String> {
            SWEEP_ORBITS
                .iter()
                .flat_map(|&o| sats.iter().map(move |&s| ShellCatalog::grid_name(o, s)))
                .collect()
        };
        let mut commercial: Vec<String> = ShellCatalog::commercial_names().into_iter().map(String::from).collect();
        commercial.push("E1".into());
        SweepCatalog {
            sweeps: vec![
                ("sats", grid(&SWEEP_SATS)),
                ("incl", INCL_SWEEP_DEG.iter().map(|&i| ShellCatalog::incl_name(i)).collect()),
                ("alt", ALT_SWEEP_KM.iter().map(|&h| ShellCatalog::alt_name(h)).collect()),
                ("fine", grid(&FINE_SWEEP_SATS)),
                ("commercial", commercial),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Option<&[String]> {
        self.sweeps.iter().find(|(n, _)| *n == name).map(|(_, v)| v.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.sweeps.iter().map(|(n, _)| *n)
    }

    /// Resolves a sweep to shell configurations.
    pub fn shells(&self, name: &str, catalog: &ShellCatalog) -> Result<Vec<ShellConfig>> {
        let names = self
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown sweep {name}; valid: {}", self.names().collect::<Vec<_>>().join(", "))))?;
        names
            .iter()
            .map(|n| catalog.get(n).cloned().ok_or_else(|| Error::Config(format!("sweep {name} names unknown shell {n}"))))
            .collect()
    }
}

/// Output location of one shell inside a run directory.
pub fn shell_dir(root: &std::path::Path, shell: &ShellConfig) -> PathBuf {
    root.join(&shell.name)
}
