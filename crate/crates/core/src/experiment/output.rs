//! Run artifact directory: per-shell CSVs, coverage report and manifest.
//!
//! ```text
//! <out>/manifest.txt
//! <out>/<shell>/metrics.csv
//! <out>/<shell>/ecdf_<metric>.csv
//! <out>/<shell>/heatmap.csv
//! <out>/<shell>/coverage.txt
//! <out>/<shell>/tle.txt, isls.txt, tm.txt
//! <out>/<shell>/paths.csv        (only with dump-paths)
//! ```

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::config::ExperimentSpec;
use super::{shell_dir, simulate_shell, snapshot_times, PairRecord, ShellRun};
use crate::constellation::tle::{export_tle, TleEpoch};
use crate::error::{Error, Result};
use crate::metrics::{ecdf, heatmap_bins, Heatmap, PairSummary};
use crate::routing::{path_dump_line, PairRoute};
use crate::topology::{build_plus_grid, isl_file};
use crate::traffic::{build_matrix, dataset_hash, TrafficMatrix};

pub const METRICS_HEADER: &str = "pair_id,src,dst,geodesic_km,geo_angle_deg,max_rtt_ms,min_rtt_ms,spread_ms,slowdown_m,slowdown_g,path_changes,avg_hops,hop_spread,hop_ratio,reachable_frac";

#[derive(Debug)]
pub struct ShellOutcome {
    pub shell: String,
    pub dir: PathBuf,
    pub result: Result<ShellRun>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub cities_sha256: String,
    pub shells: Vec<ShellOutcome>,
}

impl RunOutcome {
    pub fn runs(&self) -> impl Iterator<Item = &ShellRun> {
        self.shells.iter().filter_map(|s| s.result.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &Error)> {
        self.shells
            .iter()
            .filter_map(|s| s.result.as_ref().err().map(|e| (s.shell.as_str(), e)))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Runs every shell of `spec`, writing artifacts under `out_dir`.
///
/// A failing shell is recorded in the outcome and the remaining shells
/// still run. Errors that affect every shell (bad spec, unreadable city
/// file, unwritable output directory) are returned directly.
pub fn run(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunOutcome> {
    spec.validate()?;
    let cities = spec.cities.load()?;
    let hash = dataset_hash(&cities);
    if let Some(expected) = &spec.expected_cities_sha256 {
        if *expected != hash {
            return Err(Error::Config(format!(
                "city dataset hash {hash} does not match the expected {expected}"
            )));
        }
    }
    let matrix = build_matrix(&cities)?;
    let times = snapshot_times(spec.duration_s, spec.step_s)?;
    create_dir(out_dir)?;
    write_file(&out_dir.join("manifest.txt"), &spec.manifest(&hash, times.len()))?;

    let shells = spec
        .shells
        .iter()
        .map(|shell| {
            let dir = shell_dir(out_dir, shell);
            let result = run_one(spec, shell, &matrix, &times, &dir);
            ShellOutcome {
                shell: shell.name.clone(),
                dir,
                result,
            }
        })
        .collect();
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        cities_sha256: hash,
        shells,
    })
}

fn run_one(
    spec: &ExperimentSpec,
    shell: &crate::constellation::ShellConfig,
    matrix: &TrafficMatrix,
    times: &[f64],
    dir: &Path,
) -> Result<ShellRun> {
    create_dir(dir)?;
    let run = if spec.outputs.path_dump {
        let path = dir.join("paths.csv");
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "t,pair_id,nodes,length_m").map_err(|e| Error::io(&path, e))?;
        let mut dump = |t: f64, routes: &[PairRoute]| -> Result<()> {
            for (pid, r) in routes.iter().enumerate() {
                if let Some(p) = r.path() {
                    writeln!(w, "{}", path_dump_line(t, pid, p)).map_err(|e| Error::io(&path, e))?;
                }
            }
            Ok(())
        };
        let run = simulate_shell(&spec.earth, shell, matrix, &spec.gsl_policy, times, spec.workers, Some(&mut dump))?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        run
    } else {
        simulate_shell(&spec.earth, shell, matrix, &spec.gsl_policy, times, spec.workers, None)?
    };
    write_shell_outputs(&run, spec, matrix, dir)?;
    Ok(run)
}

/// Writes the selected artifacts for one completed shell run.
pub fn write_shell_outputs(run: &ShellRun, spec: &ExperimentSpec, matrix: &TrafficMatrix, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    write_file(&dir.join("metrics.csv"), &metrics_csv(&run.records))?;
    write_file(&dir.join("coverage.txt"), &coverage_report(run))?;
    if !run.records.is_empty() {
        for &m in &spec.outputs.ecdfs {
            let series = ecdf(m.column(), &run.metric_values(m))?;
            write_file(&dir.join(format!("ecdf_{}.csv", m.column())), &series.to_csv())?;
        }
    }
    if spec.outputs.heatmap {
        write_file(&dir.join("heatmap.csv"), &distance_hops_heatmap(&run.records)?.to_csv())?;
    }
    if spec.outputs.network_files {
        write_file(&dir.join("tle.txt"), &export_tle(&spec.earth, &run.shell, TleEpoch::default())?)?;
        write_file(&dir.join("isls.txt"), &isl_file(&build_plus_grid(&run.shell)?))?;
        write_file(&dir.join("tm.txt"), &matrix.tm_file())?;
    }
    Ok(())
}

/// Geodesic distance against average hop count, default bin widths.
pub fn distance_hops_heatmap(records: &[PairRecord]) -> Result<Heatmap> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.geodesic_km, r.summary.avg_hops)).collect();
    heatmap_bins(&points, Heatmap::DEFAULT_DISTANCE_BIN_KM, Heatmap::DEFAULT_HOP_BIN)
}

pub fn metrics_csv(records: &[PairRecord]) -> String {
    let mut out = String::with_capacity(160 * (records.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in records {
        let s = &r.summary;
        let angle = r.geo_angle_deg.map(|a| format!("{a:.6}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.6},{},{:.6},{:.6}",
            s.pair_id,
            r.src_id,
            r.dst_id,
            r.geodesic_km,
            angle,
            s.max_rtt_ms,
            s.min_rtt_ms,
            s.rtt_spread_ms,
            s.slowdown_m,
            s.slowdown_g,
            s.path_changes,
            s.avg_hops,
            s.hop_spread,
            s.hop_ratio,
            s.reachable_fraction
        );
    }
    out
}

fn coverage_report(run: &ShellRun) -> String {
    let gaps = run.summaries().filter(|s| s.reachable_fraction < 1.0).count();
    let min_frac = run.summaries().map(|s| s.reachable_fraction).fold(1.0, f64::min);
    let ids = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    let mut out = String::new();
    let _ = writeln!(out, "shell = {}", run.shell.name);
    let _ = writeln!(out, "snapshots = {}", run.snapshot_count);
    let _ = writeln!(out, "pairs = {}", run.total_pairs);
    let _ = writeln!(out, "summarized_pairs = {}", run.records.len());
    let _ = writeln!(out, "pairs_with_unreachable_snapshots = {gaps}");
    let _ = writeln!(out, "min_reachable_frac = {min_frac:.6}");
    let _ = writeln!(out, "never_reachable = {}", run.never_reachable.len());
    let _ = writeln!(out, "never_reachable_pair_ids = {}", ids(&run.never_reachable));
    let _ = writeln!(out, "degenerate_pair_ids = {}", ids(&run.degenerate));
    let _ = writeln!(out, "rtt_extrema = reachable snapshots only");
    let _ = writeln!(
        out,
        "recurrence_period_s = {}",
        run.recurrence_period_s.map_or("none".to_string(), |p| p.to_string())
    );
    out
}

#[derive(Debug, Deserialize)]
struct MetricsRow {
    pair_id: usize,
    src: u32,
    dst: u32,
    geodesic_km: f64,
    geo_angle_deg: Option<f64>,
    max_rtt_ms: f64,
    min_rtt_ms: f64,
    spread_ms: f64,
    slowdown_m: f64,
    slowdown_g: f64,
    path_changes: usize,
    avg_hops: f64,
    hop_spread: u32,
    hop_ratio: f64,
    reachable_frac: f64,
}

/// Reads a metrics CSV written by [`run`].
pub fn read_metrics_csv(path: &Path) -> Result<Vec<PairRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse {
        path: origin.clone(),
        line: 1,
        msg: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>().join(",") != METRICS_HEADER {
        return Err(Error::Parse {
            path: origin,
            line: 1,
            msg: format!("expected header {METRICS_HEADER}"),
        });
    }
    reader
        .deserialize::<MetricsRow>()
        .map(|row| {
            let row = row.map_err(|e| Error::Parse {
                path: origin.clone(),
                line: e.position().map_or(0, |p| p.line()),
                msg: e.to_string(),
            })?;
            Ok(PairRecord {
                src_id: row.src,
                dst_id: row.dst,
                geodesic_km: row.geodesic_km,
                geo_angle_deg: row.geo_angle_deg,
                summary: PairSummary {
                    pair_id: row.pair_id,
                    max_rtt_ms: row.max_rtt_ms,
                    min_rtt_ms: row.min_rtt_ms,
                    rtt_spread_ms: row.spread_ms,
                    slowdown_m: row.slowdown_m,
                    slowdown_g: row.slowdown_g,
                    path_changes: row.path_changes,
                    avg_hops: row.avg_hops,
                    hop_spread: row.hop_spread,
                    hop_ratio: row.hop_ratio,
                    reachable_fraction: row.reachable_frac,
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::ShellConfig;
    use crate::experiment::config::CitySource;

    fn tiny_spec(dir: &Path) -> ExperimentSpec {
        let cities = dir.join("cities.csv");
        fs::write(&cities, "id,name,lat_deg,lon_deg,gdp_rank\n1,A,0,0,1\n2,B,20,30,2\n3,C,-15,60,3\n").unwrap();
        let mut spec = ExperimentSpec::new(vec![ShellConfig::new("tiny", 550.0, 6, 6, 53.0).unwrap()]);
        spec.duration_s = 2.0;
        spec.cities = CitySource::File(cities);
        spec.gsl_policy = crate::topology::GslPolicy::new(0.0).unwrap();
        spec.outputs.path_dump = true;
        spec.workers = 1;
        spec
    }

    #[test]
    fn writes_layout_and_reads_back() {
        let tmp = tempfile::tempdir().unwrap();
        let spec = tiny_spec(tmp.path());
        let out = tmp.path().join("run");
        let outcome = run(&spec, &out).unwrap();
        let shell = outcome.runs().next().unwrap();
        for f in ["metrics.csv", "coverage.txt", "heatmap.csv", "tle.txt", "isls.txt", "tm.txt", "paths.csv"] {
            assert!(out.join("tiny").join(f).exists(), "{f}");
        }
        assert!(out.join("manifest.txt").exists());
        let back = read_metrics_csv(&out.join("tiny/metrics.csv")).unwrap();
        assert_eq!(back.len(), shell.records.len());
        for (a, b) in back.iter().zip(&shell.records) {
            assert_eq!(a.summary.pair_id, b.summary.pair_id);
            assert!((a.summary.max_rtt_ms - b.summary.max_rtt_ms).abs() < 1e-6);
        }
        let paths = fs::read_to_string(out.join("tiny/paths.csv")).unwrap();
        assert!(paths.starts_with("t,pair_id,nodes,length_m\n"));
    }

    #[test]
    fn failing_shell_does_not_stop_others() {
        let tmp = tempfile::tempdir().unwrap();
        let mut spec = tiny_spec(tmp.path());
        spec.outputs.path_dump = false;
        // 2x2 grid is rejected by the +Grid builder
        let bad = ShellConfig::new("bad", 550.0, 2, 2, 53.0).unwrap();
        spec.shells.insert(0, bad);
        let outcome = run(&spec, &tmp.path().join("run")).unwrap();
        assert_eq!(outcome.failures().count(), 1);
        assert_eq!(outcome.runs().count(), 1);
    }

    #[test]
    fn rejects_mismatched_dataset_hash() {
        let tmp = tempfile::tempdir().unwrap();
        let mut spec = tiny_spec(tmp.path());
        spec.expected_cities_sha256 = Some("00".into());
        assert!(run(&spec, &tmp.path().join("run")).is_err());
    }
}
