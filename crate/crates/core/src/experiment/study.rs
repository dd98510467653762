//! Angle-vs-inclination study and shell-to-shell comparison reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::ExperimentSpec;
use super::output::{distance_hops_heatmap, run, RunOutcome};
use super::{PairRecord, ShellRun};
use crate::error::{Error, Result};
use crate::metrics::{ecdf, mean, median, percentile, EcdfSeries, Heatmap, Metric, PairSummary};
use crate::traffic::AngleBucket;

#[derive(Debug, Clone, PartialEq)]
pub struct AngleStudyRow {
    pub inclination_deg: f64,
    pub bucket: AngleBucket,
    pub pairs: usize,
    /// `None` when the bucket holds no pairs.
    pub mean_avg_hops: Option<f64>,
    pub median_slowdown_g: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AngleStudy {
    /// Inclination-major, then bucket order.
    pub rows: Vec<AngleStudyRow>,
    /// Pairs per bucket (ordered pairs, from the first run).
    pub histogram: [usize; AngleBucket::COUNT],
    pub slowdown_ecdfs: Vec<(f64, AngleBucket, EcdfSeries)>,
    pub heatmaps: Vec<(f64, AngleBucket, Heatmap)>,
}

impl AngleStudy {
    pub fn row(&self, inclination_deg: f64, bucket: AngleBucket) -> Option<&AngleStudyRow> {
        self.rows
            .iter()
            .find(|r| r.inclination_deg == inclination_deg && r.bucket == bucket)
    }

    pub fn inclinations(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().map(|r| r.inclination_deg).collect();
        v.dedup();
        v
    }

    /// Inclination with the lowest mean avg_hops for `bucket`.
    pub fn best_inclination(&self, bucket: AngleBucket) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.bucket == bucket)
            .filter_map(|r| r.mean_avg_hops.map(|h| (r.inclination_deg, h)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// `inclination_deg,bucket_lo_deg,bucket_hi_deg,pairs,mean_avg_hops,median_slowdown_g`
    pub fn table_csv(&self) -> String {
        let mut out = String::from("inclination_deg,bucket_lo_deg,bucket_hi_deg,pairs,mean_avg_hops,median_slowdown_g\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.inclination_deg,
                r.bucket.lower_deg(),
                r.bucket.upper_deg(),
                r.pairs,
                opt(r.mean_avg_hops),
                opt(r.median_slowdown_g)
            );
        }
        out
    }

    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bucket_lo_deg,bucket_hi_deg,pairs\n");
        for b in AngleBucket::all() {
            let _ = writeln!(out, "{},{},{}", b.lower_deg(), b.upper_deg(), self.histogram[b.index()]);
        }
        out
    }

    /// Writes the table, histogram, per-bucket S_g ECDFs and heatmaps.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: String, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        put("angle_hops.csv".into(), self.table_csv())?;
        put("angle_histogram.csv".into(), self.histogram_csv())?;
        for (incl, b, e) in &self.slowdown_ecdfs {
            put(format!("ecdf_slowdown_g_i{incl}_b{}.csv", b.lower_deg()), e.to_csv())?;
        }
        for (incl, b, h) in &self.heatmaps {
            put(format!("heatmap_i{incl}_b{}.csv", b.lower_deg()), h.to_csv())?;
        }
        Ok(())
    }
}

/// Groups each run's pairs by geographic-angle bucket.
pub fn angle_study_from_runs(runs: &[&ShellRun]) -> Result<AngleStudy> {
    if runs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rows = Vec::new();
    let mut slowdown_ecdfs = Vec::new();
    let mut heatmaps = Vec::new();
    let mut histogram = [0; AngleBucket::COUNT];
    for (i, run) in runs.iter().enumerate() {
        let incl = run.shell.inclination_deg;
        let mut grouped: Vec<Vec<&PairRecord>> = vec![Vec::new(); AngleBucket::COUNT];
        for r in &run.records {
            if let Some(a) = r.geo_angle_deg {
                grouped[AngleBucket::of(a).index()].push(r);
            }
        }
        for b in AngleBucket::all() {
            let group = &grouped[b.index()];
            if i == 0 {
                histogram[b.index()] = group.len();
            }
            let hops: Vec<f64> = group.iter().map(|r| r.summary.avg_hops).collect();
            let sg: Vec<f64> = group.iter().map(|r| r.summary.slowdown_g).collect();
            rows.push(AngleStudyRow {
                inclination_deg: incl,
                bucket: b,
                pairs: group.len(),
                mean_avg_hops: mean(&hops).ok(),
                median_slowdown_g: median(&sg).ok(),
            });
            if !group.is_empty() {
                slowdown_ecdfs.push((incl, b, ecdf(Metric::SlowdownG.column(), &sg)?));
                let owned: Vec<PairRecord> = group.iter().map(|&r| r.clone()).collect();
                heatmaps.push((incl, b, distance_hops_heatmap(&owned)?));
            }
        }
    }
    Ok(AngleStudy {
        rows,
        histogram,
        slowdown_ecdfs,
        heatmaps,
    })
}

/// Runs the spec (normally the inclination sweep) and writes the study
/// under `<out>/angle_study`.
pub fn run_angle_study(spec: &ExperimentSpec, out_dir: &Path) -> Result<(RunOutcome, AngleStudy)> {
    let outcome = run(spec, out_dir)?;
    let runs: Vec<&ShellRun> = outcome.runs().collect();
    let study = angle_study_from_runs(&runs)?;
    study.write(&out_dir.join("angle_study"))?;
    Ok((outcome, study))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricDelta {
    pub metric: Metric,
    pub base_median: f64,
    pub other_median: f64,
    pub base_mean: f64,
    pub other_mean: f64,
    pub base_p90: f64,
    pub other_p90: f64,
}

impl MetricDelta {
    pub fn median_delta(&self) -> f64 {
        self.other_median - self.base_median
    }

    pub fn mean_delta(&self) -> f64 {
        self.other_mean - self.base_mean
    }

    pub fn p90_delta(&self) -> f64 {
        self.other_p90 - self.base_p90
    }

    /// Relative mean gap `(base - other) / base`; positive when `other` is lower.
    pub fn relative_mean_gain(&self) -> f64 {
        if self.base_mean == 0.0 {
            0.0
        } else {
            (self.base_mean - self.other_mean) / self.base_mean
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub base: String,
    pub other: String,
    pub deltas: Vec<MetricDelta>,
    /// `other` has the lower mean max-RTT.
    pub inversion: bool,
}

impl Comparison {
    pub fn delta(&self, metric: Metric) -> Option<&MetricDelta> {
        self.deltas.iter().find(|d| d.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("metric,stat,{},{},delta\n", self.base, self.other);
        for d in &self.deltas {
            for (stat, a, b) in [
                ("median", d.base_median, d.other_median),
                ("mean", d.base_mean, d.other_mean),
                ("p90", d.base_p90, d.other_p90),
            ] {
                let _ = writeln!(out, "{},{stat},{a:.6},{b:.6},{:.6}", d.metric.column(), b - a);
            }
        }
        out
    }

    pub fn report(&self) -> String {
        let mut out = self.to_csv();
        if let Some(d) = self.delta(Metric::MaxRtt) {
            let _ = writeln!(
                out,
                "# {} mean max_rtt_ms {:.3} vs {} {:.3} ({:+.2}%)",
                self.other,
                d.other_mean,
                self.base,
                d.base_mean,
                -100.0 * d.relative_mean_gain()
            );
        }
        if self.inversion {
            let _ = writeln!(out, "# inversion: {} has lower mean max-RTT than {}", self.other, self.base);
        }
        out
    }
}

/// Compares two named runs among `runs`.
pub fn compare_shells(runs: &[(String, Vec<PairSummary>)], base: &str, other: &str) -> Result<Comparison> {
    let find = |name: &str| {
        runs.iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::MissingRun(name.to_string()))
    };
    let (a, b) = (find(base)?, find(other)?);
    let deltas = Metric::ALL
        .iter()
        .map(|&m| {
            let va: Vec<f64> = a.iter().map(|s| m.of(s)).collect();
            let vb: Vec<f64> = b.iter().map(|s| m.of(s)).collect();
            Ok(MetricDelta {
                metric: m,
                base_median: median(&va)?,
                other_median: median(&vb)?,
                base_mean: mean(&va)?,
                other_mean: mean(&vb)?,
                base_p90: percentile(&va, 0.9)?,
                other_p90: percentile(&vb, 0.9)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let inversion = deltas[0].other_mean < deltas[0].base_mean;
    Ok(Comparison {
        base: base.to_string(),
        other: other.to_string(),
        deltas,
        inversion,
    })
}
