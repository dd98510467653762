//! Argument parsing and command dispatch for the `leo-topo` binary.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use leo_topo::constellation::{propagate, ShellCatalog};
use leo_topo::constellation::tle::{export_tle, TleEpoch};
use leo_topo::experiment::{
    compare_shells, parse_key_values, read_metrics_csv, run, run_angle_study, ExperimentSpec, RunOutcome,
    SweepCatalog,
};
use leo_topo::geo::{cartesian_to_geo, EarthModel};
use leo_topo::metrics::{ecdf, heatmap_bins, median, Heatmap, Metric};
use leo_topo::topology::{build_plus_grid, isl_file};

/// Environment variable naming a default city dataset.
pub const CITIES_ENV: &str = "LEO_TOPO_CITIES";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] leo_topo::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) | CliError::Failed(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "leo-topo", version, about = "LEO constellation topology and latency simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List catalog shells and sweeps
    ListShells,
    /// Satellite positions at one instant, or TLE/ISL files with --out
    Propagate {
        #[arg(long)]
        shell: String,
        /// Seconds after epoch
        #[arg(long, default_value_t = 0.0)]
        time: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate shells and write per-pair metrics
    Run(RunArgs),
    /// Run a named sweep (sats, incl, alt, fine, commercial)
    Sweep {
        name: String,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Mean hops and S_g per geographic-angle bucket across inclinations
    AngleStudy(RunArgs),
    /// Compare two shells of a finished run directory
    Compare {
        #[arg(long)]
        runs: PathBuf,
        base: String,
        other: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ECDF of one metric column of a metrics CSV
    Ecdf {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long, default_value = "max_rtt_ms")]
        metric: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance x average-hops heatmap of a metrics CSV
    Heatmap {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long, default_value_t = Heatmap::DEFAULT_DISTANCE_BIN_KM)]
        dist_bin_km: f64,
        #[arg(long, default_value_t = Heatmap::DEFAULT_HOP_BIN)]
        hop_bin: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Shell name(s); repeat or comma-separate
    #[arg(long, value_delimiter = ',')]
    shell: Vec<String>,
    /// Key-value config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    cities: Option<PathBuf>,
    #[arg(long)]
    min_elev: Option<f64>,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// Reserved; the simulation has no random components
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Also write every snapshot's routes to paths.csv
    #[arg(long)]
    dump_paths: bool,
}

impl RunArgs {
    /// Config file values, then `default_shells`, then flags. Later keys win.
    fn spec(&self, default_shells: Option<&[String]>, env_cities: Option<&Path>) -> CliResult<ExperimentSpec> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        if let Some(p) = env_cities {
            pairs.push(("cities".into(), p.display().to_string()));
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            pairs.extend(parse_key_values(&text).map_err(|e| CliError::Usage(e.to_string()))?);
        }
        if let Some(shells) = default_shells {
            pairs.push(("shells".into(), shells.join(",")));
        }
        let mut flag = |k: &str, v: String| pairs.push((k.to_string(), v));
        if !self.shell.is_empty() {
            flag("shells", self.shell.join(","));
        }
        if let Some(v) = self.duration {
            flag("duration", v.to_string());
        }
        if let Some(v) = self.step {
            flag("step", v.to_string());
        }
        if let Some(v) = &self.cities {
            flag("cities", v.display().to_string());
        }
        if let Some(v) = self.min_elev {
            flag("min-elev", v.to_string());
        }
        if let Some(v) = self.workers {
            flag("workers", v.to_string());
        }
        if let Some(v) = self.seed {
            flag("seed", v.to_string());
        }
        if self.dump_paths {
            flag("dump-paths", "true".into());
        }
        let has_shells = pairs.iter().any(|(k, _)| k == "shell" || k == "shells" || k.starts_with("shell."));
        if !has_shells {
            return Err(CliError::Usage(format!(
                "no shell given; use --shell NAME or --config FILE. Valid shells: {}",
                shell_names()
            )));
        }
        ExperimentSpec::from_pairs(&pairs, &ShellCatalog::builtin()).map_err(|e| CliError::Usage(e.to_string()))
    }
}

fn shell_names() -> String {
    ShellCatalog::builtin().names().collect::<Vec<_>>().join(", ")
}

/// Process environment consulted by the CLI.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub cities: Option<PathBuf>,
}

impl Env {
    pub fn from_process() -> Self {
        Env {
            cities: std::env::var_os(CITIES_ENV).filter(|v| !v.is_empty()).map(PathBuf::from),
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit status.
pub fn parse_and_dispatch<I, T>(argv: I, env: &Env, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, env, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "leo-topo: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, env: &Env, out: &mut dyn Write) -> CliResult<()> {
    let catalog = ShellCatalog::builtin();
    let sweeps = SweepCatalog::builtin();
    let env_cities = env.cities.as_deref();
    let mut text = String::new();
    match command {
        Command::ListShells => {
            text.push_str("name,altitude_km,orbits,sats_per_orbit,inclination_deg,total_sats\n");
            for s in catalog.iter() {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    s.name,
                    s.altitude_km,
                    s.num_orbits,
                    s.sats_per_orbit,
                    s.inclination_deg,
                    s.total_satellites()
                );
            }
            for (name, members) in &sweeps.sweeps {
                let _ = writeln!(text, "# sweep {name}: {}", members.join(" "));
            }
        }
        Command::Propagate { shell, time, out: dir } => {
            let shell = catalog
                .get(&shell)
                .ok_or_else(|| CliError::Usage(format!("unknown shell {shell}; valid shells: {}", shell_names())))?;
            if !time.is_finite() {
                return Err(CliError::Usage(format!("invalid --time {time}")));
            }
            let earth = EarthModel::default();
            let mut csv = String::from("sat_id,orbit,slot,lat_deg,lon_deg,alt_km\n");
            for (id, p) in shell.satellite_ids().zip(propagate(&earth, shell, time)) {
                let g = cartesian_to_geo(&earth, p, time);
                let _ = writeln!(
                    csv,
                    "{},{},{},{:.6},{:.6},{:.3}",
                    id.flat(shell.sats_per_orbit),
                    id.orbit,
                    id.slot,
                    g.latitude_deg,
                    g.longitude_deg,
                    g.altitude_m / 1000.0
                );
            }
            match dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
                    write(&dir.join("positions.csv"), &csv)?;
                    write(&dir.join("tle.txt"), &export_tle(&earth, shell, TleEpoch::default())?)?;
                    write(&dir.join("isls.txt"), &isl_file(&build_plus_grid(shell)?))?;
                    let _ = writeln!(text, "wrote {}", dir.display());
                }
                None => text = csv,
            }
        }
        Command::Run(args) => {
            let spec = args.spec(None, env_cities)?;
            let outcome = run(&spec, &args.out)?;
            text = report_run(&outcome)?;
        }
        Command::Sweep { name, args } => {
            let members = sweeps.get(&name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown sweep {name}; valid sweeps: {}",
                    sweeps.names().collect::<Vec<_>>().join(", ")
                ))
            })?;
            if !args.shell.is_empty() {
                return Err(CliError::Usage("sweep takes its shells from the sweep name; drop --shell".into()));
            }
            let spec = args.spec(Some(members), env_cities)?;
            let outcome = run(&spec, &args.out)?;
            text = report_run(&outcome)?;
        }
        Command::AngleStudy(args) => {
            let incl = sweeps.get("incl").expect("builtin incl sweep");
            let defaults = (args.shell.is_empty() && args.config.is_none()).then_some(incl);
            let spec = args.spec(defaults, env_cities)?;
            let (outcome, study) = run_angle_study(&spec, &args.out)?;
            text = report_run(&outcome)?;
            text.push_str(&study.table_csv());
        }
        Command::Compare { runs, base, other, out: dest } => {
            let mut loaded = Vec::new();
            for name in [&base, &other] {
                let path = runs.join(name).join("metrics.csv");
                if !path.exists() {
                    return Err(leo_topo::Error::MissingRun(format!("{name} (no {})", path.display())).into());
                }
                let records = read_metrics_csv(&path)?;
                loaded.push((name.clone(), records.into_iter().map(|r| r.summary).collect()));
            }
            let report = compare_shells(&loaded, &base, &other)?.report();
            text = emit(dest.as_deref(), report)?;
        }
        Command::Ecdf { metrics, metric, out: dest } => {
            let m = Metric::from_column(&metric).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown metric {metric}; valid: {}",
                    Metric::ALL.iter().map(|m| m.column()).collect::<Vec<_>>().join(", ")
                ))
            })?;
            let records = read_metrics_csv(&metrics)?;
            let values: Vec<f64> = records.iter().map(|r| m.of(&r.summary)).collect();
            text = emit(dest.as_deref(), ecdf(m.column(), &values)?.to_csv())?;
        }
        Command::Heatmap {
            metrics,
            dist_bin_km,
            hop_bin,
            out: dest,
        } => {
            if !(dist_bin_km > 0.0 && hop_bin > 0.0) {
                return Err(CliError::Usage("bin widths must be positive".into()));
            }
            let records = read_metrics_csv(&metrics)?;
            let points: Vec<(f64, f64)> = records.iter().map(|r| (r.geodesic_km, r.summary.avg_hops)).collect();
            text = emit(dest.as_deref(), heatmap_bins(&points, dist_bin_km, hop_bin)?.to_csv())?;
        }
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Failed(format!("stdout: {e}")))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Failed(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Writes to `dest` when given (returning a note), else returns the text for stdout.
fn emit(dest: Option<&Path>, text: String) -> CliResult<String> {
    match dest {
        Some(p) => {
            write(p, &text)?;
            Ok(format!("wrote {}\n", p.display()))
        }
        None => Ok(text),
    }
}

fn report_run(outcome: &RunOutcome) -> CliResult<String> {
    let mut text = String::new();
    for run in outcome.runs() {
        let rtt = run.metric_values(Metric::MaxRtt);
        let _ = writeln!(
            text,
            "{}: {} pairs summarized ({} never reachable), median max_rtt_ms {}",
            run.shell.name,
            run.records.len(),
            run.never_reachable.len(),
            median(&rtt).map_or("n/a".to_string(), |m| format!("{m:.3}"))
        );
    }
    let failures: Vec<String> = outcome.failures().map(|(s, e)| format!("{s}: {e}")).collect();
    if failures.is_empty() {
        let _ = writeln!(text, "outputs in {}", outcome.out_dir.display());
        Ok(text)
    } else {
        Err(CliError::Failed(format!("{text}failed shells:\n{}", failures.join("\n"))))
    }
}
