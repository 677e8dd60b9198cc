//! Command-line front end.
//!
//! Configuration is layered: built-in defaults, then the `--config` file, then
//! each `--set key=value` in order, then `--seed`. A later layer always wins;
//! when both `d_anchor` and `anchor_count` are given, the later one wins.
//!
//! Config files hold one `key = value` per line; `#` starts a comment. Keys:
//!
//! | key | value |
//! |---|---|
//! | `region_x`, `region_y`, `region_z` | extents, m |
//! | `comm_range` | R, m |
//! | `d_anchor` / `anchor_count` | anchor density or total count |
//! | `mobile_count` | mobiles per trial |
//! | `algorithm` | comma list of `pcfl`, `acfl`, `trilateration` |
//! | `sample_count`, `threshold` | samples per localization, nearness threshold |
//! | `weighting_mode` | comma list of `literal`, `inverse`, or `both` |
//! | `range_mode` | `global_r` or `per_anchor` |
//! | `projection_colors` | `inherit` or `independent` |
//! | `trials` | trials per data point |
//! | `speed`, `staleness_delay` | m/s, s |
//! | `aoa_sigma`, `depth_sigma` | noise, rad and m |
//! | `sweep_param`, `sweep_values` | parameter name and comma list |

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::experiments::{
    emit_csv, format_sig6, localization_error, run_trials, summary_table, Algorithm, AnchorSpec,
    ExperimentConfig, ExperimentError, ResultRow, Sweep, SweepParam,
};
use crate::localization::{localize, LocalizationConfig, WeightingMode};
use crate::netsim::{canonical_fixture, deploy, observe, Scenario};
use crate::rng::{derive_seed, stream, substream};

pub const DEFAULT_SEED: u64 = 42;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_ALL_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "uasn-cfl",
    version,
    about = "Color-filtering localization simulator for underwater sensor networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Master seed.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Localize every mobile of one scenario once.
    LocalizeOnce {
        /// Scenario file to localize instead of a fresh deployment.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Monte-Carlo trials for each configured algorithm and weighting mode.
    Trials,
    /// Trials for each value of `sweep_param`.
    Sweep,
    /// Write the canonical noise-free fixture scenario.
    Fixtures,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Io(io::Error),
    AllFailed,
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::ConfigInvalid(m) => CliError::Config(m),
            ExperimentError::Io(e) => CliError::Io(e),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// A fully resolved run: the base experiment plus the algorithm and weighting
/// combinations to report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub base: ExperimentConfig,
    pub algorithms: Vec<Algorithm>,
    pub modes: Vec<WeightingMode>,
}

impl Default for RunPlan {
    fn default() -> Self {
        let base = ExperimentConfig::default();
        Self {
            algorithms: vec![base.algorithm],
            modes: vec![base.localization.weighting],
            base,
        }
    }
}

fn list<T>(value: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(s.trim()))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

impl RunPlan {
    /// Applies one configuration key.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let num = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("{key}: `{value}` is not a number"))
        };
        let count = || {
            value
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("{key}: `{value}` is not a whole number"))
        };
        let c = &mut self.base;
        match key {
            "region_x" => c.region.x_extent = num()?,
            "region_y" => c.region.y_extent = num()?,
            "region_z" => c.region.z_extent = num()?,
            "comm_range" => c.comm_range = num()?,
            "d_anchor" => c.anchors = AnchorSpec::Density(num()?),
            "anchor_count" => c.anchors = AnchorSpec::Count(count()?),
            "mobile_count" => c.mobile_count = count()?,
            "sample_count" => c.localization.sample_count = count()?,
            "threshold" => c.localization.threshold = num()?,
            "range_mode" => c.localization.range_mode = value.parse()?,
            "projection_colors" => c.localization.projection_colors = value.parse()?,
            "trials" => c.trials = count()?,
            "speed" => c.speed = num()?,
            "staleness_delay" => c.staleness_delay = num()?,
            "aoa_sigma" => c.noise.aoa_sigma = num()?,
            "depth_sigma" => c.noise.depth_sigma = num()?,
            "algorithm" => self.algorithms = list(value, str::parse)?,
            "weighting_mode" => {
                self.modes = if value.trim() == "both" {
                    vec![WeightingMode::Literal, WeightingMode::Inverse]
                } else {
                    list(value, str::parse)?
                }
            }
            "sweep_param" => {
                let param: SweepParam = value.parse()?;
                let values = c.sweep.take().map(|s| s.values).unwrap_or_default();
                c.sweep = Some(Sweep { param, values });
            }
            "sweep_values" => {
                let values = list(value, |s| {
                    s.parse::<f64>()
                        .map_err(|_| format!("sweep_values: `{s}` is not a number"))
                })?;
                let param = c.sweep.as_ref().map_or(SweepParam::Threshold, |s| s.param);
                c.sweep = Some(Sweep { param, values });
            }
            other => return Err(format!("unknown configuration key `{other}`")),
        }
        Ok(())
    }

    /// Applies a whole `key = value` file.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            self.apply(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), String> {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| format!("override `{kv}` is not key=value"))?;
        self.apply(key.trim(), value.trim())
    }

    /// The concrete experiment configs, one per reported (algorithm, mode).
    pub fn variants(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &algorithm in &self.algorithms {
            match algorithm {
                Algorithm::Trilateration => out.push(ExperimentConfig {
                    algorithm,
                    ..self.base.clone()
                }),
                Algorithm::ColorFilter(_) => {
                    for &weighting in &self.modes {
                        let mut c = ExperimentConfig {
                            algorithm,
                            ..self.base.clone()
                        };
                        c.localization.weighting = weighting;
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}

/// Trials for every (algorithm, mode); one row each.
pub fn trial_rows(plan: &RunPlan) -> Result<Vec<ResultRow>, ExperimentError> {
    plan.variants()
        .into_iter()
        .map(|mut c| {
            c.sweep = None;
            let stats = run_trials(&c)?;
            Ok(ResultRow::new(&c, None, stats))
        })
        .collect()
}

/// Rows ordered by sweep value, then algorithm, then mode.
pub fn sweep_rows(plan: &RunPlan) -> Result<Vec<ResultRow>, ExperimentError> {
    let sweep = plan
        .base
        .sweep
        .clone()
        .filter(|s| !s.values.is_empty())
        .ok_or_else(|| {
            ExperimentError::ConfigInvalid("sweep needs sweep_param and sweep_values".into())
        })?;
    let mut rows = Vec::new();
    for &value in &sweep.values {
        for c in plan.variants() {
            let point = c.with_param(sweep.param, value)?;
            let stats = run_trials(&point)?;
            rows.push(ResultRow::new(&c, Some(value), stats));
        }
    }
    Ok(rows)
}

fn load_plan(cli: &Cli) -> Result<RunPlan, CliError> {
    let mut plan = RunPlan::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)?;
        plan.apply_text(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    for kv in &cli.overrides {
        plan.apply_override(kv).map_err(CliError::Config)?;
    }
    plan.base.seed = cli.seed;
    plan.base.validate()?;
    Ok(plan)
}

fn write_file(out_dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn finish_rows(rows: &[ResultRow], out_dir: &Path, name: &str) -> Result<(), CliError> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    emit_csv(rows, &path)?;
    print!("{}", summary_table(rows));
    println!("wrote {}", path.display());
    if rows.iter().all(|r| r.stats.localized() == 0) {
        return Err(CliError::AllFailed);
    }
    Ok(())
}

fn localize_once(
    plan: &RunPlan,
    scenario_path: Option<&Path>,
    out_dir: &Path,
) -> Result<(), CliError> {
    let c = &plan.base;
    let scenario = match scenario_path {
        Some(p) => fs::read_to_string(p)?
            .parse::<Scenario>()
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => deploy(
            c.region,
            c.anchor_count(),
            c.mobile_count,
            c.comm_range,
            derive_seed(c.seed, &[0]),
        ),
    };
    let algorithm = plan.algorithms.first().copied().unwrap_or(c.algorithm);
    let mode = plan.modes.first().copied().unwrap_or_default();

    let mut csv = String::from(
        "mobile_id,true_x,true_y,true_z,est_x,est_y,est_z,error_m,filtered,fallback\n",
    );
    let mut localized = 0;
    for m in &scenario.mobiles {
        let id = m.id as u64;
        let mut obs_rng = substream(scenario.seed, &[stream::OBSERVE, id]);
        let result = observe(&scenario, &m.position, &c.noise, &mut obs_rng)
            .map_err(|e| e.to_string())
            .and_then(|input| match algorithm {
                Algorithm::ColorFilter(variant) => {
                    let cfg = LocalizationConfig {
                        variant,
                        weighting: mode,
                        ..c.localization
                    };
                    let mut rng = substream(c.seed, &[stream::LOCALIZE, id]);
                    localize(&input, &cfg, &mut rng).map_err(|e| e.to_string())
                }
                Algorithm::Trilateration => {
                    crate::experiments::baseline_trilateration(&input).map_err(|e| e.to_string())
                }
            });
        match result {
            Ok(e) => {
                localized += 1;
                let (t, p) = (m.position, e.position);
                let err = localization_error(&t, &p);
                println!("mobile {:>4}: true ({:.3}, {:.3}, {:.3})  est ({:.3}, {:.3}, {:.3})  error {:.3} m", m.id, t.x, t.y, t.z, p.x, p.y, p.z, err);
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    m.id,
                    format_sig6(t.x),
                    format_sig6(t.y),
                    format_sig6(t.z),
                    format_sig6(p.x),
                    format_sig6(p.y),
                    format_sig6(p.z),
                    format_sig6(err),
                    e.filtered_count,
                    e.fallback_used
                ));
            }
            Err(msg) => eprintln!("mobile {:>4}: not localized ({msg})", m.id),
        }
    }
    let path = write_file(out_dir, "localize_once.csv", &csv)?;
    println!("wrote {}", path.display());
    if localized == 0 {
        return Err(CliError::AllFailed);
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Command::Fixtures = cli.command {
        let path = write_file(
            &cli.out,
            "canonical_fixture.txt",
            &canonical_fixture().to_text(),
        )?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    let plan = load_plan(cli)?;
    match &cli.command {
        Command::Trials => finish_rows(&trial_rows(&plan)?, &cli.out, "trials.csv"),
        Command::Sweep => finish_rows(&sweep_rows(&plan)?, &cli.out, "sweep.csv"),
        Command::LocalizeOnce { scenario } => localize_once(&plan, scenario.as_deref(), &cli.out),
        Command::Fixtures => unreachable!(),
    }
}

/// Runs a parsed invocation and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            EXIT_CONFIG
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
        Err(CliError::AllFailed) => {
            eprintln!("error: no mobile node could be localized");
            EXIT_ALL_FAILED
        }
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::Variant;

    #[test]
    fn plan_layers_apply_in_order() {
        let mut plan = RunPlan::default();
        plan.apply_text(
            "threshold = 0.02 # tight\n\nalgorithm = pcfl, acfl\nweighting_mode = both\n",
        )
        .unwrap();
        plan.apply_override("threshold=0.03").unwrap();
        assert_eq!(plan.base.localization.threshold, 0.03);
        assert_eq!(
            plan.algorithms,
            vec![
                Algorithm::ColorFilter(Variant::Pcfl),
                Algorithm::ColorFilter(Variant::Acfl)
            ]
        );
        assert_eq!(plan.variants().len(), 4);
        plan.apply("algorithm", "trilateration").unwrap();
        assert_eq!(plan.variants().len(), 1);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunPlan::default()
            .apply_text("region_x = 10\nbogus_key = 3\n")
            .unwrap_err();
        assert!(err.contains("bogus_key") && err.contains("line 2"), "{err}");
        assert!(RunPlan::default().apply_override("trials").is_err());
        assert!(RunPlan::default().apply("trials", "many").is_err());
    }

    #[test]
    fn sweep_keys_combine_in_either_order() {
        let mut a = RunPlan::default();
        a.apply_text("sweep_values = 1,4\nsweep_param = d_anchor\n")
            .unwrap();
        let mut b = RunPlan::default();
        b.apply_text("sweep_param = d_anchor\nsweep_values = 1, 4\n")
            .unwrap();
        assert_eq!(a.base.sweep, b.base.sweep);
        assert_eq!(
            a.base.sweep,
            Some(Sweep {
                param: SweepParam::DAnchor,
                values: vec![1.0, 4.0]
            })
        );
    }

    #[test]
    fn density_and_count_last_wins() {
        let mut plan = RunPlan::default();
        plan.apply_text("d_anchor = 2\nanchor_count = 30\n")
            .unwrap();
        assert_eq!(plan.base.anchor_count(), 30);
        plan.apply("d_anchor", "4").unwrap();
        assert_eq!(plan.base.anchor_count(), 19);
    }
}
