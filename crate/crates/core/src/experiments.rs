//! Monte-Carlo harness: localization error, repeated trials, parameter sweeps,
//! a least-squares trilateration baseline, and CSV output.
//!
//! Each trial deploys a fresh network from a seed derived from the master seed
//! and the trial index, so trials can run in any order (or in parallel) and
//! still merge into identical results.

use std::fmt;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{euclidean_distance, projected_distance, Position3D};
use crate::localization::{
    localize, Estimate, LocalizationConfig, LocalizationInput, LocalizeError, Variant,
};
use crate::netsim::{anchors_from_density, deploy, observe, step_mobility, NoiseModel, Region};
use crate::rng::{derive_seed, stream, substream};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::ConfigInvalid(msg.into())
}

/// Euclidean distance between true and estimated positions.
pub fn localization_error(true_pos: &Position3D, est: &Position3D) -> f64 {
    euclidean_distance(true_pos, est)
}

/// Mean of per-trial errors for one node.
pub fn mean_error(per_trial: &[f64]) -> f64 {
    per_trial.iter().sum::<f64>() / per_trial.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    ColorFilter(Variant),
    Trilateration,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::ColorFilter(v) => v.name(),
            Algorithm::Trilateration => "trilateration",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trilateration" => Ok(Algorithm::Trilateration),
            other => other
                .parse::<Variant>()
                .map(Algorithm::ColorFilter)
                .map_err(|_| format!("unknown algorithm `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnchorSpec {
    Density(f64),
    Count(usize),
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Threshold,
    SampleCount,
    DAnchor,
    AnchorCount,
    MobileCount,
    Speed,
    StalenessDelay,
    AoaSigma,
    DepthSigma,
    CommRange,
}

impl SweepParam {
    pub const ALL: [SweepParam; 10] = [
        SweepParam::Threshold,
        SweepParam::SampleCount,
        SweepParam::DAnchor,
        SweepParam::AnchorCount,
        SweepParam::MobileCount,
        SweepParam::Speed,
        SweepParam::StalenessDelay,
        SweepParam::AoaSigma,
        SweepParam::DepthSigma,
        SweepParam::CommRange,
    ];

    /// Same spelling as the config-file key.
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Threshold => "threshold",
            SweepParam::SampleCount => "sample_count",
            SweepParam::DAnchor => "d_anchor",
            SweepParam::AnchorCount => "anchor_count",
            SweepParam::MobileCount => "mobile_count",
            SweepParam::Speed => "speed",
            SweepParam::StalenessDelay => "staleness_delay",
            SweepParam::AoaSigma => "aoa_sigma",
            SweepParam::DepthSigma => "depth_sigma",
            SweepParam::CommRange => "comm_range",
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| format!("unknown sweep parameter `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// How trials are scheduled. `Parallel` falls back to sequential when the
/// `parallel` feature is off; results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub region: Region,
    pub comm_range: f64,
    pub anchors: AnchorSpec,
    pub mobile_count: usize,
    pub algorithm: Algorithm,
    pub localization: LocalizationConfig,
    pub trials: usize,
    /// Mobile speed, m/s.
    pub speed: f64,
    /// Time between measurement and scoring, s.
    pub staleness_delay: f64,
    pub noise: NoiseModel,
    pub seed: u64,
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentConfig {
    /// 1000 x 1000 x 20 m, R = 100 m, D_anchor = 4, 400 samples, threshold
    /// 0.01, PCFL, 50 trials, 0.1 m/s drift.
    fn default() -> Self {
        Self {
            region: Region::new(1000.0, 1000.0, 20.0),
            comm_range: 100.0,
            anchors: AnchorSpec::Density(4.0),
            mobile_count: 100,
            algorithm: Algorithm::ColorFilter(Variant::Pcfl),
            localization: LocalizationConfig::default(),
            trials: 50,
            speed: 0.1,
            staleness_delay: 1.0,
            noise: NoiseModel::NONE,
            seed: 42,
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn anchor_count(&self) -> usize {
        match self.anchors {
            AnchorSpec::Density(d) => anchors_from_density(d, self.comm_range, &self.region),
            AnchorSpec::Count(n) => n,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !self.region.is_valid() {
            return Err(invalid("region extents must be positive"));
        }
        if !(self.comm_range > 0.0) || !self.comm_range.is_finite() {
            return Err(invalid("comm_range must be positive"));
        }
        match self.anchors {
            AnchorSpec::Density(d) if !(d > 0.0) || !d.is_finite() => {
                return Err(invalid("d_anchor must be positive"))
            }
            AnchorSpec::Count(0) => return Err(invalid("anchor_count must be at least 1")),
            _ => {}
        }
        if self.mobile_count == 0 {
            return Err(invalid("mobile_count must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if !(self.speed >= 0.0) || !(self.staleness_delay >= 0.0) {
            return Err(invalid("speed and staleness_delay must be non-negative"));
        }
        if !self.noise.is_valid() {
            return Err(invalid("noise sigmas must be non-negative"));
        }
        self.localization
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(invalid("sweep_values is empty"));
            }
        }
        Ok(())
    }

    /// Copy of `self` with one parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self, ExperimentError> {
        let count = |v: f64| -> Result<usize, ExperimentError> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(invalid(format!(
                    "{} needs a whole number, got {v}",
                    param.name()
                )))
            }
        };
        let mut c = self.clone();
        match param {
            SweepParam::Threshold => c.localization.threshold = value,
            SweepParam::SampleCount => c.localization.sample_count = count(value)?,
            SweepParam::DAnchor => c.anchors = AnchorSpec::Density(value),
            SweepParam::AnchorCount => c.anchors = AnchorSpec::Count(count(value)?),
            SweepParam::MobileCount => c.mobile_count = count(value)?,
            SweepParam::Speed => c.speed = value,
            SweepParam::StalenessDelay => c.staleness_delay = value,
            SweepParam::AoaSigma => c.noise.aoa_sigma = value,
            SweepParam::DepthSigma => c.noise.depth_sigma = value,
            SweepParam::CommRange => c.comm_range = value,
        }
        Ok(c)
    }
}

/// Aggregate error statistics. `per_trial` holds one entry per localized node
/// per trial, in (trial, node) order. Extremes and mean are NaN when nothing
/// was localized.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub per_trial: Vec<f64>,
    pub failure_count: usize,
}

impl ErrorStats {
    pub fn from_errors(per_trial: Vec<f64>, failure_count: usize) -> Self {
        if per_trial.is_empty() {
            return Self {
                mean: f64::NAN,
                max: f64::NAN,
                min: f64::NAN,
                stddev: f64::NAN,
                per_trial,
                failure_count,
            };
        }
        let n = per_trial.len() as f64;
        let mean = per_trial.iter().sum::<f64>() / n;
        let var = per_trial
            .iter()
            .map(|e| (e - mean) * (e - mean))
            .sum::<f64>()
            / n;
        let max = per_trial.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = per_trial.iter().cloned().fold(f64::INFINITY, f64::min);
        Self {
            mean,
            max,
            min,
            stddev: var.sqrt(),
            per_trial,
            failure_count,
        }
    }

    pub fn localized(&self) -> usize {
        self.per_trial.len()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("{usable} usable anchors, at least 3 required")]
    InsufficientAnchors { usable: usize },
    #[error("anchor projections are collinear")]
    SingularGeometry,
}

/// Linear least-squares fix from the circle equations around each task
/// projection, with radii from the projected distances.
pub fn baseline_trilateration(input: &LocalizationInput) -> Result<Estimate, BaselineError> {
    let circles: Vec<(f64, f64, f64)> = input
        .observations
        .iter()
        .filter_map(|o| {
            projected_distance(o.depth_difference, o.aoa)
                .ok()
                .map(|p| (o.anchor_position.x, o.anchor_position.y, p))
        })
        .collect();
    if circles.len() < 3 {
        return Err(BaselineError::InsufficientAnchors {
            usable: circles.len(),
        });
    }

    // Subtracting the first circle linearizes the system to rows [ax ay | b].
    // Coordinates are taken relative to the first center for conditioning.
    let (x0, y0, p0) = circles[0];
    let (mut ata, mut atb) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
    for &(x, y, p) in &circles[1..] {
        let (dx, dy) = (x - x0, y - y0);
        let row = [2.0 * dx, 2.0 * dy];
        let b = p0 * p0 - p * p + dx * dx + dy * dy;
        for i in 0..2 {
            for j in 0..2 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * b;
        }
    }
    let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
    let trace = ata[0][0] + ata[1][1];
    if !(trace > 0.0) || det.abs() <= 1e-10 * trace * trace {
        return Err(BaselineError::SingularGeometry);
    }
    let x = (ata[1][1] * atb[0] - ata[0][1] * atb[1]) / det;
    let y = (ata[0][0] * atb[1] - ata[1][0] * atb[0]) / det;
    Ok(Estimate {
        position: Position3D::new(x0 + x, y0 + y, input.mobile_depth),
        filtered_count: 0,
        fallback_used: false,
        degenerate_anchor_count: input.degenerate_count(),
    })
}

/// Errors and failures of one trial.
#[derive(Debug, Clone, Default, PartialEq)]
struct TrialOutcome {
    errors: Vec<f64>,
    failures: usize,
}

fn run_trial(config: &ExperimentConfig, trial: usize) -> TrialOutcome {
    let trial_seed = derive_seed(config.seed, &[trial as u64]);
    let scenario = deploy(
        config.region,
        config.anchor_count(),
        config.mobile_count,
        config.comm_range,
        trial_seed,
    );

    // Measurements are taken now; the node keeps drifting until the estimate
    // is scored.
    let scored = if config.speed > 0.0 && config.staleness_delay > 0.0 {
        let mut rng = substream(trial_seed, &[stream::MOBILITY]);
        step_mobility(&scenario, config.staleness_delay, config.speed, &mut rng)
    } else {
        scenario.clone()
    };

    let mut outcome = TrialOutcome::default();
    for (mobile, later) in scenario.mobiles.iter().zip(&scored.mobiles) {
        let id = mobile.id as u64;
        let mut obs_rng = substream(trial_seed, &[stream::OBSERVE, id]);
        let estimate =
            observe(&scenario, &mobile.position, &config.noise, &mut obs_rng).and_then(|input| {
                match config.algorithm {
                    Algorithm::ColorFilter(variant) => {
                        let cfg = LocalizationConfig {
                            variant,
                            ..config.localization
                        };
                        let mut rng = substream(trial_seed, &[stream::LOCALIZE, id]);
                        localize(&input, &cfg, &mut rng)
                    }
                    Algorithm::Trilateration => {
                        baseline_trilateration(&input).map_err(|e| match e {
                            BaselineError::InsufficientAnchors { usable } => {
                                LocalizeError::InsufficientAnchors { usable }
                            }
                            BaselineError::SingularGeometry => {
                                LocalizeError::InvalidObservation(e.to_string())
                            }
                        })
                    }
                }
            });
        match estimate {
            Ok(e) => outcome
                .errors
                .push(localization_error(&later.position, &e.position)),
            Err(_) => outcome.failures += 1,
        }
    }
    outcome
}

fn run_all(config: &ExperimentConfig, execution: Execution) -> Vec<TrialOutcome> {
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(config, t))
                .collect()
        }
        _ => (0..config.trials).map(|t| run_trial(config, t)).collect(),
    }
}

/// Runs `config.trials` independent trials and aggregates every node's error.
pub fn run_trials(config: &ExperimentConfig) -> Result<ErrorStats, ExperimentError> {
    run_trials_with(config, Execution::default())
}

pub fn run_trials_with(
    config: &ExperimentConfig,
    execution: Execution,
) -> Result<ErrorStats, ExperimentError> {
    config.validate()?;
    let outcomes = run_all(config, execution);
    let failures = outcomes.iter().map(|o| o.failures).sum();
    let errors = outcomes.into_iter().flat_map(|o| o.errors).collect();
    Ok(ErrorStats::from_errors(errors, failures))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub stats: ErrorStats,
}

/// One [`run_trials`] per sweep value, everything else fixed. Every value
/// reuses the master seed, so rows see the same deployments.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| invalid("no sweep configured"))?;
    config.validate()?;
    sweep
        .values
        .iter()
        .map(|&value| {
            let c = config.with_param(sweep.param, value)?;
            Ok(SweepRow {
                value,
                stats: run_trials(&c)?,
            })
        })
        .collect()
}

/// One CSV data row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_name: String,
    pub sweep_value: Option<f64>,
    pub algorithm: String,
    pub weighting_mode: String,
    pub stats: ErrorStats,
    pub trials: usize,
    pub seed: u64,
}

impl ResultRow {
    pub fn new(config: &ExperimentConfig, sweep_value: Option<f64>, stats: ErrorStats) -> Self {
        let weighting_mode = match config.algorithm {
            Algorithm::ColorFilter(_) => config.localization.weighting.name().to_string(),
            Algorithm::Trilateration => "-".to_string(),
        };
        Self {
            sweep_name: config
                .sweep
                .as_ref()
                .map_or("none", |s| s.param.name())
                .to_string(),
            sweep_value,
            algorithm: config.algorithm.name().to_string(),
            weighting_mode,
            stats,
            trials: config.trials,
            seed: config.seed,
        }
    }
}

pub const CSV_HEADER: &str =
    "sweep_name,sweep_value,algorithm,weighting_mode,mean_m,max_m,min_m,stddev_m,failures,trials,seed";

/// `%g`-style formatting with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..6).contains(&exp) {
        trim(format!("{:.*}", (5 - exp) as usize, x))
    } else {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}

pub fn format_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let s = &r.stats;
        let value = r.sweep_value.map(format_sig6).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.sweep_name,
            value,
            r.algorithm,
            r.weighting_mode,
            format_sig6(s.mean),
            format_sig6(s.max),
            format_sig6(s.min),
            format_sig6(s.stddev),
            s.failure_count,
            r.trials,
            r.seed
        ));
    }
    out
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), ExperimentError> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_csv(rows).as_bytes())?;
    Ok(())
}

/// Human-readable table for standard output.
pub fn summary_table(rows: &[ResultRow]) -> String {
    let mut out = format!(
        "{:<16} {:>10} {:<14} {:<8} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
        "sweep",
        "value",
        "algorithm",
        "mode",
        "mean_m",
        "max_m",
        "min_m",
        "std_m",
        "localized",
        "failures"
    );
    for r in rows {
        let s = &r.stats;
        out.push_str(&format!(
            "{:<16} {:>10} {:<14} {:<8} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9} {:>9}\n",
            r.sweep_name,
            r.sweep_value.map(format_sig6).unwrap_or_else(|| "-".into()),
            r.algorithm,
            r.weighting_mode,
            s.mean,
            s.max,
            s.min,
            s.stddev,
            s.localized(),
            s.failure_count
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Position3D;
    use crate::localization::AnchorObservation;
    use crate::RgbColor;
    use approx::assert_abs_diff_eq;

    fn exact_obs(anchor: Position3D, mobile: Position3D) -> AnchorObservation {
        let k = (anchor.z - mobile.z).abs();
        let alpha = (k / anchor.distance_to(&mobile)).asin();
        AnchorObservation::new(0, anchor, k, alpha, RgbColor::new(0.5, 0.5, 0.5)).unwrap()
    }

    #[test]
    fn error_examples() {
        let p = Position3D::new(1.0, 2.0, 3.0);
        assert_eq!(localization_error(&p, &p), 0.0);
        assert_eq!(
            localization_error(
                &Position3D::new(0.0, 0.0, 5.0),
                &Position3D::new(3.0, 4.0, 5.0)
            ),
            5.0
        );
        assert_eq!(mean_error(&[1.0, 2.0, 3.0]), 2.0);
    }

    #[test]
    fn stats_aggregate() {
        let s = ErrorStats::from_errors(vec![1.0, 2.0, 3.0, 6.0], 2);
        assert_eq!((s.mean, s.max, s.min, s.failure_count), (3.0, 6.0, 1.0, 2));
        assert_abs_diff_eq!(s.stddev, (14.0f64 / 4.0).sqrt(), epsilon = 1e-12);
        let empty = ErrorStats::from_errors(vec![], 5);
        assert!(empty.mean.is_nan() && empty.localized() == 0);
    }

    #[test]
    fn trilateration_recovers_exact_position() {
        let mobile = Position3D::new(30.0, 30.0, 10.0);
        let anchors = [
            Position3D::new(0.0, 0.0, 0.0),
            Position3D::new(80.0, 0.0, 0.0),
            Position3D::new(0.0, 80.0, 0.0),
        ];
        let input = LocalizationInput::new(
            10.0,
            anchors.iter().map(|a| exact_obs(*a, mobile)).collect(),
            100.0,
        )
        .unwrap();
        let e = baseline_trilateration(&input).unwrap();
        assert!(e.position.distance_to(&mobile) < 1e-6);
    }

    #[test]
    fn trilateration_rejects_collinear_projections() {
        let mobile = Position3D::new(30.0, 30.0, 10.0);
        let anchors = [
            Position3D::new(0.0, 0.0, 0.0),
            Position3D::new(40.0, 0.0, 2.0),
            Position3D::new(80.0, 0.0, 0.0),
        ];
        let input = LocalizationInput::new(
            10.0,
            anchors.iter().map(|a| exact_obs(*a, mobile)).collect(),
            100.0,
        )
        .unwrap();
        assert_eq!(
            baseline_trilateration(&input),
            Err(BaselineError::SingularGeometry)
        );
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(1.834567891), "1.83457");
        assert_eq!(format_sig6(0.01), "0.01");
        assert_eq!(format_sig6(400.0), "400");
        assert_eq!(format_sig6(123456789.0), "1.23457e8");
        assert_eq!(format_sig6(0.0000123456), "1.23456e-5");
        assert_eq!(format_sig6(-2.5), "-2.5");
        assert_eq!(format_sig6(999999.7), "1e6");
        assert_eq!(format_sig6(f64::NAN), "nan");
    }

    #[test]
    fn config_validation() {
        let ok = ExperimentConfig::default();
        assert!(ok.validate().is_ok());
        assert_eq!(ok.anchor_count(), 19);
        let bad = ExperimentConfig {
            trials: 0,
            ..ok.clone()
        };
        assert!(matches!(
            bad.validate(),
            Err(ExperimentError::ConfigInvalid(_))
        ));
        assert!(ok.with_param(SweepParam::SampleCount, 2.5).is_err());
        let c = ok.with_param(SweepParam::Threshold, 0.03).unwrap();
        assert_eq!(c.localization.threshold, 0.03);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let cfg = ExperimentConfig {
            trials: 6,
            mobile_count: 60,
            ..Default::default()
        };
        let a = run_trials_with(&cfg, Execution::Sequential).unwrap();
        let b = run_trials_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_trial_single_mobile_reports_that_error() {
        let cfg = ExperimentConfig {
            region: Region::new(100.0, 100.0, 20.0),
            anchors: AnchorSpec::Count(12),
            mobile_count: 1,
            trials: 1,
            speed: 0.0,
            ..Default::default()
        };
        let s = run_trials(&cfg).unwrap();
        assert_eq!(s.per_trial.len() + s.failure_count, 1);
        if let [e] = s.per_trial[..] {
            assert_eq!((s.mean, s.max, s.min, s.stddev), (e, e, e, 0.0));
        }
    }

    #[test]
    fn run_trials_is_deterministic() {
        let cfg = ExperimentConfig {
            trials: 4,
            mobile_count: 200,
            ..Default::default()
        };
        assert_eq!(run_trials(&cfg).unwrap(), run_trials(&cfg).unwrap());
    }

    #[test]
    fn default_configuration_regression() {
        let s = run_trials(&ExperimentConfig::default()).unwrap();
        assert_eq!((s.localized(), s.failure_count), (77, 4923));
        assert_abs_diff_eq!(s.mean, 9.119014548608854, epsilon = 1e-9);
    }

    fn rows(n: usize) -> Vec<ResultRow> {
        let cfg = ExperimentConfig {
            sweep: Some(Sweep {
                param: SweepParam::Threshold,
                values: vec![0.01, 0.02, 0.03],
            }),
            ..Default::default()
        };
        (0..n)
            .map(|i| {
                let stats = ErrorStats::from_errors(vec![1.0 + i as f64, 2.345678912], 1);
                ResultRow::new(&cfg, Some(0.01 * (i + 1) as f64), stats)
            })
            .collect()
    }

    #[test]
    fn csv_shape_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        emit_csv(&[], &empty).unwrap();
        assert_eq!(
            std::fs::read_to_string(&empty).unwrap(),
            format!("{CSV_HEADER}\n")
        );

        let path = dir.path().join("sweep.csv");
        let table = rows(3);
        emit_csv(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER);
        for (line, row) in lines[1..].iter().zip(&table) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 11);
            assert_eq!(f[0], "threshold");
            assert_eq!(f[2], "pcfl");
            assert_eq!(f[3], "literal");
            let num = |i: usize| f[i].parse::<f64>().unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * b.abs().max(1e-12);
            assert!(close(num(1), row.sweep_value.unwrap()));
            assert!(close(num(4), row.stats.mean));
            assert!(close(num(5), row.stats.max));
            assert!(close(num(6), row.stats.min));
            assert!(close(num(7), row.stats.stddev));
            assert_eq!(f[8].parse::<usize>().unwrap(), row.stats.failure_count);
            assert_eq!(f[9].parse::<usize>().unwrap(), row.trials);
            assert_eq!(f[10].parse::<u64>().unwrap(), row.seed);
        }
    }
}
