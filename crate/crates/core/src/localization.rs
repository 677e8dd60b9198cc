//! PCFL and ACFL estimators.
//!
//! One call to [`localize`] runs the three stages for a single mobile node at a
//! single instant:
//!
//! 1. build a task ring per task anchor and draw samples from their intersection;
//! 2. encode the mobile node and every sample as an RGB color from their
//!    distance profiles to the task projections (PCFL) or task anchors (ACFL);
//! 3. keep the samples whose color is within the nearness threshold and return
//!    their weighted mean.
//!
//! The depth of the estimate is the mobile node's pressure depth, unchanged.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::color::{nearness_degree, node_rgb_with_ranges, RgbColor};
use crate::geometry::{
    make_task_ring, project_anchor, projected_distance, sample_intersection, slant_distance,
    GeometryError, PlanarPoint, Position3D, TaskRing, ANGLE_EPSILON,
};

/// Fewer usable anchors than this is reported instead of estimated.
pub const MIN_ANCHORS: usize = 3;

/// In inverse weighting, nearness below this counts as an exact match.
pub const EXACT_MATCH_NEARNESS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalizeError {
    #[error("no observation has a usable angle of arrival")]
    NoUsableAnchor,
    #[error("{usable} usable task anchors, at least {MIN_ANCHORS} required")]
    InsufficientAnchors { usable: usize },
    #[error("filtered sample set is empty")]
    EmptyFilteredSet,
    #[error("invalid observation: {0}")]
    InvalidObservation(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which distance drives the color encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Projected in-plane distance to each task projection.
    #[default]
    Pcfl,
    /// Slant distance to each task anchor.
    Acfl,
}

/// How filtered samples are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WeightingMode {
    /// Weight proportional to nearness, as the normalization is printed.
    #[default]
    Literal,
    /// Weight proportional to inverse nearness (closer color, larger weight).
    Inverse,
}

/// Attenuation range used in the value-dimming step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RangeMode {
    /// The communication range `R` for every anchor.
    #[default]
    GlobalR,
    /// `sqrt(R^2 - k^2)`, the anchor's maximum in-plane reach.
    PerAnchor,
}

/// Source of the color assigned to each task projection under PCFL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ProjectionColors {
    /// The projection carries its anchor's broadcast color.
    #[default]
    Inherit,
    /// Fresh uniform colors drawn per localization.
    Independent,
}

macro_rules! impl_name {
    ($ty:ty, $($variant:path => $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn name(&self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok($variant),)+
                    other => Err(format!("unknown {} `{other}`", stringify!($ty))),
                }
            }
        }
    };
}

impl_name!(Variant, Variant::Pcfl => "pcfl", Variant::Acfl => "acfl");
impl_name!(WeightingMode, WeightingMode::Literal => "literal", WeightingMode::Inverse => "inverse");
impl_name!(RangeMode, RangeMode::GlobalR => "global_r", RangeMode::PerAnchor => "per_anchor");
impl_name!(ProjectionColors, ProjectionColors::Inherit => "inherit", ProjectionColors::Independent => "independent");

/// One task anchor's broadcast together with the mobile node's measurements of it.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorObservation {
    pub anchor_id: u32,
    pub anchor_position: Position3D,
    /// Depth difference `k` between anchor and mobile node, meters.
    pub depth_difference: f64,
    /// Elevation angle of arrival, radians in `[0, pi/2]`.
    pub aoa: f64,
    pub anchor_color: RgbColor,
}

impl AnchorObservation {
    pub fn new(
        anchor_id: u32,
        anchor_position: Position3D,
        depth_difference: f64,
        aoa: f64,
        anchor_color: RgbColor,
    ) -> Result<Self, LocalizeError> {
        let obs = Self {
            anchor_id,
            anchor_position,
            depth_difference,
            aoa,
            anchor_color,
        };
        obs.validate()?;
        Ok(obs)
    }

    fn validate(&self) -> Result<(), LocalizeError> {
        let bad = |what: String| {
            Err(LocalizeError::InvalidObservation(format!(
                "anchor {}: {what}",
                self.anchor_id
            )))
        };
        if !self.anchor_position.is_finite() {
            return bad("non-finite position".into());
        }
        if !(self.depth_difference >= 0.0) || !self.depth_difference.is_finite() {
            return bad(format!("depth difference {}", self.depth_difference));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.aoa) {
            return bad(format!("angle of arrival {}", self.aoa));
        }
        if !self.anchor_color.in_unit_cube() {
            return bad("color outside [0,1]^3".into());
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.aoa < ANGLE_EPSILON
    }

    pub fn projection(&self, mobile_depth: f64) -> Position3D {
        project_anchor(&self.anchor_position, mobile_depth)
    }
}

/// Everything the mobile node knows at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationInput {
    pub mobile_depth: f64,
    pub observations: Vec<AnchorObservation>,
    pub communication_range: f64,
}

impl LocalizationInput {
    pub fn new(
        mobile_depth: f64,
        observations: Vec<AnchorObservation>,
        communication_range: f64,
    ) -> Result<Self, LocalizeError> {
        if !(communication_range > 0.0) || !communication_range.is_finite() {
            return Err(LocalizeError::InvalidObservation(format!(
                "communication range {communication_range}"
            )));
        }
        if observations.is_empty() {
            return Err(LocalizeError::InsufficientAnchors { usable: 0 });
        }
        if !mobile_depth.is_finite() {
            return Err(LocalizeError::InvalidObservation(
                "non-finite mobile depth".into(),
            ));
        }
        for obs in &observations {
            obs.validate()?;
            if obs.depth_difference > communication_range {
                return Err(LocalizeError::InvalidObservation(format!(
                    "anchor {}: depth difference {} exceeds range {communication_range}",
                    obs.anchor_id, obs.depth_difference
                )));
            }
        }
        Ok(Self {
            mobile_depth,
            observations,
            communication_range,
        })
    }

    fn usable(&self) -> impl Iterator<Item = &AnchorObservation> {
        self.observations.iter().filter(|o| !o.is_degenerate())
    }

    pub fn degenerate_count(&self) -> usize {
        self.observations
            .iter()
            .filter(|o| o.is_degenerate())
            .count()
    }

    /// One ring per observation, degenerate ones included.
    pub fn task_rings(&self) -> Result<Vec<TaskRing>, LocalizeError> {
        self.observations
            .iter()
            .map(|o| {
                make_task_ring(
                    &o.projection(self.mobile_depth),
                    self.communication_range,
                    o.depth_difference,
                )
                .map_err(LocalizeError::from)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationConfig {
    pub variant: Variant,
    pub sample_count: usize,
    pub threshold: f64,
    pub weighting: WeightingMode,
    pub range_mode: RangeMode,
    pub projection_colors: ProjectionColors,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Pcfl,
            sample_count: 400,
            threshold: 0.01,
            weighting: WeightingMode::Literal,
            range_mode: RangeMode::GlobalR,
            projection_colors: ProjectionColors::Inherit,
        }
    }
}

impl LocalizationConfig {
    pub fn validate(&self) -> Result<(), LocalizeError> {
        if self.sample_count == 0 {
            return Err(LocalizeError::InvalidConfig(
                "sample count must be at least 1".into(),
            ));
        }
        if !(self.threshold >= 0.0) {
            return Err(LocalizeError::InvalidConfig(format!(
                "threshold {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSample {
    pub point: PlanarPoint,
    pub rgb: RgbColor,
    pub nearness: f64,
    pub normalized_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSamples {
    pub samples: Vec<WeightedSample>,
    /// Set when nothing passed the threshold and the best sample was kept.
    pub fallback_used: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub position: Position3D,
    pub filtered_count: usize,
    pub fallback_used: bool,
    pub degenerate_anchor_count: usize,
}

/// Per-anchor encoding parameters for the usable observations.
struct ColorEncoder {
    variant: Variant,
    mobile_depth: f64,
    anchors: Vec<Position3D>,
    colors: Vec<RgbColor>,
    ranges: Vec<f64>,
    measured: Vec<f64>,
}

impl ColorEncoder {
    fn new(
        input: &LocalizationInput,
        config: &LocalizationConfig,
        colors: Option<Vec<RgbColor>>,
    ) -> Result<Self, LocalizeError> {
        let usable: Vec<&AnchorObservation> = input.usable().collect();
        if usable.is_empty() {
            return Err(LocalizeError::NoUsableAnchor);
        }
        let r = input.communication_range;
        let ranges = usable
            .iter()
            .map(|o| match config.range_mode {
                RangeMode::GlobalR => r,
                RangeMode::PerAnchor => (r * r - o.depth_difference * o.depth_difference)
                    .max(0.0)
                    .sqrt(),
            })
            .collect();
        let measured = usable
            .iter()
            .map(|o| match config.variant {
                Variant::Pcfl => projected_distance(o.depth_difference, o.aoa),
                Variant::Acfl => slant_distance(o.depth_difference, o.aoa),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let colors = colors.unwrap_or_else(|| usable.iter().map(|o| o.anchor_color).collect());
        debug_assert_eq!(colors.len(), usable.len());
        Ok(Self {
            variant: config.variant,
            mobile_depth: input.mobile_depth,
            anchors: usable.iter().map(|o| o.anchor_position).collect(),
            colors,
            ranges,
            measured,
        })
    }

    fn encode(&self, distances: &[f64]) -> RgbColor {
        node_rgb_with_ranges(&self.colors, distances, &self.ranges)
    }

    fn mobile(&self) -> RgbColor {
        self.encode(&self.measured)
    }

    fn sample_distances(&self, p: &PlanarPoint) -> Vec<f64> {
        self.anchors
            .iter()
            .map(|a| match self.variant {
                Variant::Pcfl => p.distance_to(&a.planar()),
                Variant::Acfl => p.at_depth(self.mobile_depth).distance_to(a),
            })
            .collect()
    }

    fn sample(&self, p: &PlanarPoint) -> RgbColor {
        self.encode(&self.sample_distances(p))
    }
}

/// Measured per-anchor distances for the non-degenerate observations, in order.
pub fn anchor_distances(
    input: &LocalizationInput,
    variant: Variant,
) -> Result<Vec<f64>, LocalizeError> {
    let config = LocalizationConfig {
        variant,
        ..Default::default()
    };
    Ok(ColorEncoder::new(input, &config, None)?.measured)
}

/// The mobile node's color from its measured distance profile, using the
/// anchors' broadcast colors.
pub fn mobile_rgb(
    input: &LocalizationInput,
    config: &LocalizationConfig,
) -> Result<RgbColor, LocalizeError> {
    Ok(ColorEncoder::new(input, config, None)?.mobile())
}

/// Each sample's color from its distances to the task projections (PCFL) or
/// task anchors (ACFL).
pub fn sample_rgbs(
    samples: &[PlanarPoint],
    input: &LocalizationInput,
    config: &LocalizationConfig,
) -> Result<Vec<RgbColor>, LocalizeError> {
    let enc = ColorEncoder::new(input, config, None)?;
    Ok(samples.iter().map(|p| enc.sample(p)).collect())
}

/// Keeps samples with nearness at or under `threshold`; if none qualify the
/// single closest sample is kept and the fallback flag set.
pub fn filter_samples(weighted: &[WeightedSample], threshold: f64) -> FilteredSamples {
    let kept: Vec<WeightedSample> = weighted
        .iter()
        .filter(|s| s.nearness <= threshold)
        .copied()
        .collect();
    if !kept.is_empty() || weighted.is_empty() {
        return FilteredSamples {
            samples: kept,
            fallback_used: false,
        };
    }
    let best = weighted
        .iter()
        .min_by(|a, b| a.nearness.total_cmp(&b.nearness))
        .copied()
        .into_iter()
        .collect();
    FilteredSamples {
        samples: best,
        fallback_used: true,
    }
}

/// Normalized weights for a filtered set of nearness values.
pub fn normalized_weights(nearness: &[f64], mode: WeightingMode) -> Vec<f64> {
    let n = nearness.len();
    let uniform = |mask: &dyn Fn(f64) -> bool| {
        let hits = nearness.iter().filter(|&&m| mask(m)).count() as f64;
        nearness
            .iter()
            .map(|&m| if mask(m) { 1.0 / hits } else { 0.0 })
            .collect()
    };
    match mode {
        WeightingMode::Literal => {
            let total: f64 = nearness.iter().sum();
            if total > 0.0 {
                nearness.iter().map(|m| m / total).collect()
            } else {
                vec![1.0 / n as f64; n]
            }
        }
        WeightingMode::Inverse => {
            if nearness.iter().any(|&m| m < EXACT_MATCH_NEARNESS) {
                uniform(&|m| m < EXACT_MATCH_NEARNESS)
            } else {
                let total: f64 = nearness.iter().map(|m| m.recip()).sum();
                nearness.iter().map(|m| m.recip() / total).collect()
            }
        }
    }
}

/// Writes the normalized weights into `samples`.
pub fn assign_weights(samples: &mut [WeightedSample], mode: WeightingMode) {
    let nearness: Vec<f64> = samples.iter().map(|s| s.nearness).collect();
    for (s, w) in samples.iter_mut().zip(normalized_weights(&nearness, mode)) {
        s.normalized_weight = w;
    }
}

/// Weighted mean of the filtered sample positions at the mobile node's depth.
pub fn weighted_estimate(
    filtered: &[WeightedSample],
    mobile_depth: f64,
    mode: WeightingMode,
) -> Result<Estimate, LocalizeError> {
    if filtered.is_empty() {
        return Err(LocalizeError::EmptyFilteredSet);
    }
    let nearness: Vec<f64> = filtered.iter().map(|s| s.nearness).collect();
    let (x, y) = filtered
        .iter()
        .zip(normalized_weights(&nearness, mode))
        .fold((0.0, 0.0), |(x, y), (s, w)| {
            (x + w * s.point.x, y + w * s.point.y)
        });
    Ok(Estimate {
        position: Position3D::new(x, y, mobile_depth),
        filtered_count: filtered.len(),
        fallback_used: false,
        degenerate_anchor_count: 0,
    })
}

/// Runs sampling, color encoding, and filtering for one mobile node.
pub fn localize<R: Rng + ?Sized>(
    input: &LocalizationInput,
    config: &LocalizationConfig,
    rng: &mut R,
) -> Result<Estimate, LocalizeError> {
    config.validate()?;
    let usable = input.usable().count();
    if usable < MIN_ANCHORS {
        return Err(LocalizeError::InsufficientAnchors { usable });
    }

    let rings = input.task_rings()?;
    let samples = sample_intersection(&rings, config.sample_count, rng)?;

    let colors = match (config.variant, config.projection_colors) {
        (Variant::Pcfl, ProjectionColors::Independent) => {
            Some((0..usable).map(|_| RgbColor::random(rng)).collect())
        }
        _ => None,
    };
    let encoder = ColorEncoder::new(input, config, colors)?;
    let target = encoder.mobile();

    let weighted: Vec<WeightedSample> = samples
        .into_iter()
        .map(|point| {
            let rgb = encoder.sample(&point);
            WeightedSample {
                point,
                rgb,
                nearness: nearness_degree(&rgb, &target),
                normalized_weight: 0.0,
            }
        })
        .collect();

    let filtered = filter_samples(&weighted, config.threshold);
    let estimate = weighted_estimate(&filtered.samples, input.mobile_depth, config.weighting)?;
    Ok(Estimate {
        fallback_used: filtered.fallback_used,
        degenerate_anchor_count: input.degenerate_count(),
        ..estimate
    })
}
