//! Scenario synthesis: deployment, anchor density, mobility, and measurement
//! generation.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::color::RgbColor;
use crate::geometry::{euclidean_distance, Position3D};
use crate::localization::{AnchorObservation, LocalizationInput, LocalizeError};
use crate::rng::{stream, substream};

/// Per-step heading perturbation of the random-direction mobility model.
pub const HEADING_SIGMA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_extent: f64,
    pub y_extent: f64,
    pub z_extent: f64,
}

impl Region {
    pub const fn new(x_extent: f64, y_extent: f64, z_extent: f64) -> Self {
        Self {
            x_extent,
            y_extent,
            z_extent,
        }
    }

    pub fn volume(&self) -> f64 {
        self.x_extent * self.y_extent * self.z_extent
    }

    pub fn is_valid(&self) -> bool {
        [self.x_extent, self.y_extent, self.z_extent]
            .iter()
            .all(|e| e.is_finite() && *e > 0.0)
    }

    pub fn contains(&self, p: &Position3D) -> bool {
        (0.0..=self.x_extent).contains(&p.x)
            && (0.0..=self.y_extent).contains(&p.y)
            && (0.0..=self.z_extent).contains(&p.z)
    }

    pub fn random_position<R: Rng + ?Sized>(&self, rng: &mut R) -> Position3D {
        Position3D::new(
            rng.random::<f64>() * self.x_extent,
            rng.random::<f64>() * self.y_extent,
            rng.random::<f64>() * self.z_extent,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub id: u32,
    pub position: Position3D,
    pub color: RgbColor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobile {
    pub id: u32,
    pub position: Position3D,
    /// Horizontal direction of travel, radians from +x.
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub region: Region,
    pub anchors: Vec<Anchor>,
    pub mobiles: Vec<Mobile>,
    pub communication_range: f64,
    pub seed: u64,
}

/// Gaussian measurement noise; zero by default.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    pub aoa_sigma: f64,
    pub depth_sigma: f64,
}

impl NoiseModel {
    pub const NONE: NoiseModel = NoiseModel {
        aoa_sigma: 0.0,
        depth_sigma: 0.0,
    };

    pub fn is_valid(&self) -> bool {
        self.aoa_sigma >= 0.0 && self.depth_sigma >= 0.0
    }
}

/// Total anchor count giving `d_anchor` expected anchors per communication
/// sphere: `round(d_anchor * V / (4/3 pi R^3))`, at least one.
pub fn anchors_from_density(d_anchor: f64, range: f64, region: &Region) -> usize {
    let sphere = 4.0 / 3.0 * PI * range.powi(3);
    let n = (d_anchor * region.volume() / sphere).round();
    if n.is_finite() && n >= 1.0 {
        n as usize
    } else {
        1
    }
}

/// Uniform deployment; anchor colors uniform over the unit cube.
pub fn deploy(
    region: Region,
    anchor_count: usize,
    mobile_count: usize,
    range: f64,
    seed: u64,
) -> Scenario {
    let mut rng = substream(seed, &[stream::DEPLOY]);
    let anchors = (0..anchor_count)
        .map(|i| Anchor {
            id: i as u32,
            position: region.random_position(&mut rng),
            color: RgbColor::random(&mut rng),
        })
        .collect();
    let mobiles = (0..mobile_count)
        .map(|i| Mobile {
            id: i as u32,
            position: region.random_position(&mut rng),
            heading: rng.random::<f64>() * TAU,
        })
        .collect();
    Scenario {
        region,
        anchors,
        mobiles,
        communication_range: range,
        seed,
    }
}

impl Scenario {
    pub fn mobile(&self, id: u32) -> Option<&Mobile> {
        self.mobiles.iter().find(|m| m.id == id)
    }

    pub fn anchor(&self, id: u32) -> Option<&Anchor> {
        self.anchors.iter().find(|a| a.id == id)
    }

    /// Anchors within range of `position`, boundary inclusive.
    pub fn anchors_in_range(&self, position: &Position3D) -> impl Iterator<Item = &Anchor> + '_ {
        let position = *position;
        self.anchors
            .iter()
            .filter(move |a| euclidean_distance(&a.position, &position) <= self.communication_range)
    }
}

/// Ids of the task anchors of `mobile_id`; empty if there are none or the
/// mobile does not exist.
pub fn discover_task_anchors(scenario: &Scenario, mobile_id: u32) -> Vec<u32> {
    scenario
        .mobile(mobile_id)
        .map(|m| {
            scenario
                .anchors_in_range(&m.position)
                .map(|a| a.id)
                .collect()
        })
        .unwrap_or_default()
}

fn gaussian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma)
            .map(|n| n.sample(rng))
            .unwrap_or(0.0)
    } else {
        0.0
    }
}

/// The mobile node's measurements of one anchor: depth difference from the
/// pressure sensors and elevation angle of arrival, each with optional noise.
pub fn synthesize_observation<R: Rng + ?Sized>(
    anchor: &Anchor,
    mobile: &Position3D,
    range: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> AnchorObservation {
    let k_true = (anchor.position.z - mobile.z).abs();
    let d_true = euclidean_distance(&anchor.position, mobile);
    let alpha_true = if d_true > 0.0 {
        (k_true / d_true).clamp(0.0, 1.0).asin()
    } else {
        FRAC_PI_2
    };
    let k = (k_true + gaussian(noise.depth_sigma, rng)).clamp(0.0, range);
    let aoa = (alpha_true + gaussian(noise.aoa_sigma, rng)).clamp(0.0, FRAC_PI_2);
    AnchorObservation {
        anchor_id: anchor.id,
        anchor_position: anchor.position,
        depth_difference: k,
        aoa,
        anchor_color: anchor.color,
    }
}

/// Builds the localization input for the mobile at `position` from every
/// anchor within range.
pub fn observe<R: Rng + ?Sized>(
    scenario: &Scenario,
    position: &Position3D,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<LocalizationInput, LocalizeError> {
    let range = scenario.communication_range;
    let observations = scenario
        .anchors_in_range(position)
        .map(|a| synthesize_observation(a, position, range, noise, rng))
        .collect();
    LocalizationInput::new(position.z, observations, range)
}

/// Folds `pos` into `[0, len]` by mirror reflection; reports whether the
/// direction of travel ends up reversed.
fn reflect(pos: f64, len: f64) -> (f64, bool) {
    let t = pos.rem_euclid(2.0 * len);
    if t <= len {
        (t, false)
    } else {
        (2.0 * len - t, true)
    }
}

/// Advances every mobile `speed * dt` meters along its (perturbed) heading,
/// reflecting off the region's side walls. Anchors do not move.
pub fn step_mobility<R: Rng + ?Sized>(
    scenario: &Scenario,
    dt: f64,
    speed: f64,
    rng: &mut R,
) -> Scenario {
    let step = speed * dt;
    let region = scenario.region;
    let mobiles = scenario
        .mobiles
        .iter()
        .map(|m| {
            let mut heading = m.heading + gaussian(HEADING_SIGMA, rng);
            if step <= 0.0 {
                return Mobile {
                    heading: m.heading,
                    ..*m
                };
            }
            let (x, flip_x) = reflect(m.position.x + step * heading.cos(), region.x_extent);
            let (y, flip_y) = reflect(m.position.y + step * heading.sin(), region.y_extent);
            if flip_x {
                heading = PI - heading;
            }
            if flip_y {
                heading = -heading;
            }
            Mobile {
                position: Position3D::new(x, y, m.position.z),
                heading: heading.rem_euclid(TAU),
                ..*m
            }
        })
        .collect();
    Scenario {
        mobiles,
        ..scenario.clone()
    }
}

/// Anchors at (0,0,0), (80,0,0), (0,80,0); one mobile at (30,30,10); R = 100.
/// Colors come from the seed-42 deployment stream.
pub fn canonical_fixture() -> Scenario {
    let mut rng = substream(42, &[stream::DEPLOY]);
    let anchors = [(0.0, 0.0), (80.0, 0.0), (0.0, 80.0)]
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| Anchor {
            id: i as u32,
            position: Position3D::new(x, y, 0.0),
            color: RgbColor::random(&mut rng),
        })
        .collect();
    Scenario {
        region: Region::new(100.0, 100.0, 20.0),
        anchors,
        mobiles: vec![Mobile {
            id: 0,
            position: Position3D::new(30.0, 30.0, 10.0),
            heading: 0.0,
        }],
        communication_range: 100.0,
        seed: 42,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("scenario line {line}: {message}")]
pub struct ScenarioParseError {
    pub line: usize,
    pub message: String,
}

impl Scenario {
    /// Line-oriented text form.
    ///
    /// ```text
    /// region,1000,1000,20
    /// range,100
    /// seed,42
    /// anchor,0,x,y,z,r,g,b
    /// mobile,0,x,y,z,0,0,0
    /// ```
    ///
    /// Mobile color fields are always zero. Headings are not stored.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let r = &self.region;
        let _ = writeln!(out, "region,{},{},{}", r.x_extent, r.y_extent, r.z_extent);
        let _ = writeln!(out, "range,{}", self.communication_range);
        let _ = writeln!(out, "seed,{}", self.seed);
        for a in &self.anchors {
            let (p, c) = (a.position, a.color);
            let _ = writeln!(
                out,
                "anchor,{},{},{},{},{},{},{}",
                a.id, p.x, p.y, p.z, c.r, c.g, c.b
            );
        }
        for m in &self.mobiles {
            let p = m.position;
            let _ = writeln!(out, "mobile,{},{},{},{},0,0,0", m.id, p.x, p.y, p.z);
        }
        out
    }
}

impl FromStr for Scenario {
    type Err = ScenarioParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut region = None;
        let mut range = None;
        let mut seed = 0;
        let mut anchors = Vec::new();
        let mut mobiles = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| ScenarioParseError { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let nums = |from: usize, count: usize| -> Result<Vec<f64>, ScenarioParseError> {
                if fields.len() != from + count {
                    return Err(err(format!(
                        "expected {} fields, found {}",
                        from + count,
                        fields.len()
                    )));
                }
                fields[from..]
                    .iter()
                    .map(|f| {
                        f.parse::<f64>()
                            .map_err(|_| err(format!("bad number `{f}`")))
                    })
                    .collect()
            };
            match fields[0] {
                "region" => {
                    let v = nums(1, 3)?;
                    region = Some(Region::new(v[0], v[1], v[2]));
                }
                "range" => range = Some(nums(1, 1)?[0]),
                "seed" => {
                    seed = fields
                        .get(1)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err("bad seed".into()))?
                }
                kind @ ("anchor" | "mobile") => {
                    let id: u32 = fields
                        .get(1)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err("bad node id".into()))?;
                    let v = nums(2, 6)?;
                    let position = Position3D::new(v[0], v[1], v[2]);
                    if kind == "anchor" {
                        anchors.push(Anchor {
                            id,
                            position,
                            color: RgbColor::new(v[3], v[4], v[5]),
                        });
                    } else {
                        mobiles.push(Mobile {
                            id,
                            position,
                            heading: 0.0,
                        });
                    }
                }
                other => return Err(err(format!("unknown record kind `{other}`"))),
            }
        }

        let missing = |what: &str| ScenarioParseError {
            line: 0,
            message: format!("missing {what} record"),
        };
        Ok(Scenario {
            region: region.ok_or_else(|| missing("region"))?,
            anchors,
            mobiles,
            communication_range: range.ok_or_else(|| missing("range"))?,
            seed,
        })
    }
}
