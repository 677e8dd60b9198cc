//! RGB/HSV distance encoding.
//!
//! An anchor's color is converted to HSV, its value channel is dimmed in
//! proportion to distance, and the dimmed colors of all anchors are mixed with
//! inverse-distance weights. Two points with similar distance profiles end up
//! with similar colors; the nearness degree measures that similarity.

use rand::Rng;

/// Distances below this count as zero when forming inverse-distance weights.
pub const DISTANCE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RgbColor {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl RgbColor {
    pub const BLACK: RgbColor = RgbColor::new(0.0, 0.0, 0.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Self { r, g, b }
    }

    /// Uniform over the unit cube.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(rng.random(), rng.random(), rng.random())
    }

    pub fn scale(self, f: f64) -> Self {
        Self::new(self.r * f, self.g * f, self.b * f)
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }

    pub fn channels(&self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn in_unit_cube(&self) -> bool {
        self.channels().iter().all(|c| (0.0..=1.0).contains(c))
    }
}

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HsvColor {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl HsvColor {
    pub const fn new(h: f64, s: f64, v: f64) -> Self {
        Self { h, s, v }
    }
}

impl From<RgbColor> for HsvColor {
    fn from(c: RgbColor) -> Self {
        rgb_to_hsv(c)
    }
}

impl From<HsvColor> for RgbColor {
    fn from(c: HsvColor) -> Self {
        hsv_to_rgb(c)
    }
}

/// Hexcone conversion. Achromatic colors get `h = 0`.
pub fn rgb_to_hsv(c: RgbColor) -> HsvColor {
    let max = c.r.max(c.g).max(c.b);
    let min = c.r.min(c.g).min(c.b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta <= 0.0 {
        return HsvColor::new(0.0, s, v);
    }
    let sector = if max == c.r {
        (c.g - c.b) / delta
    } else if max == c.g {
        (c.b - c.r) / delta + 2.0
    } else {
        (c.r - c.g) / delta + 4.0
    };
    let mut h = 60.0 * sector;
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    HsvColor::new(h, s, v)
}

pub fn hsv_to_rgb(c: HsvColor) -> RgbColor {
    let chroma = c.v * c.s;
    let h6 = c.h.rem_euclid(360.0) / 60.0;
    let x = chroma * (1.0 - (h6.rem_euclid(2.0) - 1.0).abs());
    let m = c.v - chroma;
    let (r, g, b) = match h6 as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    RgbColor::new(r + m, g + m, b + m)
}

/// Attenuation factor `1 - d/range`, clamped to `[0, 1]`.
pub fn attenuation_factor(d: f64, range: f64) -> f64 {
    (1.0 - d / range).clamp(0.0, 1.0)
}

/// Dims the value channel by distance; hue and saturation are untouched.
pub fn attenuate_value(c: HsvColor, d: f64, range: f64) -> HsvColor {
    HsvColor::new(c.h, c.s, c.v * attenuation_factor(d, range))
}

/// Normalized inverse-distance weights, one per anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionFactors(Vec<f64>);

impl ProportionFactors {
    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Inverse-distance proportion factors. Any zero distance takes the whole
/// weight (shared equally among the zero entries).
pub fn distance_weights(distances: &[f64]) -> ProportionFactors {
    let zeros = distances.iter().filter(|&&d| d < DISTANCE_EPSILON).count();
    if zeros > 0 {
        let w = 1.0 / zeros as f64;
        return ProportionFactors(
            distances
                .iter()
                .map(|&d| if d < DISTANCE_EPSILON { w } else { 0.0 })
                .collect(),
        );
    }
    let total: f64 = distances.iter().map(|d| d.recip()).sum();
    ProportionFactors(distances.iter().map(|d| d.recip() / total).collect())
}

/// Color seen at a point with the given per-anchor distances, using one
/// attenuation range for every anchor.
pub fn node_rgb(anchor_colors: &[RgbColor], distances: &[f64], range: f64) -> RgbColor {
    node_rgb_ranged(anchor_colors, distances, |_| range)
}

/// Like [`node_rgb`] but with a per-anchor attenuation range.
pub fn node_rgb_with_ranges(
    anchor_colors: &[RgbColor],
    distances: &[f64],
    ranges: &[f64],
) -> RgbColor {
    assert_eq!(ranges.len(), distances.len());
    node_rgb_ranged(anchor_colors, distances, |j| ranges[j])
}

fn node_rgb_ranged(
    anchor_colors: &[RgbColor],
    distances: &[f64],
    range_of: impl Fn(usize) -> f64,
) -> RgbColor {
    assert_eq!(anchor_colors.len(), distances.len());
    let lambda = distance_weights(distances);
    anchor_colors
        .iter()
        .zip(distances)
        .zip(lambda.weights())
        .enumerate()
        .fold(RgbColor::BLACK, |acc, (j, ((&color, &d), &w))| {
            let dimmed = hsv_to_rgb(attenuate_value(rgb_to_hsv(color), d, range_of(j)));
            acc.add(dimmed.scale(w))
        })
}

/// Euclidean distance between two colors in RGB space.
pub fn nearness_degree(a: &RgbColor, b: &RgbColor) -> f64 {
    let dr = a.r - b.r;
    let dg = a.g - b.g;
    let db = a.b - b.b;
    (dr * dr + dg * dg + db * db).sqrt()
}
