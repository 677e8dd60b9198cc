//! Spatial primitives: distances, anchor projections, task rings, and uniform
//! sampling inside the intersection of several rings.
//!
//! Units are meters and radians. Depth (`z`) is positive downward.

use rand::Rng;
use thiserror::Error;

/// Below this AOA the slant/projected distance formulas divide by ~0.
pub const ANGLE_EPSILON: f64 = 1e-6;

/// Rejection sampling gives up after this many proposals per requested point.
pub const PROPOSALS_PER_SAMPLE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("angle of arrival {alpha} rad is degenerate (below {ANGLE_EPSILON})")]
    DegenerateAngle { alpha: f64 },
    #[error("angle of arrival {alpha} rad exceeds pi/2")]
    AngleOutOfRange { alpha: f64 },
    #[error("depth difference {k} m exceeds communication range {range} m")]
    DepthExceedsRange { k: f64, range: f64 },
    #[error("task rings have no common area")]
    EmptyIntersection,
    #[error("no rings to sample from")]
    NoRings,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn planar(&self) -> PlanarPoint {
        PlanarPoint::new(self.x, self.y)
    }

    pub fn distance_to(&self, other: &Position3D) -> f64 {
        euclidean_distance(self, other)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A point in the mobile node's depth plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn at_depth(&self, z: f64) -> Position3D {
        Position3D::new(self.x, self.y, z)
    }
}

/// Closed disk in the mobile node's plane that must contain the node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskRing {
    pub center: PlanarPoint,
    pub radius: f64,
    pub plane_depth: f64,
}

impl TaskRing {
    /// Boundary inclusive.
    pub fn contains(&self, p: &PlanarPoint) -> bool {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

pub fn euclidean_distance(a: &Position3D, b: &Position3D) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn check_angle(alpha: f64) -> Result<(), GeometryError> {
    // `!(a >= b)` also rejects NaN.
    if !(alpha >= ANGLE_EPSILON) {
        return Err(GeometryError::DegenerateAngle { alpha });
    }
    if alpha > std::f64::consts::FRAC_PI_2 + 1e-12 {
        return Err(GeometryError::AngleOutOfRange { alpha });
    }
    Ok(())
}

/// Straight-line anchor distance recovered from depth difference `k` and AOA `alpha`.
pub fn slant_distance(k: f64, alpha: f64) -> Result<f64, GeometryError> {
    check_angle(alpha)?;
    Ok(k / alpha.sin())
}

/// In-plane distance from the mobile node to the anchor's projection.
pub fn projected_distance(k: f64, alpha: f64) -> Result<f64, GeometryError> {
    check_angle(alpha)?;
    Ok(k / alpha.tan())
}

/// Drops the anchor vertically into the plane at `mobile_depth`.
pub fn project_anchor(anchor: &Position3D, mobile_depth: f64) -> Position3D {
    Position3D::new(anchor.x, anchor.y, mobile_depth)
}

/// Cross-section of the anchor's range sphere with the projection's plane.
pub fn make_task_ring(
    projection: &Position3D,
    range: f64,
    k: f64,
) -> Result<TaskRing, GeometryError> {
    if k > range {
        return Err(GeometryError::DepthExceedsRange { k, range });
    }
    Ok(TaskRing {
        center: projection.planar(),
        radius: (range * range - k * k).max(0.0).sqrt(),
        plane_depth: projection.z,
    })
}

pub fn ring_contains(ring: &TaskRing, p: &PlanarPoint) -> bool {
    ring.contains(p)
}

/// The ring whose bounding square is the proposal region: smallest radius,
/// ties broken by center so the choice does not depend on input order.
fn proposal_ring(rings: &[TaskRing]) -> Option<&TaskRing> {
    rings.iter().min_by(|a, b| {
        a.radius
            .total_cmp(&b.radius)
            .then(a.center.x.total_cmp(&b.center.x))
            .then(a.center.y.total_cmp(&b.center.y))
    })
}

/// Draws `m` points uniformly from the intersection of `rings` by rejection
/// from the bounding square of the smallest ring.
///
/// After `PROPOSALS_PER_SAMPLE * m` proposals the accepted points are cycled up
/// to `m`; if none were accepted the intersection is reported empty.
pub fn sample_intersection<R: Rng + ?Sized>(
    rings: &[TaskRing],
    m: usize,
    rng: &mut R,
) -> Result<Vec<PlanarPoint>, GeometryError> {
    let seed_ring = proposal_ring(rings).ok_or(GeometryError::NoRings)?;
    let (cx, cy, r) = (seed_ring.center.x, seed_ring.center.y, seed_ring.radius);
    let cap = PROPOSALS_PER_SAMPLE.saturating_mul(m);

    let mut points = Vec::with_capacity(m);
    let mut proposals = 0usize;
    while points.len() < m && proposals < cap {
        proposals += 1;
        let p = PlanarPoint::new(
            cx - r + 2.0 * r * rng.random::<f64>(),
            cy - r + 2.0 * r * rng.random::<f64>(),
        );
        if rings.iter().all(|ring| ring.contains(&p)) {
            points.push(p);
        }
    }

    if points.is_empty() {
        return Err(GeometryError::EmptyIntersection);
    }
    let accepted = points.len();
    for i in accepted..m {
        points.push(points[i % accepted]);
    }

    debug_assert!(points
        .iter()
        .all(|p| rings.iter().all(|ring| ring.contains(p))));
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn ring(x: f64, y: f64, r: f64) -> TaskRing {
        TaskRing {
            center: PlanarPoint::new(x, y),
            radius: r,
            plane_depth: 0.0,
        }
    }

    #[test]
    fn euclidean_distance_examples() {
        let o = Position3D::new(0.0, 0.0, 0.0);
        assert_eq!(
            euclidean_distance(&o, &Position3D::new(3.0, 4.0, 12.0)),
            13.0
        );
        let p = Position3D::new(5.0, 5.0, 5.0);
        assert_eq!(euclidean_distance(&p, &p), 0.0);
        assert_eq!(
            euclidean_distance(
                &Position3D::new(1.0, 2.0, 3.0),
                &Position3D::new(4.0, 6.0, 3.0)
            ),
            5.0
        );
    }

    #[test]
    fn slant_distance_examples() {
        assert_relative_eq!(
            slant_distance(5.0, FRAC_PI_6).unwrap(),
            10.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            slant_distance(7.0, FRAC_PI_2).unwrap(),
            7.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            slant_distance(4.0, 0.8f64.asin()).unwrap(),
            5.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn projected_distance_examples() {
        assert_relative_eq!(
            projected_distance(5.0, FRAC_PI_4).unwrap(),
            5.0,
            max_relative = 1e-12
        );
        assert!(projected_distance(7.0, FRAC_PI_2).unwrap().abs() < 1e-12);
        assert_relative_eq!(
            projected_distance(3.0, FRAC_PI_6).unwrap(),
            3.0 * 3f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn degenerate_angles_are_rejected() {
        assert!(matches!(
            slant_distance(0.0, 0.0),
            Err(GeometryError::DegenerateAngle { .. })
        ));
        assert!(matches!(
            projected_distance(1.0, 1e-7),
            Err(GeometryError::DegenerateAngle { .. })
        ));
        assert!(matches!(
            slant_distance(1.0, f64::NAN),
            Err(GeometryError::DegenerateAngle { .. })
        ));
        assert!(matches!(
            slant_distance(1.0, 2.0),
            Err(GeometryError::AngleOutOfRange { .. })
        ));
        assert!(slant_distance(1.0, ANGLE_EPSILON).is_ok());
    }

    #[test]
    fn project_anchor_examples() {
        assert_eq!(
            project_anchor(&Position3D::new(10.0, 20.0, 5.0), 12.0),
            Position3D::new(10.0, 20.0, 12.0)
        );
        assert_eq!(
            project_anchor(&Position3D::new(3.0, 4.0, 9.0), 9.0),
            Position3D::new(3.0, 4.0, 9.0)
        );
        assert_eq!(
            project_anchor(&Position3D::default(), 20.0),
            Position3D::new(0.0, 0.0, 20.0)
        );
    }

    #[test]
    fn task_ring_radius() {
        let proj = Position3D::new(1.0, 2.0, 3.0);
        let r = make_task_ring(&proj, 100.0, 60.0).unwrap();
        assert_relative_eq!(r.radius, 80.0);
        assert_eq!(r.center, PlanarPoint::new(1.0, 2.0));
        assert_eq!(r.plane_depth, 3.0);
        assert_eq!(make_task_ring(&proj, 100.0, 0.0).unwrap().radius, 100.0);
        assert_eq!(make_task_ring(&proj, 100.0, 100.0).unwrap().radius, 0.0);
        assert_eq!(
            make_task_ring(&proj, 100.0, 100.5),
            Err(GeometryError::DepthExceedsRange {
                k: 100.5,
                range: 100.0
            })
        );
    }

    #[test]
    fn ring_contains_examples() {
        assert!(ring_contains(
            &ring(0.0, 0.0, 10.0),
            &PlanarPoint::new(6.0, 8.0)
        ));
        assert!(!ring_contains(
            &ring(0.0, 0.0, 10.0),
            &PlanarPoint::new(8.0, 8.0)
        ));
        assert!(ring_contains(
            &ring(5.0, 5.0, 0.0),
            &PlanarPoint::new(5.0, 5.0)
        ));
    }

    #[test]
    fn single_ring_samples_stay_inside() {
        let rings = [ring(0.0, 0.0, 10.0)];
        let pts = sample_intersection(&rings, 100, &mut rng_from_seed(1)).unwrap();
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|p| p.x.hypot(p.y) <= 10.0));
    }

    #[test]
    fn disjoint_rings_are_empty() {
        let rings = [ring(0.0, 0.0, 10.0), ring(30.0, 0.0, 10.0)];
        assert_eq!(
            sample_intersection(&rings, 3, &mut rng_from_seed(1)),
            Err(GeometryError::EmptyIntersection)
        );
    }

    #[test]
    fn zero_radius_ring_is_sampled_by_cycling() {
        let rings = [ring(5.0, 5.0, 0.0), ring(0.0, 0.0, 10.0)];
        let pts = sample_intersection(&rings, 4, &mut rng_from_seed(3)).unwrap();
        assert_eq!(pts, vec![PlanarPoint::new(5.0, 5.0); 4]);
    }

    #[test]
    fn lens_centroid_matches_grid_integration() {
        let rings = [ring(0.0, 0.0, 10.0), ring(5.0, 0.0, 10.0)];

        // Oracle: centroid of the lens by midpoint-rule integration on a fine grid.
        let h = 0.01;
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        let mut x = -10.0 + h / 2.0;
        while x < 15.0 {
            let mut y = -10.0 + h / 2.0;
            while y < 10.0 {
                let p = PlanarPoint::new(x, y);
                if rings.iter().all(|r| r.contains(&p)) {
                    sx += x;
                    sy += y;
                    n += 1.0;
                }
                y += h;
            }
            x += h;
        }
        let (gx, gy) = (sx / n, sy / n);
        assert!((gx - 2.5).abs() < 1e-3 && gy.abs() < 1e-3);

        let pts = sample_intersection(&rings, 200, &mut rng_from_seed(11)).unwrap();
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|p| rings.iter().all(|r| r.contains(p))));
        let mx = pts.iter().map(|p| p.x).sum::<f64>() / 200.0;
        let my = pts.iter().map(|p| p.y).sum::<f64>() / 200.0;
        assert!((mx - gx).hypot(my - gy) < 1.0, "centroid ({mx}, {my})");
    }

    #[test]
    fn sampling_ignores_ring_order() {
        let a = [
            ring(0.0, 0.0, 10.0),
            ring(5.0, 0.0, 8.0),
            ring(2.0, 3.0, 9.0),
        ];
        let b = [a[2], a[0], a[1]];
        let pa = sample_intersection(&a, 50, &mut rng_from_seed(5)).unwrap();
        let pb = sample_intersection(&b, 50, &mut rng_from_seed(5)).unwrap();
        assert_eq!(pa, pb);
    }

    proptest::proptest! {
        #[test]
        fn intersection_samples_lie_in_every_ring(
            rings in proptest::collection::vec((-20.0..20.0f64, -20.0..20.0f64, 25.0..60.0f64), 1..5),
            m in 1usize..200,
            seed in proptest::prelude::any::<u64>(),
        ) {
            let rings: Vec<TaskRing> = rings.into_iter().map(|(x, y, r)| ring(x, y, r)).collect();
            let pts = sample_intersection(&rings, m, &mut rng_from_seed(seed)).unwrap();
            proptest::prop_assert_eq!(pts.len(), m);
            for p in &pts {
                for r in &rings {
                    proptest::prop_assert!(ring_contains(r, p));
                }
            }
        }
    }
}
