//! Oriented bounding boxes, separating-axis intersection, conservative
//! clearance, and sampled sweep checks.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::pose::{Pose, Vec3};

/// Default sweep resolution (mm).
pub const DEFAULT_SWEEP_STEP: f64 = 0.5;

/// Cross products shorter than this are treated as degenerate axes.
const AXIS_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    /// Box center and orientation.
    pub pose: Pose,
    pub half_extents: Vec3,
}

impl Obb {
    pub fn new(pose: Pose, half_extents: Vec3) -> Self {
        Self { pose, half_extents }
    }

    /// Axis-aligned box from its min and max corners.
    pub fn from_bounds(min: Vec3, max: Vec3) -> Self {
        let center = (min + max) / 2.0;
        Self::new(
            Pose::from_translation(center.x, center.y, center.z),
            (max - min) / 2.0,
        )
    }

    pub fn is_valid(&self) -> bool {
        self.half_extents.iter().all(|h| h.is_finite() && *h > 0.0)
            && self.pose.orthonormality_error() < 1e-9
    }

    pub fn center(&self) -> Vec3 {
        self.pose.translation
    }

    /// The box's unit axis `i` in world coordinates.
    pub fn axis(&self, i: usize) -> Vec3 {
        self.pose.rotation.matrix().column(i).into_owned()
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let h = self.half_extents;
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let local = Vec3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            );
            *c = self.pose.transform_point(&local);
        }
        out
    }

    /// Whether `p` lies inside or on the box.
    pub fn contains(&self, p: &Vec3) -> bool {
        let local = self.pose.inverse().transform_point(p);
        (0..3).all(|i| local[i].abs() <= self.half_extents[i])
    }

    /// Half-length of the box's projection onto unit axis `l`.
    fn projected_radius(&self, l: &Vec3) -> f64 {
        (0..3)
            .map(|i| self.half_extents[i] * self.axis(i).dot(l).abs())
            .sum()
    }

    /// Expresses this box in another frame: `frame ∘ self`.
    pub fn transformed(&self, frame: &Pose) -> Obb {
        Obb::new(frame.compose(&self.pose), self.half_extents)
    }

    /// Distance from `origin` to the farthest corner.
    pub fn reach_from(&self, origin: &Vec3) -> f64 {
        self.corners()
            .iter()
            .map(|c| (c - origin).norm())
            .fold(0.0, f64::max)
    }
}

/// Largest gap between the projections of `a` and `b` over the 15 candidate
/// separating axes. Positive means separated; zero or negative means touching
/// or overlapping.
pub fn separation(a: &Obb, b: &Obb) -> f64 {
    let d = b.center() - a.center();
    let mut best = f64::NEG_INFINITY;
    let mut test = |l: Vec3| {
        let gap = d.dot(&l).abs() - a.projected_radius(&l) - b.projected_radius(&l);
        if gap > best {
            best = gap;
        }
    };
    for i in 0..3 {
        test(a.axis(i));
        test(b.axis(i));
    }
    for i in 0..3 {
        for j in 0..3 {
            let c = a.axis(i).cross(&b.axis(j));
            let n = c.norm();
            if n > AXIS_EPSILON {
                test(c / n);
            }
        }
    }
    best
}

/// Exact separating-axis test. Touching boxes intersect.
pub fn obb_intersects(a: &Obb, b: &Obb) -> bool {
    separation(a, b) <= 0.0
}

/// Lower bound on the distance between two boxes; 0 when they intersect.
/// Exact whenever the closest features are parallel faces.
pub fn obb_clearance(a: &Obb, b: &Obb) -> f64 {
    separation(a, b).max(0.0)
}

/// A box with a name, used for link and body parts.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledObb {
    pub label: String,
    pub obb: Obb,
}

impl LabeledObb {
    pub fn new(label: impl Into<String>, obb: Obb) -> Self {
        Self {
            label: label.into(),
            obb,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeError {
    Empty,
    InvalidBox { label: String },
}

impl fmt::Display for ShapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeError::Empty => f.write_str("shape has no boxes"),
            ShapeError::InvalidBox { label } => write!(
                f,
                "box `{label}` needs positive half extents and an orthonormal rotation"
            ),
        }
    }
}

impl core::error::Error for ShapeError {}

/// Boxes rigidly attached to one frame, each expressed in that frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyShape {
    boxes: Vec<LabeledObb>,
}

impl BodyShape {
    pub fn new(boxes: Vec<LabeledObb>) -> Result<Self, ShapeError> {
        if boxes.is_empty() {
            return Err(ShapeError::Empty);
        }
        if let Some(bad) = boxes.iter().find(|b| !b.obb.is_valid()) {
            return Err(ShapeError::InvalidBox {
                label: bad.label.clone(),
            });
        }
        Ok(Self { boxes })
    }

    /// One box centered on the owning frame.
    pub fn single(label: impl Into<String>, half_extents: Vec3) -> Result<Self, ShapeError> {
        Self::new(alloc::vec![LabeledObb::new(
            label,
            Obb::new(Pose::identity(), half_extents)
        )])
    }

    pub fn boxes(&self) -> &[LabeledObb] {
        &self.boxes
    }

    /// The boxes placed at `pose`.
    pub fn placed<'a>(&'a self, pose: &'a Pose) -> impl Iterator<Item = LabeledObb> + 'a {
        self.boxes
            .iter()
            .map(move |b| LabeledObb::new(b.label.clone(), b.obb.transformed(pose)))
    }

    /// Distance from the frame origin to the farthest corner.
    pub fn reach(&self) -> f64 {
        self.boxes
            .iter()
            .map(|b| b.obb.reach_from(&Vec3::zeros()))
            .fold(0.0, f64::max)
    }
}

/// First colliding pair found along a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepHit {
    /// Sample index; 0 is the start pose.
    pub index: usize,
    pub moving: String,
    pub obstacle: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Clear { samples: usize },
    Hit(SweepHit),
}

impl SweepOutcome {
    pub fn is_clear(&self) -> bool {
        matches!(self, SweepOutcome::Clear { .. })
    }
}

/// Number of intervals needed so that no point of a body of the given
/// `reach` moves `step` or more between consecutive samples.
pub fn sample_count(translation: f64, rotation: f64, reach: f64, step: f64) -> usize {
    let bound = translation + rotation * reach;
    if bound <= 0.0 {
        0
    } else {
        libm::floor(bound / step) as usize + 1
    }
}

/// Samples the rigid motion of `shape` from `from` to `to` and reports the
/// first sample where any of its boxes touches an obstacle. Samples are spaced
/// so that consecutive ones move every point of the shape by less than `step`.
/// A gap narrower than `step` that opens and closes between samples can be
/// missed; that is the resolution contract.
pub fn swept_collision(
    shape: &BodyShape,
    from: &Pose,
    to: &Pose,
    obstacles: &[LabeledObb],
    step: f64,
) -> SweepOutcome {
    assert!(step > 0.0, "sweep step must be positive");
    let n = sample_count(
        (to.translation - from.translation).norm(),
        Pose::rotation_distance(from, to),
        shape.reach(),
        step,
    );
    for i in 0..=n {
        let t = if n == 0 { 0.0 } else { i as f64 / n as f64 };
        let pose = Pose::interpolate(from, to, t);
        for moving in shape.placed(&pose) {
            if let Some(hit) = obstacles.iter().find(|o| obb_intersects(&moving.obb, &o.obb)) {
                return SweepOutcome::Hit(SweepHit {
                    index: i,
                    moving: moving.label,
                    obstacle: hit.label.clone(),
                });
            }
        }
    }
    SweepOutcome::Clear { samples: n + 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::rot_z;
    use core::f64::consts::FRAC_PI_4;

    fn cube_at(x: f64, y: f64, z: f64) -> Obb {
        Obb::new(Pose::from_translation(x, y, z), Vec3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn identical_boxes_intersect() {
        let a = cube_at(0.0, 0.0, 0.0);
        assert!(obb_intersects(&a, &a));
        assert_eq!(obb_clearance(&a, &a), 0.0);
    }

    #[test]
    fn distant_cubes_are_separated() {
        assert!(!obb_intersects(&cube_at(0.0, 0.0, 0.0), &cube_at(10.0, 0.0, 0.0)));
    }

    #[test]
    fn touching_counts_as_intersecting() {
        assert!(obb_intersects(&cube_at(0.0, 0.0, 0.0), &cube_at(2.0, 0.0, 0.0)));
    }

    #[test]
    fn face_gap_clearance_is_exact() {
        let c = obb_clearance(&cube_at(0.0, 0.0, 0.0), &cube_at(5.0, 0.3, -0.2));
        assert!((c - 3.0).abs() < 1e-6);
    }

    #[test]
    fn rotated_cube_near_miss() {
        // rotated 45° the cube reaches sqrt(2) along x: 1 + 1.414 < 2.9
        let a = cube_at(0.0, 0.0, 0.0);
        let b = Obb::new(
            Pose::new(rot_z(FRAC_PI_4), Vec3::new(2.9, 0.0, 0.0)),
            Vec3::new(1.0, 1.0, 1.0),
        );
        assert!(!obb_intersects(&a, &b));
        let b2 = Obb::new(
            Pose::new(rot_z(FRAC_PI_4), Vec3::new(2.3, 0.0, 0.0)),
            Vec3::new(1.0, 1.0, 1.0),
        );
        assert!(obb_intersects(&a, &b2));
    }

    #[test]
    fn body_shape_rejects_empty_and_degenerate() {
        assert_eq!(BodyShape::new(Vec::new()), Err(ShapeError::Empty));
        let flat = LabeledObb::new("flat", Obb::new(Pose::identity(), Vec3::new(1.0, 0.0, 1.0)));
        assert!(matches!(
            BodyShape::new(alloc::vec![flat]),
            Err(ShapeError::InvalidBox { .. })
        ));
    }

    #[test]
    fn sweep_through_free_space_is_clear() {
        let shape = BodyShape::single("probe", Vec3::new(1.0, 1.0, 1.0)).unwrap();
        let obstacles = [LabeledObb::new("wall", cube_at(0.0, 50.0, 0.0))];
        let out = swept_collision(
            &shape,
            &Pose::from_translation(0.0, 0.0, 0.0),
            &Pose::from_translation(30.0, 0.0, 0.0),
            &obstacles,
            0.5,
        );
        assert!(out.is_clear());
    }

    #[test]
    fn descent_into_obstacle_reports_pair() {
        let shape = BodyShape::single("probe", Vec3::new(1.0, 1.0, 1.0)).unwrap();
        let obstacles = [
            LabeledObb::new("other", cube_at(50.0, 0.0, 0.0)),
            LabeledObb::new("floor", Obb::from_bounds(Vec3::new(-20.0, -20.0, -5.0), Vec3::new(20.0, 20.0, 0.0))),
        ];
        let out = swept_collision(
            &shape,
            &Pose::from_translation(0.0, 0.0, 20.0),
            &Pose::from_translation(0.0, 0.0, -10.0),
            &obstacles,
            0.5,
        );
        match out {
            SweepOutcome::Hit(hit) => {
                assert_eq!(hit.moving, "probe");
                assert_eq!(hit.obstacle, "floor");
                assert!(hit.index > 0);
            }
            SweepOutcome::Clear { .. } => panic!("expected a hit"),
        }
    }

    #[test]
    fn zero_length_motion_in_collision_hits_at_start() {
        let shape = BodyShape::single("probe", Vec3::new(1.0, 1.0, 1.0)).unwrap();
        let obstacles = [LabeledObb::new("block", cube_at(0.5, 0.0, 0.0))];
        let p = Pose::identity();
        match swept_collision(&shape, &p, &p, &obstacles, 0.5) {
            SweepOutcome::Hit(hit) => assert_eq!(hit.index, 0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
