use core::fmt;

use crate::geometry::{obb_intersects, separation, LabeledObb, Obb};
use crate::kinematics::{chain, GripperConfig, GripperParams, KinematicsError};
use crate::scene::Scene;

/// Largest jaw-to-face gap accepted at the end of a closing motion (mm).
pub const CONTACT_TOLERANCE: f64 = 0.5;
/// Tip travel between closing samples while searching for contact (mm).
const CONTACT_SCAN: f64 = 0.05;

/// Closing outcome of an accepted grasp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspContact {
    /// Opening angle at first contact (rad).
    pub opening_angle: f64,
    /// Separation of each jaw from the component at that angle (mm).
    pub gaps: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraspRejection {
    UnknownComponent,
    Kinematics(KinematicsError),
    TooWide { width: f64, max: f64 },
    /// Gripper already touches something other than the target.
    Blocked,
    /// Tips are not on opposite sides of the grasp faces.
    NotStraddling,
    /// Closing fully never reaches the component.
    NoContact,
    UnevenContact { gap: f64 },
    ClosingCollision,
}

impl fmt::Display for GraspRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraspRejection::UnknownComponent => f.write_str("unknown component"),
            GraspRejection::Kinematics(e) => write!(f, "{e}"),
            GraspRejection::TooWide { width, max } => {
                write!(f, "component is {width} mm wide, jaws open at most {max} mm")
            }
            GraspRejection::Blocked => f.write_str("gripper already in contact with another body"),
            GraspRejection::NotStraddling => {
                f.write_str("jaw tips do not straddle the grasp faces")
            }
            GraspRejection::NoContact => f.write_str("closing never reaches the component"),
            GraspRejection::UnevenContact { gap } => {
                write!(f, "second jaw stops {gap} mm short of the component")
            }
            GraspRejection::ClosingCollision => f.write_str("closing motion collides"),
        }
    }
}

impl core::error::Error for GraspRejection {}

fn jaw_boxes(params: &GripperParams, config: &GripperConfig, angle: f64) -> [Obb; 2] {
    let links = chain(params, &config.with_opening_angle(angle)).link_boxes(params);
    [links[2].obb, links[3].obb]
}

fn jaws_touch(params: &GripperParams, config: &GripperConfig, angle: f64, target: &Obb) -> bool {
    jaw_boxes(params, config, angle)
        .iter()
        .any(|j| obb_intersects(j, target))
}

fn links_hit(params: &GripperParams, config: &GripperConfig, obstacles: &[LabeledObb]) -> bool {
    chain(params, config)
        .link_boxes(params)
        .iter()
        .any(|l| obstacles.iter().any(|o| obb_intersects(&l.obb, &o.obb)))
}

/// Scans towards closed, then bisects the first touching interval.
fn first_contact(
    params: &GripperParams,
    config: &GripperConfig,
    start: f64,
    face: &Obb,
) -> Result<f64, GraspRejection> {
    let dtheta = 2.0 * CONTACT_SCAN / params.jaw_length;
    let n = libm::ceil(start / dtheta).max(1.0) as usize;
    let mut clear = start;
    let mut hit = None;
    for i in 1..=n {
        let angle = start * (1.0 - i as f64 / n as f64);
        if jaws_touch(params, config, angle, face) {
            hit = Some(angle);
            break;
        }
        clear = angle;
    }
    let mut hit = hit.ok_or(GraspRejection::NoContact)?;
    for _ in 0..60 {
        let mid = 0.5 * (clear + hit);
        if jaws_touch(params, config, mid, face) {
            hit = mid;
        } else {
            clear = mid;
        }
    }
    Ok(hit)
}

/// Simulates a symmetric close of the jaws at `config` onto component `id`
/// and returns the contact angle when the grasp holds.
pub fn plan_grasp(
    scene: &Scene,
    config: &GripperConfig,
    id: &str,
) -> Result<GraspContact, GraspRejection> {
    let params = &scene.gripper;
    let index = scene
        .component_index(id)
        .ok_or(GraspRejection::UnknownComponent)?;
    let component = &scene.components[index];
    config
        .check_limits(params)
        .map_err(GraspRejection::Kinematics)?;

    let max = params.max_opening();
    if component.graspable_width > max {
        return Err(GraspRejection::TooWide {
            width: component.graspable_width,
            max,
        });
    }
    let (face, axis) = component.grasp_face().ok_or(GraspRejection::NotStraddling)?;

    let others = scene.obstacles(&[index]);
    if links_hit(params, config, &others) {
        return Err(GraspRejection::Blocked);
    }

    let posture = chain(params, config);
    let local: [_; 2] = posture
        .tips
        .map(|tip| face.pose.inverse().transform_point(&tip));
    let h = face.half_extents;
    let eps = 1e-9;
    let outside = local.iter().all(|p| p[axis].abs() >= h[axis] - eps);
    let opposite = local[0][axis] * local[1][axis] < 0.0;
    let within = local.iter().all(|p| {
        (0..3)
            .filter(|&k| k != axis)
            .all(|k| p[k].abs() <= h[k] + eps)
    });
    if !(outside && opposite && within) {
        return Err(GraspRejection::NotStraddling);
    }

    let start = config.opening_angle();
    let hit = if jaws_touch(params, config, start, &face) {
        // already in contact; only a shallow overlap counts as a grasp
        let depth = jaw_boxes(params, config, start)
            .iter()
            .map(|j| -separation(j, &face))
            .fold(0.0, f64::max);
        if depth > CONTACT_TOLERANCE {
            return Err(GraspRejection::NotStraddling);
        }
        start
    } else {
        first_contact(params, config, start, &face)?
    };
    let jaws = jaw_boxes(params, config, hit);
    let gaps = jaws.map(|j| separation(&j, &face).max(0.0));
    let gap = gaps[0].max(gaps[1]);
    if gap > CONTACT_TOLERANCE {
        return Err(GraspRejection::UnevenContact { gap });
    }

    // the close itself, against everything but the target
    let steps = libm::ceil((start - hit) * params.jaw_length / CONTACT_TOLERANCE).max(1.0) as usize;
    for i in 1..=steps {
        let angle = start + (hit - start) * i as f64 / steps as f64;
        if links_hit(params, &config.with_opening_angle(angle), &others) {
            return Err(GraspRejection::ClosingCollision);
        }
    }

    Ok(GraspContact {
        opening_angle: hit,
        gaps,
    })
}

/// True when closing the jaws at `config` would grasp component `id`.
pub fn grasp_check(scene: &Scene, config: &GripperConfig, id: &str) -> bool {
    plan_grasp(scene, config, id).is_ok()
}
