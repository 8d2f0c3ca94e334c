//! Forward kinematics of the base–wrist–jaw chain mounted on a roll joint at
//! the carriage, and the roll–yaw–pitch orientation solver.
//!
//! Frame conventions (all lengths in mm, angles in rad):
//! - the base frame origin sits on the wrist yaw axis, which is the base x axis;
//!   the tool points along +z;
//! - roll rotates the base about the carriage z axis;
//! - the wrist rotates about base x (yaw); the jaw pivot is `wrist_length`
//!   along wrist z;
//! - both jaws rotate about the shared pitch axis (wrist y through the pivot);
//!   a positive jaw angle swings the tip toward +x. Jaw 1 is the +x jaw, so a
//!   valid configuration has `jaw1 >= jaw2`.

use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use nalgebra::Rotation3;

use crate::geometry::{LabeledObb, Obb};
use crate::pose::{orthonormality_error, rot_x, rot_y, rot_z, Pose, Vec3};

/// Below this |cos(yaw)| the roll and pitch axes align.
pub const SINGULARITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Joint {
    Roll,
    WristYaw,
    Jaw1,
    Jaw2,
    Pitch,
}

impl Joint {
    pub fn name(self) -> &'static str {
        match self {
            Joint::Roll => "roll",
            Joint::WristYaw => "wrist_yaw",
            Joint::Jaw1 => "jaw1",
            Joint::Jaw2 => "jaw2",
            Joint::Pitch => "pitch",
        }
    }
}

impl fmt::Display for Joint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KinematicsError {
    OutOfRange {
        joint: Joint,
        value: f64,
        min: f64,
        max: f64,
    },
    /// jaw1 must not be below jaw2.
    JawOrder { jaw1: f64, jaw2: f64 },
    InvalidParams(&'static str),
    NotOrthonormal { error: f64 },
    Singular { wrist_yaw: f64 },
    Infeasible { joint: Joint, value: f64 },
}

impl fmt::Display for KinematicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KinematicsError::OutOfRange {
                joint,
                value,
                min,
                max,
            } => write!(f, "{joint} = {value} rad is outside [{min}, {max}]"),
            KinematicsError::JawOrder { jaw1, jaw2 } => {
                write!(f, "jaw1 ({jaw1} rad) must not be below jaw2 ({jaw2} rad)")
            }
            KinematicsError::InvalidParams(what) => write!(f, "invalid gripper parameters: {what}"),
            KinematicsError::NotOrthonormal { error } => {
                write!(f, "target rotation is not orthonormal (error {error:e})")
            }
            KinematicsError::Singular { wrist_yaw } => {
                write!(f, "singular orientation (wrist_yaw = {wrist_yaw} rad)")
            }
            KinematicsError::Infeasible { joint, value } => {
                write!(f, "orientation needs {joint} = {value} rad, outside its limits")
            }
        }
    }
}

impl core::error::Error for KinematicsError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub min: f64,
    pub max: f64,
}

impl JointLimits {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && value <= self.max
    }

    fn check(&self, joint: Joint, value: f64) -> Result<(), KinematicsError> {
        if value.is_finite() && self.contains(value) {
            Ok(())
        } else {
            Err(KinematicsError::OutOfRange {
                joint,
                value,
                min: self.min,
                max: self.max,
            })
        }
    }
}

/// Link dimensions and joint limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperParams {
    /// Yaw axis to jaw pivot.
    pub wrist_length: f64,
    /// Jaw pivot to jaw tip.
    pub jaw_length: f64,
    /// Jaw extent across the opening direction.
    pub jaw_thickness: f64,
    /// Jaw extent along the pitch axis.
    pub jaw_width: f64,
    /// Square cross-section of the base and wrist bodies.
    pub body_width: f64,
    /// Length of the base body behind the yaw axis.
    pub base_length: f64,
    pub wrist_yaw_limits: JointLimits,
    pub jaw_limits: JointLimits,
    pub roll_limits: JointLimits,
}

impl Default for GripperParams {
    fn default() -> Self {
        Self {
            wrist_length: 40.0,
            jaw_length: 30.0,
            jaw_thickness: 3.0,
            jaw_width: 8.0,
            body_width: 25.0,
            base_length: 40.0,
            wrist_yaw_limits: JointLimits::new(-FRAC_PI_2, FRAC_PI_2),
            jaw_limits: JointLimits::new(-FRAC_PI_2, FRAC_PI_2),
            roll_limits: JointLimits::new(-PI, PI),
        }
    }
}

impl GripperParams {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let lengths = [
            (self.wrist_length, "wrist_length must be > 0"),
            (self.jaw_length, "jaw_length must be > 0"),
            (self.jaw_thickness, "jaw_thickness must be > 0"),
            (self.jaw_width, "jaw_width must be > 0"),
            (self.body_width, "body_width must be > 0"),
            (self.base_length, "base_length must be > 0"),
        ];
        for (value, msg) in lengths {
            if !(value.is_finite() && value > 0.0) {
                return Err(KinematicsError::InvalidParams(msg));
            }
        }
        for (limits, msg) in [
            (self.wrist_yaw_limits, "wrist yaw limits need min < max"),
            (self.jaw_limits, "jaw limits need min < max"),
            (self.roll_limits, "roll limits need min < max"),
        ] {
            if !(limits.min.is_finite() && limits.max.is_finite() && limits.min < limits.max) {
                return Err(KinematicsError::InvalidParams(msg));
            }
        }
        if !self.jaw_limits.contains(0.0) {
            return Err(KinematicsError::InvalidParams(
                "jaw limits must admit the closed configuration",
            ));
        }
        Ok(())
    }

    /// Largest opening angle (jaw1 − jaw2) the limits allow, capped at π.
    pub fn max_opening_angle(&self) -> f64 {
        (self.jaw_limits.max - self.jaw_limits.min).min(PI)
    }

    /// Largest tip-to-tip distance the jaws can reach.
    pub fn max_opening(&self) -> f64 {
        chord(self.jaw_length, self.max_opening_angle())
    }

    /// Opening angle producing a tip distance of `width`, if reachable.
    pub fn opening_angle_for(&self, width: f64) -> Option<f64> {
        if !(width >= 0.0) || width > self.max_opening() + 1e-12 {
            return None;
        }
        let s = (width / (2.0 * self.jaw_length)).min(1.0);
        Some(2.0 * libm::asin(s))
    }
}

/// Chord between two points at radius `length` separated by `angle`.
pub fn chord(length: f64, angle: f64) -> f64 {
    2.0 * length * libm::sin(angle / 2.0)
}

/// Complete actuation state: the carriage (manipulator flange) pose, the
/// manipulator roll, and the three gripper joints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperConfig {
    pub carriage: Pose,
    pub roll: f64,
    pub wrist_yaw: f64,
    pub jaw1: f64,
    pub jaw2: f64,
}

impl Default for GripperConfig {
    fn default() -> Self {
        Self {
            carriage: Pose::identity(),
            roll: 0.0,
            wrist_yaw: 0.0,
            jaw1: 0.0,
            jaw2: 0.0,
        }
    }
}

impl GripperConfig {
    /// Builds the jaw angles from a pitch and a non-negative opening angle.
    pub fn from_pitch(
        carriage: Pose,
        roll: f64,
        wrist_yaw: f64,
        pitch: f64,
        opening_angle: f64,
    ) -> Self {
        Self {
            carriage,
            roll,
            wrist_yaw,
            jaw1: pitch + opening_angle / 2.0,
            jaw2: pitch - opening_angle / 2.0,
        }
    }

    pub fn pitch(&self) -> f64 {
        (self.jaw1 + self.jaw2) / 2.0
    }

    pub fn opening_angle(&self) -> f64 {
        self.jaw1 - self.jaw2
    }

    pub fn with_opening_angle(&self, opening_angle: f64) -> Self {
        Self::from_pitch(
            self.carriage,
            self.roll,
            self.wrist_yaw,
            self.pitch(),
            opening_angle,
        )
    }

    pub fn check_limits(&self, params: &GripperParams) -> Result<(), KinematicsError> {
        params.roll_limits.check(Joint::Roll, self.roll)?;
        params
            .wrist_yaw_limits
            .check(Joint::WristYaw, self.wrist_yaw)?;
        params.jaw_limits.check(Joint::Jaw1, self.jaw1)?;
        params.jaw_limits.check(Joint::Jaw2, self.jaw2)?;
        if self.jaw1 < self.jaw2 {
            return Err(KinematicsError::JawOrder {
                jaw1: self.jaw1,
                jaw2: self.jaw2,
            });
        }
        Ok(())
    }
}

/// World poses of every link plus the jaw tips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperPosture {
    pub base: Pose,
    pub wrist: Pose,
    pub jaw1: Pose,
    pub jaw2: Pose,
    pub tips: [Vec3; 2],
    pub tip_opening: f64,
}

impl GripperPosture {
    /// Oriented boxes of the four links in world coordinates: base, wrist,
    /// jaw1, jaw2. Each jaw's inner face is the pivot–tip line.
    pub fn link_boxes(&self, params: &GripperParams) -> [LabeledObb; 4] {
        let bw = params.body_width / 2.0;
        let t = params.jaw_thickness / 2.0;
        let w = params.jaw_width / 2.0;
        let lj = params.jaw_length / 2.0;
        let base = Obb::new(
            self.base
                .compose(&Pose::from_translation(0.0, 0.0, -params.base_length / 2.0)),
            Vec3::new(bw, bw, params.base_length / 2.0),
        );
        let wrist = Obb::new(
            self.wrist
                .compose(&Pose::from_translation(0.0, 0.0, params.wrist_length / 2.0)),
            Vec3::new(bw, bw, params.wrist_length / 2.0),
        );
        let jaw1 = Obb::new(
            self.jaw1.compose(&Pose::from_translation(t, 0.0, lj)),
            Vec3::new(t, w, lj),
        );
        let jaw2 = Obb::new(
            self.jaw2.compose(&Pose::from_translation(-t, 0.0, lj)),
            Vec3::new(t, w, lj),
        );
        [
            LabeledObb::new("gripper.base", base),
            LabeledObb::new("gripper.wrist", wrist),
            LabeledObb::new("gripper.jaw1", jaw1),
            LabeledObb::new("gripper.jaw2", jaw2),
        ]
    }
}

/// Poses of the chain without limit checks. Used internally where angles
/// may legitimately step past a limit (finite differences).
pub(crate) fn chain(params: &GripperParams, config: &GripperConfig) -> GripperPosture {
    let base = config.carriage.compose(&Pose::from_rotation(rot_z(config.roll)));
    let wrist = base.compose(&Pose::from_rotation(rot_x(config.wrist_yaw)));
    let pivot = wrist.compose(&Pose::from_translation(0.0, 0.0, params.wrist_length));
    let jaw1 = pivot.compose(&Pose::from_rotation(rot_y(config.jaw1)));
    let jaw2 = pivot.compose(&Pose::from_rotation(rot_y(config.jaw2)));
    let tip = Vec3::new(0.0, 0.0, params.jaw_length);
    let tips = [jaw1.transform_point(&tip), jaw2.transform_point(&tip)];
    GripperPosture {
        base,
        wrist,
        jaw1,
        jaw2,
        tips,
        tip_opening: (tips[0] - tips[1]).norm(),
    }
}

pub fn forward_kinematics(
    params: &GripperParams,
    config: &GripperConfig,
) -> Result<GripperPosture, KinematicsError> {
    config.check_limits(params)?;
    Ok(chain(params, config))
}

/// Tip-to-tip distance (mm).
pub fn jaw_opening(params: &GripperParams, config: &GripperConfig) -> Result<f64, KinematicsError> {
    forward_kinematics(params, config).map(|p| p.tip_opening)
}

/// Roll, wrist yaw and jaw pitch that orient the jaws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToolAngles {
    pub roll: f64,
    pub wrist_yaw: f64,
    pub pitch: f64,
}

/// `carriage · Rz(roll) · Rx(yaw) · Ry(pitch)`: the orientation of the jaw
/// bisector frame.
pub fn compose_orientation(
    carriage: &Rotation3<f64>,
    roll: f64,
    wrist_yaw: f64,
    pitch: f64,
) -> Rotation3<f64> {
    carriage * rot_z(roll) * rot_x(wrist_yaw) * rot_y(pitch)
}

/// Decomposes `carriageᵀ · target` as `Rz(roll) · Rx(yaw) · Ry(pitch)` with
/// the yaw in (−π/2, π/2). The pitch is checked against the jaw limits with the
/// jaws closed.
pub fn solve_orientation(
    params: &GripperParams,
    target: &Rotation3<f64>,
    carriage: &Rotation3<f64>,
) -> Result<ToolAngles, KinematicsError> {
    let error = orthonormality_error(target.matrix());
    if !(error < 1e-6) {
        return Err(KinematicsError::NotOrthonormal { error });
    }
    let m = (carriage.inverse() * target).into_inner();
    // m = [[.., -sa cb, ..], [.., ca cb, ..], [-cb sc, sb, cb cc]]
    let cos_yaw = libm::hypot(m[(0, 1)], m[(1, 1)]);
    let wrist_yaw = libm::atan2(m[(2, 1)], cos_yaw);
    if cos_yaw < SINGULARITY_TOLERANCE {
        return Err(KinematicsError::Singular { wrist_yaw });
    }
    let roll = libm::atan2(-m[(0, 1)], m[(1, 1)]);
    let pitch = libm::atan2(-m[(2, 0)], m[(2, 2)]);

    let checks = [
        (Joint::Roll, roll, params.roll_limits),
        (Joint::WristYaw, wrist_yaw, params.wrist_yaw_limits),
        (Joint::Pitch, pitch, params.jaw_limits),
    ];
    for (joint, value, limits) in checks {
        if !limits.contains(value) {
            return Err(KinematicsError::Infeasible { joint, value });
        }
    }
    Ok(ToolAngles {
        roll,
        wrist_yaw,
        pitch,
    })
}
