//! Cable routing, joint-space cable lengths, drive-module transmission math,
//! antagonistic tension and current-based torque estimation.
//!
//! Each joint is driven by a closed cable loop. The two sides of the loop
//! (agonist and antagonist) run from the capstan exit, through a cable guide
//! in the base, and, for the jaws, over a guide-cap point before reaching the
//! joint pulley. The guide-cap point sits on the wrist yaw axis, so rotating
//! the wrist swings the jaw pulley about an axis through the cable's last
//! fixed point and the jaw cable length does not change.
//!
//! The cable is rigid and massless and the capstan does not slip.

use core::f64::consts::FRAC_PI_2;
use core::fmt;

use alloc::vec::Vec;

use crate::kinematics::{chain, GripperConfig, GripperParams, JointLimits, KinematicsError};
use crate::pose::Vec3;

/// A guide-cap point counts as "on the yaw axis" within this distance (mm).
pub const AXIS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JointId {
    Wrist,
    Jaw1,
    Jaw2,
}

impl JointId {
    pub const ALL: [JointId; 3] = [JointId::Wrist, JointId::Jaw1, JointId::Jaw2];

    pub fn name(self) -> &'static str {
        match self {
            JointId::Wrist => "wrist",
            JointId::Jaw1 => "jaw1",
            JointId::Jaw2 => "jaw2",
        }
    }

    pub fn index(self) -> usize {
        match self {
            JointId::Wrist => 0,
            JointId::Jaw1 => 1,
            JointId::Jaw2 => 2,
        }
    }

    /// Current angle of this joint in `config`.
    pub fn angle(self, config: &GripperConfig) -> f64 {
        match self {
            JointId::Wrist => config.wrist_yaw,
            JointId::Jaw1 => config.jaw1,
            JointId::Jaw2 => config.jaw2,
        }
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CableError {
    /// A route claims decoupling but its guide-cap point is off the yaw axis.
    OffAxis { joint: JointId, distance: f64 },
    MissingGuideCap { joint: JointId },
    /// The wrist route must not pass a guide cap.
    UnexpectedGuideCap,
    DegenerateSegment { joint: JointId },
    InvalidDrive(&'static str),
    ServoOutOfRange { angle: f64, limit: f64 },
    NegativePretension { value: f64 },
    Kinematics(KinematicsError),
}

impl fmt::Display for CableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CableError::OffAxis { joint, distance } => write!(
                f,
                "{joint} route claims decoupling but its guide cap is {distance} mm off the yaw axis"
            ),
            CableError::MissingGuideCap { joint } => {
                write!(f, "{joint} route claims decoupling but has no guide cap")
            }
            CableError::UnexpectedGuideCap => f.write_str("wrist route must not use a guide cap"),
            CableError::DegenerateSegment { joint } => {
                write!(f, "{joint} route has a zero-length segment")
            }
            CableError::InvalidDrive(what) => write!(f, "invalid drive module: {what}"),
            CableError::ServoOutOfRange { angle, limit } => {
                write!(f, "servo angle {angle} rad exceeds ±{limit} rad")
            }
            CableError::NegativePretension { value } => {
                write!(f, "pretension must be >= 0 N, got {value}")
            }
            CableError::Kinematics(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CableError {}

impl From<KinematicsError> for CableError {
    fn from(e: KinematicsError) -> Self {
        CableError::Kinematics(e)
    }
}

/// One side of a cable loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableSide {
    /// Where the cable leaves the capstan (base frame).
    pub capstan_exit: Vec3,
    /// Cable guide (base frame).
    pub guide: Vec3,
    /// Guide-cap bend point (base frame).
    pub guide_cap: Option<Vec3>,
    /// Tangent point on the joint pulley, in the frame carrying the pulley
    /// axle: the base frame for the wrist, the wrist frame for the jaws.
    pub pulley_point: Vec3,
}

impl CableSide {
    fn fixed_length(&self) -> f64 {
        let mut len = (self.guide - self.capstan_exit).norm();
        if let Some(cap) = self.guide_cap {
            len += (cap - self.guide).norm();
        }
        len
    }

    fn last_fixed_point(&self) -> Vec3 {
        self.guide_cap.unwrap_or(self.guide)
    }

    fn segments_positive(&self, pulley_in_base: &Vec3) -> bool {
        (self.guide - self.capstan_exit).norm() > 0.0
            && self.guide_cap.is_none_or(|cap| (cap - self.guide).norm() > 0.0)
            && (pulley_in_base - self.last_fixed_point()).norm() > 0.0
    }
}

/// Routing of one joint's cable loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableRoute {
    pub joint: JointId,
    pub agonist: CableSide,
    pub antagonist: CableSide,
    /// Joint pulley radius (mm).
    pub pulley_radius: f64,
    /// Arc each side wraps on the pulley at the reference angle (rad).
    pub reference_wrap: f64,
    /// Joint angle at which both sides wrap `reference_wrap`.
    pub reference_angle: f64,
    /// Whether the route claims independence from the wrist yaw.
    pub decoupled: bool,
}

impl CableRoute {
    /// Checks the routing invariants: jaw routes that claim decoupling bend
    /// over a guide cap on the yaw axis, the wrist route has no guide cap, and
    /// every segment is non-degenerate at the zero configuration.
    pub fn validate(&self, params: &GripperParams) -> Result<(), CableError> {
        if !(self.pulley_radius.is_finite() && self.pulley_radius > 0.0) {
            return Err(CableError::InvalidDrive("pulley radius must be > 0"));
        }
        for side in [&self.agonist, &self.antagonist] {
            match (self.joint, side.guide_cap) {
                (JointId::Wrist, Some(_)) => return Err(CableError::UnexpectedGuideCap),
                (JointId::Jaw1 | JointId::Jaw2, None) if self.decoupled => {
                    return Err(CableError::MissingGuideCap { joint: self.joint })
                }
                (JointId::Jaw1 | JointId::Jaw2, Some(cap)) if self.decoupled => {
                    let distance = distance_to_yaw_axis(&cap);
                    if distance > AXIS_TOLERANCE {
                        return Err(CableError::OffAxis {
                            joint: self.joint,
                            distance,
                        });
                    }
                }
                _ => {}
            }
            let pulley = self.pulley_in_base(side, params, &GripperConfig::default());
            if !side.segments_positive(&pulley) {
                return Err(CableError::DegenerateSegment { joint: self.joint });
            }
        }
        Ok(())
    }

    fn pulley_in_base(&self, side: &CableSide, params: &GripperParams, config: &GripperConfig) -> Vec3 {
        match self.joint {
            JointId::Wrist => side.pulley_point,
            JointId::Jaw1 | JointId::Jaw2 => {
                // wrist pose relative to the base
                let rel = GripperConfig {
                    carriage: crate::pose::Pose::identity(),
                    roll: 0.0,
                    ..*config
                };
                chain(params, &rel).wrist.transform_point(&side.pulley_point)
            }
        }
    }

    fn side_length(&self, side: &CableSide, params: &GripperParams, config: &GripperConfig) -> f64 {
        let pulley = self.pulley_in_base(side, params, config);
        side.fixed_length() + (pulley - side.last_fixed_point()).norm()
    }

    /// Lengths (agonist, antagonist) without limit checks.
    pub fn lengths_unchecked(&self, params: &GripperParams, config: &GripperConfig) -> (f64, f64) {
        let dq = self.joint.angle(config) - self.reference_angle;
        let r = self.pulley_radius;
        (
            self.side_length(&self.agonist, params, config) + r * (self.reference_wrap - dq),
            self.side_length(&self.antagonist, params, config) + r * (self.reference_wrap + dq),
        )
    }

    /// Lengths of both sides at the zero configuration.
    pub fn nominal_lengths(&self, params: &GripperParams) -> (f64, f64) {
        self.lengths_unchecked(params, &GripperConfig::default())
    }
}

/// Perpendicular distance from a base-frame point to the yaw axis (base x).
pub fn distance_to_yaw_axis(p: &Vec3) -> f64 {
    libm::hypot(p.y, p.z)
}

/// Agonist and antagonist lengths (mm): straight segments through the
/// routing points plus the arc wrapped on the joint pulley. The agonist
/// shortens by `r·Δq` as its joint advances and the antagonist lengthens by
/// the same amount.
pub fn cable_lengths(
    route: &CableRoute,
    params: &GripperParams,
    config: &GripperConfig,
) -> Result<(f64, f64), CableError> {
    config.check_limits(params)?;
    route.validate(params)?;
    Ok(route.lengths_unchecked(params, config))
}

/// Central finite difference of the route's cable lengths with respect to
/// the wrist yaw, taking the larger magnitude of the two sides (mm/rad).
pub fn decoupling_residual(
    route: &CableRoute,
    params: &GripperParams,
    config: &GripperConfig,
    delta: f64,
) -> f64 {
    debug_assert!(delta > 0.0 && delta <= 0.1);
    let mut plus = *config;
    plus.wrist_yaw += delta;
    let mut minus = *config;
    minus.wrist_yaw -= delta;
    let (ap, bp) = route.lengths_unchecked(params, &plus);
    let (am, bm) = route.lengths_unchecked(params, &minus);
    let da = (ap - am) / (2.0 * delta);
    let db = (bp - bm) / (2.0 * delta);
    da.abs().max(db.abs())
}

/// Step used for the yaw finite difference in [`decoupling_grid`] (rad).
pub const DECOUPLING_DELTA: f64 = 1e-4;

/// Jaw-route behaviour at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecouplingSample {
    pub wrist_yaw: f64,
    pub jaw1: f64,
    pub jaw2: f64,
    /// [`decoupling_residual`] of the jaw1 and jaw2 routes (mm/rad).
    pub residuals: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecouplingReport {
    pub samples: Vec<DecouplingSample>,
    /// Largest jaw residual over the grid (mm/rad).
    pub max_residual: f64,
    /// Largest spread of any jaw cable length over the yaw values of the grid
    /// with the jaw angles held (mm).
    pub max_variation: f64,
}

fn grid_values(limits: JointLimits, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| limits.min + (limits.max - limits.min) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Sweeps an `n`³ grid over wrist yaw and both jaw angles (pairs with
/// jaw1 < jaw2 are skipped) and measures how the jaw cables respond to the
/// wrist yaw.
pub fn decoupling_grid(params: &GripperParams, routes: &[CableRoute; 3], n: usize) -> DecouplingReport {
    assert!(n >= 2, "grid needs at least two points per axis");
    let yaws = grid_values(params.wrist_yaw_limits, n);
    let jaws = grid_values(params.jaw_limits, n);
    let jaw_routes = [&routes[JointId::Jaw1.index()], &routes[JointId::Jaw2.index()]];
    let mut samples = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut max_variation: f64 = 0.0;
    for &jaw1 in &jaws {
        for &jaw2 in jaws.iter().filter(|&&j| j <= jaw1) {
            let mut lo = [f64::INFINITY; 4];
            let mut hi = [f64::NEG_INFINITY; 4];
            for &wrist_yaw in &yaws {
                let config = GripperConfig {
                    wrist_yaw,
                    jaw1,
                    jaw2,
                    ..GripperConfig::default()
                };
                let residuals = jaw_routes.map(|r| decoupling_residual(r, params, &config, DECOUPLING_DELTA));
                max_residual = max_residual.max(residuals[0]).max(residuals[1]);
                for (k, route) in jaw_routes.iter().enumerate() {
                    let (a, b) = route.lengths_unchecked(params, &config);
                    for (m, len) in [(2 * k, a), (2 * k + 1, b)] {
                        lo[m] = lo[m].min(len);
                        hi[m] = hi[m].max(len);
                    }
                }
                samples.push(DecouplingSample {
                    wrist_yaw,
                    jaw1,
                    jaw2,
                    residuals,
                });
            }
            for m in 0..4 {
                max_variation = max_variation.max(hi[m] - lo[m]);
            }
        }
    }
    DecouplingReport {
        samples,
        max_residual,
        max_variation,
    }
}

/// A servo, split capstan and joint pulley.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveModule {
    /// Capstan radius (mm).
    pub capstan_radius: f64,
    /// Joint pulley radius (mm).
    pub joint_pulley_radius: f64,
    /// Cable pretension (N).
    pub pretension: f64,
    /// Motor torque constant (N·mm/A).
    pub torque_constant: f64,
    /// Current servo angle (rad).
    pub servo_angle: f64,
    /// Total servo travel (rad), centered on zero.
    pub servo_range: f64,
    /// Ratchet tooth spacing in N when pretension is quantized.
    pub ratchet_step: Option<f64>,
}

impl Default for DriveModule {
    fn default() -> Self {
        Self {
            capstan_radius: 10.0,
            joint_pulley_radius: 5.0,
            pretension: 20.0,
            torque_constant: 500.0,
            servo_angle: 0.0,
            servo_range: 2.0 * FRAC_PI_2,
            ratchet_step: None,
        }
    }
}

impl DriveModule {
    pub fn validate(&self) -> Result<(), CableError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.capstan_radius) {
            return Err(CableError::InvalidDrive("capstan radius must be > 0"));
        }
        if !positive(self.joint_pulley_radius) {
            return Err(CableError::InvalidDrive("joint pulley radius must be > 0"));
        }
        if !positive(self.torque_constant) {
            return Err(CableError::InvalidDrive("torque constant must be > 0"));
        }
        if !positive(self.servo_range) {
            return Err(CableError::InvalidDrive("servo range must be > 0"));
        }
        if let Some(step) = self.ratchet_step {
            if !positive(step) {
                return Err(CableError::InvalidDrive("ratchet step must be > 0"));
            }
        }
        if !(self.pretension.is_finite() && self.pretension >= 0.0) {
            return Err(CableError::NegativePretension {
                value: self.pretension,
            });
        }
        self.check_servo(self.servo_angle)
    }

    pub fn servo_limit(&self) -> f64 {
        self.servo_range / 2.0
    }

    /// Joint angle per servo angle, `r_c / r_j`.
    pub fn ratio(&self) -> f64 {
        self.capstan_radius / self.joint_pulley_radius
    }

    fn check_servo(&self, angle: f64) -> Result<(), CableError> {
        let limit = self.servo_limit();
        if angle.is_finite() && angle.abs() <= limit {
            Ok(())
        } else {
            Err(CableError::ServoOutOfRange { angle, limit })
        }
    }

    /// Largest joint torque the pretension can carry before one side goes
    /// slack: `2·r_j·T0`.
    pub fn slack_torque(&self) -> f64 {
        2.0 * self.joint_pulley_radius * self.pretension
    }
}

/// No-slip capstan kinematics: `q = (r_c / r_j)·α`.
pub fn servo_to_joint(drive: &DriveModule, servo_angle: f64) -> Result<f64, CableError> {
    drive.check_servo(servo_angle)?;
    Ok(servo_angle * drive.capstan_radius / drive.joint_pulley_radius)
}

/// Inverse of [`servo_to_joint`].
pub fn joint_to_servo(drive: &DriveModule, joint_angle: f64) -> Result<f64, CableError> {
    let servo = joint_angle * drive.joint_pulley_radius / drive.capstan_radius;
    drive.check_servo(servo)?;
    Ok(servo)
}

/// Agonist/antagonist tensions carrying a joint torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensionState {
    /// Agonist tension (N).
    pub agonist: f64,
    /// Antagonist tension (N).
    pub antagonist: f64,
    /// Joint torque (N·mm).
    pub torque: f64,
    pub slack: bool,
}

/// Splits a joint torque into the two cable tensions around the pretension.
/// Past `|τ| = 2·r_j·T0` the unloaded side would need negative tension; it is
/// clamped to zero, the loaded side carries the whole torque, and the state
/// is flagged slack.
pub fn tension_from_torque(drive: &DriveModule, torque: f64) -> TensionState {
    let r = drive.joint_pulley_radius;
    let t0 = drive.pretension;
    let half = torque / (2.0 * r);
    if torque.abs() > drive.slack_torque() {
        let loaded = torque.abs() / r;
        let (agonist, antagonist) = if torque > 0.0 { (loaded, 0.0) } else { (0.0, loaded) };
        return TensionState {
            agonist,
            antagonist,
            torque,
            slack: true,
        };
    }
    TensionState {
        agonist: t0 + half,
        antagonist: t0 - half,
        torque,
        slack: false,
    }
}

/// Joint torque implied by the motor current: `τ = (r_j / r_c)·k_t·i`.
/// Meaningful only for decoupled routes with both sides taut.
pub fn estimate_joint_torque(drive: &DriveModule, current: f64) -> f64 {
    drive.joint_pulley_radius / drive.capstan_radius * drive.torque_constant * current
}

/// Returns the drive with a new pretension, floored to the ratchet step when
/// quantization is enabled.
pub fn set_pretension(drive: &DriveModule, pretension: f64) -> Result<DriveModule, CableError> {
    if !(pretension.is_finite() && pretension >= 0.0) {
        return Err(CableError::NegativePretension { value: pretension });
    }
    let stored = match drive.ratchet_step {
        Some(step) => libm::floor(pretension / step) * step,
        None => pretension,
    };
    Ok(DriveModule {
        pretension: stored,
        ..*drive
    })
}

/// Routing used by the default gripper. Cables run along the tool axis;
/// jaw cables bend over guide caps at x = ±`offset` on the yaw axis.
pub fn default_routes(params: &GripperParams, drive: &DriveModule) -> [CableRoute; 3] {
    let r = drive.joint_pulley_radius;
    let lw = params.wrist_length;
    let capstan_z = -3.0 * lw;
    let guide_z = -lw / 2.0;
    // wrist pulley is 12 mm along the yaw axis, cables tangent at y = ±r
    let wrist_side = |y: f64| CableSide {
        capstan_exit: Vec3::new(12.0, y, capstan_z),
        guide: Vec3::new(12.0, y, guide_z),
        guide_cap: None,
        pulley_point: Vec3::new(12.0, y, 0.0),
    };
    // jaw pulleys sit side by side on the pitch axis at y = ±2 mm
    let jaw_side = |x: f64, y: f64| CableSide {
        capstan_exit: Vec3::new(x, y, capstan_z),
        guide: Vec3::new(x, y, guide_z),
        guide_cap: Some(Vec3::new(x, 0.0, 0.0)),
        pulley_point: Vec3::new(x, y, lw),
    };
    let route = |joint, agonist, antagonist| CableRoute {
        joint,
        agonist,
        antagonist,
        pulley_radius: r,
        reference_wrap: FRAC_PI_2,
        reference_angle: 0.0,
        decoupled: joint != JointId::Wrist,
    };
    [
        route(JointId::Wrist, wrist_side(r), wrist_side(-r)),
        route(JointId::Jaw1, jaw_side(r, 2.0), jaw_side(-r, 2.0)),
        route(JointId::Jaw2, jaw_side(r, -2.0), jaw_side(-r, -2.0)),
    ]
}
