use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::Rotation3;

use crate::pose::{Pose, Vec3};
use crate::scene::Scene;

/// Squeeze torque each jaw applies on a held component (N·mm).
pub const DEFAULT_SQUEEZE_TORQUE: f64 = 100.0;

/// Joint goal of a carriage move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JointGoal {
    /// Roll, wrist yaw and pitch stay where they are.
    Keep,
    Angles { roll: f64, wrist_yaw: f64, pitch: f64 },
    /// World orientation of the jaw bisector frame, solved for roll, yaw and
    /// pitch at the target carriage orientation.
    Orientation(Rotation3<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    MoveTo { carriage: Pose, joints: JointGoal },
    /// Tip-to-tip opening (mm).
    SetOpening(f64),
    CloseOn(String),
    /// Carriage translation along a world direction (normalized on use).
    Pull { axis: Vec3, distance: f64 },
    Release,
    /// Changes the listed joints with the carriage fixed.
    Reorient {
        roll: Option<f64>,
        wrist_yaw: Option<f64>,
        pitch: Option<f64>,
    },
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::MoveTo { .. } => "move_to",
            Phase::SetOpening(_) => "set_opening",
            Phase::CloseOn(_) => "close_on",
            Phase::Pull { .. } => "pull",
            Phase::Release => "release",
            Phase::Reorient { .. } => "reorient",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskScript {
    pub id: String,
    /// Components that must end free and outside the workspace.
    pub targets: Vec<String>,
    pub phases: Vec<Phase>,
    /// Per-jaw squeeze torque while holding (N·mm).
    pub squeeze_torque: f64,
}

impl TaskScript {
    pub fn new(id: impl Into<String>, targets: Vec<String>, phases: Vec<Phase>) -> Self {
        Self {
            id: id.into(),
            targets,
            phases,
            squeeze_torque: DEFAULT_SQUEEZE_TORQUE,
        }
    }

    /// Checks ids against the scene and the holding discipline: `close_on`
    /// only after a `move_to` and while empty-handed, `pull` and `release`
    /// only while holding, `set_opening` only while empty-handed.
    pub fn validate(&self, scene: &Scene) -> Result<(), ScriptError> {
        for t in &self.targets {
            if scene.component(t).is_none() {
                return Err(ScriptError::UnknownTarget(t.clone()));
            }
        }
        if !(self.squeeze_torque.is_finite() && self.squeeze_torque >= 0.0) {
            return Err(ScriptError::SqueezeTorque(self.squeeze_torque));
        }
        let mut holding = false;
        let mut moved = false;
        for (index, phase) in self.phases.iter().enumerate() {
            let bad = |problem| Err(ScriptError::Phase { index, problem });
            match phase {
                Phase::MoveTo { carriage, joints } => {
                    if !pose_is_finite(carriage) {
                        return bad(PhaseProblem::NonFinite);
                    }
                    match joints {
                        JointGoal::Angles {
                            roll,
                            wrist_yaw,
                            pitch,
                        } if !(roll.is_finite() && wrist_yaw.is_finite() && pitch.is_finite()) => {
                            return bad(PhaseProblem::NonFinite)
                        }
                        JointGoal::Orientation(r) if !r.matrix().iter().all(|v| v.is_finite()) => {
                            return bad(PhaseProblem::NonFinite)
                        }
                        _ => {}
                    }
                    moved = true;
                }
                Phase::SetOpening(mm) => {
                    if !(mm.is_finite() && *mm >= 0.0) {
                        return bad(PhaseProblem::NonFinite);
                    }
                    if holding {
                        return bad(PhaseProblem::Holding);
                    }
                }
                Phase::CloseOn(id) => {
                    if scene.component(id).is_none() {
                        return bad(PhaseProblem::UnknownComponent(id.clone()));
                    }
                    if holding {
                        return bad(PhaseProblem::Holding);
                    }
                    if !moved {
                        return bad(PhaseProblem::CloseBeforeMove);
                    }
                    holding = true;
                }
                Phase::Pull { axis, distance } => {
                    if !(axis.iter().all(|v| v.is_finite()) && axis.norm() > 1e-12) {
                        return bad(PhaseProblem::ZeroAxis);
                    }
                    if !(distance.is_finite() && *distance >= 0.0) {
                        return bad(PhaseProblem::NonFinite);
                    }
                    if !holding {
                        return bad(PhaseProblem::NotHolding);
                    }
                }
                Phase::Release => {
                    if !holding {
                        return bad(PhaseProblem::NotHolding);
                    }
                    holding = false;
                    moved = false;
                }
                Phase::Reorient {
                    roll,
                    wrist_yaw,
                    pitch,
                } => {
                    if [roll, wrist_yaw, pitch]
                        .iter()
                        .any(|v| v.is_some_and(|a| !a.is_finite()))
                    {
                        return bad(PhaseProblem::NonFinite);
                    }
                    moved = true;
                }
            }
        }
        Ok(())
    }
}

fn pose_is_finite(p: &Pose) -> bool {
    p.translation.iter().all(|v| v.is_finite()) && p.rotation.matrix().iter().all(|v| v.is_finite())
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseProblem {
    UnknownComponent(String),
    CloseBeforeMove,
    Holding,
    NotHolding,
    ZeroAxis,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScriptError {
    UnknownTarget(String),
    SqueezeTorque(f64),
    InvalidStep(f64),
    Phase { index: usize, problem: PhaseProblem },
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScriptError::UnknownTarget(id) => write!(f, "target `{id}` is not a scene component"),
            ScriptError::SqueezeTorque(v) => write!(f, "squeeze torque {v} must be >= 0"),
            ScriptError::InvalidStep(v) => write!(f, "sweep step {v} mm must be > 0"),
            ScriptError::Phase { index, problem } => {
                write!(f, "phase {index}: ")?;
                match problem {
                    PhaseProblem::UnknownComponent(id) => write!(f, "unknown component `{id}`"),
                    PhaseProblem::CloseBeforeMove => f.write_str("close_on needs a preceding move"),
                    PhaseProblem::Holding => f.write_str("not allowed while holding a component"),
                    PhaseProblem::NotHolding => f.write_str("requires a held component"),
                    PhaseProblem::ZeroAxis => f.write_str("pull axis must be non-zero"),
                    PhaseProblem::NonFinite => f.write_str("values must be finite and in range"),
                }
            }
        }
    }
}

impl core::error::Error for ScriptError {}
