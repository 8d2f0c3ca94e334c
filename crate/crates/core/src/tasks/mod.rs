//! Task scripts and the quasi-static engine that runs them.

mod engine;
mod grasp;
mod script;

pub use engine::{execute, Failure, FailureReason, StepLog, StepRecord, TaskResult};
pub use grasp::{grasp_check, plan_grasp, GraspContact, GraspRejection, CONTACT_TOLERANCE};
pub use script::{
    JointGoal, Phase, PhaseProblem, ScriptError, TaskScript, DEFAULT_SQUEEZE_TORQUE,
};
