use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cable::{tension_from_torque, JointId};
use crate::geometry::{obb_intersects, sample_count, separation, LabeledObb};
use crate::kinematics::{chain, solve_orientation, GripperConfig, GripperPosture, KinematicsError};
use crate::pose::Pose;
use crate::scene::{extract_component, label_body, Scene};

use super::grasp::plan_grasp;
use super::script::{JointGoal, Phase, ScriptError, TaskScript};

/// Pull directions must match the slot axis this closely (cosine).
const AXIS_ALIGNMENT: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    Collision,
    Unreachable,
    GraspFailed,
    Slack,
    Limit,
}

impl FailureReason {
    pub fn name(self) -> &'static str {
        match self {
            FailureReason::Collision => "collision",
            FailureReason::Unreachable => "unreachable",
            FailureReason::GraspFailed => "grasp-failed",
            FailureReason::Slack => "slack",
            FailureReason::Limit => "limit",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub reason: FailureReason,
    /// Index of the failing phase; `None` for the end-of-run target check.
    pub phase: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            Some(i) => write!(f, "{} in phase {}: {}", self.reason, i, self.detail),
            None => write!(f, "{}: {}", self.reason, self.detail),
        }
    }
}

impl core::error::Error for Failure {}

/// State after one motion sample.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub config: GripperConfig,
    /// Agonist and antagonist length for wrist, jaw1, jaw2 (mm).
    pub lengths: [f64; 6],
    /// Agonist and antagonist tension for wrist, jaw1, jaw2 (N).
    pub tensions: [f64; 6],
    pub slack: bool,
    pub held: Option<String>,
    /// Smallest gap between the moving bodies and the checked obstacles.
    pub min_clearance: f64,
    pub collision: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepLog {
    pub steps: Vec<StepRecord>,
}

impl StepLog {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn collision_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.collision).count()
    }

    /// Releases of a component that is later grasped again.
    pub fn regrasp_count(&self) -> usize {
        let mut released: Vec<&str> = Vec::new();
        let mut count = 0;
        let mut previous: Option<&str> = None;
        for s in &self.steps {
            let now = s.held.as_deref();
            if now != previous {
                if let Some(p) = previous {
                    released.push(p);
                }
                if let Some(n) = now {
                    if let Some(k) = released.iter().position(|r| *r == n) {
                        released.remove(k);
                        count += 1;
                    }
                }
                previous = now;
            }
        }
        count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskResult {
    pub task: String,
    pub success: bool,
    pub failure: Option<Failure>,
    /// Final pose of every target, in script order.
    pub final_poses: Vec<(String, Pose)>,
    pub log: StepLog,
    pub final_scene: Scene,
}

struct Held {
    index: usize,
    /// Component pose in the wrist frame.
    grip: Pose,
    /// Opening angle before the close, restored on release.
    release_opening: f64,
}

struct Run<'a> {
    scene: Scene,
    config: GripperConfig,
    held: Option<Held>,
    torques: [f64; 3],
    step: f64,
    squeeze: f64,
    log: Vec<StepRecord>,
    phase: usize,
    script: &'a TaskScript,
}

/// Runs `script` quasi-statically from the scene's home configuration.
/// Every motion is sampled so no point of the moving bodies travels `step`
/// mm or more between samples; touching counts as collision.
pub fn execute(scene: &Scene, script: &TaskScript, step: f64) -> Result<TaskResult, ScriptError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(ScriptError::InvalidStep(step));
    }
    script.validate(scene)?;
    let mut run = Run {
        scene: scene.clone(),
        config: scene.home,
        held: None,
        torques: [0.0; 3],
        step,
        squeeze: script.squeeze_torque,
        log: Vec::new(),
        phase: 0,
        script,
    };
    let mut failure = None;
    for (i, phase) in script.phases.iter().enumerate() {
        run.phase = i;
        if let Err(f) = run.phase_step(phase) {
            failure = Some(f);
            break;
        }
    }
    if failure.is_none() {
        failure = run.check_targets();
    }
    let final_poses = script
        .targets
        .iter()
        .filter_map(|t| run.scene.component(t).map(|c| (t.clone(), c.pose)))
        .collect();
    Ok(TaskResult {
        task: script.id.clone(),
        success: failure.is_none(),
        failure,
        final_poses,
        log: StepLog { steps: run.log },
        final_scene: run.scene,
    })
}

fn lerp_config(a: &GripperConfig, b: &GripperConfig, t: f64) -> GripperConfig {
    if t >= 1.0 {
        return *b;
    }
    let mix = |x: f64, y: f64| x + (y - x) * t;
    GripperConfig {
        carriage: Pose::interpolate(&a.carriage, &b.carriage, t),
        roll: mix(a.roll, b.roll),
        wrist_yaw: mix(a.wrist_yaw, b.wrist_yaw),
        jaw1: mix(a.jaw1, b.jaw1),
        jaw2: mix(a.jaw2, b.jaw2),
    }
}

fn kinematics_failure(e: KinematicsError) -> (FailureReason, String) {
    let reason = match e {
        KinematicsError::OutOfRange { .. } | KinematicsError::JawOrder { .. } => FailureReason::Limit,
        _ => FailureReason::Unreachable,
    };
    (reason, format!("{e}"))
}

impl Run<'_> {
    fn fail(&self, reason: FailureReason, detail: String) -> Failure {
        Failure {
            reason,
            phase: Some(self.phase),
            detail,
        }
    }

    fn phase_step(&mut self, phase: &Phase) -> Result<(), Failure> {
        match phase {
            Phase::MoveTo { carriage, joints } => {
                let (roll, wrist_yaw, pitch) = match joints {
                    JointGoal::Keep => (self.config.roll, self.config.wrist_yaw, self.config.pitch()),
                    JointGoal::Angles {
                        roll,
                        wrist_yaw,
                        pitch,
                    } => (*roll, *wrist_yaw, *pitch),
                    JointGoal::Orientation(target) => {
                        let a = solve_orientation(&self.scene.gripper, target, &carriage.rotation)
                            .map_err(|e| {
                                let (r, d) = kinematics_failure(e);
                                self.fail(r, d)
                            })?;
                        (a.roll, a.wrist_yaw, a.pitch)
                    }
                };
                let target = GripperConfig::from_pitch(
                    *carriage,
                    roll,
                    wrist_yaw,
                    pitch,
                    self.config.opening_angle(),
                );
                self.free_motion(target)
            }
            Phase::Reorient {
                roll,
                wrist_yaw,
                pitch,
            } => {
                let c = self.config;
                let target = GripperConfig::from_pitch(
                    c.carriage,
                    roll.unwrap_or(c.roll),
                    wrist_yaw.unwrap_or(c.wrist_yaw),
                    pitch.unwrap_or(c.pitch()),
                    c.opening_angle(),
                );
                self.free_motion(target)
            }
            Phase::SetOpening(mm) => {
                let angle = self.scene.gripper.opening_angle_for(*mm).ok_or_else(|| {
                    self.fail(
                        FailureReason::Limit,
                        format!(
                            "opening {mm} mm exceeds the {} mm maximum",
                            self.scene.gripper.max_opening()
                        ),
                    )
                })?;
                self.motion(self.config.with_opening_angle(angle), None, false)
            }
            Phase::CloseOn(id) => self.close_on(id),
            Phase::Pull { axis, distance } => {
                let axis = axis.normalize();
                let held = self.held.as_ref().expect("validated: pull while holding");
                let component = &self.scene.components[held.index];
                if let Some(slot) = component.slot.filter(|s| s.is_engaged()) {
                    if slot.axis.dot(&axis) < AXIS_ALIGNMENT {
                        return Err(self.fail(
                            FailureReason::Unreachable,
                            format!("`{}` can only move along its slot axis", component.id),
                        ));
                    }
                }
                let target = GripperConfig {
                    carriage: self.config.carriage.translated(&(axis * *distance)),
                    ..self.config
                };
                self.motion(target, None, true)
            }
            Phase::Release => self.release(),
        }
    }

    /// A move that must not drag a seated component sideways or change the
    /// jaws under a held component.
    fn free_motion(&mut self, target: GripperConfig) -> Result<(), Failure> {
        if let Some(held) = &self.held {
            let component = &self.scene.components[held.index];
            if component.is_engaged() {
                return Err(self.fail(
                    FailureReason::Unreachable,
                    format!("`{}` is still seated in its slot", component.id),
                ));
            }
            let slip = (target.jaw1 - self.config.jaw1).abs() + (target.jaw2 - self.config.jaw2).abs();
            if slip > 1e-12 {
                return Err(self.fail(
                    FailureReason::Unreachable,
                    format!("jaws cannot move while holding `{}`", component.id),
                ));
            }
        }
        self.motion(target, None, false)
    }

    fn close_on(&mut self, id: &str) -> Result<(), Failure> {
        let index = self.scene.component_index(id).expect("validated component id");
        let contact = plan_grasp(&self.scene, &self.config, id).map_err(|e| {
            self.fail(FailureReason::GraspFailed, format!("cannot grasp `{id}`: {e}"))
        })?;
        let release_opening = self.config.opening_angle();
        self.motion(
            self.config.with_opening_angle(contact.opening_angle),
            Some(index),
            false,
        )?;
        let wrist = chain(&self.scene.gripper, &self.config).wrist;
        self.held = Some(Held {
            index,
            grip: wrist.inverse().compose(&self.scene.components[index].pose),
            release_opening,
        });
        self.torques = [0.0, -self.squeeze, self.squeeze];
        Ok(())
    }

    fn release(&mut self) -> Result<(), Failure> {
        let held = self.held.take().expect("validated: release while holding");
        self.torques = [0.0; 3];
        let target = self.config.with_opening_angle(held.release_opening);
        self.motion(target, Some(held.index), false)?;
        let posture = chain(&self.scene.gripper, &self.config);
        let component = &self.scene.components[held.index];
        for link in posture.link_boxes(&self.scene.gripper) {
            for b in component.world_boxes() {
                if obb_intersects(&link.obb, &b.obb) {
                    return Err(self.fail(
                        FailureReason::Collision,
                        format!("{} still touches {} after release", link.label, b.label),
                    ));
                }
            }
        }
        Ok(())
    }

    fn moving_boxes(&self, posture: &GripperPosture) -> Vec<LabeledObb> {
        let mut boxes: Vec<LabeledObb> = posture.link_boxes(&self.scene.gripper).into();
        if let Some(h) = &self.held {
            boxes.extend(self.scene.components[h.index].world_boxes());
        }
        boxes
    }

    fn reach(&self, config: &GripperConfig) -> f64 {
        let posture = chain(&self.scene.gripper, config);
        let mut boxes: Vec<LabeledObb> = posture.link_boxes(&self.scene.gripper).into();
        if let Some(h) = &self.held {
            let pose = posture.wrist.compose(&h.grip);
            boxes.extend(self.scene.components[h.index].shape.placed(&pose));
        }
        let origin = config.carriage.translation;
        boxes
            .iter()
            .map(|b| b.obb.reach_from(&origin))
            .fold(0.0, f64::max)
    }

    /// Moves to `target` sample by sample, logging each one. `exclude` drops
    /// one component from the obstacles; `pull` extracts the held component
    /// as the carriage travels.
    fn motion(&mut self, target: GripperConfig, exclude: Option<usize>, pull: bool) -> Result<(), Failure> {
        let params = self.scene.gripper;
        target.check_limits(&params).map_err(|e| {
            let (r, d) = kinematics_failure(e);
            self.fail(r, d)
        })?;
        let from = self.config;
        let radius = self.reach(&from).max(self.reach(&target)) + params.wrist_length;
        let joint_turn = (target.roll - from.roll).abs()
            + (target.wrist_yaw - from.wrist_yaw).abs()
            + (target.jaw1 - from.jaw1).abs().max((target.jaw2 - from.jaw2).abs());
        let n = sample_count(
            (target.carriage.translation - from.carriage.translation).norm(),
            Pose::rotation_distance(&from.carriage, &target.carriage) + joint_turn,
            radius,
            self.step,
        )
        .max(1);

        let mut skip = vec![];
        skip.extend(self.held.as_ref().map(|h| h.index));
        skip.extend(exclude);
        let obstacles = self.scene.obstacles(&skip);
        let mut travelled = 0.0;

        for i in 1..=n {
            let config = lerp_config(&from, &target, i as f64 / n as f64);
            let posture = chain(&params, &config);
            if let Some(h) = &self.held {
                let index = h.index;
                let pose = posture.wrist.compose(&h.grip);
                if pull && self.scene.components[index].is_engaged() {
                    let d = (config.carriage.translation - from.carriage.translation).norm();
                    let id = self.scene.components[index].id.clone();
                    self.scene = extract_component(&self.scene, &id, d - travelled)
                        .expect("held component is engaged");
                    travelled = d;
                }
                self.scene.components[index].pose = pose;
            }
            self.config = config;
            let (record, hit) = self.record(&posture, &obstacles);
            let slack = record.slack;
            self.log.push(record);
            if let Some((moving, obstacle)) = hit {
                return Err(self.fail(
                    FailureReason::Collision,
                    format!("{moving} hits {}", label_body(&obstacle)),
                ));
            }
            if slack {
                return Err(self.fail(FailureReason::Slack, String::from("a cable went slack")));
            }
        }
        Ok(())
    }

    fn record(&self, posture: &GripperPosture, obstacles: &[LabeledObb]) -> (StepRecord, Option<(String, String)>) {
        let mut min_clearance = f64::INFINITY;
        let mut hit = None;
        for m in self.moving_boxes(posture) {
            for o in obstacles {
                let s = separation(&m.obb, &o.obb);
                if s <= 0.0 && hit.is_none() {
                    hit = Some((m.label.clone(), o.label.clone()));
                }
                min_clearance = min_clearance.min(s.max(0.0));
            }
        }
        let mut lengths = [0.0; 6];
        let mut tensions = [0.0; 6];
        let mut slack = false;
        for joint in JointId::ALL {
            let k = joint.index();
            let (a, b) = self
                .scene
                .route(joint)
                .lengths_unchecked(&self.scene.gripper, &self.config);
            lengths[2 * k] = a;
            lengths[2 * k + 1] = b;
            let t = tension_from_torque(self.scene.drive(joint), self.torques[k]);
            tensions[2 * k] = t.agonist;
            tensions[2 * k + 1] = t.antagonist;
            slack |= t.slack;
        }
        let record = StepRecord {
            step: self.log.len(),
            config: self.config,
            lengths,
            tensions,
            slack,
            held: self
                .held
                .as_ref()
                .map(|h| self.scene.components[h.index].id.clone()),
            min_clearance,
            collision: hit.is_some(),
        };
        (record, hit)
    }

    fn check_targets(&self) -> Option<Failure> {
        for t in &self.script.targets {
            let component = self.scene.component(t).expect("validated target");
            if component.is_engaged() {
                return Some(Failure {
                    reason: FailureReason::GraspFailed,
                    phase: None,
                    detail: format!("`{t}` is still seated"),
                });
            }
            if component
                .world_boxes()
                .any(|b| obb_intersects(&b.obb, &self.scene.workspace))
            {
                return Some(Failure {
                    reason: FailureReason::GraspFailed,
                    phase: None,
                    detail: format!("`{t}` is still inside the chassis"),
                });
            }
        }
        None
    }
}
