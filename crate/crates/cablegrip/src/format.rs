//! TOML documents for scenes and task scripts.

use std::fs;
use std::path::Path;

use cablegrip_core::cable::{CableRoute, CableSide, DriveModule, JointId};
use cablegrip_core::geometry::{BodyShape, Obb};
use cablegrip_core::kinematics::{GripperConfig, GripperParams, JointLimits};
use cablegrip_core::pose::{Pose, Vec3};
use cablegrip_core::scene::{Component, ComponentKind, Scene, SceneError, Slot, StaticBody};
use cablegrip_core::tasks::{JointGoal, Phase, TaskScript, DEFAULT_SQUEEZE_TORQUE};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Quaternions must be unit length within this before they are normalized.
pub const QUATERNION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema: {0}")]
    Schema(#[from] toml::de::Error),
    #[error("{record}: {message}")]
    Record { record: String, message: String },
    #[error("invalid scene: {0}")]
    Scene(#[from] SceneError),
    #[error("cannot write document: {0}")]
    Serialize(#[from] toml::ser::Error),
}

impl FormatError {
    fn record(record: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Record {
            record: record.into(),
            message: message.into(),
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, FormatError::Io { .. })
    }
}

pub(crate) fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDoc {
    pub translation: [f64; 3],
    /// (w, x, y, z)
    pub quaternion: [f64; 4],
}

impl PoseDoc {
    fn to_pose(&self, record: &str) -> Result<Pose, FormatError> {
        let q = self.quaternion;
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= QUATERNION_TOLERANCE) {
            return Err(FormatError::record(
                record,
                format!("quaternion has length {norm}, expected 1"),
            ));
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return Err(FormatError::record(record, "translation must be finite"));
        }
        Ok(Pose::from_quaternion(vec3(self.translation), q))
    }

    fn from_pose(pose: &Pose) -> Self {
        let t = pose.translation;
        Self {
            translation: [t.x, t.y, t.z],
            quaternion: pose.quaternion(),
        }
    }
}

fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

fn arr3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsDoc {
    pub length: String,
    pub angle: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GripperDoc {
    pub wrist_length: f64,
    pub jaw_length: f64,
    pub jaw_thickness: f64,
    pub jaw_width: f64,
    pub body_width: f64,
    pub base_length: f64,
    pub wrist_yaw_limits: [f64; 2],
    pub jaw_limits: [f64; 2],
    pub roll_limits: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveDoc {
    pub joint: String,
    pub capstan_radius: f64,
    pub joint_pulley_radius: f64,
    pub pretension: f64,
    pub torque_constant: f64,
    pub servo_angle: f64,
    pub servo_range: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratchet_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableSideDoc {
    pub capstan_exit: [f64; 3],
    pub guide: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guide_cap: Option<[f64; 3]>,
    pub pulley_point: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteDoc {
    pub joint: String,
    pub pulley_radius: f64,
    pub reference_wrap: f64,
    pub reference_angle: f64,
    pub decoupled: bool,
    pub agonist: CableSideDoc,
    pub antagonist: CableSideDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDoc {
    pub pose: PoseDoc,
    pub half_extents: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomeDoc {
    pub carriage: PoseDoc,
    pub roll: f64,
    pub wrist_yaw: f64,
    pub jaw1: f64,
    pub jaw2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticDoc {
    pub id: String,
    pub pose: PoseDoc,
    pub half_extents: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotDoc {
    pub axis: [f64; 3],
    pub depth: f64,
    #[serde(default = "seated")]
    pub engaged_fraction: f64,
}

fn seated() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub id: String,
    pub kind: String,
    pub pose: PoseDoc,
    pub half_extents: [f64; 3],
    pub graspable_width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<SlotDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    pub units: UnitsDoc,
    pub gripper: GripperDoc,
    pub drives: Vec<DriveDoc>,
    pub routes: Vec<RouteDoc>,
    pub workspace: BoxDoc,
    pub home: HomeDoc,
    #[serde(default)]
    pub statics: Vec<StaticDoc>,
    #[serde(default)]
    pub components: Vec<ComponentDoc>,
}

fn joint_from_name(name: &str, record: &str) -> Result<JointId, FormatError> {
    JointId::ALL
        .into_iter()
        .find(|j| j.name() == name)
        .ok_or_else(|| {
            FormatError::record(record, format!("unknown joint `{name}` (wrist, jaw1, jaw2)"))
        })
}

fn limits(v: [f64; 2]) -> JointLimits {
    JointLimits::new(v[0], v[1])
}

fn shape(record: &str, label: &str, half: [f64; 3]) -> Result<BodyShape, FormatError> {
    BodyShape::single(label, vec3(half))
        .map_err(|e| FormatError::record(record, e.to_string()))
}

impl SceneDoc {
    pub fn into_scene(self) -> Result<Scene, FormatError> {
        if self.units.length != "mm" || self.units.angle != "rad" {
            return Err(FormatError::record(
                "units",
                format!(
                    "expected length = \"mm\" and angle = \"rad\", got `{}` and `{}`",
                    self.units.length, self.units.angle
                ),
            ));
        }
        let g = &self.gripper;
        let gripper = GripperParams {
            wrist_length: g.wrist_length,
            jaw_length: g.jaw_length,
            jaw_thickness: g.jaw_thickness,
            jaw_width: g.jaw_width,
            body_width: g.body_width,
            base_length: g.base_length,
            wrist_yaw_limits: limits(g.wrist_yaw_limits),
            jaw_limits: limits(g.jaw_limits),
            roll_limits: limits(g.roll_limits),
        };

        let mut drives: [Option<DriveModule>; 3] = [None; 3];
        for (i, d) in self.drives.iter().enumerate() {
            let record = format!("drives[{i}]");
            let joint = joint_from_name(&d.joint, &record)?;
            if drives[joint.index()].is_some() {
                return Err(FormatError::record(record, format!("second drive for `{}`", d.joint)));
            }
            drives[joint.index()] = Some(DriveModule {
                capstan_radius: d.capstan_radius,
                joint_pulley_radius: d.joint_pulley_radius,
                pretension: d.pretension,
                torque_constant: d.torque_constant,
                servo_angle: d.servo_angle,
                servo_range: d.servo_range,
                ratchet_step: d.ratchet_step,
            });
        }
        let drives = complete(drives, "drives")?;

        let mut routes: [Option<CableRoute>; 3] = [None; 3];
        for (i, r) in self.routes.iter().enumerate() {
            let record = format!("routes[{i}]");
            let joint = joint_from_name(&r.joint, &record)?;
            if routes[joint.index()].is_some() {
                return Err(FormatError::record(record, format!("second route for `{}`", r.joint)));
            }
            let side = |s: &CableSideDoc| CableSide {
                capstan_exit: vec3(s.capstan_exit),
                guide: vec3(s.guide),
                guide_cap: s.guide_cap.map(vec3),
                pulley_point: vec3(s.pulley_point),
            };
            routes[joint.index()] = Some(CableRoute {
                joint,
                agonist: side(&r.agonist),
                antagonist: side(&r.antagonist),
                pulley_radius: r.pulley_radius,
                reference_wrap: r.reference_wrap,
                reference_angle: r.reference_angle,
                decoupled: r.decoupled,
            });
        }
        let routes = complete(routes, "routes")?;

        let workspace = Obb::new(
            self.workspace.pose.to_pose("workspace")?,
            vec3(self.workspace.half_extents),
        );
        let home = GripperConfig {
            carriage: self.home.carriage.to_pose("home")?,
            roll: self.home.roll,
            wrist_yaw: self.home.wrist_yaw,
            jaw1: self.home.jaw1,
            jaw2: self.home.jaw2,
        };

        let mut statics = Vec::with_capacity(self.statics.len());
        for s in &self.statics {
            let record = format!("statics `{}`", s.id);
            statics.push(StaticBody {
                id: s.id.clone(),
                shape: shape(&record, &s.id, s.half_extents)?,
                pose: s.pose.to_pose(&record)?,
            });
        }
        let mut components = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let record = format!("components `{}`", c.id);
            let kind = ComponentKind::from_name(&c.kind).ok_or_else(|| {
                FormatError::record(&record, format!("unknown kind `{}` (ram, ssd, hdd)", c.kind))
            })?;
            components.push(Component {
                id: c.id.clone(),
                kind,
                shape: shape(&record, &c.id, c.half_extents)?,
                pose: c.pose.to_pose(&record)?,
                slot: c.slot.as_ref().map(|s| Slot {
                    axis: vec3(s.axis),
                    depth: s.depth,
                    engaged_fraction: s.engaged_fraction,
                }),
                graspable_width: c.graspable_width,
            });
        }

        let scene = Scene {
            statics,
            components,
            gripper,
            drives,
            routes,
            workspace,
            home,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn from_scene(scene: &Scene) -> Self {
        let g = &scene.gripper;
        let lim = |l: JointLimits| [l.min, l.max];
        let side = |s: &CableSide| CableSideDoc {
            capstan_exit: arr3(&s.capstan_exit),
            guide: arr3(&s.guide),
            guide_cap: s.guide_cap.as_ref().map(arr3),
            pulley_point: arr3(&s.pulley_point),
        };
        let single = |shape: &BodyShape| arr3(&shape.boxes()[0].obb.half_extents);
        SceneDoc {
            units: UnitsDoc {
                length: "mm".into(),
                angle: "rad".into(),
            },
            gripper: GripperDoc {
                wrist_length: g.wrist_length,
                jaw_length: g.jaw_length,
                jaw_thickness: g.jaw_thickness,
                jaw_width: g.jaw_width,
                body_width: g.body_width,
                base_length: g.base_length,
                wrist_yaw_limits: lim(g.wrist_yaw_limits),
                jaw_limits: lim(g.jaw_limits),
                roll_limits: lim(g.roll_limits),
            },
            drives: JointId::ALL
                .iter()
                .map(|j| {
                    let d = scene.drive(*j);
                    DriveDoc {
                        joint: j.name().into(),
                        capstan_radius: d.capstan_radius,
                        joint_pulley_radius: d.joint_pulley_radius,
                        pretension: d.pretension,
                        torque_constant: d.torque_constant,
                        servo_angle: d.servo_angle,
                        servo_range: d.servo_range,
                        ratchet_step: d.ratchet_step,
                    }
                })
                .collect(),
            routes: scene
                .routes
                .iter()
                .map(|r| RouteDoc {
                    joint: r.joint.name().into(),
                    pulley_radius: r.pulley_radius,
                    reference_wrap: r.reference_wrap,
                    reference_angle: r.reference_angle,
                    decoupled: r.decoupled,
                    agonist: side(&r.agonist),
                    antagonist: side(&r.antagonist),
                })
                .collect(),
            workspace: BoxDoc {
                pose: PoseDoc::from_pose(&scene.workspace.pose),
                half_extents: arr3(&scene.workspace.half_extents),
            },
            home: HomeDoc {
                carriage: PoseDoc::from_pose(&scene.home.carriage),
                roll: scene.home.roll,
                wrist_yaw: scene.home.wrist_yaw,
                jaw1: scene.home.jaw1,
                jaw2: scene.home.jaw2,
            },
            statics: scene
                .statics
                .iter()
                .map(|s| StaticDoc {
                    id: s.id.clone(),
                    pose: PoseDoc::from_pose(&s.pose),
                    half_extents: single(&s.shape),
                })
                .collect(),
            components: scene
                .components
                .iter()
                .map(|c| ComponentDoc {
                    id: c.id.clone(),
                    kind: c.kind.name().into(),
                    pose: PoseDoc::from_pose(&c.pose),
                    half_extents: single(&c.shape),
                    graspable_width: c.graspable_width,
                    slot: c.slot.map(|s| SlotDoc {
                        axis: arr3(&s.axis),
                        depth: s.depth,
                        engaged_fraction: s.engaged_fraction,
                    }),
                })
                .collect(),
        }
    }
}

fn complete<T: Copy>(items: [Option<T>; 3], record: &str) -> Result<[T; 3], FormatError> {
    match items {
        [Some(a), Some(b), Some(c)] => Ok([a, b, c]),
        _ => Err(FormatError::record(record, "need exactly one entry for each of wrist, jaw1, jaw2")),
    }
}

pub fn parse_scene(text: &str) -> Result<Scene, FormatError> {
    toml::from_str::<SceneDoc>(text)?.into_scene()
}

pub fn load_scene(path: &Path) -> Result<Scene, FormatError> {
    parse_scene(&read(path)?)
}

pub fn scene_to_string(scene: &Scene) -> Result<String, FormatError> {
    Ok(toml::to_string(&SceneDoc::from_scene(scene))?)
}

pub fn save_scene(scene: &Scene, path: &Path) -> Result<(), FormatError> {
    let text = scene_to_string(scene)?;
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseDoc {
    MoveTo {
        carriage: PoseDoc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        roll: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        wrist_yaw: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pitch: Option<f64>,
        /// World orientation of the jaws (w, x, y, z).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orientation: Option<[f64; 4]>,
    },
    SetOpening {
        opening: f64,
    },
    CloseOn {
        component: String,
    },
    Pull {
        axis: [f64; 3],
        distance: f64,
    },
    Release,
    Reorient {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        roll: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        wrist_yaw: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pitch: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDoc {
    pub id: String,
    #[serde(default)]
    pub targets: Vec<String>,
    #[serde(default = "default_squeeze")]
    pub squeeze_torque: f64,
    #[serde(default)]
    pub phases: Vec<PhaseDoc>,
}

fn default_squeeze() -> f64 {
    DEFAULT_SQUEEZE_TORQUE
}

impl TaskDoc {
    pub fn into_script(self) -> Result<TaskScript, FormatError> {
        let mut phases = Vec::with_capacity(self.phases.len());
        for (i, p) in self.phases.into_iter().enumerate() {
            let record = format!("phases[{i}]");
            phases.push(match p {
                PhaseDoc::MoveTo {
                    carriage,
                    roll,
                    wrist_yaw,
                    pitch,
                    orientation,
                } => {
                    let carriage = carriage.to_pose(&record)?;
                    let joints = match (roll, wrist_yaw, pitch, orientation) {
                        (None, None, None, None) => JointGoal::Keep,
                        (Some(roll), Some(wrist_yaw), Some(pitch), None) => JointGoal::Angles {
                            roll,
                            wrist_yaw,
                            pitch,
                        },
                        (None, None, None, Some(q)) => {
                            let goal = PoseDoc {
                                translation: [0.0; 3],
                                quaternion: q,
                            }
                            .to_pose(&record)?;
                            JointGoal::Orientation(goal.rotation)
                        }
                        _ => {
                            return Err(FormatError::record(
                                record,
                                "give all of roll, wrist_yaw, pitch, or an orientation, or neither",
                            ))
                        }
                    };
                    Phase::MoveTo { carriage, joints }
                }
                PhaseDoc::SetOpening { opening } => Phase::SetOpening(opening),
                PhaseDoc::CloseOn { component } => Phase::CloseOn(component),
                PhaseDoc::Pull { axis, distance } => Phase::Pull {
                    axis: vec3(axis),
                    distance,
                },
                PhaseDoc::Release => Phase::Release,
                PhaseDoc::Reorient {
                    roll,
                    wrist_yaw,
                    pitch,
                } => Phase::Reorient {
                    roll,
                    wrist_yaw,
                    pitch,
                },
            });
        }
        Ok(TaskScript {
            id: self.id,
            targets: self.targets,
            phases,
            squeeze_torque: self.squeeze_torque,
        })
    }
}

pub fn parse_task(text: &str) -> Result<TaskScript, FormatError> {
    toml::from_str::<TaskDoc>(text)?.into_script()
}

pub fn load_task(path: &Path) -> Result<TaskScript, FormatError> {
    parse_task(&read(path)?)
}
