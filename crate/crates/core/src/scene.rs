//! The desktop world: static chassis bodies, slotted components that can be
//! pulled out along their slot axis, and the gripper hardware description.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cable::{CableError, CableRoute, DriveModule, JointId};
use crate::geometry::{obb_clearance, separation, BodyShape, LabeledObb, Obb, ShapeError};
use crate::kinematics::{GripperConfig, GripperParams, KinematicsError};
use crate::pose::{Pose, Vec3};

/// Slot axes must be unit length within this tolerance.
pub const AXIS_NORM_TOLERANCE: f64 = 1e-9;
/// Statics may touch; they may not overlap by more than this (mm).
pub const STATIC_OVERLAP_TOLERANCE: f64 = 1e-6;
/// Engagement at or below this is treated as fully extracted.
const FREE_FRACTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    Ram,
    Ssd,
    Hdd,
}

impl ComponentKind {
    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Ram => "ram",
            ComponentKind::Ssd => "ssd",
            ComponentKind::Hdd => "hdd",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ram" => Some(ComponentKind::Ram),
            "ssd" => Some(ComponentKind::Ssd),
            "hdd" => Some(ComponentKind::Hdd),
            _ => None,
        }
    }
}

/// Prismatic slot holding a component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    /// Extraction direction (unit, world frame).
    pub axis: Vec3,
    /// Travel needed to free the component (mm).
    pub depth: f64,
    /// 1 when fully seated, 0 when free.
    pub engaged_fraction: f64,
}

impl Slot {
    pub fn is_engaged(&self) -> bool {
        self.engaged_fraction > FREE_FRACTION
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub kind: ComponentKind,
    pub shape: BodyShape,
    pub pose: Pose,
    pub slot: Option<Slot>,
    /// Extent across the intended grasp direction (mm).
    pub graspable_width: f64,
}

impl Component {
    pub fn is_engaged(&self) -> bool {
        self.slot.is_some_and(|s| s.is_engaged())
    }

    pub fn is_free(&self) -> bool {
        !self.is_engaged()
    }

    pub fn engaged_fraction(&self) -> f64 {
        self.slot.map_or(0.0, |s| s.engaged_fraction)
    }

    /// The box that is grasped and the index of its local axis whose full
    /// extent equals `graspable_width`.
    pub fn grasp_face(&self) -> Option<(Obb, usize)> {
        let first = self.shape.boxes().first()?;
        let obb = first.obb.transformed(&self.pose);
        (0..3)
            .find(|&i| (2.0 * obb.half_extents[i] - self.graspable_width).abs() < 1e-6)
            .map(|i| (obb, i))
    }

    pub fn world_boxes(&self) -> impl Iterator<Item = LabeledObb> + '_ {
        let id = &self.id;
        self.shape
            .placed(&self.pose)
            .map(move |b| LabeledObb::new(body_label(id, &b.label), b.obb))
    }
}

/// Immovable chassis part.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticBody {
    pub id: String,
    pub shape: BodyShape,
    pub pose: Pose,
}

impl StaticBody {
    pub fn world_boxes(&self) -> impl Iterator<Item = LabeledObb> + '_ {
        let id = &self.id;
        self.shape
            .placed(&self.pose)
            .map(move |b| LabeledObb::new(body_label(id, &b.label), b.obb))
    }
}

fn body_label(id: &str, part: &str) -> String {
    if part.is_empty() || part == id {
        String::from(id)
    } else {
        format!("{id}/{part}")
    }
}

/// Body id of an obstacle label produced by [`Scene::obstacles`].
pub fn label_body(label: &str) -> &str {
    label.split('/').next().unwrap_or(label)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneError {
    Gripper(KinematicsError),
    Home(KinematicsError),
    Drive { joint: JointId, error: CableError },
    Route { joint: JointId, error: CableError },
    RouteOrder { index: usize },
    RouteRadius { joint: JointId },
    Shape { id: String, error: ShapeError },
    DuplicateId(String),
    StaticOverlap { first: String, second: String, depth: f64 },
    SlotAxis { id: String, norm: f64 },
    SlotDepth { id: String },
    EngagedFraction { id: String, value: f64 },
    GraspWidth { id: String, width: f64 },
    Workspace,
    UnknownComponent(String),
    NotEngaged(String),
    NegativeDistance(f64),
}

impl fmt::Display for SceneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneError::Gripper(e) => write!(f, "gripper: {e}"),
            SceneError::Home(e) => write!(f, "home configuration: {e}"),
            SceneError::Drive { joint, error } => write!(f, "drive `{joint}`: {error}"),
            SceneError::Route { joint, error } => write!(f, "route `{joint}`: {error}"),
            SceneError::RouteOrder { index } => {
                write!(f, "route {index} is out of order (expected wrist, jaw1, jaw2)")
            }
            SceneError::RouteRadius { joint } => write!(
                f,
                "route `{joint}`: pulley radius differs from its drive module"
            ),
            SceneError::Shape { id, error } => write!(f, "body `{id}`: {error}"),
            SceneError::DuplicateId(id) => write!(f, "duplicate id `{id}`"),
            SceneError::StaticOverlap {
                first,
                second,
                depth,
            } => write!(f, "static `{first}` overlaps `{second}` by {depth} mm"),
            SceneError::SlotAxis { id, norm } => {
                write!(f, "component `{id}`: slot axis has length {norm}, expected 1")
            }
            SceneError::SlotDepth { id } => write!(f, "component `{id}`: slot depth must be > 0"),
            SceneError::EngagedFraction { id, value } => {
                write!(f, "component `{id}`: engaged fraction {value} outside [0, 1]")
            }
            SceneError::GraspWidth { id, width } => write!(
                f,
                "component `{id}`: graspable width {width} mm matches no extent of its first box"
            ),
            SceneError::Workspace => f.write_str("workspace box is degenerate"),
            SceneError::UnknownComponent(id) => write!(f, "unknown component `{id}`"),
            SceneError::NotEngaged(id) => write!(f, "component `{id}` is not engaged in a slot"),
            SceneError::NegativeDistance(d) => write!(f, "extraction distance {d} mm is negative"),
        }
    }
}

impl core::error::Error for SceneError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub statics: Vec<StaticBody>,
    pub components: Vec<Component>,
    pub gripper: GripperParams,
    /// Indexed by [`JointId::index`].
    pub drives: [DriveModule; 3],
    /// Indexed by [`JointId::index`].
    pub routes: [CableRoute; 3],
    /// Interior of the chassis. Extracted components must end outside it.
    pub workspace: Obb,
    /// Gripper configuration every task starts from.
    pub home: GripperConfig,
}

impl Scene {
    /// Checks every scene invariant and reports the first violation.
    pub fn validate(&self) -> Result<(), SceneError> {
        self.gripper.validate().map_err(SceneError::Gripper)?;
        for joint in JointId::ALL {
            self.drive(joint)
                .validate()
                .map_err(|error| SceneError::Drive { joint, error })?;
        }
        for (index, route) in self.routes.iter().enumerate() {
            if route.joint.index() != index {
                return Err(SceneError::RouteOrder { index });
            }
            route
                .validate(&self.gripper)
                .map_err(|error| SceneError::Route {
                    joint: route.joint,
                    error,
                })?;
            if (route.pulley_radius - self.drive(route.joint).joint_pulley_radius).abs() > 1e-12 {
                return Err(SceneError::RouteRadius { joint: route.joint });
            }
        }
        if !self.workspace.is_valid() {
            return Err(SceneError::Workspace);
        }
        self.home
            .check_limits(&self.gripper)
            .map_err(SceneError::Home)?;

        let mut ids = BTreeSet::new();
        let all_ids = self
            .statics
            .iter()
            .map(|s| &s.id)
            .chain(self.components.iter().map(|c| &c.id));
        for id in all_ids {
            if !ids.insert(id.as_str()) {
                return Err(SceneError::DuplicateId(id.clone()));
            }
        }

        for c in &self.components {
            if let Some(slot) = c.slot {
                let norm = slot.axis.norm();
                if !((norm - 1.0).abs() <= AXIS_NORM_TOLERANCE) {
                    return Err(SceneError::SlotAxis {
                        id: c.id.clone(),
                        norm,
                    });
                }
                if !(slot.depth.is_finite() && slot.depth > 0.0) {
                    return Err(SceneError::SlotDepth { id: c.id.clone() });
                }
                if !(0.0..=1.0).contains(&slot.engaged_fraction) {
                    return Err(SceneError::EngagedFraction {
                        id: c.id.clone(),
                        value: slot.engaged_fraction,
                    });
                }
            }
            if !(c.graspable_width > 0.0) || c.grasp_face().is_none() {
                return Err(SceneError::GraspWidth {
                    id: c.id.clone(),
                    width: c.graspable_width,
                });
            }
        }

        let boxes: Vec<(usize, LabeledObb)> = self
            .statics
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.world_boxes().map(move |b| (i, b)))
            .collect();
        for (k, (i, a)) in boxes.iter().enumerate() {
            for (j, b) in &boxes[k + 1..] {
                if i == j {
                    continue;
                }
                let sep = separation(&a.obb, &b.obb);
                if sep < -STATIC_OVERLAP_TOLERANCE {
                    return Err(SceneError::StaticOverlap {
                        first: a.label.clone(),
                        second: b.label.clone(),
                        depth: -sep,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn drive(&self, joint: JointId) -> &DriveModule {
        &self.drives[joint.index()]
    }

    pub fn route(&self, joint: JointId) -> &CableRoute {
        &self.routes[joint.index()]
    }

    pub fn component_index(&self, id: &str) -> Option<usize> {
        self.components.iter().position(|c| c.id == id)
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    /// World boxes of all statics and of every component not listed in
    /// `skip` (component indices).
    pub fn obstacles(&self, skip: &[usize]) -> Vec<LabeledObb> {
        let statics = self.statics.iter().flat_map(|s| s.world_boxes());
        let components = self
            .components
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .flat_map(|(_, c)| c.world_boxes());
        statics.chain(components).collect()
    }
}

/// Pulls a slotted component `distance` mm along its slot axis, lowering its
/// engagement linearly (`fraction -= distance / depth`). At zero engagement
/// the component is free. Pure state update; collisions are the caller's
/// concern.
pub fn extract_component(scene: &Scene, id: &str, distance: f64) -> Result<Scene, SceneError> {
    if !(distance >= 0.0) {
        return Err(SceneError::NegativeDistance(distance));
    }
    let index = scene
        .component_index(id)
        .ok_or_else(|| SceneError::UnknownComponent(String::from(id)))?;
    let mut next = scene.clone();
    let component = &mut next.components[index];
    let slot = match component.slot.as_mut() {
        Some(slot) if slot.is_engaged() => slot,
        _ => return Err(SceneError::NotEngaged(String::from(id))),
    };
    let fraction = slot.engaged_fraction - distance / slot.depth;
    slot.engaged_fraction = if fraction <= FREE_FRACTION { 0.0 } else { fraction };
    component.pose = component.pose.translated(&(slot.axis * distance));
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearanceReport {
    /// Smallest clearance between the probe and any body (mm).
    pub clearance: f64,
    /// Ids of bodies whose clearance is at most the threshold.
    pub blocking: Vec<String>,
}

/// Minimum clearance between `probe` and every static and component, and
/// the bodies within `threshold` of it.
pub fn clearance_query(scene: &Scene, probe: &Obb, threshold: f64) -> ClearanceReport {
    let mut clearance = f64::INFINITY;
    let mut blocking: Vec<String> = Vec::new();
    for body in scene.obstacles(&[]) {
        let c = obb_clearance(probe, &body.obb);
        clearance = clearance.min(c);
        if c <= threshold {
            let id = label_body(&body.label);
            if !blocking.iter().any(|b| b == id) {
                blocking.push(String::from(id));
            }
        }
    }
    ClearanceReport {
        clearance,
        blocking,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cable::default_routes;
    use alloc::vec;

    fn chassis() -> StaticBody {
        StaticBody {
            id: "floor".into(),
            shape: BodyShape::single("floor", Vec3::new(100.0, 100.0, 1.0)).unwrap(),
            pose: Pose::from_translation(0.0, 0.0, -1.0),
        }
    }

    fn minimal() -> Scene {
        let gripper = GripperParams::default();
        let drive = DriveModule::default();
        Scene {
            statics: vec![chassis()],
            components: Vec::new(),
            gripper,
            drives: [drive; 3],
            routes: default_routes(&gripper, &drive),
            workspace: Obb::from_bounds(Vec3::new(-100.0, -100.0, 0.0), Vec3::new(100.0, 100.0, 100.0)),
            home: GripperConfig {
                carriage: Pose::from_translation(0.0, 0.0, 300.0),
                ..Default::default()
            },
        }
    }

    fn hdd(axis: Vec3) -> Component {
        Component {
            id: "hdd".into(),
            kind: ComponentKind::Hdd,
            shape: BodyShape::single("hdd", Vec3::new(73.0, 50.8, 13.05)).unwrap(),
            pose: Pose::from_translation(0.0, 0.0, 20.0),
            slot: Some(Slot {
                axis,
                depth: 146.0,
                engaged_fraction: 1.0,
            }),
            graspable_width: 26.1,
        }
    }

    #[test]
    fn minimal_scene_is_valid() {
        minimal().validate().unwrap();
    }

    #[test]
    fn unnormalized_slot_axis_is_rejected() {
        let mut s = minimal();
        s.components.push(hdd(Vec3::new(1.0, 1.0, 0.0)));
        match s.validate() {
            Err(SceneError::SlotAxis { id, .. }) => assert_eq!(id, "hdd"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_and_overlapping_statics() {
        let mut s = minimal();
        let mut c = hdd(Vec3::x());
        c.id = "floor".into();
        s.components.push(c);
        assert_eq!(s.validate(), Err(SceneError::DuplicateId("floor".into())));

        let mut s = minimal();
        let mut other = chassis();
        other.id = "block".into();
        other.pose = Pose::from_translation(10.0, 0.0, -1.5);
        s.statics.push(other);
        assert!(matches!(s.validate(), Err(SceneError::StaticOverlap { .. })));
    }

    #[test]
    fn touching_statics_are_allowed() {
        let mut s = minimal();
        let mut other = chassis();
        other.id = "under".into();
        other.pose = Pose::from_translation(0.0, 0.0, -3.0);
        s.statics.push(other);
        s.validate().unwrap();
    }

    #[test]
    fn grasp_width_must_match_an_extent() {
        let mut s = minimal();
        let mut c = hdd(Vec3::x());
        c.graspable_width = 30.0;
        s.components.push(c);
        assert!(matches!(s.validate(), Err(SceneError::GraspWidth { .. })));
    }

    #[test]
    fn extraction_updates_fraction_and_pose() {
        let mut s = minimal();
        s.components.push(hdd(Vec3::x()));
        let same = extract_component(&s, "hdd", 0.0).unwrap();
        assert_eq!(same, s);
        let half = extract_component(&s, "hdd", 73.0).unwrap();
        let c = half.component("hdd").unwrap();
        assert!((c.engaged_fraction() - 0.5).abs() < 1e-12);
        assert!((c.pose.translation.x - 73.0).abs() < 1e-12);
        let out = extract_component(&half, "hdd", 80.0).unwrap();
        assert!(out.component("hdd").unwrap().is_free());
        assert_eq!(
            extract_component(&out, "hdd", 1.0),
            Err(SceneError::NotEngaged("hdd".into()))
        );
        assert!(matches!(
            extract_component(&s, "nope", 1.0),
            Err(SceneError::UnknownComponent(_))
        ));
        assert!(matches!(
            extract_component(&s, "hdd", -1.0),
            Err(SceneError::NegativeDistance(_))
        ));
    }

    #[test]
    fn far_probe_has_large_clearance() {
        let s = minimal();
        let probe = Obb::new(Pose::from_translation(0.0, 0.0, 500.0), Vec3::new(5.0, 5.0, 5.0));
        let r = clearance_query(&s, &probe, 0.0);
        assert!(r.clearance > 100.0);
        assert!(r.blocking.is_empty());
    }
}
