use cablegrip_core::cable::{decoupling_grid, decoupling_residual, default_routes, DriveModule, JointId};
use cablegrip_core::kinematics::{GripperConfig, GripperParams};
use cablegrip_core::pose::Vec3;
use proptest::prelude::*;

#[test]
fn jaw_cables_ignore_wrist_yaw_over_full_grid() {
    let params = GripperParams::default();
    let routes = default_routes(&params, &DriveModule::default());
    let report = decoupling_grid(&params, &routes, 15);
    assert_eq!(report.samples.len(), 15 * (15 * 16 / 2));
    assert!(report.max_variation < 1e-6, "variation {}", report.max_variation);
    assert!(report.max_residual < 1e-6, "residual {}", report.max_residual);
}

#[test]
fn off_axis_cap_couples_the_jaw() {
    let params = GripperParams::default();
    let mut routes = default_routes(&params, &DriveModule::default());
    let jaw = &mut routes[JointId::Jaw1.index()];
    for side in [&mut jaw.agonist, &mut jaw.antagonist] {
        side.guide_cap = side.guide_cap.map(|c| c + Vec3::new(0.0, 1.0, 0.0));
    }
    jaw.decoupled = false;
    let report = decoupling_grid(&params, &routes, 15);
    assert!(report.max_residual > 1e-3, "residual {}", report.max_residual);
}

#[test]
fn wrist_cable_follows_its_own_joint() {
    let params = GripperParams::default();
    let routes = default_routes(&params, &DriveModule::default());
    let wrist = &routes[JointId::Wrist.index()];
    let config = GripperConfig::default();
    // the wrist route is not decoupled from itself: r mm per rad
    let r = decoupling_residual(wrist, &params, &config, 1e-4);
    assert!((r - wrist.pulley_radius).abs() < 1e-6);
}

#[test]
fn minimal_grid_runs() {
    let params = GripperParams::default();
    let routes = default_routes(&params, &DriveModule::default());
    let report = decoupling_grid(&params, &routes, 2);
    assert_eq!(report.samples.len(), 2 * 3);
}

proptest! {
    #[test]
    fn default_jaw_routes_decouple_everywhere(yaw in -1.5..1.5f64, jaw1 in -1.5..1.5f64, frac in 0.0..1.0f64) {
        let params = GripperParams::default();
        let routes = default_routes(&params, &DriveModule::default());
        let jaw2 = jaw1 - frac * (jaw1 + 1.5);
        let config = GripperConfig { wrist_yaw: yaw, jaw1, jaw2, ..Default::default() };
        for joint in [JointId::Jaw1, JointId::Jaw2] {
            prop_assert!(decoupling_residual(&routes[joint.index()], &params, &config, 1e-4) < 1e-6);
        }
    }

    #[test]
    fn cap_offset_along_z_couples(offset in 0.5..5.0f64, yaw in 0.2..1.2f64) {
        // sin-shaped length change; away from yaw 0 the slope is non-zero
        let params = GripperParams::default();
        let mut routes = default_routes(&params, &DriveModule::default());
        let route = &mut routes[JointId::Jaw2.index()];
        route.agonist.guide_cap = route.agonist.guide_cap.map(|c| c + Vec3::new(0.0, 0.0, offset));
        route.decoupled = false;
        let config = GripperConfig { wrist_yaw: yaw, ..Default::default() };
        prop_assert!(decoupling_residual(route, &params, &config, 1e-4) > 1e-3);
    }
}
