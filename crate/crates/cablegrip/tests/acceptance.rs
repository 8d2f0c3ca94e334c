//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cablegrip::{builtin_task, z230_scene};
use cablegrip_core::cable::{
    decoupling_grid, default_routes, estimate_joint_torque, joint_to_servo, servo_to_joint,
    tension_from_torque, DriveModule, JointId,
};
use cablegrip_core::geometry::{obb_intersects, Obb};
use cablegrip_core::kinematics::{
    chord, compose_orientation, forward_kinematics, solve_orientation, GripperConfig,
    GripperParams,
};
use cablegrip_core::pose::{rot_x, rot_z, Pose, Vec3};
use cablegrip_core::scene::Scene;
use cablegrip_core::tasks::execute;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, message: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message.into())
    }
}

struct Run {
    code: i32,
    stdout: String,
}

fn cablegrip(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cablegrip"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
    }
}

/// Collision steps recorded in a step log CSV.
fn csv_collisions(path: &Path) -> usize {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "collision").unwrap();
    lines
        .filter(|l| l.split(',').nth(col) == Some("1"))
        .count()
}

fn free_and_outside(scene: &Scene, id: &str) -> bool {
    let c = scene.component(id).unwrap();
    c.is_free() && c.world_boxes().all(|b| !obb_intersects(&b.obb, &scene.workspace))
}

fn decoupling() -> Outcome {
    let params = GripperParams::default();
    let mut routes = default_routes(&params, &DriveModule::default());
    let report = decoupling_grid(&params, &routes, 15);
    check(report.max_variation < 1e-6, format!("variation {:.3e}", report.max_variation))?;
    let jaw = &mut routes[JointId::Jaw1.index()];
    for side in [&mut jaw.agonist, &mut jaw.antagonist] {
        side.guide_cap = side.guide_cap.map(|c| c + Vec3::new(0.0, 1.0, 0.0));
    }
    jaw.decoupled = false;
    let shifted = decoupling_grid(&params, &routes, 15);
    check(shifted.max_residual > 1e-3, format!("shifted residual {:.3e}", shifted.max_residual))?;
    Ok(format!(
        "variation {:.1e} mm, shifted-cap residual {:.3} mm/rad",
        report.max_variation, shifted.max_residual
    ))
}

fn task1(dir: &Path) -> Outcome {
    let scene = z230_scene();
    let script = builtin_task("task1").unwrap();
    for step in ["1.0", "0.5"] {
        let csv = dir.join(format!("task1_{step}.csv"));
        let run = cablegrip(&["run", "--task", "task1", "--step", step, "--out", csv.to_str().unwrap()]);
        check(run.code == 0, format!("step {step}: exit {} ({})", run.code, run.stdout.trim()))?;
        check(csv_collisions(&csv) == 0, format!("step {step}: collision steps logged"))?;
        let result = execute(&scene, &script, step.parse().unwrap()).unwrap();
        for id in ["ram3", "ram1"] {
            check(
                free_and_outside(&result.final_scene, id),
                format!("step {step}: {id} not free outside the chassis"),
            )?;
        }
    }
    Ok("ram3 and ram1 extracted at steps 1.0 and 0.5, no collisions".into())
}

fn task2() -> Outcome {
    let narrow = cablegrip(&["run", "--task", "task2"]);
    check(narrow.code == 0, format!("width 25: exit {}", narrow.code))?;
    let wide = cablegrip(&["run", "--task", "task2", "--body-width", "45"]);
    check(wide.code == 1, format!("width 45: exit {}", wide.code))?;
    check(wide.stdout.contains("failure (collision"), format!("width 45: {}", wide.stdout.trim()))?;
    Ok("body 25 mm succeeds, 45 mm collides in the enclosure".into())
}

fn task3() -> Outcome {
    let a = cablegrip(&["run", "--task", "task3a"]);
    check(a.code == 0, format!("task3a: exit {}", a.code))?;
    let b = cablegrip(&["run", "--task", "task3b"]);
    check(b.code == 0, format!("task3b: exit {}", b.code))?;
    let result = execute(&z230_scene(), &builtin_task("task3b").unwrap(), 0.5).unwrap();
    let regrasps = result.log.regrasp_count();
    check(regrasps == 1, format!("task3b: {regrasps} regrasps"))?;
    let naive = cablegrip(&["run", "--task", "task3b_naive"]);
    check(naive.code == 1, format!("task3b_naive: exit {}", naive.code))?;
    check(naive.stdout.contains("failure (collision"), format!("task3b_naive: {}", naive.stdout.trim()))?;
    Ok("3a ok, 3b ok with one regrasp, naive pull collides".into())
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Pose {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n: f64 = q.iter().map(|v| v * v).sum();
        if n > 1e-3 && n <= 1.0 {
            return Pose::from_quaternion(Vec3::zeros(), q);
        }
    }
}

fn kinematics() -> Outcome {
    let params = GripperParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let margin = 0.05;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let carriage = random_rotation(&mut rng).rotation;
        let roll = rng.random_range(-PI + margin..PI - margin);
        let yaw = rng.random_range(-FRAC_PI_2 + margin..FRAC_PI_2 - margin);
        let pitch = rng.random_range(-FRAC_PI_2 + margin..FRAC_PI_2 - margin);
        let target = compose_orientation(&carriage, roll, yaw, pitch);
        let a = solve_orientation(&params, &target, &carriage).map_err(|e| e.to_string())?;
        let back = compose_orientation(&carriage, a.roll, a.wrist_yaw, a.pitch);
        worst = worst.max((back.matrix() - target.matrix()).abs().max());
    }
    check(worst < 1e-9, format!("round trip residual {worst:.3e}"))?;

    let n = 41;
    let lim = params.jaw_limits;
    let value = |i: usize| lim.min + (lim.max - lim.min) * i as f64 / (n - 1) as f64;
    let mut chord_err: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let config = GripperConfig { jaw1: value(i), jaw2: value(j), ..Default::default() };
            let opening = forward_kinematics(&params, &config).unwrap().tip_opening;
            chord_err = chord_err.max((opening - chord(params.jaw_length, config.jaw1 - config.jaw2)).abs());
        }
    }
    check(chord_err < 1e-9, format!("chord law error {chord_err:.3e}"))?;

    let carriage = Pose::new(rot_z(0.4) * rot_x(-0.9), Vec3::new(10.0, -20.0, 30.0));
    let mut equi_err: f64 = 0.0;
    for iy in 0..n {
        let yaw = -FRAC_PI_2 + PI * iy as f64 / (n - 1) as f64;
        for i in 0..n {
            for j in 0..=i {
                let config = GripperConfig { carriage, roll: 0.3, wrist_yaw: 0.0, jaw1: value(i), jaw2: value(j) };
                let zero = forward_kinematics(&params, &config).unwrap();
                let turned = forward_kinematics(&params, &GripperConfig { wrist_yaw: yaw, ..config }).unwrap();
                let spin = zero.base.compose(&Pose::from_rotation(rot_x(yaw))).compose(&zero.base.inverse());
                for k in 0..2 {
                    equi_err = equi_err.max((spin.transform_point(&zero.tips[k]) - turned.tips[k]).norm());
                }
            }
        }
    }
    check(equi_err < 1e-9, format!("yaw equivariance error {equi_err:.3e}"))?;
    Ok(format!("round trip {worst:.1e}, chord {chord_err:.1e}, equivariance {equi_err:.1e}"))
}

fn random_obb(rng: &mut ChaCha8Rng) -> Obb {
    let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let angle = rng.random_range(0.0..PI);
    let rotation = if axis.norm() > 1e-3 { Pose::about_axis(axis, angle) } else { Pose::identity() };
    let center = Vec3::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
    let half = Vec3::new(rng.random_range(0.2..3.0), rng.random_range(0.2..3.0), rng.random_range(0.2..3.0));
    Obb::new(Pose::new(rotation.rotation, center), half)
}

/// Brute-force overlap: a grid of points in either box found inside the
/// other.
fn sampled_overlap(a: &Obb, b: &Obb, n: usize) -> bool {
    for (x, y) in [(a, b), (b, a)] {
        let to_y = y.pose.inverse();
        let h = x.half_extents;
        let t = |s: usize| -1.0 + 2.0 * s as f64 / n as f64;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let p = x.pose.transform_point(&Vec3::new(h.x * t(i), h.y * t(j), h.z * t(k)));
                    let l = to_y.transform_point(&p);
                    if (0..3).all(|d| l[d].abs() <= y.half_extents[d] + 1e-12) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn collision_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let total = 10_000;
    let mut false_negatives = 0;
    let mut agree = 0;
    for _ in 0..total {
        let a = random_obb(&mut rng);
        let b = random_obb(&mut rng);
        let sat = obb_intersects(&a, &b);
        let sampled = sampled_overlap(&a, &b, 6);
        false_negatives += usize::from(sampled && !sat);
        agree += usize::from(sampled == sat);
    }
    check(false_negatives == 0, format!("{false_negatives} SAT false negatives"))?;
    Ok(format!("{total} pairs, 0 false negatives, agreement {agree}/{total}"))
}

fn transmission() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..2000 {
        let drive = DriveModule {
            capstan_radius: rng.random_range(1.0..30.0),
            joint_pulley_radius: rng.random_range(1.0..20.0),
            pretension: rng.random_range(0.0..100.0),
            torque_constant: rng.random_range(10.0..2000.0),
            servo_range: rng.random_range(0.5..2.0 * PI),
            ..DriveModule::default()
        };
        let r = drive.joint_pulley_radius;
        let torque = rng.random_range(-1.0..1.0) * drive.slack_torque();
        let t = tension_from_torque(&drive, torque);
        check(!t.slack, "taut torque reported slack")?;
        check((r * (t.agonist - t.antagonist) - torque).abs() < 1e-9, "torque not carried")?;
        check((t.agonist + t.antagonist - 2.0 * drive.pretension).abs() < 1e-9, "tension sum drifted")?;

        let (a, b, k) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-3.0..3.0));
        let est = |i| estimate_joint_torque(&drive, i);
        check((est(a + b) - est(a) - est(b)).abs() < 1e-9, "estimate not additive")?;
        check((est(k * a) - k * est(a)).abs() < 1e-9, "estimate not homogeneous")?;

        let servo = rng.random_range(-1.0..1.0) * drive.servo_limit();
        let joint = servo_to_joint(&drive, servo).map_err(|e| e.to_string())?;
        let back = joint_to_servo(&drive, joint).map_err(|e| e.to_string())?;
        check((back - servo).abs() < 1e-12, format!("servo round trip {:.3e}", (back - servo).abs()))?;
    }
    let drive = DriveModule::default();
    let limit = 2.0 * drive.joint_pulley_radius * drive.pretension;
    let at = tension_from_torque(&drive, limit);
    check(!at.slack && at.antagonist.abs() < 1e-9, "boundary torque not exactly taut")?;
    check(tension_from_torque(&drive, limit * (1.0 + 1e-12)).slack, "past boundary not slack")?;
    Ok(format!("slack boundary {limit} N·mm, 2000 seeded drives"))
}

fn determinism(dir: &Path) -> Outcome {
    for task in ["task1", "task2", "task3a", "task3b", "task3b_naive"] {
        let mut logs = Vec::new();
        for i in 0..2 {
            let csv = dir.join(format!("det_{task}_{i}.csv"));
            cablegrip(&["run", "--task", task, "--out", csv.to_str().unwrap()]);
            logs.push(fs::read(&csv).map_err(|e| format!("{task}: {e}"))?);
        }
        check(logs[0] == logs[1], format!("{task}: logs differ"))?;
    }
    Ok("5 tasks, identical CSV logs".into())
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let criteria: [Criterion; 8] = [
        ("1 decoupling", Duration::from_secs(5), Box::new(decoupling)),
        ("2 task1 RAM", Duration::from_secs(30), Box::new(|| task1(dir.path()))),
        ("3 task2 SSD", Duration::from_secs(30), Box::new(task2)),
        ("4 task3 HDD", Duration::from_secs(60), Box::new(task3)),
        ("5 kinematics", Duration::from_secs(5), Box::new(kinematics)),
        ("6 collision oracle", Duration::from_secs(30), Box::new(collision_oracle)),
        ("7 transmission", Duration::from_secs(1), Box::new(transmission)),
        ("8 determinism", Duration::from_secs(60), Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (name, budget, run) in &criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *budget => Err(format!("{detail}; over budget of {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({:.2}s): {detail}", took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({:.2}s): {why}", took.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
