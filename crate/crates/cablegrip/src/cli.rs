//! `cablegrip` subcommands. Exit codes: 0 success, 1 task or decoupling
//! failure, 2 validation failure, 3 I/O or usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cablegrip_core::cable::{decoupling_grid, JointId};
use cablegrip_core::kinematics::{forward_kinematics, GripperConfig};
use cablegrip_core::pose::Pose;
use cablegrip_core::scene::Scene;
use cablegrip_core::tasks::{execute, TaskScript};
use clap::{Args, Parser, Subcommand};

use crate::builtin::{builtin_task, z230_scene};
use crate::format::{load_scene, load_task, FormatError};
use crate::log::{write_decoupling, write_step_log};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Jaw residuals at or above this fail `check-decoupling` (mm/rad).
pub const DECOUPLING_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "cablegrip", version, about = "Cable-driven disassembly gripper simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate a scene file.
    Validate {
        #[arg(long)]
        scene: PathBuf,
    },
    /// Execute a task and write its step log.
    Run(RunArgs),
    /// Sweep the joint grid and report jaw-cable sensitivity to wrist yaw.
    CheckDecoupling {
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Points per joint axis.
        #[arg(long, default_value_t = 15)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the posture and cable lengths of one configuration.
    Fk(FkArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scene file; the bundled Z230 scene when omitted.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Bundled task id (task1, task2, task3a, task3b, task3b_naive).
    #[arg(long, conflicts_with = "script", required_unless_present = "script")]
    task: Option<String>,
    /// Task script file.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Sweep step (mm).
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    /// CSV step log destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the gripper body width (mm).
    #[arg(long)]
    body_width: Option<f64>,
}

#[derive(Debug, Args)]
struct FkArgs {
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Angles are radians, or degrees with a `deg` suffix.
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    roll: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    wrist_yaw: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    jaw1: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    jaw2: f64,
}

/// Radians, or degrees when suffixed with `deg`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let (number, scale) = match text.strip_suffix("deg") {
        Some(n) => (n.trim(), std::f64::consts::PI / 180.0),
        None => (text, 1.0),
    };
    let v: f64 = number
        .parse()
        .map_err(|_| format!("`{text}` is not an angle (radians, or degrees with `deg`)"))?;
    if !v.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(v * scale)
}

struct Failed(i32, String);

fn scene_error(e: FormatError) -> Failed {
    let code = if e.is_io() { EXIT_USAGE } else { EXIT_INVALID };
    Failed(code, e.to_string())
}

fn scene_or_bundled(path: Option<&Path>) -> Result<Scene, Failed> {
    match path {
        Some(p) => load_scene(p).map_err(scene_error),
        None => Ok(z230_scene()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failed> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failed(EXIT_USAGE, format!("cannot write `{}`: {e}", path.display())))
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Validate { scene } => cmd_validate(&scene, stdout),
        Command::Run(args) => cmd_run(&args, stdout),
        Command::CheckDecoupling { scene, grid, out } => {
            cmd_check_decoupling(scene.as_deref(), grid, out.as_deref(), stdout)
        }
        Command::Fk(args) => cmd_fk(&args, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(Failed(code, message)) => {
            let _ = writeln!(stderr, "error: {message}");
            code
        }
    }
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> Result<i32, Failed> {
    let scene = load_scene(path).map_err(scene_error)?;
    let _ = writeln!(
        out,
        "{}: valid ({} statics, {} components)",
        path.display(),
        scene.statics.len(),
        scene.components.len()
    );
    Ok(EXIT_OK)
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32, Failed> {
    if !(args.step.is_finite() && args.step > 0.0) {
        return Err(Failed(EXIT_USAGE, format!("--step must be > 0, got {}", args.step)));
    }
    let mut scene = scene_or_bundled(args.scene.as_deref())?;
    if let Some(width) = args.body_width {
        scene.gripper.body_width = width;
        scene
            .validate()
            .map_err(|e| Failed(EXIT_INVALID, format!("invalid scene: {e}")))?;
    }
    let script: TaskScript = match (&args.task, &args.script) {
        (Some(id), _) => builtin_task(id)
            .ok_or_else(|| Failed(EXIT_USAGE, format!("no bundled task `{id}`")))?,
        (None, Some(path)) => load_task(path).map_err(scene_error)?,
        (None, None) => unreachable!("clap requires --task or --script"),
    };
    let result = execute(&scene, &script, args.step)
        .map_err(|e| Failed(EXIT_INVALID, format!("task `{}`: {e}", script.id)))?;

    if let Some(path) = &args.out {
        let mut file = create(path)?;
        write_step_log(&result.log, &mut file)
            .and_then(|()| file.flush().map_err(Into::into))
            .map_err(|e| Failed(EXIT_USAGE, format!("cannot write `{}`: {e}", path.display())))?;
    }

    let _ = match &result.failure {
        None => writeln!(out, "task {}: success", result.task),
        Some(f) => writeln!(out, "task {}: failure ({f})", result.task),
    };
    let _ = writeln!(
        out,
        "steps: {}, collision steps: {}",
        result.log.len(),
        result.log.collision_steps()
    );
    for (id, pose) in &result.final_poses {
        let c = result.final_scene.component(id).expect("target exists");
        let t = pose.translation;
        let _ = writeln!(
            out,
            "{id}: engaged {:.3}, at [{:.3}, {:.3}, {:.3}]",
            c.engaged_fraction(),
            t.x,
            t.y,
            t.z
        );
    }
    Ok(if result.success { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_check_decoupling(
    scene: Option<&Path>,
    grid: usize,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failed> {
    if grid < 2 {
        return Err(Failed(EXIT_USAGE, format!("--grid must be >= 2, got {grid}")));
    }
    let scene = scene_or_bundled(scene)?;
    let report = decoupling_grid(&scene.gripper, &scene.routes, grid);
    let written = match out_path {
        Some(path) => {
            let mut file = create(path)?;
            write_decoupling(&report, &mut file).and_then(|()| file.flush().map_err(Into::into))
        }
        None => write_decoupling(&report, &mut *out),
    };
    written.map_err(|e| Failed(EXIT_USAGE, format!("cannot write table: {e}")))?;
    let pass = report.max_residual < DECOUPLING_THRESHOLD;
    let _ = writeln!(
        out,
        "max jaw residual {:.3e} mm/rad, max length variation {:.3e} mm over {} samples: {}",
        report.max_residual,
        report.max_variation,
        report.samples.len(),
        if pass { "decoupled" } else { "coupled" }
    );
    Ok(if pass { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_fk(args: &FkArgs, out: &mut dyn Write) -> Result<i32, Failed> {
    let scene = scene_or_bundled(args.scene.as_deref())?;
    let config = GripperConfig {
        carriage: Pose::identity(),
        roll: args.roll,
        wrist_yaw: args.wrist_yaw,
        jaw1: args.jaw1,
        jaw2: args.jaw2,
    };
    let posture = forward_kinematics(&scene.gripper, &config)
        .map_err(|e| Failed(EXIT_INVALID, e.to_string()))?;
    for (i, tip) in posture.tips.iter().enumerate() {
        let _ = writeln!(out, "tip{}: [{:.6}, {:.6}, {:.6}]", i + 1, tip.x, tip.y, tip.z);
    }
    let _ = writeln!(out, "opening: {:.6}", posture.tip_opening);
    for joint in JointId::ALL {
        let (a, b) = scene.route(joint).lengths_unchecked(&scene.gripper, &config);
        let _ = writeln!(out, "cable {}: {:.6} {:.6}", joint.name(), a, b);
    }
    Ok(EXIT_OK)
}
