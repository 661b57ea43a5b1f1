//! Closed-form test clips: a fixed posture carried along an analytic root path.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Vector3};
use physimetrics_core::bodymodel::regress_markers;
use physimetrics_core::kinematics::{forward_kinematics, matrix_to_rot6d, PoseSequence, Rotation6D};
use physimetrics_core::metrics::lowest_clearance;
use physimetrics_core::representation::rep_from_motion;
use physimetrics_core::Trajectory;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Context;
use crate::error::{CliError, CliResult};
use crate::format::{MotionFile, PayloadKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SynthKind {
    /// Rest pose standing still.
    Static,
    /// Rest pose gliding along +x at a constant speed.
    WalkLine,
    /// Two people with arms reaching forward, closing to `gap` at the last frame.
    TwoPersonApproach,
}

#[derive(Debug, Clone, PartialEq, clap::Args)]
pub struct SynthParams {
    /// Number of frames.
    #[arg(long, default_value_t = 30)]
    pub frames: usize,
    /// Frame rate stored in the clip.
    #[arg(long, default_value_t = 20.0)]
    pub fps: f64,
    /// Root speed for walk-line, m/frame.
    #[arg(long, default_value_t = 0.012)]
    pub speed: f64,
    /// Closest root-to-root distance for two-person-approach, m.
    #[arg(long, default_value_t = 0.5)]
    pub gap: f64,
    /// Extra distance covered while approaching, m.
    #[arg(long, default_value_t = 1.5)]
    pub approach: f64,
    /// Vertical shift from the resting height, mm (negative sinks into the ground).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub height_offset_mm: f64,
    /// Payload written to the file.
    #[arg(long, value_enum, default_value_t = PayloadKind::Positions)]
    pub payload: PayloadKind,
    /// Seed for positional jitter.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Uniform per-coordinate jitter amplitude, mm (positions and markers only).
    #[arg(long, default_value_t = 0.0)]
    pub jitter_mm: f64,
    /// Text tag stored in the file.
    #[arg(long)]
    pub text: Option<String>,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            frames: 30,
            fps: 20.0,
            speed: 0.012,
            gap: 0.5,
            approach: 1.5,
            height_offset_mm: 0.0,
            payload: PayloadKind::Positions,
            seed: 0,
            jitter_mm: 0.0,
            text: None,
        }
    }
}

impl SynthParams {
    fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.frames == 0 {
            return bad("--frames must be positive".into());
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return bad(format!("--fps must be positive, got {}", self.fps));
        }
        for (name, v) in [
            ("--speed", self.speed),
            ("--height-offset-mm", self.height_offset_mm),
            ("--approach", self.approach),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(self.gap >= 0.0) || !self.gap.is_finite() {
            return bad(format!("--gap must be non-negative, got {}", self.gap));
        }
        if !(self.jitter_mm >= 0.0) || !self.jitter_mm.is_finite() {
            return bad(format!("--jitter-mm must be non-negative, got {}", self.jitter_mm));
        }
        if self.jitter_mm > 0.0 && self.payload == PayloadKind::Rep {
            return bad("--jitter-mm applies to positions and markers payloads only".into());
        }
        Ok(())
    }
}

fn yaw(angle: f64) -> Rotation6D<f64> {
    matrix_to_rot6d(Rotation3::from_axis_angle(&Vector3::z_axis(), angle).matrix()).expect("yaw is a rotation")
}

/// Local rotations for one frame: rest pose with the given root yaw, arms
/// optionally swung forward (the body faces −y, left arm along +x).
fn posture(ctx: &Context, root_yaw: f64, arms_forward: bool) -> CliResult<Vec<Rotation6D<f64>>> {
    let s = &ctx.skeleton;
    let mut rot = vec![Rotation6D::identity(); s.joint_count()];
    rot[s.root()] = yaw(root_yaw);
    if arms_forward {
        for (name, angle) in [("left_shoulder", -PI / 2.0), ("right_shoulder", PI / 2.0)] {
            let j = s
                .joint_index(name)
                .ok_or_else(|| CliError::Invariant(format!("skeleton has no joint named {name}")))?;
            rot[j] = yaw(angle);
        }
    }
    Ok(rot)
}

/// Root height that puts the lowest sphere surface of `rot` on the ground.
fn resting_height(ctx: &Context, rot: &[Rotation6D<f64>]) -> CliResult<f64> {
    let pose = PoseSequence::new(vec![Vector3::zeros()], rot.to_vec(), rot.len(), 1.0).map_err(core)?;
    let p = forward_kinematics(&ctx.skeleton, &pose).map_err(core)?;
    let z = lowest_clearance(&p, &ctx.body.spheres, &ctx.cfg.metrics.ground).map_err(core)?;
    Ok(-z[0])
}

fn core(e: physimetrics_core::Error) -> CliError {
    CliError::Invariant(format!("synth: {e}"))
}

fn person(
    ctx: &Context,
    params: &SynthParams,
    rot: Vec<Rotation6D<f64>>,
    root_xy: impl Fn(usize) -> (f64, f64),
) -> CliResult<PoseSequence<f64>> {
    let z = resting_height(ctx, &rot)? + params.height_offset_mm / 1000.0;
    let roots = (0..params.frames)
        .map(|t| {
            let (x, y) = root_xy(t);
            Vector3::new(x, y, z)
        })
        .collect();
    let n = rot.len();
    let all = rot.iter().copied().cycle().take(n * params.frames).collect();
    let mut pose = PoseSequence::new(roots, all, n, params.fps).map_err(core)?;
    settle(ctx, &mut pose, params.height_offset_mm / 1000.0)?;
    Ok(pose)
}

/// Raises the root until the f32-stored joint positions keep every frame's
/// lowest sphere surface at or above `clearance`.
fn settle(ctx: &Context, pose: &mut PoseSequence<f64>, clearance: f64) -> CliResult<()> {
    let mut step = 0.0_f64;
    for _ in 0..64 {
        let p = forward_kinematics(&ctx.skeleton, pose).map_err(core)?;
        let stored = p.map(|x| x.map(|c| c as f32 as f64));
        let z = lowest_clearance(&stored, &ctx.body.spheres, &ctx.cfg.metrics.ground).map_err(core)?;
        let deficit = z.iter().fold(f64::NEG_INFINITY, |m, z| m.max(clearance - z));
        if deficit <= 0.0 {
            return Ok(());
        }
        step = (2.0 * step).max(deficit);
        for r in pose.root_translation_mut() {
            r.z += step;
        }
    }
    Err(CliError::Invariant("synth: could not place the body at the requested height".into()))
}

/// Poses of every person in the clip.
pub fn synth_poses(ctx: &Context, kind: SynthKind, params: &SynthParams) -> CliResult<Vec<PoseSequence<f64>>> {
    params.validate()?;
    match kind {
        SynthKind::Static => Ok(vec![person(ctx, params, posture(ctx, 0.0, false)?, |_| (0.0, 0.0))?]),
        SynthKind::WalkLine => {
            let speed = params.speed;
            Ok(vec![person(ctx, params, posture(ctx, 0.0, false)?, move |t| {
                (speed * t as f64, 0.0)
            })?])
        }
        SynthKind::TwoPersonApproach => {
            let last = params.frames.saturating_sub(1).max(1) as f64;
            let (gap, approach) = (params.gap, params.approach);
            // A faces −y at the origin; B stands on A's −y side, turned to face A
            let a = person(ctx, params, posture(ctx, 0.0, true)?, |_| (0.0, 0.0))?;
            let b = person(ctx, params, posture(ctx, PI, true)?, move |t| {
                (0.0, -(gap + approach * (1.0 - t as f64 / last)))
            })?;
            Ok(vec![a, b])
        }
    }
}

fn jitter(persons: &mut [Trajectory<f64>], params: &SynthParams) {
    if params.jitter_mm == 0.0 {
        return;
    }
    let amp = params.jitter_mm / 1000.0;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for p in persons {
        for x in p.data_mut() {
            for c in x.iter_mut() {
                *c += rng.gen_range(-amp..=amp);
            }
        }
    }
}

/// Builds the requested clip.
pub fn synth(ctx: &Context, kind: SynthKind, params: &SynthParams) -> CliResult<MotionFile> {
    let poses = synth_poses(ctx, kind, params)?;
    let text = params.text.clone();
    match params.payload {
        PayloadKind::Rep => {
            let reps = poses
                .iter()
                .map(|p| rep_from_motion(&ctx.skeleton, p))
                .collect::<Result<Vec<_>, _>>()
                .map_err(core)?;
            MotionFile::from_reps(&reps, text)
        }
        PayloadKind::Positions => {
            let mut pos = poses
                .iter()
                .map(|p| forward_kinematics(&ctx.skeleton, p))
                .collect::<Result<Vec<_>, _>>()
                .map_err(core)?;
            jitter(&mut pos, params);
            MotionFile::from_positions(&pos, params.fps, text)
        }
        PayloadKind::Markers => {
            let mut markers = poses
                .iter()
                .map(|p| {
                    let joints = forward_kinematics(&ctx.skeleton, p)?;
                    regress_markers(&joints, &ctx.body.markers)
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(core)?;
            jitter(&mut markers, params);
            MotionFile::from_markers(&markers, params.fps, text)
        }
    }
}
