#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use nalgebra::{Rotation3, Unit, Vector3};
use physimetrics_core::kinematics::{matrix_to_rot6d, PoseSequence, Skeleton};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str], threads: Option<usize>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_physimetrics"));
    cmd.args(args).env_remove("PHYSIMETRICS_THREADS");
    if let Some(n) = threads {
        cmd.env("PHYSIMETRICS_THREADS", n.to_string());
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Runs `synth kind` with extra flags into `dir/name` and returns the path.
pub fn synth(dir: &Path, name: &str, kind: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["synth", kind, "--out", p(&out)];
    args.extend_from_slice(extra);
    let r = run(&args, None);
    assert_eq!(r.code, 0, "synth {kind} {extra:?}: {}", r.stderr);
    out
}

pub fn eval_json(args: &[&str]) -> serde_json::Value {
    let r = run(args, None);
    assert_eq!(r.code, 0, "{}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

/// Looks up `key=value` in command output and parses the value.
pub fn field(text: &str, line_prefix: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(line_prefix))
        .unwrap_or_else(|| panic!("no line starting with {line_prefix:?} in {text}"));
    let pat = format!("{key}=");
    let start = line.find(&pat).unwrap() + pat.len();
    line[start..].split_whitespace().next().unwrap().parse().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut impl Rng) -> Unit<Vector3<f64>> {
    loop {
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return Unit::new_normalize(v);
        }
    }
}

/// Each joint swings about a fixed random axis, at most `max_angle` from rest.
pub fn random_sequence(rng: &mut impl Rng, s: &Skeleton<f64>, frames: usize, max_angle: f64, fps: f64) -> PoseSequence<f64> {
    let n = s.joint_count();
    let axes: Vec<_> = (0..n).map(|_| unit_vector(rng)).collect();
    let amp: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=max_angle)).collect();
    let phase: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let freq: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.3)).collect();
    let start = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.8..1.0));
    let drift = Vector3::new(rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02), 0.0);
    let mut rotations = Vec::with_capacity(frames * n);
    for t in 0..frames {
        for j in 0..n {
            let m = Rotation3::from_axis_angle(&axes[j], amp[j] * (freq[j] * t as f64 + phase[j]).sin());
            rotations.push(matrix_to_rot6d(m.matrix()).unwrap());
        }
    }
    let roots = (0..frames).map(|t| start + drift * t as f64).collect();
    PoseSequence::new(roots, rotations, n, fps).unwrap()
}
