#![allow(dead_code)]

use nalgebra::{Rotation3, Unit, Vector3};
use physimetrics_core::kinematics::{matrix_to_rot6d, PoseSequence, Rotation6D, Skeleton};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

/// Uniform rotation (Shoemake's subgroup algorithm).
pub fn uniform_rotation(rng: &mut impl Rng) -> Rotation3<f64> {
    use std::f64::consts::TAU;
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = nalgebra::Quaternion::new(
        b * (TAU * u3).cos(),
        a * (TAU * u2).sin(),
        a * (TAU * u2).cos(),
        b * (TAU * u3).sin(),
    );
    nalgebra::UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

/// Rotation about a random axis by at most `max_angle` radians.
pub fn bounded_rotation(rng: &mut impl Rng, max_angle: f64) -> Rotation3<f64> {
    let axis = unit_vector(rng);
    Rotation3::from_axis_angle(&axis, rng.gen_range(-max_angle..=max_angle))
}

pub fn rot6d(m: &Rotation3<f64>) -> Rotation6D<f64> {
    matrix_to_rot6d(m.matrix()).unwrap()
}

/// One frame with every joint rotated by at most `max_angle`.
pub fn random_frame(rng: &mut impl Rng, joints: usize, max_angle: f64) -> Vec<Rotation6D<f64>> {
    (0..joints).map(|_| rot6d(&bounded_rotation(rng, max_angle))).collect()
}

/// Smooth sequence: each joint swings about a fixed random axis with
/// amplitude ≤ `max_angle`; the root drifts along a random line.
pub fn random_sequence(
    rng: &mut impl Rng,
    skeleton: &Skeleton<f64>,
    frames: usize,
    max_angle: f64,
    fps: f64,
) -> PoseSequence<f64> {
    let n = skeleton.joint_count();
    let axes: Vec<_> = (0..n).map(|_| unit_vector(rng)).collect();
    let amp: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=max_angle)).collect();
    let phase: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let freq: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.3)).collect();
    let start = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.8..1.0));
    let drift = Vector3::new(rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02), 0.0);
    let mut rotations = Vec::with_capacity(frames * n);
    for t in 0..frames {
        for j in 0..n {
            let angle = amp[j] * (freq[j] * t as f64 + phase[j]).sin();
            rotations.push(rot6d(&Rotation3::from_axis_angle(&axes[j], angle)));
        }
    }
    let roots = (0..frames).map(|t| start + drift * t as f64).collect();
    PoseSequence::new(roots, rotations, n, fps).unwrap()
}

/// Three joints in a line along +x, unit bones.
pub fn chain3() -> Skeleton<f64> {
    Skeleton::new(
        vec!["root".into(), "mid".into(), "tip".into()],
        vec![None, Some(0), Some(1)],
        vec![Vector3::zeros(), Vector3::x(), Vector3::x()],
        0,
        1,
        2,
    )
    .unwrap()
}
