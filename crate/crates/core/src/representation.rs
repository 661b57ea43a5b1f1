//! The `[p | v | r]` motion representation: global joint positions,
//! per-frame joint velocities and local 6D joint rotations.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    bone_lengths, forward_kinematics, forward_kinematics_frame, PoseSequence, Rotation6D, Skeleton, BODY_JOINTS,
};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Scalars per joint per frame: position (3) + velocity (3) + rotation (6).
pub const JOINT_WIDTH: usize = 12;

/// Frame width of the published layout, `22·3 + 22·3 + 22·6`.
pub const FRAME_WIDTH: usize = BODY_JOINTS * JOINT_WIDTH;

#[derive(Debug, Clone, PartialEq)]
pub struct MotionRep<T: Real> {
    p: Trajectory<T>,
    v: Trajectory<T>,
    r: Vec<Rotation6D<T>>,
    fps: T,
}

impl<T: Real> MotionRep<T> {
    /// Checks component shapes against each other; values are not checked
    /// (see [`validate_rep`]). Any joint count is accepted here.
    pub fn new(p: Trajectory<T>, v: Trajectory<T>, r: Vec<Rotation6D<T>>, fps: T) -> Result<Self> {
        p.same_shape(&v, "positions vs velocities")?;
        if r.len() != p.frames() * p.points() {
            return Err(Error::ShapeMismatch(format!(
                "{} rotations for {} frames x {} joints",
                r.len(),
                p.frames(),
                p.points()
            )));
        }
        if p.frames() < 2 {
            return Err(Error::TooShort { needed: 2, found: p.frames() });
        }
        if !(fps > T::zero()) {
            return Err(Error::InvalidConfig(format!("fps must be positive, got {}", fps.as_f64())));
        }
        Ok(Self { p, v, r, fps })
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.p.frames()
    }

    #[inline]
    pub fn joints(&self) -> usize {
        self.p.points()
    }

    #[inline]
    pub fn fps(&self) -> T {
        self.fps
    }

    pub fn positions(&self) -> &Trajectory<T> {
        &self.p
    }

    pub fn velocities(&self) -> &Trajectory<T> {
        &self.v
    }

    pub fn velocities_mut(&mut self) -> &mut Trajectory<T> {
        &mut self.v
    }

    pub fn positions_mut(&mut self) -> &mut Trajectory<T> {
        &mut self.p
    }

    pub fn rotations(&self, t: usize) -> &[Rotation6D<T>] {
        let j = self.joints();
        &self.r[t * j..(t + 1) * j]
    }

    pub fn rotations_mut(&mut self, t: usize) -> &mut [Rotation6D<T>] {
        let j = self.joints();
        &mut self.r[t * j..(t + 1) * j]
    }

    pub fn all_rotations(&self) -> &[Rotation6D<T>] {
        &self.r
    }

    /// `joints · 12` scalars per frame.
    pub fn frame_width(&self) -> usize {
        self.joints() * JOINT_WIDTH
    }

    /// Frame-major flat layout: each frame is `[p (3J) | v (3J) | r (6J)]`.
    pub fn to_flat(&self) -> Vec<T> {
        let j = self.joints();
        let mut out = Vec::with_capacity(self.frames() * self.frame_width());
        for t in 0..self.frames() {
            out.extend(self.p.frame(t).iter().flat_map(|v| [v.x, v.y, v.z]));
            out.extend(self.v.frame(t).iter().flat_map(|v| [v.x, v.y, v.z]));
            out.extend(self.r[t * j..(t + 1) * j].iter().flat_map(|r| r.to_array()));
        }
        out
    }

    pub fn from_flat(joints: usize, frames: usize, flat: &[T], fps: T) -> Result<Self> {
        let width = joints * JOINT_WIDTH;
        if flat.len() != frames * width {
            return Err(Error::ShapeMismatch(format!(
                "{frames} frames of width {width} need {} values, got {}",
                frames * width,
                flat.len()
            )));
        }
        let mut p = Vec::with_capacity(frames * joints);
        let mut v = Vec::with_capacity(frames * joints);
        let mut r = Vec::with_capacity(frames * joints);
        for frame in flat.chunks_exact(width.max(1)) {
            let (pf, rest) = frame.split_at(3 * joints);
            let (vf, rf) = rest.split_at(3 * joints);
            p.extend(pf.chunks_exact(3).map(|c| Vector3::new(c[0], c[1], c[2])));
            v.extend(vf.chunks_exact(3).map(|c| Vector3::new(c[0], c[1], c[2])));
            r.extend(rf.chunks_exact(6).map(Rotation6D::from_slice));
        }
        Self::new(
            Trajectory::new(frames, joints, p)?,
            Trajectory::new(frames, joints, v)?,
            r,
            fps,
        )
    }

    /// Rotation component as a pose whose root follows the position component.
    pub fn rotation_pose(&self, skeleton: &Skeleton<T>) -> Result<PoseSequence<T>> {
        let roots = (0..self.frames()).map(|t| self.p.get(t, skeleton.root())).collect();
        PoseSequence::new(roots, self.r.clone(), self.joints(), self.fps)
    }

    /// Applies a rigid transform `x ↦ R x + t` to positions, `R v` to
    /// velocities, and `R` to the root rotation.
    pub fn transformed(&self, skeleton: &Skeleton<T>, rot: &nalgebra::Matrix3<T>, trans: &Vector3<T>) -> Result<Self> {
        let mut r = self.r.clone();
        let j = self.joints();
        for t in 0..self.frames() {
            let idx = t * j + skeleton.root();
            let m = rot * r[idx].to_matrix()?;
            r[idx] = Rotation6D::new(m.column(0).into_owned(), m.column(1).into_owned());
        }
        Self::new(self.p.map(|x| rot * x + trans), self.v.map(|x| rot * x), r, self.fps)
    }
}

/// Builds the published 22-joint representation; other joint counts are rejected.
pub fn assemble_rep<T: Real>(p: Trajectory<T>, v: Trajectory<T>, r: Vec<Rotation6D<T>>, fps: T) -> Result<MotionRep<T>> {
    if p.points() != BODY_JOINTS || v.points() != BODY_JOINTS {
        return Err(Error::ShapeMismatch(format!(
            "representation needs {BODY_JOINTS} joints, got {} positions / {} velocities",
            p.points(),
            v.points()
        )));
    }
    MotionRep::new(p, v, r, fps)
}

pub fn split_rep<T: Real>(rep: &MotionRep<T>) -> (Trajectory<T>, Trajectory<T>, Vec<Rotation6D<T>>) {
    (rep.p.clone(), rep.v.clone(), rep.r.clone())
}

/// `v[t] = p[t+1] − p[t]`; the last frame repeats the previous difference.
pub fn compute_velocity<T: Real>(p: &Trajectory<T>) -> Result<Trajectory<T>> {
    let frames = p.frames();
    if frames < 2 {
        return Err(Error::TooShort { needed: 2, found: frames });
    }
    Ok(Trajectory::from_fn(frames, p.points(), |t, j| {
        let t = t.min(frames - 2);
        p.get(t + 1, j) - p.get(t, j)
    }))
}

/// Converts a kinematic pose sequence into a self-consistent representation.
pub fn rep_from_motion<T: Real>(skeleton: &Skeleton<T>, pose: &PoseSequence<T>) -> Result<MotionRep<T>> {
    let p = forward_kinematics(skeleton, pose)?;
    let v = compute_velocity(&p)?;
    MotionRep::new(p, v, pose.all_rotations().to_vec(), pose.fps())
}

/// Mean distance between the position component and FK of the rotation
/// component (rooted at the position component's root), in millimeters.
pub fn pos_rot_mpjpe<T: Real>(rep: &MotionRep<T>, skeleton: &Skeleton<T>) -> Result<T> {
    if rep.joints() != skeleton.joint_count() {
        return Err(Error::ShapeMismatch(format!(
            "representation has {} joints, skeleton has {}",
            rep.joints(),
            skeleton.joint_count()
        )));
    }
    let mut total = T::zero();
    for t in 0..rep.frames() {
        let root = rep.p.get(t, skeleton.root());
        let fk = forward_kinematics_frame(skeleton, &root, rep.rotations(t))?;
        for (j, q) in fk.positions.iter().enumerate() {
            total += (rep.p.get(t, j) - q).norm();
        }
    }
    Ok(total / T::lit((rep.frames() * rep.joints()) as f64) * T::lit(1000.0))
}

/// Mean over `t < T−1` and joints of `‖v[t] − (p[t+1] − p[t])‖²`.
pub fn velocity_residual<T: Real>(rep: &MotionRep<T>) -> T {
    let mut total = T::zero();
    let frames = rep.frames();
    for t in 0..frames - 1 {
        for j in 0..rep.joints() {
            total += (rep.v.get(t, j) - (rep.p.get(t + 1, j) - rep.p.get(t, j))).norm_squared();
        }
    }
    total / T::lit(((frames - 1) * rep.joints()) as f64)
}

/// Acceptance thresholds for [`validate_rep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepTolerances {
    /// Max mean squared velocity inconsistency, m².
    pub velocity_residual: f64,
    /// Max position/rotation disagreement, mm.
    pub mpjpe_mm: f64,
    /// Max absolute bone length deviation from the skeleton, m.
    pub bone_length: f64,
}

impl Default for RepTolerances {
    fn default() -> Self {
        Self {
            velocity_residual: 1e-8,
            mpjpe_mm: 1.0,
            bone_length: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Shape { detail: String },
    NonFinite { component: String },
    InvalidRotation { frame: usize, joint: usize },
    VelocityInconsistent { residual: f64, tolerance: f64 },
    PosRotDisagreement { mpjpe_mm: f64, tolerance_mm: f64 },
    BoneLength { bone: String, max_deviation: f64, tolerance: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Shape { detail } => write!(f, "shape: {detail}"),
            Violation::NonFinite { component } => write!(f, "non-finite values in component {component}"),
            Violation::InvalidRotation { frame, joint } => {
                write!(f, "degenerate rotation at frame {frame}, joint {joint}")
            }
            Violation::VelocityInconsistent { residual, tolerance } => {
                write!(f, "velocity inconsistent with positions: residual {residual:.6e} m^2 > {tolerance:e}")
            }
            Violation::PosRotDisagreement { mpjpe_mm, tolerance_mm } => {
                write!(f, "position/rotation disagreement: mpjpe {mpjpe_mm:.4} mm > {tolerance_mm}")
            }
            Violation::BoneLength {
                bone,
                max_deviation,
                tolerance,
            } => write!(f, "bone {bone} deviates {max_deviation:.6} m from skeleton (> {tolerance})"),
        }
    }
}

/// Lists every way `rep` departs from a valid, self-consistent representation.
pub fn validate_rep<T: Real>(rep: &MotionRep<T>, skeleton: &Skeleton<T>, tol: &RepTolerances) -> Vec<Violation> {
    let mut out = Vec::new();
    if rep.joints() != skeleton.joint_count() {
        out.push(Violation::Shape {
            detail: format!("{} joints, skeleton has {}", rep.joints(), skeleton.joint_count()),
        });
        return out;
    }
    if !rep.p.is_finite() {
        out.push(Violation::NonFinite { component: "p".into() });
    }
    if !rep.v.is_finite() {
        out.push(Violation::NonFinite { component: "v".into() });
    }
    if !rep.r.iter().all(|r| r.is_finite()) {
        out.push(Violation::NonFinite { component: "r".into() });
    }
    if !out.is_empty() {
        return out;
    }

    let residual = velocity_residual(rep).as_f64();
    if residual > tol.velocity_residual {
        out.push(Violation::VelocityInconsistent {
            residual,
            tolerance: tol.velocity_residual,
        });
    }

    let bad_rotation = rep
        .r
        .iter()
        .position(|r| r.to_matrix().is_err())
        .map(|i| (i / rep.joints(), i % rep.joints()));
    match bad_rotation {
        Some((frame, joint)) => out.push(Violation::InvalidRotation { frame, joint }),
        None => {
            if let Ok(mpjpe) = pos_rot_mpjpe(rep, skeleton) {
                let mpjpe = mpjpe.as_f64();
                if mpjpe > tol.mpjpe_mm {
                    out.push(Violation::PosRotDisagreement {
                        mpjpe_mm: mpjpe,
                        tolerance_mm: tol.mpjpe_mm,
                    });
                }
            }
        }
    }

    if let Ok(lengths) = bone_lengths(skeleton, &rep.p) {
        for (b, (_, child)) in skeleton.bones().enumerate() {
            let rest = skeleton.rest_offset(child).norm();
            let dev = lengths.column(b).iter().fold(0.0f64, |m, l| m.max((*l - rest).abs().as_f64()));
            if dev > tol.bone_length {
                out.push(Violation::BoneLength {
                    bone: skeleton.joint_names()[child].clone(),
                    max_deviation: dev,
                    tolerance: tol.bone_length,
                });
            }
        }
    }
    out
}

/// Several persons sharing one timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionClip<T: Real> {
    persons: Vec<MotionRep<T>>,
    pub text: Option<String>,
}

impl<T: Real> InteractionClip<T> {
    pub fn new(persons: Vec<MotionRep<T>>, text: Option<String>) -> Result<Self> {
        let Some(first) = persons.first() else {
            return Err(Error::ShapeMismatch("clip needs at least one person".into()));
        };
        for (i, p) in persons.iter().enumerate().skip(1) {
            if p.frames() != first.frames() || p.joints() != first.joints() || p.fps() != first.fps() {
                return Err(Error::ShapeMismatch(format!(
                    "person {i} has {} frames/{} joints at {} fps, person 0 has {}/{} at {}",
                    p.frames(),
                    p.joints(),
                    p.fps().as_f64(),
                    first.frames(),
                    first.joints(),
                    first.fps().as_f64()
                )));
            }
        }
        Ok(Self { persons, text })
    }

    pub fn persons(&self) -> &[MotionRep<T>] {
        &self.persons
    }

    pub fn frames(&self) -> usize {
        self.persons[0].frames()
    }

    pub fn fps(&self) -> T {
        self.persons[0].fps()
    }
}
