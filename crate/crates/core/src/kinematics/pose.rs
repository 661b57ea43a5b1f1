use nalgebra::Vector3;

use super::rotation::Rotation6D;
use super::skeleton::Skeleton;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Root trajectory plus per-joint local rotations over time.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence<T: Real> {
    root_translation: Vec<Vector3<T>>,
    local_rotation: Vec<Rotation6D<T>>,
    joints: usize,
    fps: T,
}

impl<T: Real> PoseSequence<T> {
    /// `local_rotation` is frame-major: `local_rotation[t * joints + j]`.
    pub fn new(
        root_translation: Vec<Vector3<T>>,
        local_rotation: Vec<Rotation6D<T>>,
        joints: usize,
        fps: T,
    ) -> Result<Self> {
        let frames = root_translation.len();
        if frames == 0 {
            return Err(Error::TooShort { needed: 1, found: 0 });
        }
        if joints == 0 || local_rotation.len() != frames * joints {
            return Err(Error::ShapeMismatch(format!(
                "{frames} frames x {joints} joints needs {} rotations, got {}",
                frames * joints,
                local_rotation.len()
            )));
        }
        if !(fps > T::zero()) || !fps.is_finite() {
            return Err(Error::InvalidConfig(format!("fps must be positive, got {}", fps.as_f64())));
        }
        Ok(Self {
            root_translation,
            local_rotation,
            joints,
            fps,
        })
    }

    /// All joints at identity, root at `root_translation[t]`.
    pub fn rest(skeleton: &Skeleton<T>, root_translation: Vec<Vector3<T>>, fps: T) -> Result<Self> {
        let n = root_translation.len() * skeleton.joint_count();
        Self::new(root_translation, vec![Rotation6D::identity(); n], skeleton.joint_count(), fps)
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.root_translation.len()
    }

    #[inline]
    pub fn joints(&self) -> usize {
        self.joints
    }

    #[inline]
    pub fn fps(&self) -> T {
        self.fps
    }

    pub fn root_translation(&self) -> &[Vector3<T>] {
        &self.root_translation
    }

    pub fn root_translation_mut(&mut self) -> &mut [Vector3<T>] {
        &mut self.root_translation
    }

    pub fn rotations(&self, t: usize) -> &[Rotation6D<T>] {
        &self.local_rotation[t * self.joints..(t + 1) * self.joints]
    }

    pub fn rotations_mut(&mut self, t: usize) -> &mut [Rotation6D<T>] {
        &mut self.local_rotation[t * self.joints..(t + 1) * self.joints]
    }

    pub fn all_rotations(&self) -> &[Rotation6D<T>] {
        &self.local_rotation
    }

    pub(crate) fn check_skeleton(&self, skeleton: &Skeleton<T>) -> Result<()> {
        if self.joints != skeleton.joint_count() {
            return Err(Error::ShapeMismatch(format!(
                "pose has {} joints, skeleton has {}",
                self.joints,
                skeleton.joint_count()
            )));
        }
        Ok(())
    }
}
