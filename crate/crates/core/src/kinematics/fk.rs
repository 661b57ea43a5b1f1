//! Forward kinematics, its analytic position Jacobian, and bone lengths.

use nalgebra::{DMatrix, Matrix3, Vector3};

use super::pose::PoseSequence;
use super::rotation::{rotate_jacobian, Rotation6D};
use super::skeleton::Skeleton;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Global joint positions and rotations for a single frame.
#[derive(Debug, Clone)]
pub struct FrameKinematics<T: Real> {
    pub positions: Vec<Vector3<T>>,
    pub global_rotations: Vec<Matrix3<T>>,
    pub local_rotations: Vec<Matrix3<T>>,
}

/// Runs FK for one frame.
pub fn forward_kinematics_frame<T: Real>(
    skeleton: &Skeleton<T>,
    root_translation: &Vector3<T>,
    rotations: &[Rotation6D<T>],
) -> Result<FrameKinematics<T>> {
    let n = skeleton.joint_count();
    if rotations.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} rotations for a {n}-joint skeleton",
            rotations.len()
        )));
    }
    let local = rotations
        .iter()
        .map(|r| r.to_matrix())
        .collect::<Result<Vec<_>>>()?;
    let mut positions = vec![Vector3::zeros(); n];
    let mut global = vec![Matrix3::identity(); n];
    for &j in skeleton.topological_order() {
        match skeleton.parent(j) {
            None => {
                positions[j] = *root_translation;
                global[j] = local[j];
            }
            Some(p) => {
                positions[j] = positions[p] + global[p] * skeleton.rest_offset(j);
                global[j] = global[p] * local[j];
            }
        }
    }
    Ok(FrameKinematics {
        positions,
        global_rotations: global,
        local_rotations: local,
    })
}

/// Global joint positions for every frame of `pose`.
pub fn forward_kinematics<T: Real>(skeleton: &Skeleton<T>, pose: &PoseSequence<T>) -> Result<Trajectory<T>> {
    pose.check_skeleton(skeleton)?;
    let n = skeleton.joint_count();
    let mut data = Vec::with_capacity(pose.frames() * n);
    for t in 0..pose.frames() {
        let fk = forward_kinematics_frame(skeleton, &pose.root_translation()[t], pose.rotations(t))?;
        data.extend(fk.positions);
    }
    Trajectory::new(pose.frames(), n, data)
}

/// Jacobian of all joint positions (`3J` rows) with respect to the raw 6D
/// rotation components (columns `6k..6k+6` for joint `k`) followed by the
/// root translation (last three columns).
pub fn fk_position_jacobian<T: Real>(
    skeleton: &Skeleton<T>,
    root_translation: &Vector3<T>,
    rotations: &[Rotation6D<T>],
) -> Result<DMatrix<T>> {
    let fk = forward_kinematics_frame(skeleton, root_translation, rotations)?;
    jacobian_from_frame(skeleton, rotations, &fk)
}

pub(crate) fn jacobian_from_frame<T: Real>(
    skeleton: &Skeleton<T>,
    rotations: &[Rotation6D<T>],
    fk: &FrameKinematics<T>,
) -> Result<DMatrix<T>> {
    let n = skeleton.joint_count();
    let mut jac = DMatrix::zeros(3 * n, 6 * n + 3);
    for j in 0..n {
        jac.fixed_view_mut::<3, 3>(3 * j, 6 * n).fill_with_identity();
    }
    for j in 0..n {
        // walk the strict ancestors k of j
        let mut cur = skeleton.parent(j);
        while let Some(k) = cur {
            // p_j − p_k = G_parent(k) · R_k · w, with w fixed in k's frame
            let rel = fk.positions[j] - fk.positions[k];
            let w = fk.global_rotations[k].transpose() * rel;
            let d = rotate_jacobian(&rotations[k], &w)?;
            let block = match skeleton.parent(k) {
                Some(pk) => fk.global_rotations[pk] * d,
                None => d,
            };
            jac.fixed_view_mut::<3, 6>(3 * j, 6 * k).copy_from(&block);
            cur = skeleton.parent(k);
        }
    }
    Ok(jac)
}

/// Per-frame bone lengths, one column per bone in [`Skeleton::bones`] order.
pub fn bone_lengths<T: Real>(skeleton: &Skeleton<T>, positions: &Trajectory<T>) -> Result<DMatrix<T>> {
    if positions.points() != skeleton.joint_count() {
        return Err(Error::ShapeMismatch(format!(
            "positions have {} joints, skeleton has {}",
            positions.points(),
            skeleton.joint_count()
        )));
    }
    let bones: Vec<(usize, usize)> = skeleton.bones().collect();
    Ok(DMatrix::from_fn(positions.frames(), bones.len(), |t, b| {
        let (p, c) = bones[b];
        (positions.get(t, c) - positions.get(t, p)).norm()
    }))
}
