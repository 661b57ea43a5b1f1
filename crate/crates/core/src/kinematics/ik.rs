//! Position → rotation fitting by damped Gauss–Newton.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::fk::{forward_kinematics_frame, jacobian_from_frame};
use super::pose::PoseSequence;
use super::rotation::Rotation6D;
use super::skeleton::Skeleton;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IkConfig {
    /// Initial Levenberg damping added to the normal equations.
    pub damping: f64,
    /// Iteration budget per frame (rejected steps count).
    pub max_iterations: usize,
    /// Stop once an accepted step improves the RMS error by less than this (meters).
    pub tolerance: f64,
    /// Initialize each frame from the previous frame's solution instead of the rest pose.
    pub warm_start: bool,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self {
            damping: 1e-4,
            max_iterations: 200,
            tolerance: 1e-7,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IkFit<T: Real> {
    pub pose: PoseSequence<T>,
    /// RMS joint position error per frame, meters.
    pub residual_rms: Vec<T>,
    pub iterations: Vec<usize>,
}

impl<T: Real> IkFit<T> {
    pub fn max_residual(&self) -> T {
        self.residual_rms.iter().fold(T::zero(), |m, r| m.max(*r))
    }
}

/// Fits local rotations and root translation reproducing `targets`.
///
/// Only joint positions are matched; twist about bone axes is unobservable
/// and left wherever the solver lands.
pub fn ik_fit<T: Real>(skeleton: &Skeleton<T>, targets: &Trajectory<T>, fps: T, cfg: &IkConfig) -> Result<IkFit<T>> {
    let n = skeleton.joint_count();
    if targets.points() != n {
        return Err(Error::ShapeMismatch(format!(
            "targets have {} joints, skeleton has {n}",
            targets.points()
        )));
    }
    if targets.frames() == 0 {
        return Err(Error::TooShort { needed: 1, found: 0 });
    }
    if !targets.is_finite() {
        return Err(Error::NonFinite("IK targets".into()));
    }
    let mut roots = Vec::with_capacity(targets.frames());
    let mut rotations = Vec::with_capacity(targets.frames() * n);
    let mut residual_rms = Vec::with_capacity(targets.frames());
    let mut iterations = Vec::with_capacity(targets.frames());
    let mut current = vec![Rotation6D::identity(); n];
    for t in 0..targets.frames() {
        if !cfg.warm_start {
            current = vec![Rotation6D::identity(); n];
        }
        let mut root = targets.get(t, skeleton.root());
        let (rms, iters) = fit_frame(skeleton, targets.frame(t), &mut root, &mut current, cfg)?;
        roots.push(root);
        rotations.extend_from_slice(&current);
        residual_rms.push(rms);
        iterations.push(iters);
    }
    Ok(IkFit {
        pose: PoseSequence::new(roots, rotations, n, fps)?,
        residual_rms,
        iterations,
    })
}

fn rms_error<T: Real>(positions: &[Vector3<T>], target: &[Vector3<T>]) -> (T, DVector<T>) {
    let n = positions.len();
    let mut residual = DVector::zeros(3 * n);
    let mut sq = T::zero();
    for j in 0..n {
        let d = positions[j] - target[j];
        residual.fixed_rows_mut::<3>(3 * j).copy_from(&d);
        sq += d.norm_squared();
    }
    ((sq / T::lit(n as f64)).sqrt(), residual)
}

fn fit_frame<T: Real>(
    skeleton: &Skeleton<T>,
    target: &[Vector3<T>],
    root: &mut Vector3<T>,
    rotations: &mut [Rotation6D<T>],
    cfg: &IkConfig,
) -> Result<(T, usize)> {
    let n = skeleton.joint_count();
    let base_damping = T::lit(cfg.damping);
    let mut damping = base_damping;
    let max_damping = T::lit(1e8);
    let tol = T::lit(cfg.tolerance);

    let mut fk = forward_kinematics_frame(skeleton, root, rotations)?;
    let (mut rms, mut residual) = rms_error(&fk.positions, target);
    let mut iters = 0;
    while iters < cfg.max_iterations && rms > T::zero() {
        iters += 1;
        let jac = jacobian_from_frame(skeleton, rotations, &fk)?;
        // (JᵀJ + λI)⁻¹Jᵀ = Jᵀ(JJᵀ + λI)⁻¹ keeps the solve at 3J unknowns
        let mut normal: DMatrix<T> = &jac * jac.transpose();
        for i in 0..3 * n {
            normal[(i, i)] += damping;
        }
        let Some(chol) = normal.cholesky() else {
            damping *= T::lit(10.0);
            if damping > max_damping {
                break;
            }
            continue;
        };
        let step = -(jac.transpose() * chol.solve(&residual));

        let mut cand_rot = rotations.to_vec();
        for (k, r) in cand_rot.iter_mut().enumerate() {
            let mut c = r.to_array();
            for (i, ci) in c.iter_mut().enumerate() {
                *ci += step[6 * k + i];
            }
            *r = Rotation6D::from_slice(&c);
        }
        let renorm: Result<Vec<_>> = cand_rot.iter().map(|r| r.normalized()).collect();
        let cand_root = *root + step.fixed_rows::<3>(6 * n).into_owned();
        let accepted = match renorm {
            Ok(cand_rot) => {
                let cand_fk = forward_kinematics_frame(skeleton, &cand_root, &cand_rot)?;
                let (cand_rms, cand_res) = rms_error(&cand_fk.positions, target);
                if cand_rms < rms {
                    let improvement = rms - cand_rms;
                    rotations.copy_from_slice(&cand_rot);
                    *root = cand_root;
                    fk = cand_fk;
                    rms = cand_rms;
                    residual = cand_res;
                    Some(improvement)
                } else {
                    None
                }
            }
            Err(_) => None,
        };
        match accepted {
            Some(improvement) => {
                damping = (damping / T::lit(10.0)).max(base_damping);
                if improvement < tol {
                    break;
                }
            }
            None => {
                damping *= T::lit(10.0);
                if damping > max_damping {
                    break;
                }
            }
        }
    }
    Ok((rms, iters))
}
