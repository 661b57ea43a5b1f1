//! Training-time loss functions as pure scalar functions.
//!
//! Every term uses a mean over its contributing elements; terms of a
//! compound loss are summed. Masks are hard indicators and therefore not
//! differentiable exactly at their thresholds.

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{bone_lengths, forward_kinematics_frame, Skeleton};
use crate::representation::{InteractionClip, MotionRep};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum McMode {
    /// Ground-truth velocity and positions anchor both terms.
    #[default]
    GtAnchored,
    /// Prediction is compared only against itself.
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MaskSource {
    #[default]
    Predicted,
    GroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub mc_mode: McMode,
    /// Ground-truth marker distance below which persons are in contact, m.
    pub mi_contact_threshold: f64,
    /// Distance below which predicted and true maps are aligned, m.
    pub mi_range_threshold: f64,
    /// Which distance map gates the alignment term.
    pub mi_range_mask: MaskSource,
    /// Ground-truth foot height below which the foot is planted, m.
    pub foot_height_threshold: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            mc_mode: McMode::GtAnchored,
            mi_contact_threshold: 0.1,
            mi_range_threshold: 1.0,
            mi_range_mask: MaskSource::Predicted,
            foot_height_threshold: 0.05,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mi_contact_threshold", self.mi_contact_threshold),
            ("mi_range_threshold", self.mi_range_threshold),
            ("foot_height_threshold", self.foot_height_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mi_contact_threshold >= self.mi_range_threshold {
            return Err(Error::InvalidConfig(format!(
                "mi_contact_threshold ({}) must be below mi_range_threshold ({})",
                self.mi_contact_threshold, self.mi_range_threshold
            )));
        }
        Ok(())
    }
}

fn same_rep_shape<T: Real>(pred: &MotionRep<T>, gt: &MotionRep<T>) -> Result<()> {
    if pred.frames() != gt.frames() || pred.joints() != gt.joints() {
        return Err(Error::ShapeMismatch(format!(
            "prediction {}x{} vs ground truth {}x{}",
            pred.frames(),
            pred.joints(),
            gt.frames(),
            gt.joints()
        )));
    }
    Ok(())
}

fn count<T: Real>(n: usize) -> T {
    T::lit(n as f64)
}

/// Mean squared error over every element of the flattened representation.
pub fn simple_loss<T: Real>(pred: &MotionRep<T>, gt: &MotionRep<T>) -> Result<T> {
    same_rep_shape(pred, gt)?;
    let (a, b) = (pred.to_flat(), gt.to_flat());
    let sum = a.iter().zip(&b).fold(T::zero(), |acc, (x, y)| acc + (*x - *y) * (*x - *y));
    Ok(sum / count(a.len()))
}

/// Motion consistency: velocity vs finite-differenced positions, plus
/// positions vs FK of the rotations (rooted at the predicted root).
pub fn mc_loss<T: Real>(pred: &MotionRep<T>, gt: &MotionRep<T>, skeleton: &Skeleton<T>, cfg: &LossConfig) -> Result<T> {
    same_rep_shape(pred, gt)?;
    if pred.joints() != skeleton.joint_count() {
        return Err(Error::ShapeMismatch(format!(
            "representation has {} joints, skeleton has {}",
            pred.joints(),
            skeleton.joint_count()
        )));
    }
    let anchor = match cfg.mc_mode {
        McMode::GtAnchored => gt,
        McMode::Internal => pred,
    };
    let (frames, joints) = (pred.frames(), pred.joints());
    let p = pred.positions();

    let mut vel = T::zero();
    for t in 0..frames - 1 {
        for j in 0..joints {
            vel += (anchor.velocities().get(t, j) - (p.get(t + 1, j) - p.get(t, j))).norm_squared();
        }
    }
    let vel = vel / count((frames - 1) * joints * 3);

    let mut pos = T::zero();
    for t in 0..frames {
        let fk = forward_kinematics_frame(skeleton, &p.get(t, skeleton.root()), pred.rotations(t))?;
        for (j, q) in fk.positions.iter().enumerate() {
            pos += (anchor.positions().get(t, j) - q).norm_squared();
        }
    }
    let pos = pos / count(frames * joints * 3);
    Ok(vel + pos)
}

/// `M[k, l] = ‖a[k] − b[l]‖`.
pub fn distance_map<T: Real>(a: &[Vector3<T>], b: &[Vector3<T>]) -> DMatrix<T> {
    DMatrix::from_fn(a.len(), b.len(), |k, l| (a[k] - b[l]).norm())
}

/// Marker-based interaction loss over two persons' marker trajectories.
///
/// Term 1 pulls predicted distances to zero where the ground truth is in
/// contact; term 2 matches predicted and true distances within range.
/// Masked entries count toward the mean as zeros.
pub fn mi_loss<T: Real>(
    pred_a: &Trajectory<T>,
    pred_b: &Trajectory<T>,
    gt_a: &Trajectory<T>,
    gt_b: &Trajectory<T>,
    cfg: &LossConfig,
) -> Result<T> {
    pred_a.same_shape(gt_a, "person a markers")?;
    pred_b.same_shape(gt_b, "person b markers")?;
    if pred_a.frames() != pred_b.frames() {
        return Err(Error::ShapeMismatch(format!(
            "persons have {} and {} frames",
            pred_a.frames(),
            pred_b.frames()
        )));
    }
    let contact = T::lit(cfg.mi_contact_threshold);
    let range = T::lit(cfg.mi_range_threshold);
    let (mut contact_term, mut align_term) = (T::zero(), T::zero());
    for t in 0..pred_a.frames() {
        let m_pred = distance_map(pred_a.frame(t), pred_b.frame(t));
        let m_gt = distance_map(gt_a.frame(t), gt_b.frame(t));
        for (mp, mg) in m_pred.iter().zip(m_gt.iter()) {
            if *mg < contact {
                contact_term += *mp * *mp;
            }
            let gate = match cfg.mi_range_mask {
                MaskSource::Predicted => *mp,
                MaskSource::GroundTruth => *mg,
            };
            if gate < range {
                align_term += (*mp - *mg) * (*mp - *mg);
            }
        }
    }
    let n = count(pred_a.frames() * pred_a.points() * pred_b.points());
    Ok(contact_term / n + align_term / n)
}

pub fn velocity_loss<T: Real>(pred: &MotionRep<T>, gt: &MotionRep<T>) -> Result<T> {
    same_rep_shape(pred, gt)?;
    let sum = pred
        .velocities()
        .data()
        .iter()
        .zip(gt.velocities().data())
        .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_squared());
    Ok(sum / count(pred.frames() * pred.joints() * 3))
}

/// Mean squared predicted foot velocity component over frames where the
/// ground-truth foot is planted (height below threshold); 0 without contact.
pub fn foot_contact_loss<T: Real>(
    pred: &MotionRep<T>,
    gt: &MotionRep<T>,
    skeleton: &Skeleton<T>,
    cfg: &LossConfig,
) -> Result<T> {
    same_rep_shape(pred, gt)?;
    if pred.joints() != skeleton.joint_count() {
        return Err(Error::ShapeMismatch("representation does not match skeleton".into()));
    }
    let height = T::lit(cfg.foot_height_threshold);
    let (mut sum, mut n) = (T::zero(), 0usize);
    for foot in [skeleton.left_foot(), skeleton.right_foot()] {
        for t in 0..pred.frames() {
            if gt.positions().get(t, foot).z < height {
                sum += pred.velocities().get(t, foot).norm_squared();
                n += 3;
            }
        }
    }
    Ok(if n == 0 { T::zero() } else { sum / count(n) })
}

/// Mean squared per-bone length difference.
pub fn bone_length_loss<T: Real>(pred_p: &Trajectory<T>, gt_p: &Trajectory<T>, skeleton: &Skeleton<T>) -> Result<T> {
    pred_p.same_shape(gt_p, "bone length loss")?;
    let a = bone_lengths(skeleton, pred_p)?;
    let b = bone_lengths(skeleton, gt_p)?;
    Ok((a - b).norm_squared() / count(pred_p.frames() * skeleton.bone_count()))
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::two_pi();
    x - two_pi * ((x - T::pi()) / two_pi).ceil()
}

/// Heading of a root frame on the z-up ground plane: the planar angle of
/// its lateral (x) axis. Only differences between headings are used.
pub fn facing_angle<T: Real>(root: &nalgebra::Matrix3<T>) -> T {
    root[(1, 0)].atan2(root[(0, 0)])
}

fn relative_headings<T: Real>(clip: &InteractionClip<T>, root: usize) -> Result<Vec<T>> {
    let [a, b] = clip.persons() else {
        return Err(Error::ShapeMismatch(format!(
            "relative orientation needs exactly 2 persons, got {}",
            clip.persons().len()
        )));
    };
    (0..clip.frames())
        .map(|t| {
            let ha = facing_angle(&a.rotations(t)[root].to_matrix()?);
            let hb = facing_angle(&b.rotations(t)[root].to_matrix()?);
            Ok(wrap_angle(ha - hb))
        })
        .collect()
}

/// Mean squared wrapped difference between predicted and true relative
/// headings of two persons, radians².
pub fn relative_orientation_loss<T: Real>(
    pred: &InteractionClip<T>,
    gt: &InteractionClip<T>,
    skeleton: &Skeleton<T>,
) -> Result<T> {
    if pred.frames() != gt.frames() {
        return Err(Error::ShapeMismatch(format!(
            "prediction has {} frames, ground truth {}",
            pred.frames(),
            gt.frames()
        )));
    }
    let root = skeleton.root();
    let rp = relative_headings(pred, root)?;
    let rg = relative_headings(gt, root)?;
    let sum = rp.iter().zip(&rg).fold(T::zero(), |acc, (a, b)| {
        let d = wrap_angle(*a - *b);
        acc + d * d
    });
    Ok(sum / count(rp.len()))
}
