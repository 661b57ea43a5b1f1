use crate::error::{Error, Result};
use crate::kinematics::Skeleton;
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Scale applied to the mean frame score.
pub const PFC_SCALE: f64 = 100.0;

/// Physical foot contact score.
///
/// For each interior frame: horizontal left-foot speed × horizontal
/// right-foot speed (m/s, central differences) × root acceleration magnitude
/// (m/s², second differences). The mean over frames is scaled by
/// [`PFC_SCALE`]. Values are only comparable between runs of this tool.
pub fn pfc<T: Real>(positions: &Trajectory<T>, skeleton: &Skeleton<T>, fps: T) -> Result<T> {
    let frames = positions.frames();
    if frames < 3 {
        return Err(Error::TooShort { needed: 3, found: frames });
    }
    if positions.points() != skeleton.joint_count() {
        return Err(Error::ShapeMismatch(format!(
            "positions have {} joints, skeleton has {}",
            positions.points(),
            skeleton.joint_count()
        )));
    }
    let half_fps = fps / T::lit(2.0);
    let horizontal_speed = |j: usize, t: usize| {
        let d = positions.get(t + 1, j) - positions.get(t - 1, j);
        (d.x * d.x + d.y * d.y).sqrt() * half_fps
    };
    let root = skeleton.root();
    let mut total = T::zero();
    for t in 1..frames - 1 {
        let accel = (positions.get(t + 1, root) - positions.get(t, root) * T::lit(2.0) + positions.get(t - 1, root))
            .norm()
            * fps
            * fps;
        total += horizontal_speed(skeleton.left_foot(), t) * horizontal_speed(skeleton.right_foot(), t) * accel;
    }
    Ok(total / T::lit((frames - 2) as f64) * T::lit(PFC_SCALE))
}
