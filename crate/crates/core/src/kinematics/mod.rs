//! Skeleton definition, rotation algebra, forward kinematics and the
//! position → rotation fitter.

mod fk;
mod ik;
mod pose;
mod rotation;
mod skeleton;

pub use fk::{bone_lengths, fk_position_jacobian, forward_kinematics, forward_kinematics_frame, FrameKinematics};
pub use ik::{ik_fit, IkConfig, IkFit};
pub use pose::PoseSequence;
pub use rotation::{matrix_to_rot6d, rot6d_column_jacobians, rot6d_to_matrix, rotate_jacobian, Rotation6D};
pub use skeleton::{Skeleton, BODY_JOINTS, SMPL22_JSON};
