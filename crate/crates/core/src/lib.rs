//! Motion representation, kinematics, training losses and physical
//! plausibility metrics for single- and multi-person human motion.
//!
//! Every numeric type is generic over a [`Real`] scalar (`f32` or `f64`);
//! the `*64` / `*32` aliases below name the common instantiations.

pub mod bodymodel;
pub mod error;
pub mod gradcheck;
pub mod kinematics;
pub mod losses;
pub mod metrics;
pub mod representation;
pub mod scalar;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Real;
pub use trajectory::Trajectory;

pub type Skeleton64 = kinematics::Skeleton<f64>;
pub type Skeleton32 = kinematics::Skeleton<f32>;
pub type Rotation6D64 = kinematics::Rotation6D<f64>;
pub type Rotation6D32 = kinematics::Rotation6D<f32>;
pub type PoseSequence64 = kinematics::PoseSequence<f64>;
pub type PoseSequence32 = kinematics::PoseSequence<f32>;
pub type Trajectory64 = trajectory::Trajectory<f64>;
pub type Trajectory32 = trajectory::Trajectory<f32>;
pub type MotionRep64 = representation::MotionRep<f64>;
pub type MotionRep32 = representation::MotionRep<f32>;
pub type InteractionClip64 = representation::InteractionClip<f64>;
pub type InteractionClip32 = representation::InteractionClip<f32>;
pub type BodyModel64 = bodymodel::BodyModel<f64>;
pub type BodyModel32 = bodymodel::BodyModel<f32>;
